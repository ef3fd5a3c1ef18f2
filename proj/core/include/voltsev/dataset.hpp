#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace voltsev {

/// Rectangular numeric table keyed by event_id. Cells are value-or-missing;
/// missing round-trips as an empty CSV field.
struct DataTable {
  std::vector<std::string> columns;    ///< value columns, event_id excluded
  std::vector<std::string> event_ids;  ///< one per row
  std::vector<std::vector<std::optional<double>>> cells;  ///< [row][col]

  std::size_t n_rows() const { return event_ids.size(); }
  std::size_t n_cols() const { return columns.size(); }
  std::optional<std::size_t> column_index(std::string_view name) const;
  const std::optional<double>& cell(std::size_t row, std::size_t col) const {
    return cells[row][col];
  }

  void add_column(std::string name);  ///< appends a column of missing cells
  std::size_t add_row(std::string event_id);  ///< appends a row of missing cells
};

/// Reads a table CSV whose first header field is `event_id`. Empty fields are
/// missing; anything else must be a finite number. Throws validation_error
/// (bad header, bad value, duplicate event_id — message carries the line
/// number) or io_error (for the file overload).
DataTable read_table_csv(std::istream& in);
DataTable read_table_csv_file(const std::string& path);

void write_table_csv(std::ostream& out, const DataTable& table);
void write_table_csv_file(const std::string& path, const DataTable& table);

/// Inner join on event_id: rows of `left` whose id also appears in `right`,
/// with right's columns appended. Column name collisions and duplicate ids in
/// `right` are validation errors. Row order follows `left`.
DataTable inner_join(const DataTable& left, const DataTable& right);

}  // namespace voltsev
