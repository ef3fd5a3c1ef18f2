#include "voltsev/dataset.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "voltsev/csv.hpp"
#include "voltsev/errors.hpp"

namespace voltsev {

std::optional<std::size_t> DataTable::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  return std::nullopt;
}

void DataTable::add_column(std::string name) {
  columns.push_back(std::move(name));
  for (auto& row : cells) row.emplace_back();
}

std::size_t DataTable::add_row(std::string event_id) {
  event_ids.push_back(std::move(event_id));
  cells.emplace_back(columns.size());
  return event_ids.size() - 1;
}

DataTable read_table_csv(std::istream& in) {
  DataTable table;
  std::string line;
  if (!std::getline(in, line)) throw validation_error("table CSV: empty input, header required");
  std::vector<std::string> header = csv::split_line(line);
  for (auto& h : header) h = std::string(csv::trim(h));
  if (header.empty() || header[0] != "event_id") {
    throw validation_error("table CSV: first header column must be 'event_id'");
  }
  std::unordered_set<std::string> seen_cols;
  for (std::size_t i = 1; i < header.size(); ++i) {
    if (header[i].empty()) throw validation_error("table CSV: empty column name in header");
    if (!seen_cols.insert(header[i]).second) {
      throw validation_error("table CSV: duplicate column '" + header[i] + "'");
    }
    table.columns.push_back(header[i]);
  }

  std::unordered_set<std::string> seen_ids;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    std::vector<std::string> fields = csv::split_line(line);
    if (fields.size() != header.size()) {
      throw validation_error("table CSV line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
    }
    std::string id(csv::trim(fields[0]));
    if (id.empty()) {
      throw validation_error("table CSV line " + std::to_string(line_no) + ": empty event_id");
    }
    if (!seen_ids.insert(id).second) {
      throw validation_error("table CSV line " + std::to_string(line_no) +
                             ": duplicate event_id '" + id + "'");
    }
    std::vector<std::optional<double>> row;
    row.reserve(table.columns.size());
    for (std::size_t i = 1; i < fields.size(); ++i) {
      std::string_view field = csv::trim(fields[i]);
      if (field.empty()) {
        row.emplace_back();
        continue;
      }
      std::optional<double> v = csv::parse_double(field);
      if (!v || !std::isfinite(*v)) {
        throw validation_error("table CSV line " + std::to_string(line_no) + ", column '" +
                               table.columns[i - 1] + "': not a finite number: '" +
                               std::string(field) + "'");
      }
      row.emplace_back(*v);
    }
    table.event_ids.push_back(std::move(id));
    table.cells.push_back(std::move(row));
  }
  return table;
}

DataTable read_table_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open table file: " + path);
  return read_table_csv(in);
}

void write_table_csv(std::ostream& out, const DataTable& table) {
  std::vector<std::string> header;
  header.reserve(table.columns.size() + 1);
  header.emplace_back("event_id");
  for (const std::string& c : table.columns) header.push_back(c);
  csv::write_row(out, header);
  std::vector<std::string> fields(header.size());
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    fields[0] = table.event_ids[r];
    for (std::size_t c = 0; c < table.n_cols(); ++c) {
      fields[c + 1] = table.cells[r][c] ? csv::format_double(*table.cells[r][c]) : std::string();
    }
    csv::write_row(out, fields);
  }
}

void write_table_csv_file(const std::string& path, const DataTable& table) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write table file: " + path);
  write_table_csv(out, table);
}

DataTable inner_join(const DataTable& left, const DataTable& right) {
  for (const std::string& c : right.columns) {
    if (left.column_index(c)) {
      throw validation_error("join: column '" + c + "' present in both tables");
    }
  }
  std::unordered_map<std::string, std::size_t> right_rows;
  for (std::size_t r = 0; r < right.n_rows(); ++r) {
    if (!right_rows.emplace(right.event_ids[r], r).second) {
      throw validation_error("join: duplicate event_id '" + right.event_ids[r] +
                             "' in right table");
    }
  }
  DataTable out;
  out.columns = left.columns;
  out.columns.insert(out.columns.end(), right.columns.begin(), right.columns.end());
  for (std::size_t r = 0; r < left.n_rows(); ++r) {
    auto it = right_rows.find(left.event_ids[r]);
    if (it == right_rows.end()) continue;
    out.event_ids.push_back(left.event_ids[r]);
    std::vector<std::optional<double>> row = left.cells[r];
    const auto& rrow = right.cells[it->second];
    row.insert(row.end(), rrow.begin(), rrow.end());
    out.cells.push_back(std::move(row));
  }
  return out;
}

}  // namespace voltsev
