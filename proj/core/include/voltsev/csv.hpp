#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace voltsev::csv {

// Splits one CSV line on commas. The formats used here are plain numeric
// tables; quoting is not supported and a '"' anywhere is a format error
// handled by the caller via the parse helpers below.
std::vector<std::string> split_line(std::string_view line);

// Shortest decimal representation that round-trips the double exactly.
std::string format_double(double value);

// Strict double parse of a whole field after trimming surrounding whitespace;
// rejects embedded junk and empty input. Accepts "nan"/"inf" spellings so
// that validation can flag them explicitly.
std::optional<double> parse_double(std::string_view field);

std::string_view trim(std::string_view s);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace voltsev::csv
