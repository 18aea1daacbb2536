#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace cbd {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::optional<std::size_t> column(std::string_view name) const;
};

// RFC-4180 style: quoted fields may contain commas, doubled quotes, and
// embedded line breaks; CRLF and LF both terminate records.
CsvTable parse_csv(std::string_view content);
CsvTable read_csv(const std::string& path);

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

} // namespace cbd
