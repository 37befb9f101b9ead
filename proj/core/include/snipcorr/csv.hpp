#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace snipcorr::csv {

// Numeric table with a header row. Values are written in shortest
// round-trip form, so a write/read cycle reproduces every double exactly.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
    const std::vector<double>& column(const std::string& name) const;
};

void write(const std::string& path, const Table& table);
Table read(const std::string& path);

std::string serialize(const Table& table);
// `source` only labels error messages.
Table parse(std::string_view text, const std::string& source = "<memory>");

std::string format_double(double v);
double parse_double(std::string_view text);

// Writes to path + ".tmp" and renames, so readers never see partial files.
void write_atomic(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace snipcorr::csv
