#include "snipcorr/csv.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "snipcorr/error.hpp"

namespace snipcorr::csv {

const std::vector<double>& Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return columns[i];
    throw IoError("missing column '" + name + "'");
}

std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw IoError("cannot format value");
    return std::string(buf, end);
}

double parse_double(std::string_view text) {
    double v = 0.0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || end != text.data() + text.size())
        throw IoError("malformed number '" + std::string(text) + "'");
    return v;
}

void write_atomic(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cannot write " + path);
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw IoError("failed writing " + path);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot finalize " + path + ": " + ec.message());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string serialize(const Table& table) {
    if (table.header.size() != table.columns.size()) throw IoError("csv header/column count mismatch");
    const std::size_t n = table.rows();
    for (const auto& c : table.columns)
        if (c.size() != n) throw IoError("csv columns differ in length");
    std::string out;
    out.reserve((n + 1) * table.columns.size() * 20);
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out += ',';
        out += table.header[i];
    }
    out += '\n';
    char buf[32];
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            if (c) out += ',';
            auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), table.columns[c][r]);
            out.append(buf, end);
        }
        out += '\n';
    }
    return out;
}

void write(const std::string& path, const Table& table) {
    write_atomic(path, serialize(table));
}

Table read(const std::string& path) {
    return parse(read_file(path), path);
}

Table parse(std::string_view text, const std::string& path) {
    Table t;
    std::size_t pos = 0;
    auto next_line = [&](std::string_view& line) {
        if (pos >= text.size()) return false;
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos = nl + 1;
        return true;
    };
    std::string_view line;
    if (!next_line(line)) throw IoError("empty csv file " + path);
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        t.header.emplace_back(line.substr(start, comma == std::string_view::npos ? line.size() - start : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    t.columns.resize(t.header.size());
    std::size_t row = 0;
    while (next_line(line)) {
        if (line.empty()) continue;
        ++row;
        std::size_t col = 0;
        start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            const auto field = line.substr(start, comma == std::string_view::npos ? line.size() - start : comma - start);
            if (col >= t.columns.size()) throw IoError(path + ": too many fields on row " + std::to_string(row));
            t.columns[col++].push_back(parse_double(field));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (col != t.columns.size()) throw IoError(path + ": too few fields on row " + std::to_string(row));
    }
    return t;
}

}  // namespace snipcorr::csv
