#include "table.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dispersim::cli {

namespace {

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string format_cell(const Cell& cell) {
    if (const auto* d = std::get_if<double>(&cell)) return format_real(*d);
    if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
    return quote(std::get<std::string>(cell));
}

std::vector<std::string> split_row(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    if (quoted) throw std::invalid_argument("csv line " + std::to_string(line_no) + ": unterminated quote");
    fields.push_back(std::move(field));
    return fields;
}

}  // namespace

std::string format_real(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (value == 0.0) return "0";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void Table::add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::logic_error("row width does not match the header");
    rows.push_back(std::move(row));
}

void write_csv(std::ostream& out, const Table& table) {
    out << "# " << kCsvMagic << ' ' << kCsvVersion << " schema=" << table.schema
        << " experiment=" << table.experiment;
    for (const auto& [k, v] : table.meta) out << ' ' << k << '=' << v;
    out << '\n';
    for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_cell(row[i]);
        out << '\n';
    }
}

std::size_t CsvFile::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == name) return i;
    }
    throw std::invalid_argument("csv has no column '" + name + "'");
}

std::vector<double> CsvFile::numeric_column(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        const std::string& s = row[c];
        double v = 0.0;
        if (s == "inf") {
            v = INFINITY;
        } else if (s == "-inf") {
            v = -INFINITY;
        } else {
            auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc{} || ptr != s.data() + s.size()) {
                throw std::invalid_argument("column '" + name + "' holds a non-numeric value '" + s + "'");
            }
        }
        out.push_back(v);
    }
    return out;
}

CsvFile read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path.string());

    CsvFile file;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw std::invalid_argument(path.string() + " is empty");
    ++line_no;
    {
        std::istringstream head(line);
        std::string hash, magic, version, kv;
        head >> hash >> magic >> version;
        if (hash != "#" || magic != kCsvMagic) {
            throw std::invalid_argument(path.string() + ": missing '# dispersim-csv' schema line");
        }
        if (version != kCsvVersion) throw std::invalid_argument(path.string() + ": unsupported version " + version);
        while (head >> kv) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) continue;
            file.meta[kv.substr(0, eq)] = kv.substr(eq + 1);
        }
        file.schema = file.meta["schema"];
        file.experiment = file.meta["experiment"];
        if (file.schema.empty()) throw std::invalid_argument(path.string() + ": schema line names no schema");
    }

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_row(line, line_no);
        if (file.columns.empty()) {
            file.columns = std::move(fields);
            continue;
        }
        if (fields.size() != file.columns.size()) {
            throw std::invalid_argument("csv line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(file.columns.size()) + " fields");
        }
        file.rows.push_back(std::move(fields));
    }
    if (file.columns.empty()) throw std::invalid_argument(path.string() + ": no header row");
    return file;
}

}  // namespace dispersim::cli
