#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace dispersim::cli {

inline constexpr const char* kCsvMagic = "dispersim-csv";
inline constexpr const char* kCsvVersion = "v1";

using Cell = std::variant<double, std::int64_t, std::string>;

/// %.17g, with inf/-inf/nan spelled out.
std::string format_real(double value);

/// Result table of one experiment. `schema` names the column layout (decay,
/// kernel, torus, ...), `experiment` the subcommand that produced it.
struct Table {
    std::string schema;
    std::string experiment;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    /// Extra `key=value` pairs for the comment line, e.g. theoretical_slope.
    std::vector<std::pair<std::string, std::string>> meta;

    void add_row(std::vector<Cell> row);
};

/// First line `# dispersim-csv v1 schema=<s> experiment=<e> [k=v ...]`, then the
/// header, then one line per row. Strings are quoted when they contain a comma,
/// quote or line break.
void write_csv(std::ostream& out, const Table& table);

/// A CSV read back from disk: comment metadata plus the numeric columns.
struct CsvFile {
    std::string schema;
    std::string experiment;
    std::map<std::string, std::string> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    /// Index of a column; throws std::invalid_argument when absent.
    std::size_t column(const std::string& name) const;
    std::vector<double> numeric_column(const std::string& name) const;
};

/// Throws std::invalid_argument for a missing schema line, an empty file or a
/// malformed row.
CsvFile read_csv(const std::filesystem::path& path);

}  // namespace dispersim::cli
