#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace dispersim::cli {

/// Malformed or invalid configuration. `line` is 0 when the problem is not tied
/// to a particular line (for example a missing section or key).
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::size_t line, std::string field, const std::string& message);

    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

struct ConfigEntry {
    std::string key;
    std::string value;
    std::size_t line = 0;

    bool operator==(const ConfigEntry& other) const { return key == other.key && value == other.value; }
};

struct ConfigSection {
    std::string name;
    std::size_t line = 0;
    std::vector<ConfigEntry> entries;

    const ConfigEntry* find(const std::string& key) const;
};

/// Flat `key = value` text split into `[section]` blocks. Lines starting with
/// '#' or ';' are comments. Keys are unique within a section.
class Config {
public:
    static Config parse(std::istream& in);
    static Config parse_string(const std::string& text);
    static Config load(const std::filesystem::path& path);

    const std::vector<ConfigSection>& sections() const noexcept { return sections_; }
    const ConfigSection* find(const std::string& name) const;
    /// Throws ConfigError when the section is absent.
    const ConfigSection& section(const std::string& name) const;

    /// The directory of the file the config was loaded from (for relative paths).
    const std::filesystem::path& base_dir() const noexcept { return base_dir_; }

private:
    std::vector<ConfigSection> sections_;
    std::filesystem::path base_dir_;
};

/// Writes a section back in the form Config::parse accepts.
void write_section(std::ostream& out, const ConfigSection& section);

struct TimeGrid {
    std::vector<double> times;
    std::string description;
};

/// Typed access to one section. Every lookup marks the key as consumed so that
/// leftover (misspelled) keys can be rejected once a subcommand has read all
/// of its parameters.
class ParamReader {
public:
    explicit ParamReader(const ConfigSection& section);

    bool has(const std::string& key) const;

    double real(const std::string& key) const;
    double real(const std::string& key, double fallback) const;
    double positive(const std::string& key, double fallback) const;
    double positive(const std::string& key) const;
    std::int64_t integer(const std::string& key, std::int64_t fallback) const;
    std::int64_t integer(const std::string& key) const;
    std::size_t count(const std::string& key, std::size_t fallback) const;
    bool flag(const std::string& key, bool fallback) const;
    std::string text(const std::string& key, const std::string& fallback) const;
    std::string choice(const std::string& key, const std::vector<std::string>& options,
                       const std::string& fallback) const;
    /// Comma- or whitespace-separated reals; `inf` and `-inf` are accepted.
    std::vector<double> reals(const std::string& key) const;
    std::vector<double> reals(const std::string& key, std::vector<double> fallback) const;

    /// Either an explicit `times` list, or `t_min`, `t_max`, `count` and
    /// `spacing` (linear | log). Must be nonempty and strictly increasing.
    TimeGrid time_grid() const;

    /// Throws ConfigError naming the first key nobody asked for.
    void reject_unknown() const;

    [[noreturn]] void fail(const std::string& key, const std::string& message) const;

private:
    const ConfigEntry& require(const std::string& key) const;
    double parse_real(const ConfigEntry& entry, const std::string& token) const;

    const ConfigSection& section_;
    mutable std::set<std::string> used_;
};

}  // namespace dispersim::cli
