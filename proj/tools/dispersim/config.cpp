#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "dispersim/decay.hpp"

namespace dispersim::cli {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::string describe(std::size_t line, const std::string& field, const std::string& message) {
    std::ostringstream os;
    if (line > 0) os << "line " << line << ": ";
    if (!field.empty()) os << field << ": ";
    os << message;
    return os.str();
}

bool valid_name(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_' || c == '-' || c == '.';
    });
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string token;
    for (char c : value) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!token.empty()) out.push_back(token);
            token.clear();
        } else {
            token.push_back(c);
        }
    }
    if (!token.empty()) out.push_back(token);
    return out;
}

}  // namespace

ConfigError::ConfigError(std::size_t line, std::string field, const std::string& message)
    : std::invalid_argument(describe(line, field, message)), line_(line), field_(std::move(field)) {}

const ConfigEntry* ConfigSection::find(const std::string& key) const {
    for (const auto& e : entries) {
        if (e.key == key) return &e;
    }
    return nullptr;
}

Config Config::parse(std::istream& in) {
    Config config;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(line_no, "", "unterminated section header");
            std::string name = trim(line.substr(1, line.size() - 2));
            if (!valid_name(name)) throw ConfigError(line_no, name, "invalid section name");
            if (config.find(name) != nullptr) throw ConfigError(line_no, name, "duplicate section");
            config.sections_.push_back(ConfigSection{name, line_no, {}});
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(line_no, "", "expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (!valid_name(key)) throw ConfigError(line_no, key, "invalid key");
        if (value.empty()) throw ConfigError(line_no, key, "empty value");
        if (config.sections_.empty()) throw ConfigError(line_no, key, "key outside of any [section]");
        auto& section = config.sections_.back();
        if (section.find(key) != nullptr) throw ConfigError(line_no, key, "duplicate key");
        section.entries.push_back(ConfigEntry{std::move(key), std::move(value), line_no});
    }
    return config;
}

Config Config::parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, path.string(), "cannot open config file");
    Config config = parse(in);
    config.base_dir_ = path.parent_path();
    return config;
}

const ConfigSection* Config::find(const std::string& name) const {
    for (const auto& s : sections_) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

const ConfigSection& Config::section(const std::string& name) const {
    if (const auto* s = find(name)) return *s;
    throw ConfigError(0, name, "missing section [" + name + "]");
}

void write_section(std::ostream& out, const ConfigSection& section) {
    out << '[' << section.name << "]\n";
    for (const auto& e : section.entries) out << e.key << " = " << e.value << '\n';
}

ParamReader::ParamReader(const ConfigSection& section) : section_(section) {}

bool ParamReader::has(const std::string& key) const {
    used_.insert(key);
    return section_.find(key) != nullptr;
}

void ParamReader::fail(const std::string& key, const std::string& message) const {
    const auto* e = section_.find(key);
    throw ConfigError(e ? e->line : section_.line, key, message);
}

const ConfigEntry& ParamReader::require(const std::string& key) const {
    used_.insert(key);
    const auto* e = section_.find(key);
    if (e == nullptr) throw ConfigError(section_.line, key, "required key missing in [" + section_.name + "]");
    return *e;
}

double ParamReader::parse_real(const ConfigEntry& entry, const std::string& token) const {
    if (token == "inf" || token == "+inf") return std::numeric_limits<double>::infinity();
    if (token == "-inf") return -std::numeric_limits<double>::infinity();
    double value = 0.0;
    const char* first = token.data();
    const char* last = first + token.size();
    if (!token.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || std::isnan(value)) {
        throw ConfigError(entry.line, entry.key, "not a number: '" + token + "'");
    }
    return value;
}

double ParamReader::real(const std::string& key) const {
    const auto& e = require(key);
    return parse_real(e, e.value);
}

double ParamReader::real(const std::string& key, double fallback) const {
    return has(key) ? real(key) : fallback;
}

double ParamReader::positive(const std::string& key) const {
    const double v = real(key);
    if (!(v > 0.0) || !std::isfinite(v)) fail(key, "must be a positive finite number");
    return v;
}

double ParamReader::positive(const std::string& key, double fallback) const {
    return has(key) ? positive(key) : fallback;
}

std::int64_t ParamReader::integer(const std::string& key) const {
    const auto& e = require(key);
    std::int64_t value = 0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) throw ConfigError(e.line, key, "not an integer: '" + e.value + "'");
    return value;
}

std::int64_t ParamReader::integer(const std::string& key, std::int64_t fallback) const {
    return has(key) ? integer(key) : fallback;
}

std::size_t ParamReader::count(const std::string& key, std::size_t fallback) const {
    if (!has(key)) return fallback;
    const auto v = integer(key);
    if (v < 0) fail(key, "must be nonnegative");
    return static_cast<std::size_t>(v);
}

bool ParamReader::flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = require(key).value;
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    fail(key, "expected true or false, got '" + v + "'");
}

std::string ParamReader::text(const std::string& key, const std::string& fallback) const {
    return has(key) ? require(key).value : fallback;
}

std::string ParamReader::choice(const std::string& key, const std::vector<std::string>& options,
                                const std::string& fallback) const {
    const std::string v = text(key, fallback);
    if (std::find(options.begin(), options.end(), v) == options.end()) {
        std::string list;
        for (const auto& o : options) list += (list.empty() ? "" : "|") + o;
        fail(key, "expected one of " + list + ", got '" + v + "'");
    }
    return v;
}

std::vector<double> ParamReader::reals(const std::string& key) const {
    const auto& e = require(key);
    std::vector<double> out;
    for (const auto& token : split_list(e.value)) out.push_back(parse_real(e, token));
    if (out.empty()) fail(key, "empty list");
    return out;
}

std::vector<double> ParamReader::reals(const std::string& key, std::vector<double> fallback) const {
    return has(key) ? reals(key) : fallback;
}

TimeGrid ParamReader::time_grid() const {
    TimeGrid grid;
    if (has("times")) {
        for (const char* k : {"t_min", "t_max", "count", "spacing"}) {
            if (has(k)) fail(k, "cannot be combined with 'times'");
        }
        grid.times = reals("times");
        grid.description = "explicit";
    } else {
        const double t_min = real("t_min");
        const double t_max = real("t_max");
        const std::size_t n = count("count", 0);
        const std::string spacing = choice("spacing", {"linear", "log"}, "linear");
        if (!std::isfinite(t_min) || !std::isfinite(t_max)) fail("t_min", "time bounds must be finite");
        if (n == 0) fail("count", "must be at least 1");
        if (n > 1 && !(t_max > t_min)) fail("t_max", "must exceed t_min");
        if (n == 1 && t_max != t_min) fail("count", "a single time needs t_min == t_max");
        if (spacing == "log" && !(t_min > 0.0)) fail("t_min", "log spacing needs t_min > 0");
        if (n == 1) {
            grid.times = {t_min};
        } else {
            grid.times = spacing == "log" ? log_grid(t_min, t_max, n) : linear_grid(t_min, t_max, n);
        }
        grid.description = spacing;
    }
    for (std::size_t i = 0; i < grid.times.size(); ++i) {
        if (!std::isfinite(grid.times[i])) fail(has("times") ? "times" : "t_min", "times must be finite");
        if (i > 0 && !(grid.times[i] > grid.times[i - 1])) {
            fail(has("times") ? "times" : "t_max", "times must be strictly increasing");
        }
    }
    return grid;
}

void ParamReader::reject_unknown() const {
    for (const auto& e : section_.entries) {
        if (!used_.contains(e.key)) {
            throw ConfigError(e.line, e.key, "unknown key for [" + section_.name + "]");
        }
    }
}

}  // namespace dispersim::cli
