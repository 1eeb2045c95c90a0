#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>

namespace dispersim::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitResource = 3,
    kExitAccuracy = 4,
    kExitNumerical = 5,
};

struct RunRequest {
    std::string subcommand;
    std::filesystem::path config_path;
    std::filesystem::path out_dir = ".";
    std::size_t threads = 0;  ///< 0: use the config, then all cores
};

/// Runs one experiment and writes `<out>/<subcommand>.csv` plus
/// `<out>/<subcommand>.manifest`. On failure no CSV is written; the manifest
/// carries an [error] section and a one-line record goes to `err`.
int run(const RunRequest& request, std::ostream& err);

/// Writes `<out>/<csv stem>.gp`, a gnuplot script for the CSV. Returns the
/// path of the script. Throws std::invalid_argument for an unreadable, empty or
/// unknown-schema CSV; nothing is written in that case.
std::filesystem::path emit_plot_script(const std::filesystem::path& csv_path, const std::filesystem::path& out_dir);

/// Script text for a CSV (the file name is what the script refers to).
std::string plot_script(const std::filesystem::path& csv_path);

}  // namespace dispersim::cli
