#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"
#include "table.hpp"

namespace dispersim::cli {

/// A measured quantity with an optional pass threshold; `flagged` when the
/// value lies above the threshold (or is not finite).
struct Diagnostic {
    std::string name;
    double value = 0.0;
    std::optional<double> threshold;
    bool flagged = false;
};

Diagnostic upper_bound(std::string name, double value, double threshold);
Diagnostic info(std::string name, double value);

struct Outcome {
    Table table;
    std::vector<Diagnostic> diagnostics;
    /// Free-form results that belong in the manifest (fitted slope, energies ...).
    std::vector<std::pair<std::string, std::string>> summary;
};

struct RunContext {
    const Config* config = nullptr;
    /// 0 means: take `threads` from the section, or all cores.
    std::size_t threads_override = 0;
};

/// Subcommands in the order `--help` lists them.
const std::vector<std::string>& experiment_names();
bool is_experiment(const std::string& name);

/// Parses [name] from the config, rejects unknown keys and runs the
/// experiment. Library exceptions propagate unchanged.
Outcome run_experiment(const std::string& name, const RunContext& context);

}  // namespace dispersim::cli
