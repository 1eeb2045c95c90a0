#include "runner.hpp"

#include <chrono>
#include <fstream>
#include <ostream>
#include <sstream>
#include <system_error>

#include "config.hpp"
#include "dispersim/errors.hpp"
#include "experiments.hpp"
#include "table.hpp"

#ifndef DISPERSIM_VERSION
#define DISPERSIM_VERSION "unknown"
#endif

namespace dispersim::cli {

namespace {

struct Failure {
    int code = kExitOk;
    std::string kind;
    std::string message;
    std::size_t line = 0;
    std::string field;
    double achieved_error = -1.0;

    Failure() = default;
    Failure(int c, std::string k, std::string m, std::size_t l = 0, std::string f = {})
        : code(c), kind(std::move(k)), message(std::move(m)), line(l), field(std::move(f)) {}
};

std::string one_line(std::string s) {
    for (char& c : s) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    return s.empty() ? "(none)" : s;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for " + path.string());
}

std::string manifest_text(const RunRequest& req, const ConfigSection* echo, const Outcome* outcome,
                          const Failure* failure, double seconds) {
    std::ostringstream m;
    m << "# dispersim run manifest\n";
    m << "[manifest]\n";
    m << "tool = dispersim\n";
    m << "version = " << DISPERSIM_VERSION << '\n';
    m << "subcommand = " << req.subcommand << '\n';
    m << "config = " << one_line(req.config_path.string()) << '\n';
    m << "status = " << (failure ? "error" : "ok") << '\n';
    if (!failure) m << "csv = " << req.subcommand << ".csv\n";
    m << "wall_seconds = " << format_real(seconds) << '\n';

    if (echo != nullptr) {
        m << '\n';
        write_section(m, *echo);
    }

    if (outcome != nullptr) {
        if (!outcome->summary.empty()) {
            m << "\n[summary]\n";
            for (const auto& [k, v] : outcome->summary) m << k << " = " << one_line(v) << '\n';
        }
        m << "\n[diagnostics]\n";
        std::size_t flagged = 0;
        for (const auto& d : outcome->diagnostics) {
            m << d.name << " = " << format_real(d.value) << '\n';
            if (d.threshold) {
                m << d.name << ".threshold = " << format_real(*d.threshold) << '\n';
                m << d.name << ".flagged = " << (d.flagged ? "true" : "false") << '\n';
            }
            flagged += d.flagged ? 1 : 0;
        }
        m << "flagged = " << flagged << '\n';
    }

    if (failure != nullptr) {
        m << "\n[error]\n";
        m << "kind = " << failure->kind << '\n';
        m << "exit_code = " << failure->code << '\n';
        if (failure->line > 0) m << "line = " << failure->line << '\n';
        if (!failure->field.empty()) m << "field = " << one_line(failure->field) << '\n';
        if (failure->achieved_error >= 0.0) m << "achieved_error = " << format_real(failure->achieved_error) << '\n';
        m << "message = " << one_line(failure->message) << '\n';
    }
    return m.str();
}

}  // namespace

int run(const RunRequest& req, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    const auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    std::error_code ec;
    std::filesystem::create_directories(req.out_dir, ec);
    if (ec) {
        err << "dispersim: error kind=io exit=" << kExitConfig << ": cannot create " << req.out_dir << ": "
            << ec.message() << '\n';
        return kExitConfig;
    }

    Failure failure;
    std::optional<Config> config;
    std::optional<Outcome> outcome;
    try {
        if (!is_experiment(req.subcommand)) throw ConfigError(0, req.subcommand, "unknown subcommand");
        config = Config::load(req.config_path);
        outcome = run_experiment(req.subcommand, RunContext{&*config, req.threads});
    } catch (const ConfigError& e) {
        failure = Failure(kExitConfig, "config", e.what(), e.line(), e.field());
    } catch (const std::invalid_argument& e) {
        failure = Failure(kExitConfig, "config", e.what());
    } catch (const ResourceLimitError& e) {
        failure = Failure(kExitResource, "resource", e.what());
    } catch (const TruncationError& e) {
        failure = Failure(kExitResource, "truncation", e.what());
    } catch (const AccuracyError& e) {
        failure = Failure(kExitAccuracy, "accuracy", e.what());
        failure.achieved_error = e.achieved_error();
    } catch (const NumericalError& e) {
        failure = Failure(kExitNumerical, "numerical", e.what());
    } catch (const std::bad_alloc&) {
        failure = Failure(kExitResource, "resource", "out of memory");
    } catch (const std::exception& e) {
        failure = Failure(kExitNumerical, "internal", e.what());
    }

    const ConfigSection* echo = config ? config->find(req.subcommand) : nullptr;
    const auto csv_path = req.out_dir / (req.subcommand + ".csv");
    const auto manifest_path = req.out_dir / (req.subcommand + ".manifest");

    if (failure.code != kExitOk) {
        std::filesystem::remove(csv_path, ec);
        err << "dispersim: error kind=" << failure.kind << " exit=" << failure.code;
        if (failure.line > 0) err << " line=" << failure.line;
        if (!failure.field.empty()) err << " field=" << failure.field;
        err << ": " << one_line(failure.message) << '\n';
        try {
            write_file(manifest_path, manifest_text(req, echo, nullptr, &failure, elapsed()));
        } catch (const std::exception& e) {
            err << "dispersim: " << e.what() << '\n';
        }
        return failure.code;
    }

    try {
        std::ostringstream csv;
        write_csv(csv, outcome->table);
        write_file(csv_path, csv.str());
        write_file(manifest_path, manifest_text(req, echo, &*outcome, nullptr, elapsed()));
    } catch (const std::exception& e) {
        err << "dispersim: error kind=io exit=" << kExitNumerical << ": " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitOk;
}

}  // namespace dispersim::cli
