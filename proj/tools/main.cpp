#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "dispersim/experiments.hpp"
#include "dispersim/runner.hpp"

namespace cli = dispersim::cli;

int main(int argc, char** argv) {
    CLI::App app{"dispersim: dispersive-estimate experiments on lattices and metric graphs"};
    app.require_subcommand(1);

    cli::RunRequest request;
    std::string config_path;
    std::string out_dir = ".";
    std::size_t threads = 0;

    for (const auto& name : cli::experiment_names()) {
        auto* sub = app.add_subcommand(name, "run the '" + name + "' experiment");
        sub->add_option("--config", config_path, "key-value config file")->required();
        sub->add_option("--out", out_dir, "output directory for the CSV and manifest");
        sub->add_option("--threads", threads, "worker threads (default: config, then all cores)");
        sub->callback([&, name] { request.subcommand = name; });
    }

    std::string csv_path;
    std::string plot_out;
    auto* plot = app.add_subcommand("plot", "write a gnuplot script for a dispersim CSV");
    plot->add_option("csv", csv_path, "CSV written by a previous run")->required();
    plot->add_option("--out", plot_out, "directory for the script (default: next to the CSV)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kExitConfig;
    }

    if (plot->parsed()) {
        try {
            const std::filesystem::path csv(csv_path);
            const auto dir = plot_out.empty() ? csv.parent_path() : std::filesystem::path(plot_out);
            std::cout << cli::emit_plot_script(csv, dir.empty() ? "." : dir).string() << '\n';
            return cli::kExitOk;
        } catch (const std::exception& e) {
            std::cerr << "dispersim: error kind=config exit=" << cli::kExitConfig << ": " << e.what() << '\n';
            return cli::kExitConfig;
        }
    }

    request.config_path = config_path;
    request.out_dir = out_dir;
    request.threads = threads;
    return cli::run(request, std::cerr);
}
