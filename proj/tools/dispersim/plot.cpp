#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "runner.hpp"
#include "table.hpp"

namespace dispersim::cli {

namespace {

void preamble(std::ostringstream& s, const std::string& name) {
    s << "# gnuplot script for " << name << " (dispersim plot)\n";
    s << "set datafile separator \",\"\n";
    s << "set datafile commentschars \"#\"\n";
    s << "set grid\n";
    s << "set key top right\n";
}

std::string decay_script(const CsvFile& csv, const std::string& name) {
    std::ostringstream s;
    preamble(s, name);
    s << "set logscale xy\n";
    s << "set xlabel \"t\"\n";
    s << "set ylabel \"norm\"\n";
    s << "set title \"" << csv.experiment << ": decay of norm\"\n";
    const auto ts = csv.numeric_column("t");
    const auto ns = csv.numeric_column("norm");

    std::string guide;
    if (auto it = csv.meta.find("theoretical_slope"); it != csv.meta.end()) {
        // Anchor the guide line at the first sample with t > 0.
        for (std::size_t i = 0; i < ts.size(); ++i) {
            if (ts[i] > 0.0 && ns[i] > 0.0) {
                const double slope = std::stod(it->second);
                s << "slope = " << it->second << '\n';
                s << "anchor = " << format_real(ns[i] / std::pow(ts[i], slope)) << '\n';
                s << "guide(x) = anchor * x**slope\n";
                guide = ", guide(x) with lines dashtype 2 title sprintf(\"t^{%g}\", slope)";
                break;
            }
        }
    }
    s << "plot \"" << name << "\" using \"t\":\"norm\" with linespoints title \"norm\"" << guide << '\n';
    return s.str();
}

std::string kernel_script(const std::string& name) {
    std::ostringstream s;
    preamble(s, name);
    s << "set xlabel \"j\"\n";
    s << "set ylabel \"|K_t(j)|\"\n";
    s << "plot \"" << name << "\" using \"j\":\"modulus\" with points pointtype 7 pointsize 0.5 title \"|K_t(j)|\"\n";
    return s.str();
}

std::string torus_script(const std::string& name) {
    std::ostringstream s;
    preamble(s, name);
    s << "set logscale x\n";
    s << "set xlabel \"t\"\n";
    s << "set ylabel \"|t|^{1/2} sup|u| / L1\"\n";
    s << "plot \"" << name << "\" using \"t\":\"scaled\" with linespoints title \"scaled sup norm\"\n";
    return s.str();
}

std::string oscint_script(const std::string& name) {
    std::ostringstream s;
    preamble(s, name);
    s << "set logscale x\n";
    s << "set xlabel \"t\"\n";
    s << "set ylabel \"|I| (1+t)^{1/3}\"\n";
    s << "plot \"" << name << "\" using \"t\":\"scaled\" with points pointtype 7 pointsize 0.5 title \"scaled modulus\"\n";
    return s.str();
}

}  // namespace

std::string plot_script(const std::filesystem::path& csv_path) {
    const CsvFile csv = read_csv(csv_path);
    if (csv.rows.empty()) throw std::invalid_argument(csv_path.string() + " has no data rows");
    const std::string name = csv_path.filename().string();
    if (csv.schema == "decay") return decay_script(csv, name);
    if (csv.schema == "kernel") return kernel_script(name);
    if (csv.schema == "torus") return torus_script(name);
    if (csv.schema == "oscint") return oscint_script(name);
    throw std::invalid_argument("no plot mapping for schema '" + csv.schema + "'");
}

std::filesystem::path emit_plot_script(const std::filesystem::path& csv_path, const std::filesystem::path& out_dir) {
    const std::string script = plot_script(csv_path);
    std::filesystem::create_directories(out_dir);
    const auto target = out_dir / (csv_path.stem().string() + ".gp");
    std::ofstream out(target, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + target.string());
    out << script;
    return target;
}

}  // namespace dispersim::cli
