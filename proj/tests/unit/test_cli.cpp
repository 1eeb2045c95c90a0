#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "dispersim/config.hpp"
#include "dispersim/lattice.hpp"
#include "dispersim/runner.hpp"
#include "dispersim/table.hpp"

using namespace dispersim::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("dispersim-test-cli-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_file(const fs::path& path, const std::string& text) {
    std::ofstream(path) << text;
    return path;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

struct Outcome {
    int code;
    std::string err;
};

Outcome run_text(const std::string& sub, const std::string& text, const fs::path& dir) {
    const auto cfg = write_file(dir / (sub + ".cfg"), text);
    std::ostringstream err;
    const int code = run({sub, cfg, dir, 1}, err);
    return {code, err.str()};
}

}  // namespace

TEST_CASE("config parser errors carry line and field") {
    auto expect = [](const std::string& text, std::size_t line, const std::string& field) {
        try {
            Config::parse_string(text);
            FAIL("expected ConfigError for: " << text);
        } catch (const ConfigError& e) {
            CHECK(e.line() == line);
            CHECK(e.field() == field);
        }
    };
    expect("a = 1\n", 1, "a");
    expect("[s]\nx = 1\nx = 2\n", 3, "x");
    expect("[s]\n\n# note\ny =\n", 4, "y");
    expect("[s]\n[s]\n", 2, "s");
    expect("[s]\njust words\n", 2, "");

    const auto cfg = Config::parse_string("; comment\n[line]\n  t_min = 10  \n\n[kernel]\nj_max=3\n");
    REQUIRE(cfg.sections().size() == 2);
    CHECK(cfg.section("line").find("t_min")->value == "10");
    CHECK(cfg.section("kernel").find("j_max")->line == 6);
    CHECK_THROWS_AS(cfg.section("star"), ConfigError);
}

TEST_CASE("typed parameter access") {
    const auto cfg = Config::parse_string(
        "[x]\nn = 12\nr = -2.5e-3\nlist = 1, 2 3,inf\nflag = true\nbad = 1.5x\nneg = -4\nmode = log\n");
    const ParamReader r(cfg.section("x"));
    CHECK(r.integer("n") == 12);
    CHECK(r.real("r") == -2.5e-3);
    CHECK(r.reals("list") == std::vector<double>{1, 2, 3, dispersim::kInfinity});
    CHECK(r.flag("flag", false));
    CHECK(r.real("missing", 7.0) == 7.0);
    CHECK_THROWS_AS(r.real("bad"), ConfigError);
    CHECK_THROWS_AS(r.positive("neg"), ConfigError);
    CHECK_THROWS_AS(r.count("neg", 1), ConfigError);
    CHECK_THROWS_AS(r.choice("mode", {"linear"}, "linear"), ConfigError);
    CHECK_THROWS_AS(r.integer("absent"), ConfigError);
}

TEST_CASE("time grids from a config section") {
    {
        const auto cfg = Config::parse_string("[g]\nt_min = 1\nt_max = 100\ncount = 3\nspacing = log\n");
        const auto g = ParamReader(cfg.section("g")).time_grid();
        REQUIRE(g.times.size() == 3);
        CHECK(g.times[1] == doctest::Approx(10.0).epsilon(1e-14));
    }
    {
        const auto cfg = Config::parse_string("[g]\ntimes = 0, 0.5, 2\n");
        CHECK(ParamReader(cfg.section("g")).time_grid().times == std::vector<double>{0.0, 0.5, 2.0});
    }
    {
        const auto cfg = Config::parse_string("[g]\ntimes = 1, 1\n");
        CHECK_THROWS_AS(ParamReader(cfg.section("g")).time_grid(), ConfigError);
    }
}

TEST_CASE("unknown keys are rejected") {
    const auto cfg = Config::parse_string("[g]\nt_mni = 1\n");
    const ParamReader r(cfg.section("g"));
    try {
        r.reject_unknown();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "t_mni");
        CHECK(e.line() == 2);
    }
}

TEST_CASE("csv writer and reader round trip") {
    const auto dir = scratch("csv");
    Table t;
    t.schema = "demo";
    t.experiment = "unit";
    t.columns = {"x", "n", "label"};
    t.meta.emplace_back("k", "v");
    t.add_row({0.1, std::int64_t{3}, std::string("plain")});
    t.add_row({-0.0, std::int64_t{-1}, std::string("has,comma \"q\"")});
    CHECK_THROWS_AS(t.add_row({1.0}), std::logic_error);
    {
        std::ofstream out(dir / "t.csv");
        write_csv(out, t);
    }
    const auto f = read_csv(dir / "t.csv");
    CHECK(f.schema == "demo");
    CHECK(f.meta.at("k") == "v");
    CHECK(f.rows.size() == 2);
    CHECK(f.numeric_column("x") == std::vector<double>{0.1, 0.0});
    CHECK(f.rows[1][2] == "has,comma \"q\"");
    CHECK_THROWS_AS(f.numeric_column("label"), std::invalid_argument);
    CHECK(format_real(0.1) == "0.10000000000000001");
    CHECK(format_real(-dispersim::kInfinity) == "-inf");
}

TEST_CASE("kernel run writes the unit mass row and an echoing manifest") {
    const auto dir = scratch("kernel");
    const std::string text = "[kernel]\ntimes = 0\nj_min = 0\nj_max = 0\n";
    const auto r = run_text("kernel", text, dir);
    REQUIRE(r.code == kExitOk);
    const auto csv = slurp(dir / "kernel.csv");
    CHECK(csv.find("t,j,re,im,modulus,error_estimate\n0,0,1,0,1,0\n") != std::string::npos);

    const auto manifest = Config::load(dir / "kernel.manifest");
    CHECK(manifest.section("manifest").find("status")->value == "ok");
    CHECK(manifest.section("kernel").entries == Config::parse_string(text).section("kernel").entries);
}

TEST_CASE("exit codes follow the error class") {
    const auto dir = scratch("exit");
    SUBCASE("config error") {
        const auto r = run_text("line", "[line]\ndatum = delta\ntimes = 1\nbogus = 3\n", dir);
        CHECK(r.code == kExitConfig);
        CHECK(r.err.find("field=bogus") != std::string::npos);
        CHECK(r.err.find("line=4") != std::string::npos);
        CHECK_FALSE(fs::exists(dir / "line.csv"));
        const auto m = Config::load(dir / "line.manifest");
        CHECK(m.section("error").find("exit_code")->value == "2");
    }
    SUBCASE("missing section") {
        CHECK(run_text("torus", "[line]\ntimes = 1\n", dir).code == kExitConfig);
    }
    SUBCASE("resource cap") {
        CHECK(run_text("line", "[line]\ndatum = delta\ntimes = 1000\nmax_ring = 256\n", dir).code == kExitResource);
    }
    SUBCASE("accuracy") {
        const auto r = run_text("kernel", "[kernel]\ntimes = 3e6\nmethod = quadrature\n", dir);
        CHECK(r.code == kExitAccuracy);
        CHECK_FALSE(fs::exists(dir / "kernel.csv"));
        const auto m = Config::load(dir / "kernel.manifest");
        CHECK(m.section("error").find("achieved_error") != nullptr);
    }
    SUBCASE("unreadable config") {
        std::ostringstream err;
        CHECK(run({"line", dir / "nope.cfg", dir, 1}, err) == kExitConfig);
    }
}

TEST_CASE("shipped example configs") {
    const fs::path examples = DISPERSIM_EXAMPLES_DIR;
    const auto dir = scratch("examples");
    std::ostringstream err;
    REQUIRE(run({"coupling-check", examples / "kirchhoff-d3.cfg", dir, 1}, err) == kExitOk);
    const auto f = read_csv(dir / "coupling-check.csv");
    REQUIRE(f.rows.size() == 1);
    CHECK(f.rows[0][f.column("valid")] == "1");
    CHECK(f.rows[0][f.column("rank")] == "3");

    for (const auto* name : {"kernel", "line", "halfline", "vdc"}) {
        CAPTURE(name);
        CHECK(run({name, examples / (std::string(name) + ".cfg"), dir, 1}, err) == kExitOk);
    }
    CHECK(err.str().empty());
}

TEST_CASE("runs are byte-for-byte deterministic") {
    const fs::path examples = DISPERSIM_EXAMPLES_DIR;
    const auto a = scratch("det-a");
    const auto b = scratch("det-b");
    std::ostringstream err;
    REQUIRE(run({"halfline", examples / "halfline.cfg", a, 1}, err) == kExitOk);
    REQUIRE(run({"halfline", examples / "halfline.cfg", b, 3}, err) == kExitOk);
    CHECK(slurp(a / "halfline.csv") == slurp(b / "halfline.csv"));
}

TEST_CASE("plot scripts") {
    const auto dir = scratch("plot");
    REQUIRE(run_text("line", "[line]\ndatum = delta\nt_min = 1\nt_max = 100\ncount = 8\nspacing = log\n", dir).code ==
            kExitOk);
    const auto script = emit_plot_script(dir / "line.csv", dir);
    CHECK(script == dir / "line.gp");
    const auto text = slurp(script);
    CHECK(text.find("set logscale xy") != std::string::npos);
    CHECK(text.find("\"line.csv\"") != std::string::npos);
    CHECK(text.find("\"t\":\"norm\"") != std::string::npos);

    write_file(dir / "empty.csv", "");
    CHECK_THROWS_AS(emit_plot_script(dir / "empty.csv", dir), std::invalid_argument);
    write_file(dir / "other.csv", "# dispersim-csv v1 schema=mystery experiment=x\na,b\n1,2\n");
    CHECK_THROWS_AS(emit_plot_script(dir / "other.csv", dir), std::invalid_argument);
    CHECK_FALSE(fs::exists(dir / "other.gp"));
}
