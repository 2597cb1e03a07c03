#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tiltwing/cli.hpp"
#include "tiltwing/csvlog.hpp"
#include "tiltwing/kvconfig.hpp"
#include "tiltwing/report.hpp"
#include "tiltwing/scenario.hpp"
#include "tiltwing/svg.hpp"

#if defined(__unix__) || defined(__APPLE__)
#include <sys/wait.h>
#endif

using namespace tiltwing;
namespace fs = std::filesystem;

namespace {

kv::Document parse_text(const std::string& text) {
    std::istringstream in(text);
    return kv::parse(in, "test.toml");
}

Scenario scenario_text(const std::string& text, const fs::path& base = ".") {
    std::istringstream in(text);
    return parse_scenario(in, base, "test.toml");
}

// Fresh scratch directory per test case.
fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("tiltwing_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    f << text;
}

std::string read_file(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli_run(args, out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("config parser") {
    const kv::Document d = parse_text(
        "# header\n"
        "name = \"demo # not a comment\"\n"
        "count = 1_000  # trailing\n"
        "flag = true\n"
        "[sim]\n"
        "dt = 1e-3\n"
        "v = [1, -2.5, 3]\n"
        "[[knot]]\n"
        "t = 0\n"
        "[[knot]]\n"
        "t = 5\n");
    CHECK(d.root.string("name", "") == "demo # not a comment");
    CHECK(d.root.number("count", 0.0) == 1000.0);
    CHECK(d.root.boolean("flag", false));
    CHECK(d.section("sim").number("dt", 0.0) == 1e-3);
    CHECK(d.section("sim").vec3("v", Vec3::Zero()) == Vec3(1.0, -2.5, 3.0));
    REQUIRE(d.array("knot").size() == 2);
    CHECK(d.array("knot")[0].number("t", -1.0) == 0.0);
    CHECK(d.array("knot")[1].number("t", -1.0) == 5.0);
    CHECK(d.section("absent").empty());
    CHECK(d.section("sim").number("missing", 7.0) == 7.0);
    CHECK_NOTHROW(d.expect_consumed({"sim"}, {"knot"}));

    SUBCASE("errors carry the line") {
        try {
            parse_text("a = 1\nb = \n");
            FAIL("expected a parse error");
        } catch (const kv::ParseError& e) {
            CHECK(std::string(e.what()).find(":2") != std::string::npos);
        }
        CHECK_THROWS_AS(parse_text("a = 1\na = 2\n"), kv::ParseError);
        CHECK_THROWS_AS(parse_text("a = [1, 2\n"), kv::ParseError);
        CHECK_THROWS_AS(parse_text("[sec\n"), kv::ParseError);
        CHECK_THROWS_AS(parse_text("a = \"open\n"), kv::ParseError);
        CHECK_THROWS_AS(parse_text("a = 1.2.3\n"), kv::ParseError);
    }
    SUBCASE("type mismatch and unused keys") {
        const kv::Document e = parse_text("a = \"x\"\nb = 1\ntypo = 2\n[extra]\nq = 1\n");
        CHECK_THROWS_AS(e.root.number("a", 0.0), kv::ParseError);
        CHECK_THROWS_AS(e.root.vec3("b", Vec3::Zero()), kv::ParseError);
        CHECK_THROWS_AS(e.expect_consumed({"extra"}, {}), kv::ParseError);  // typo unused
        CHECK_THROWS_AS(e.expect_consumed({}, {}), kv::ParseError);         // unknown section
    }
}

TEST_CASE("scenario files") {
    const Scenario s = scenario_text(
        "name = \"t\"\n"
        "[sim]\nduration = 3\ndt_physics = 0.0005\nintegrator = \"semi_implicit_euler\"\n"
        "[initial]\naltitude = 20\nroll_deg = 10\n"
        "[wind]\nsteady = [1, 2, 0]\n"
        "[altitude_hold]\nref = 18\n"
        "[allocator]\ncollective = \"printed\"\n"
        "[actuators]\nservo_rate_deg_s = 180\n"
        "[[timeline]]\nt = 0\nchi_deg = 90\n"
        "[[timeline]]\nt = 2\nchi_deg = 45\nroll_deg = 5\n"
        "[[timeline]]\nt = 3\nroll_deg = 0\n");
    const SimConfig& c = s.config;
    CHECK(s.name == "t");
    CHECK(c.duration == 3.0);
    CHECK(c.dt_physics == 0.0005);
    CHECK(c.integrator == Integrator::kSemiImplicitEuler);
    CHECK(c.initial.altitude == 20.0);
    CHECK(c.initial.roll == doctest::Approx(deg2rad(10.0)));
    CHECK(c.wind.steady == Vec3(1.0, 2.0, 0.0));
    CHECK(c.altitude_ref == 18.0);
    CHECK(c.allocator.collective == CollectiveSplit::kPrinted);
    CHECK(c.actuators.servo_rate == doctest::Approx(kPi));
    REQUIRE(c.timeline.size() == 3);
    CHECK(c.timeline[0].chi == kHalfPi);  // exact, not 90 * pi / 180 rounded
    CHECK(c.timeline[1].chi == doctest::Approx(deg2rad(45.0)));
    CHECK(c.timeline[2].chi == c.timeline[1].chi);  // omitted fields carry over
    CHECK(c.timeline[2].roll == 0.0);
    CHECK(s.params_path.empty());

    CHECK_THROWS_AS(scenario_text("[sim]\nduration = 1\n[simm]\nx = 1\n"), kv::ParseError);
    CHECK_THROWS_AS(scenario_text("[sim]\nduration = 1\ndt_phys = 1\n"), kv::ParseError);
    CHECK_THROWS_AS(scenario_text("[sim]\nintegrator = \"euler\"\nduration = 1\n"),
                    kv::ParseError);
    CHECK_THROWS_AS(scenario_text("[[timeline]]\nchi_deg = 90\n"), kv::ParseError);  // no t
    CHECK_THROWS_AS(scenario_text("[[timeline]]\nt = 0\nchi_deg = 5\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS(scenario_text("[sim]\nseed = -3\nduration = 1\n"), kv::ParseError);
    CHECK_THROWS_AS(scenario_text("[geometry]\nmass = -1\n[sim]\nduration = 1\n"),
                    std::invalid_argument);

    SUBCASE("parameter path is relative to the scenario") {
        const fs::path dir = scratch("params_rel");
        fs::create_directories(dir / "cfg");
        AeroParams p = AeroParams::defaults();
        p.thrust_ff = {45.0, 1.0, 0, 0, 0, 0, 0, 0};
        save_params((dir / "cfg" / "a.params").string(), p);
        write_file(dir / "s.toml", "params = \"cfg/a.params\"\n[sim]\nduration = 1\n");
        const Scenario l = load_scenario(dir / "s.toml");
        CHECK(l.name == "s");
        CHECK(l.config.controller.thrust_ff.c[0] == 45.0);
        CHECK(l.config.vehicle.params.thrust_ff[1] == 1.0);
        CHECK_THROWS(load_scenario(dir / "nope.toml"));
    }
}

TEST_CASE("bundled scenarios load") {
    for (const char* name :
         {"hover", "roll_step", "transition", "gusty_hover", "cruise10"}) {
        CAPTURE(name);
        const fs::path p = fs::path(TILTWING_SOURCE_DIR) / "scenarios" / (std::string(name) + ".toml");
        CHECK_NOTHROW(load_scenario(p));
    }
    const SweepSpec spec =
        load_sweep_spec(fs::path(TILTWING_SOURCE_DIR) / "sysid" / "grid_default.toml");
    CHECK(spec.noise.relative == 0.01);
}

TEST_CASE("grid spec") {
    std::istringstream in(
        "seed = 42\n[grid]\nspeed_count = 3\nangle_min_deg = -45\nchi_count = 2\n"
        "[noise]\nrelative = 0.02\n[geometry]\nb = 0.7\n");
    const SweepSpec s = parse_sweep_spec(in, ".");
    CHECK(s.seed == 42);
    CHECK(s.grid.speed_count == 3);
    CHECK(s.grid.angle_min == doctest::Approx(deg2rad(-45.0)));
    CHECK(s.grid.chi_count == 2);
    CHECK(s.noise.relative == 0.02);
    CHECK(s.geometry.b == 0.7);
    std::istringstream bad("[grid]\nspeed_count = 2.5\n");
    CHECK_THROWS_AS(parse_sweep_spec(bad, "."), kv::ParseError);
}

TEST_CASE("flight log CSV") {
    const auto& cols = log_columns();
    REQUIRE(cols.size() == 31);
    CHECK(cols.front() == "t");
    CHECK(cols[22] == "airspeed");
    CHECK(cols.back() == "alloc_flags");

    CHECK(format_g6(1.0) == "1");
    CHECK(format_g6(-0.0) == "0");
    CHECK(format_g6(123456789.0) == "1.23457e+08");
    CHECK(format_g6(0.000123456789) == "0.000123457");

    AllocationFlags f;
    CHECK(flag_bits(f) == 0);
    f.eps_denominator_floored = true;
    f.T_t_clamped = true;
    CHECK(flag_bits(f) == 9);

    SimConfig c;
    c.duration = 0.5;
    const TimeSeriesLog log = run_scenario(c);
    std::ostringstream a;
    std::ostringstream b;
    write_log_csv(a, log);
    write_log_csv(b, run_scenario(c));
    CHECK(a.str() == b.str());

    std::istringstream back(a.str());
    const CsvTable t = read_csv_table(back);
    CHECK(t.header == cols);
    CHECK(t.rows.size() == log.rows.size());
    CHECK(t.column("z").front() == doctest::Approx(-10.0));
    CHECK(t.index("nope") == -1);
    CHECK_THROWS_AS(t.column("nope"), std::out_of_range);
    std::istringstream ragged("a,b\n1,2\n3\n");
    CHECK_THROWS_AS(read_csv_table(ragged), std::runtime_error);
}

TEST_CASE("log summary") {
    LogSeries s;
    for (int i = 0; i < 100; ++i) {
        const bool hover = i < 50;
        s.t.push_back(0.1 * i);
        s.altitude.push_back(10.0 + (i == 70 ? 0.4 : 0.0));
        s.airspeed.push_back(hover ? 0.0 : 10.0);
        s.power.push_back(hover ? 400.0 : 100.0);
        s.chi.push_back(hover ? kHalfPi : 0.5);
        s.flags.push_back(i == 3 ? 2.0 : 0.0);
    }
    const LogSummary m = summarize(s);
    CHECK(m.rows == 100);
    CHECK(m.duration == doctest::Approx(9.9));
    CHECK(m.max_altitude_deviation == doctest::Approx(0.4));
    CHECK(m.altitude_drift == 0.0);
    CHECK(m.hover_samples == 50);
    CHECK(m.cruise_samples == 50);
    REQUIRE(m.power_reduction);
    CHECK(*m.power_reduction == doctest::Approx(0.75));
    CHECK(m.flagged_rows == 1);
    CHECK(m.airspeed_max == 10.0);

    const auto j = nlohmann::json::parse(summary_json(m));
    CHECK(j["power"]["hover_W"].get<double>() == doctest::Approx(400.0));
    CHECK(j["altitude"]["max_deviation_m"].get<double>() == doctest::Approx(0.4));

    const fs::path dir = scratch("report");
    const auto files = write_report(s, m, {}, dir, "x");
    CHECK(files.size() == 4);
    for (const auto& p : files) {
        CHECK(fs::file_size(p) > 100);
    }
    CHECK(read_file(dir / "x_profile.svg").rfind("<svg", 0) != std::string::npos);
}

TEST_CASE("svg helpers") {
    const auto t = svg::nice_ticks(0.0, 9.3);
    REQUIRE_FALSE(t.empty());
    CHECK(t.front() >= 0.0);
    CHECK(t.back() <= 9.3 + 1e-12);
    for (std::size_t i = 1; i < t.size(); ++i) {
        CHECK(t[i] - t[i - 1] == doctest::Approx(t[1] - t[0]));
    }
    CHECK(svg::colormap(0.0) != svg::colormap(1.0));
    CHECK(svg::colormap(-5.0) == svg::colormap(0.0));
    CHECK(svg::colormap(0.5).size() == 7);

    svg::Figure fig;
    fig.title = "a < b & c";
    svg::Panel p;
    p.series.push_back({"s", {0.0, 1.0, 2.0}, {1.0, 3.0, 2.0}});
    fig.panels.push_back(p);
    const std::string out = svg::render(fig);
    CHECK(out.find("a &lt; b &amp; c") != std::string::npos);
    CHECK(out.find("</svg>") != std::string::npos);
}

TEST_CASE("command line tool") {
    const fs::path dir = scratch("cli");
    const std::string d = dir.string();

    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"--help"}).code == kExitOk);
    CHECK(cli({"frobnicate"}).code == kExitUsage);
    const Run missing = cli({"sim", (dir / "missing.toml").string()});
    CHECK(missing.code == kExitUsage);
    CHECK(missing.err.find("Usage") != std::string::npos);

    SUBCASE("alloc check") {
        const Run r = cli({"alloc", "check", "--samples", "2000", "--json", d + "/ac.json"});
        CHECK(r.code == kExitOk);
        CHECK(r.out.rfind("PASS", 0) == 0);
        CHECK(nlohmann::json::parse(read_file(dir / "ac.json"))["passed"].get<bool>());
    }
    SUBCASE("sim then report") {
        write_file(dir / "short.toml", "[sim]\nduration = 1\n");
        const Run r = cli({"sim", d + "/short.toml", "--out-dir", d});
        CHECK(r.code == kExitOk);
        CHECK(fs::exists(dir / "short.csv"));
        const auto j = nlohmann::json::parse(read_file(dir / "short_summary.json"));
        CHECK(j["status"] == "ok");
        const Run rep = cli({"report", d + "/short.csv"});
        CHECK(rep.code == kExitOk);
        CHECK(fs::exists(dir / "short_report.json"));
        CHECK(fs::exists(dir / "short_power_airspeed.svg"));
        CHECK(cli({"batch", d + "/short.toml", d + "/short.toml", "-j", "2", "--out-dir", d})
                  .code == kExitOk);
    }
    SUBCASE("bad scenario content is a usage error") {
        write_file(dir / "bad.toml", "[sim]\nduration = 1\nbogus = 1\n");
        const Run r = cli({"sim", d + "/bad.toml"});
        CHECK(r.code == kExitUsage);
        CHECK(r.err.find("bogus") != std::string::npos);
    }
    SUBCASE("divergence") {
        write_file(dir / "boom.toml", "[sim]\nduration = 1\n[initial]\nspeed = 200\n");
        const Run r = cli({"sim", d + "/boom.toml", "--out-dir", d});
        CHECK(r.code == kExitDiverged);
        const auto j = nlohmann::json::parse(read_file(dir / "boom_summary.json"));
        CHECK(j["status"] == "diverged");
    }
    SUBCASE("sysid synth and fit") {
        write_file(dir / "grid.toml",
                   "seed = 3\n[grid]\nspeed_min = 2\nspeed_max = 12\nspeed_count = 3\n"
                   "angle_count = 6\nchi_count = 2\nepsilon_count = 2\n");
        const std::string sweep = d + "/sweep.csv";
        CHECK(cli({"sysid", "synth", d + "/grid.toml", "-o", sweep}).code == kExitOk);
        const Run f = cli({"sysid", "fit", sweep, "-o", d + "/fit.params"});
        CHECK(f.code == kExitOk);
        const auto j = nlohmann::json::parse(read_file(dir / "fit.json"));
        CHECK(j["converged"].get<bool>());
        CHECK_NOTHROW(load_params(d + "/fit.params"));

        AeroParams start = AeroParams::defaults();
        start.naca0012.lift_slope *= 1.3;
        start.fuselage_drag_area *= 0.5;
        save_params(d + "/start.params", start);
        const Run nc = cli({"sysid", "fit", sweep, "--init", d + "/start.params",
                            "--max-iterations", "1", "-o", d + "/nc.params"});
        CHECK(nc.code == kExitFitFailed);
        CHECK(nc.out.find("did NOT converge") != std::string::npos);
    }
    SUBCASE("ffpoly") {
        write_file(dir / "few.csv", "chi,thrust\n0.5,30\n1.0,40\n1.5,49\n");
        CHECK(cli({"ffpoly", "fit", d + "/few.csv", "-o", d + "/ff.params"}).code == kExitUsage);
        std::string trim = "chi,thrust\n";
        for (int i = 0; i < 12; ++i) {
            const double chi = 0.2 + 0.12 * i;
            trim += std::to_string(chi) + "," + std::to_string(40.0 + 5.0 * chi) + "\n";
        }
        write_file(dir / "trim.csv", trim);
        CHECK(cli({"ffpoly", "fit", d + "/trim.csv", "-o", d + "/ff.params"}).code == kExitOk);
        const AeroParams p = load_params(d + "/ff.params");
        CHECK(p.thrust_ff[0] == doctest::Approx(40.0).epsilon(1e-6));
        CHECK(p.thrust_ff[1] == doctest::Approx(5.0).epsilon(1e-5));
    }
}

#if defined(TILTWING_CLI_PATH) && (defined(__unix__) || defined(__APPLE__))
TEST_CASE("installed binary exit codes") {
    auto status = [](const std::string& args) {
        const std::string cmd = std::string("\"") + TILTWING_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
        const int s = std::system(cmd.c_str());
        return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    CHECK(status("--help") == 0);
    CHECK(status("") == 1);
    CHECK(status("sim /nonexistent/x.toml") == 1);
}
#endif
