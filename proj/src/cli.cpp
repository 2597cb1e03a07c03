#include "tiltwing/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "tiltwing/csvlog.hpp"
#include "tiltwing/kvconfig.hpp"
#include "tiltwing/report.hpp"
#include "tiltwing/scenario.hpp"
#include "tiltwing/sim.hpp"
#include "tiltwing/sysid.hpp"

namespace tiltwing {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Thrown by handlers for input problems; maps to exit 1.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write " + path.string());
    }
    out << text;
}

AeroParams params_from(const std::string& path) {
    if (path.empty()) {
        return AeroParams::defaults();
    }
    return load_params(path);
}

VehicleGeometry geometry_from(const std::string& path) {
    if (path.empty()) {
        return {};
    }
    // Only the [geometry] section is read; the rest of the file is ignored.
    const kv::Document doc = kv::parse_file(path);
    const kv::Table& t = doc.section("geometry");
    VehicleGeometry g = read_geometry(t);
    t.expect_consumed();
    return g;
}

// ---- sim / batch -----------------------------------------------------------

struct SimOutcome {
    int code = kExitOk;
    std::string text;
};

SimOutcome run_one(const fs::path& scenario_path, const fs::path& out_dir,
                   std::optional<std::uint64_t> seed, const std::string& csv_name) {
    Scenario sc = load_scenario(scenario_path);
    if (seed) {
        sc.config.seed = *seed;
    }
    const auto t0 = std::chrono::steady_clock::now();
    const TimeSeriesLog log = run_scenario(sc.config);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const std::string stem = scenario_path.stem().string();
    fs::create_directories(out_dir);
    const fs::path csv = out_dir / (csv_name.empty() ? stem + ".csv" : csv_name);
    save_log_csv(csv.string(), log);

    ReportOptions ropt;
    ropt.altitude_ref = sc.config.altitude_ref.value_or(sc.config.initial.altitude);
    const LogSummary sum = summarize(LogSeries::from_log(log), ropt);
    ordered_json j = ordered_json::parse(summary_json(sum, ropt));
    ordered_json head;
    head["scenario"] = sc.name;
    head["status"] = log.status == RunStatus::kOk ? "ok" : "diverged";
    head["message"] = log.message;
    head["seed"] = sc.config.seed;
    head["csv"] = csv.string();
    head["wall_clock_s"] = wall;
    head.update(j);
    const fs::path json_path = out_dir / (csv.stem().string() + "_summary.json");
    write_text(json_path, head.dump(2) + "\n");

    std::ostringstream o;
    o << sc.name << ": " << sum.rows << " rows over " << fmt("%.3f", sum.duration) << " s ("
      << fmt("%.2f", wall) << " s wall)\n";
    o << "  altitude drift " << fmt("%.3f", sum.altitude_drift) << " m, max deviation "
      << fmt("%.3f", sum.max_altitude_deviation) << " m from " << fmt("%.2f", sum.altitude_ref)
      << " m\n";
    o << "  max airspeed " << fmt("%.2f", sum.airspeed_max) << " m/s, min chi "
      << fmt("%.1f", rad2deg(sum.chi_min)) << " deg, mean power " << fmt("%.1f", sum.power_mean)
      << " W\n";
    if (sum.power_reduction) {
        o << "  power at " << fmt("%.0f", ropt.cruise_speed) << " m/s "
          << fmt("%.1f", *sum.cruise_power) << " W vs hover " << fmt("%.1f", *sum.hover_power)
          << " W (" << fmt("%.1f", 100.0 * *sum.power_reduction) << "% lower)\n";
    }
    if (sum.flagged_rows) {
        o << "  allocation saturated or floored on " << sum.flagged_rows << " rows\n";
    }
    o << "  wrote " << csv.string() << ", " << json_path.string() << "\n";
    SimOutcome res;
    if (log.status == RunStatus::kDiverged) {
        o << "  DIVERGED: " << log.message << "\n";
        res.code = kExitDiverged;
    }
    res.text = o.str();
    return res;
}

// ---- sysid -----------------------------------------------------------------

ordered_json fit_json(const FitResult& r, const AeroParams& initial) {
    ordered_json j;
    j["converged"] = r.converged;
    j["stop_reason"] = r.stop_reason;
    j["iterations"] = r.iterations;
    j["initial_cost"] = r.initial_cost;
    j["cost"] = r.cost;
    j["gradient_measure"] = r.gradient_norm;
    const char* ch[] = {"F_x_N", "F_y_N", "F_z_N", "tau_x_Nm", "tau_y_Nm", "tau_z_Nm"};
    ordered_json rms;
    for (int i = 0; i < 6; ++i) {
        rms[ch[i]] = r.residual_rms[static_cast<std::size_t>(i)];
    }
    j["residual_rms"] = rms;
    if (r.calibrated_slope) {
        j["calibrated_slope"] = {{"slope_Nm_per_deg", r.calibrated_slope->slope},
                                 {"intercept_Nm", r.calibrated_slope->intercept},
                                 {"r_squared", r.calibrated_slope->r_squared}};
    }
    const auto v0 = initial.to_vector();
    const auto v = r.params.to_vector();
    ordered_json params = ordered_json::array();
    for (std::size_t i = 0; i < AeroParams::kCount; ++i) {
        const auto has = [&](const std::vector<std::size_t>& s) {
            return std::find(s.begin(), s.end(), i) != s.end();
        };
        const char* status = has(r.frozen_indices) ? "frozen"
                             : has(r.weak_indices) ? "weak"
                             : has(r.free_indices) ? "identified"
                                                   : "fixed";
        ordered_json p;
        p["key"] = std::string(AeroParams::schema()[i].key);
        p["unit"] = std::string(AeroParams::schema()[i].unit);
        p["initial"] = v0[i];
        p["value"] = v[i];
        p["std_dev"] = r.covariance.size() ? std::sqrt(std::max(r.covariance(i, i), 0.0)) : 0.0;
        p["status"] = status;
        params.push_back(p);
    }
    j["parameters"] = params;
    j["warnings"] = r.warnings;
    return j;
}

}  // namespace

int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Tilt-wing VTOL simulation, allocation and identification toolkit", "tiltwing"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    // sim
    auto* sim = app.add_subcommand("sim", "Run a scenario file; writes the CSV log and a JSON summary");
    std::string sim_path;
    std::string out_dir = ".";
    std::string csv_name;
    std::optional<std::uint64_t> seed;
    sim->add_option("scenario", sim_path, "Scenario file (.toml)")->required()->check(CLI::ExistingFile);
    sim->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
    sim->add_option("-o,--output", csv_name, "CSV file name inside --out-dir (default <scenario>.csv)");
    sim->add_option("--seed", seed, "Override the scenario seed");

    // batch
    auto* batch = app.add_subcommand("batch", "Run several scenarios on a worker pool");
    std::vector<std::string> batch_paths;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    batch->add_option("scenarios", batch_paths, "Scenario files")->required()->check(CLI::ExistingFile);
    batch->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
    batch->add_option("-j,--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

    // sysid
    auto* sysid = app.add_subcommand("sysid", "Grey-box aerodynamic identification");
    sysid->require_subcommand(1);
    auto* synth = sysid->add_subcommand("synth", "Generate a synthetic sweep CSV from a grid spec");
    std::string grid_path;
    std::string synth_out = "sweep.csv";
    synth->add_option("grid_spec", grid_path, "Grid spec file (.toml)")->required()->check(CLI::ExistingFile);
    synth->add_option("-o,--output", synth_out, "Sweep CSV")->capture_default_str();
    synth->add_option("--seed", seed, "Override the spec seed");

    auto* fitc = sysid->add_subcommand("fit", "Fit the aero parameters to a sweep CSV");
    std::string sweep_path;
    std::string init_path;
    std::string fit_out = "fitted.params";
    std::string fit_summary;
    std::string geometry_path;
    std::optional<double> slope_target;
    FitOptions fopt;
    fitc->add_option("sweep", sweep_path, "Sweep CSV")->required()->check(CLI::ExistingFile);
    fitc->add_option("--init", init_path, "Initial parameter file (default built-in)")->check(CLI::ExistingFile);
    fitc->add_option("-o,--output", fit_out, "Fitted parameter file")->capture_default_str();
    fitc->add_option("--summary", fit_summary, "JSON summary (default <output>.json)");
    fitc->add_option("--geometry", geometry_path, "File with a [geometry] section")->check(CLI::ExistingFile);
    fitc->add_option("--slope-target", slope_target, "Calibrate roll authority to this slope [N m/deg]");
    fitc->add_option("--slope-weight", fopt.slope_weight, "Weight of the slope residual")->capture_default_str();
    fitc->add_option("--prior-weight", fopt.prior_weight, "Ridge toward the initial values")->capture_default_str();
    fitc->add_option("--max-iterations", fopt.max_iterations, "Iteration limit")->capture_default_str();
    fitc->add_option("--force-scale", fopt.weights.force_scale, "Force residual scale [N]")->capture_default_str();
    fitc->add_option("--torque-scale", fopt.weights.torque_scale, "Torque residual scale [N m]")->capture_default_str();

    auto* slope = sysid->add_subcommand("slope", "Roll torque vs differential tilt at cruise");
    std::string slope_params;
    TiltSlopeCondition scond;
    double slope_chi_deg = rad2deg(scond.chi);
    slope->add_option("--params", slope_params, "Parameter file (default built-in)")->check(CLI::ExistingFile);
    slope->add_option("--airspeed", scond.airspeed, "[m/s]")->capture_default_str();
    slope->add_option("--chi-deg", slope_chi_deg, "[deg]")->capture_default_str();
    slope->add_option("--thrust", scond.thrust_per_rotor, "Per rotor [N]")->capture_default_str();

    // ffpoly
    auto* ff = app.add_subcommand("ffpoly", "Thrust feed-forward polynomial T_ff(chi)");
    ff->require_subcommand(1);
    auto* ffsweep = ff->add_subcommand("sweep", "Level-trim sweep over chi, written as trim CSV");
    std::string ff_params;
    std::string ff_out = "trim.csv";
    int ff_points = 41;
    ffsweep->add_option("--params", ff_params, "Parameter file (default built-in)")->check(CLI::ExistingFile);
    ffsweep->add_option("--geometry", geometry_path, "File with a [geometry] section")->check(CLI::ExistingFile);
    ffsweep->add_option("-o,--output", ff_out, "Trim CSV")->capture_default_str();
    ffsweep->add_option("--points", ff_points, "Number of chi values")->check(CLI::Range(8, 10000))->capture_default_str();

    auto* fffit = ff->add_subcommand("fit", "Fit T_ff(chi) to a trim CSV and store it in a parameter file");
    std::string trim_path;
    std::string fffit_out = "ffpoly.params";
    fffit->add_option("trim", trim_path, "Trim CSV (chi,thrust)")->required()->check(CLI::ExistingFile);
    fffit->add_option("--params", ff_params, "Base parameter file (default built-in)")->check(CLI::ExistingFile);
    fffit->add_option("-o,--output", fffit_out, "Output parameter file")->capture_default_str();

    // report
    auto* rep = app.add_subcommand("report", "Power/altitude statistics and SVG plots from a log CSV");
    std::string log_path;
    std::string rep_dir;
    ReportOptions ropt;
    rep->add_option("log", log_path, "Log CSV written by `sim`")->required()->check(CLI::ExistingFile);
    rep->add_option("--out-dir", rep_dir, "Output directory (default: next to the log)");
    rep->add_option("--cruise-speed", ropt.cruise_speed, "Comparison airspeed [m/s]")->capture_default_str();
    rep->add_option("--bin-width", ropt.bin_width, "Airspeed bin width [m/s]")->check(CLI::PositiveNumber)->capture_default_str();

    // alloc
    auto* alloc = app.add_subcommand("alloc", "Control allocation checks");
    alloc->require_subcommand(1);
    auto* check = alloc->add_subcommand("check", "Randomized allocate/reconstruct round trip");
    RoundTripOptions rto;
    std::string check_json;
    check->add_option("--samples", rto.samples, "Accepted samples")->capture_default_str();
    check->add_option("--seed", rto.seed, "RNG seed")->capture_default_str();
    check->add_option("--json", check_json, "Also write the result as JSON");

    // Usage of the deepest subcommand that was selected.
    auto deepest = [&]() -> const CLI::App* {
        const CLI::App* sub = &app;
        while (!sub->get_subcommands().empty()) {
            sub = sub->get_subcommands().front();
        }
        return sub;
    };
    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << deepest()->help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << deepest()->help();
        return kExitUsage;
    }

    try {
        if (sim->parsed()) {
            const SimOutcome r = run_one(sim_path, out_dir, seed, csv_name);
            out << r.text;
            return r.code;
        }

        if (batch->parsed()) {
            std::vector<SimOutcome> results(batch_paths.size());
            std::size_t next = 0;
            std::mutex m;
            auto worker = [&] {
                for (;;) {
                    std::size_t i;
                    {
                        std::lock_guard lk(m);
                        if (next >= batch_paths.size()) {
                            return;
                        }
                        i = next++;
                    }
                    try {
                        results[i] = run_one(batch_paths[i], out_dir, std::nullopt, "");
                    } catch (const std::exception& e) {
                        results[i] = {kExitUsage, batch_paths[i] + ": " + e.what() + "\n"};
                    }
                }
            };
            std::vector<std::thread> pool;
            const unsigned n = std::min<unsigned>(jobs, static_cast<unsigned>(batch_paths.size()));
            for (unsigned k = 0; k < n; ++k) {
                pool.emplace_back(worker);
            }
            for (auto& t : pool) {
                t.join();
            }
            int code = kExitOk;
            for (const auto& r : results) {
                out << r.text;
                code = std::max(code, r.code);
            }
            return code;
        }

        if (synth->parsed()) {
            SweepSpec spec = load_sweep_spec(grid_path);
            if (seed) {
                spec.seed = *seed;
            }
            const AeroParams truth = params_from(spec.params_path.string());
            const auto segs = build_segments(spec.geometry);
            const auto samples =
                generate_synthetic_sweep(truth, spec.grid, spec.noise, spec.seed, spec.geometry, segs);
            std::ofstream f(synth_out, std::ios::binary);
            if (!f) {
                throw InputError("cannot write " + synth_out);
            }
            write_sweep_csv(f, samples);
            out << "wrote " << samples.size() << " samples to " << synth_out << " (seed "
                << spec.seed << ", relative noise " << spec.noise.relative << ")\n";
            return kExitOk;
        }

        if (fitc->parsed()) {
            const VehicleGeometry geo = geometry_from(geometry_path);
            const auto segs = build_segments(geo);
            const AeroParams init = params_from(init_path);
            std::ifstream f(sweep_path);
            const auto samples = read_sweep_csv(f);
            fopt.slope_target = slope_target;
            const auto t0 = std::chrono::steady_clock::now();
            const FitResult r = fit(init, samples, geo, segs, fopt);
            const double wall =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            save_params(fit_out, r.params);
            ordered_json j = fit_json(r, init);
            j["samples"] = samples.size();
            j["wall_clock_s"] = wall;
            const std::string summary =
                fit_summary.empty() ? fs::path(fit_out).replace_extension(".json").string()
                                    : fit_summary;
            write_text(summary, j.dump(2) + "\n");

            out << "fit " << (r.converged ? "converged" : "did NOT converge") << " ("
                << r.stop_reason << ") after " << r.iterations << " iterations, "
                << fmt("%.2f", wall) << " s\n";
            out << "  cost " << fmt("%.6g", r.initial_cost) << " -> " << fmt("%.6g", r.cost)
                << ", residual rms F " << fmt("%.4g", r.residual_rms[0]) << " "
                << fmt("%.4g", r.residual_rms[1]) << " " << fmt("%.4g", r.residual_rms[2])
                << " N, tau " << fmt("%.4g", r.residual_rms[3]) << " "
                << fmt("%.4g", r.residual_rms[4]) << " " << fmt("%.4g", r.residual_rms[5])
                << " N m\n";
            out << "  " << r.identified_indices().size() << " identified, " << r.weak_indices.size()
                << " weak, " << r.frozen_indices.size() << " frozen parameters\n";
            if (r.calibrated_slope) {
                out << "  roll authority " << fmt("%.4f", r.calibrated_slope->slope)
                    << " N m/deg (R^2 " << fmt("%.5f", r.calibrated_slope->r_squared) << ")\n";
            }
            for (const auto& w : r.warnings) {
                out << "  warning: " << w << "\n";
            }
            out << "  wrote " << fit_out << ", " << summary << "\n";
            return r.converged ? kExitOk : kExitFitFailed;
        }

        if (slope->parsed()) {
            const AeroParams p = params_from(slope_params);
            const VehicleGeometry geo;
            const auto segs = build_segments(geo);
            scond.chi = deg2rad(slope_chi_deg);
            const TiltSlope s = differential_tilt_slope(p, geo, segs, scond);
            ordered_json j{{"airspeed_m_s", scond.airspeed},
                           {"chi_deg", slope_chi_deg},
                           {"thrust_per_rotor_N", scond.thrust_per_rotor},
                           {"slope_Nm_per_deg", s.slope},
                           {"intercept_Nm", s.intercept},
                           {"r_squared", s.r_squared}};
            out << "roll authority " << fmt("%.4f", s.slope) << " N m/deg, R^2 "
                << fmt("%.6f", s.r_squared) << "\n" << j.dump() << "\n";
            return kExitOk;
        }

        if (ffsweep->parsed()) {
            const VehicleModel model =
                VehicleModel::make(geometry_from(geometry_path), params_from(ff_params));
            std::vector<double> chis;
            const double lo = model.geometry.chi_min;
            for (int i = 0; i < ff_points; ++i) {
                chis.push_back(kHalfPi - (kHalfPi - lo) * i / (ff_points - 1));
            }
            const auto pts = trim_sweep(model, chis);
            std::vector<ThrustSample> samples;
            int failed = 0;
            for (const auto& p : pts) {
                if (p.converged) {
                    samples.push_back({p.chi, p.thrust_sum});
                } else {
                    ++failed;
                    err << "warning: no level trim at chi " << fmt("%.2f", rad2deg(p.chi))
                        << " deg\n";
                }
            }
            std::ofstream f(ff_out, std::ios::binary);
            if (!f) {
                throw InputError("cannot write " + ff_out);
            }
            write_thrust_csv(f, samples);
            out << "wrote " << samples.size() << " trim points to " << ff_out << "\n";
            for (const auto& p : pts) {
                out << "  chi " << fmt("%5.1f", rad2deg(p.chi)) << " deg  airspeed "
                    << fmt("%6.2f", p.airspeed) << " m/s  thrust " << fmt("%6.2f", p.thrust_sum)
                    << " N  power " << fmt("%6.1f", p.power) << " W\n";
            }
            return failed ? kExitFitFailed : kExitOk;
        }

        if (fffit->parsed()) {
            std::ifstream f(trim_path);
            const auto samples = read_thrust_csv(f);
            AeroParams p = params_from(ff_params);
            std::array<double, 8> c{};
            try {
                c = fit_thrust_ff(samples);
            } catch (const std::runtime_error& e) {
                err << "feed-forward fit failed: " << e.what() << "\n";
                return kExitFitFailed;
            }
            p.thrust_ff = c;
            save_params(fffit_out, p);
            const ThrustFeedForward tff{c};
            double worst = 0.0;
            for (const auto& s : samples) {
                worst = std::max(worst, std::abs(tff.evaluate(s.chi) - s.thrust));
            }
            ordered_json j{{"coefficients", c},
                           {"max_abs_error_N", worst},
                           {"T_ff_hover_N", tff.evaluate(kHalfPi)},
                           {"samples", samples.size()}};
            out << "T_ff(chi) = sum c_k chi^k, max fit error " << fmt("%.4f", worst)
                << " N, T_ff(90 deg) = " << fmt("%.3f", tff.evaluate(kHalfPi)) << " N\n";
            for (std::size_t k = 0; k < c.size(); ++k) {
                out << "  c" << k << " = " << fmt("%.10g", c[k]) << "\n";
            }
            out << j.dump() << "\n" << "wrote " << fffit_out << "\n";
            return kExitOk;
        }

        if (rep->parsed()) {
            const CsvTable table = load_csv_table(log_path);
            const LogSeries s = LogSeries::from_table(table);
            const LogSummary sum = summarize(s, ropt);
            const fs::path dir = rep_dir.empty() ? fs::path(log_path).parent_path() : fs::path(rep_dir);
            const auto files = write_report(s, sum, ropt, dir.empty() ? fs::path(".") : dir,
                                            fs::path(log_path).stem().string());
            out << "report for " << log_path << ": " << sum.rows << " rows, "
                << fmt("%.2f", sum.duration) << " s\n";
            out << "  altitude " << fmt("%.3f", sum.altitude_min) << " .. "
                << fmt("%.3f", sum.altitude_max) << " m (max deviation "
                << fmt("%.3f", sum.max_altitude_deviation) << " m), max airspeed "
                << fmt("%.2f", sum.airspeed_max) << " m/s\n";
            if (sum.hover_power) {
                out << "  hover power " << fmt("%.1f", *sum.hover_power) << " W ("
                    << sum.hover_samples << " samples)\n";
            }
            if (sum.cruise_power) {
                out << "  power at " << fmt("%.1f", ropt.cruise_speed) << " m/s "
                    << fmt("%.1f", *sum.cruise_power) << " W (" << sum.cruise_samples
                    << " samples)\n";
            }
            if (sum.power_reduction) {
                out << "  power reduction " << fmt("%.1f", 100.0 * *sum.power_reduction) << "%\n";
            } else {
                out << "  power reduction: n/a (log lacks hover or cruise samples)\n";
            }
            for (const auto& p : files) {
                out << "  wrote " << p.string() << "\n";
            }
            return kExitOk;
        }

        if (check->parsed()) {
            const auto t0 = std::chrono::steady_clock::now();
            const RoundTripReport r = allocation_round_trip(rto);
            const double wall =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            out << (r.passed() ? "PASS" : "FAIL") << " allocation round trip: " << r.tested
                << " samples (" << r.redrawn << " redrawn), " << r.failures
                << " failures, worst torque error " << fmt("%.3f", r.worst_torque_ratio)
                << " of tolerance, worst collective error " << fmt("%.3g", r.worst_collective_rel)
                << ", " << fmt("%.2f", wall) << " s\n";
            if (!r.first_failure.empty()) {
                out << "  first failure: " << r.first_failure << "\n";
            }
            if (!check_json.empty()) {
                ordered_json j{{"passed", r.passed()},
                               {"samples", r.tested},
                               {"redrawn", r.redrawn},
                               {"failures", r.failures},
                               {"worst_torque_ratio", r.worst_torque_ratio},
                               {"worst_collective_rel", r.worst_collective_rel},
                               {"seed", rto.seed},
                               {"wall_clock_s", wall}};
                write_text(check_json, j.dump(2) + "\n");
            }
            return r.passed() ? kExitOk : kExitCheckFailed;
        }
    } catch (const SimulationDiverged& e) {
        err << "simulation diverged: " << e.what() << "\n";
        return kExitDiverged;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    err << app.help();
    return kExitUsage;
}

}  // namespace tiltwing
