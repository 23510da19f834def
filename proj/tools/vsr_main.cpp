// vsr: simulate, sweep, analyze and verify two-mode superradiance from
// V-type three-level atoms.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "vsr/analysis.hpp"
#include "vsr/errors.hpp"
#include "vsr/io.hpp"
#include "vsr/oracle.hpp"
#include "vsr/scenario.hpp"

namespace fs = std::filesystem;
using vsr::io::Json;

namespace {

enum ExitCode : int { kOk = 0, kValidation = 1, kNumerical = 2, kIo = 3 };

// Flags shared by the run-producing subcommands. Unset flags leave the
// scenario (file or defaults) untouched.
struct CommonFlags {
    std::string config;
    std::optional<double> gamma1, gamma2;
    std::optional<int> n, n_min, n_max, n_step;
    std::optional<std::string> init;
    std::optional<double> rel_tol, abs_tol, completion_epsilon;
    std::optional<std::string> t_max;
    std::optional<std::size_t> samples, max_steps;
    std::optional<std::string> out;
    bool raw = false;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
};

void add_common(CLI::App* cmd, CommonFlags& f, bool range) {
    cmd->add_option("--config", f.config, "Scenario JSON file; flags override its values");
    cmd->add_option("--gamma1", f.gamma1, "Decay rate of |1> -> |3>");
    cmd->add_option("--gamma2", f.gamma2, "Decay rate of |2> -> |3>");
    cmd->add_option("--n", f.n, "Atoms per sub-ensemble (2N atoms in total)");
    if (range) {
        cmd->add_option("--n-min", f.n_min, "Sweep start");
        cmd->add_option("--n-max", f.n_max, "Sweep end (inclusive)");
        cmd->add_option("--n-step", f.n_step, "Sweep step");
        cmd->add_option("--threads", f.threads, "Worker threads");
    }
    cmd->add_option("--init", f.init, "v-standard | two-level-conventional | two-level-unconventional");
    cmd->add_option("--rel-tol", f.rel_tol, "Relative tolerance");
    cmd->add_option("--abs-tol", f.abs_tol, "Absolute tolerance");
    cmd->add_option("--t-max", f.t_max, "Horizon, or 'auto'");
    cmd->add_option("--samples", f.samples, "Uniform output samples");
    cmd->add_option("--completion-epsilon", f.completion_epsilon, "Mass allowed outside absorbing states");
    cmd->add_option("--max-steps", f.max_steps, "Integrator step budget");
    cmd->add_option("--out,--out-dir", f.out, "Output directory");
    cmd->add_flag("--raw-eq2-intensity", f.raw, "Drop the decay-rate weight from intensities");
}

vsr::Scenario build_scenario(const CommonFlags& f) {
    vsr::Scenario sc = f.config.empty() ? vsr::Scenario{} : vsr::load_scenario(f.config);
    if (f.gamma1) sc.rates.gamma1 = *f.gamma1;
    if (f.gamma2) sc.rates.gamma2 = *f.gamma2;
    if (f.n) sc.n_values = {*f.n};
    if (f.n_min || f.n_max || f.n_step) {
        if (!f.n_min || !f.n_max) throw vsr::ValidationError("--n-min and --n-max must be given together");
        sc.n_values = vsr::expand_range(*f.n_min, *f.n_max, f.n_step.value_or(1));
    }
    if (f.init) sc.init = vsr::parse_initial_kind(*f.init);
    if (f.rel_tol) sc.solver.rel_tol = *f.rel_tol;
    if (f.abs_tol) sc.solver.abs_tol = *f.abs_tol;
    if (f.completion_epsilon) sc.solver.completion_epsilon = *f.completion_epsilon;
    if (f.samples) sc.solver.sample_count = *f.samples;
    if (f.max_steps) sc.solver.max_steps = *f.max_steps;
    if (f.t_max) {
        if (*f.t_max == "auto") {
            sc.solver.t_max.reset();
        } else {
            try {
                sc.solver.t_max = std::stod(*f.t_max);
            } catch (const std::exception&) {
                throw vsr::ValidationError("--t-max must be a number or 'auto'");
            }
        }
    }
    if (f.raw) sc.solver.raw_eq2_intensity = true;
    if (f.out) sc.output_dir = *f.out;
    sc.validate();
    return sc;
}

std::string run_stem(int n_half) { return "run_N" + std::to_string(n_half); }

Json run_summary(const vsr::RunResult& res, const vsr::Scenario& sc) {
    const vsr::TimeSeries& s = res.series;
    return {{"scenario",
             {{"gamma1", s.rates.gamma1},
              {"gamma2", s.rates.gamma2},
              {"n_half", s.n_half},
              {"init", std::string(vsr::to_string(sc.init))},
              {"raw_eq2_intensity", s.raw_eq2_intensity}}},
            {"solver",
             {{"rel_tol", sc.solver.rel_tol},
              {"abs_tol", sc.solver.abs_tol},
              {"completion_epsilon", sc.solver.completion_epsilon},
              {"sample_count", sc.solver.sample_count},
              {"completed", s.completed},
              {"accepted_steps", s.stats.accepted_steps},
              {"rejected_steps", s.stats.rejected_steps},
              {"min_probability", s.stats.min_probability}}},
            {"asymptotics", vsr::io::to_json(vsr::asymptotics(s))},
            {"record", vsr::io::to_json(res.record)}};
}

void write_run(const fs::path& dir, const vsr::RunResult& res, const vsr::Scenario& sc) {
    const std::string stem = run_stem(res.series.n_half);
    vsr::io::write_series_csv(dir / (stem + ".csv"), res.series, res.track);
    vsr::io::write_file_atomic(dir / (stem + ".json"), vsr::io::dump(run_summary(res, sc)));
}

std::string opt_cell(const std::optional<double>& v) { return v ? vsr::io::format_double(*v) : std::string(); }

std::string sweep_csv(const std::vector<vsr::SweepOutcome>& outcomes, const vsr::Scenario& sc) {
    std::string out =
        "n_half,gamma1,gamma2,init,status,peak1_t,peak1_i,peak2_t,peak2_i,fwhm1,fwhm2,tau1_inf,tau2_inf,"
        "sigma1_inf,sigma2_inf,sigma1_min_t,sigma1_min,sigma2_min_t,sigma2_min,area1_inf,area2_inf\n";
    for (const auto& oc : outcomes) {
        out += std::to_string(oc.n_half) + ',' + vsr::io::format_double(sc.rates.gamma1) + ',' +
               vsr::io::format_double(sc.rates.gamma2) + ',' + std::string(vsr::to_string(sc.init)) + ',';
        if (!oc.ok) {
            out += "failed" + std::string(16, ',') + '\n';
            continue;
        }
        const vsr::SweepRecord& r = *oc.record;
        out += "ok";
        auto peak_t = [](const vsr::ModeRecord& m) { return m.peak ? std::optional(m.peak->time) : std::nullopt; };
        auto peak_i = [](const vsr::ModeRecord& m) { return m.peak ? std::optional(m.peak->value) : std::nullopt; };
        auto min_t = [](const vsr::ModeRecord& m) {
            return m.sigma_min ? std::optional(m.sigma_min->time) : std::nullopt;
        };
        auto min_v = [](const vsr::ModeRecord& m) {
            return m.sigma_min ? std::optional(m.sigma_min->value) : std::nullopt;
        };
        const auto& m1 = r.modes[0];
        const auto& m2 = r.modes[1];
        for (const auto& cell :
             {opt_cell(peak_t(m1)), opt_cell(peak_i(m1)), opt_cell(peak_t(m2)), opt_cell(peak_i(m2)),
              opt_cell(m1.fwhm), opt_cell(m2.fwhm), vsr::io::format_double(m1.tau_inf),
              vsr::io::format_double(m2.tau_inf), vsr::io::format_double(m1.sigma_inf),
              vsr::io::format_double(m2.sigma_inf), opt_cell(min_t(m1)), opt_cell(min_v(m1)), opt_cell(min_t(m2)),
              opt_cell(min_v(m2)), vsr::io::format_double(m1.area_inf), vsr::io::format_double(m2.area_inf)}) {
            out += ',' + cell;
        }
        out += '\n';
    }
    return out;
}

int cmd_simulate(const CommonFlags& f) {
    vsr::Scenario sc = build_scenario(f);
    if (sc.n_values.size() != 1) throw vsr::ValidationError("simulate needs exactly one --n");
    const int n = sc.n_values.front();
    const vsr::RunResult res = vsr::run_single(sc.rates, n, sc.init, sc.solver);
    write_run(sc.output_dir, res, sc);
    const auto& r = res.record;
    std::printf("N=%d t_end=%.6g steps=%zu area1=%.9g area2=%.9g tau1=%.6g tau2=%.6g sigma1=%.6g sigma2=%.6g\n", n,
                res.series.t_end, res.series.stats.accepted_steps, r.modes[0].area_inf, r.modes[1].area_inf,
                r.modes[0].tau_inf, r.modes[1].tau_inf, r.modes[0].sigma_inf, r.modes[1].sigma_inf);
    return kOk;
}

int cmd_sweep(const CommonFlags& f) {
    vsr::Scenario sc = build_scenario(f);
    const fs::path dir = sc.output_dir;
    std::mutex log_mutex;
    const auto outcomes = vsr::run_sweep(sc, f.threads, [&](const vsr::RunResult& res) {
        write_run(dir, res, sc);
        std::lock_guard lock(log_mutex);
        std::printf("N=%d done (t_end=%.6g, %zu steps)\n", res.series.n_half, res.series.t_end,
                    res.series.stats.accepted_steps);
        std::fflush(stdout);
    });

    Json scenario = vsr::scenario_json(sc);
    scenario.erase("output_dir");
    Json doc = {{"scenario", scenario}, {"records", Json::array()}, {"failed", Json::array()}};
    bool any_failed = false;
    for (const auto& oc : outcomes) {
        if (oc.ok) {
            doc["records"].push_back(vsr::io::to_json(*oc.record));
        } else {
            any_failed = true;
            doc["failed"].push_back({{"n_half", oc.n_half}, {"error", oc.error}});
            std::fprintf(stderr, "N=%d failed: %s\n", oc.n_half, oc.error.c_str());
        }
    }
    vsr::io::write_file_atomic(dir / "sweep_summary.json", vsr::io::dump(doc));
    vsr::io::write_file_atomic(dir / "sweep_summary.csv", sweep_csv(outcomes, sc));
    return any_failed ? kNumerical : kOk;
}

int cmd_analyze(const std::string& in_dir, std::optional<std::string> out_dir, std::optional<double> alpha) {
    const fs::path dir = in_dir;
    const fs::path summary_path = dir / "sweep_summary.json";
    if (!fs::exists(summary_path)) throw vsr::ValidationError("no sweep_summary.json in " + dir.string());
    Json doc = Json::parse(vsr::io::read_file(summary_path), nullptr, false);
    if (doc.is_discarded() || !doc.contains("records")) {
        throw vsr::ValidationError("corrupt sweep summary " + summary_path.string());
    }

    vsr::SweepSummary sweep;
    std::vector<vsr::TimeSeries> runs;
    try {
        for (const Json& rec : doc.at("records")) sweep.records.push_back(vsr::io::record_from_json(rec));
    } catch (const vsr::IoError& e) {
        throw vsr::ValidationError(e.what());
    }
    std::sort(sweep.records.begin(), sweep.records.end(),
              [](const auto& a, const auto& b) { return a.n_half < b.n_half; });
    for (const auto& rec : sweep.records) {
        const fs::path csv = dir / (run_stem(rec.n_half) + ".csv");
        try {
            runs.push_back(vsr::io::to_time_series(vsr::io::read_series_csv(csv), rec.n_half, rec.rates, true));
        } catch (const vsr::IoError& e) {
            throw vsr::ValidationError(std::string("corrupt sweep: ") + e.what());
        }
    }

    Json report = {{"fits", Json::array()}, {"sigma_minima", Json::array()}, {"dicke_reference", Json::array()}};
    for (const auto& fit : vsr::criteria_battery(sweep)) report["fits"].push_back(vsr::io::to_json(fit));
    for (const auto& rec : sweep.records) {
        Json row = {{"n_half", rec.n_half}, {"mode1", nullptr}, {"mode2", nullptr}};
        for (std::size_t k = 0; k < 2; ++k) {
            if (rec.modes[k].sigma_min) {
                row[k == 0 ? "mode1" : "mode2"] = {{"time", rec.modes[k].sigma_min->time},
                                                   {"value", rec.modes[k].sigma_min->value}};
            }
        }
        report["sigma_minima"].push_back(row);
        if (rec.n_half >= 2) {
            report["dicke_reference"].push_back({{"n_half", rec.n_half},
                                                 {"tau_d", vsr::dicke_delay(rec.n_half)},
                                                 {"sigma_d", vsr::dicke_sigma(rec.n_half)}});
        }
    }

    std::vector<const vsr::TimeSeries*> ptrs;
    for (const auto& r : runs) ptrs.push_back(&r);
    const auto rows = vsr::normalized_surface(ptrs, alpha);
    std::string csv = alpha ? "n_half,t,tau_d,i1_norm,i2_norm,t_display\n" : "n_half,t,tau_d,i1_norm,i2_norm\n";
    for (const auto& row : rows) {
        csv += std::to_string(row.n_half) + ',' + vsr::io::format_double(row.t) + ',' +
               vsr::io::format_double(row.tau_d) + ',' + vsr::io::format_double(row.i1_norm) + ',' +
               vsr::io::format_double(row.i2_norm);
        if (row.t_display) csv += ',' + vsr::io::format_double(*row.t_display);
        csv += '\n';
    }

    const fs::path out = out_dir ? fs::path(*out_dir) : dir;
    vsr::io::write_file_atomic(out / "analysis_report.json", vsr::io::dump(report));
    vsr::io::write_file_atomic(out / "normalized_surface.csv", csv);
    for (const Json& fit : report["fits"]) {
        std::printf("%-22s vs %-16s slope=%.6g intercept=%.6g R2=%.6f\n",
                    fit["y_label"].get<std::string>().c_str(), fit["x_label"].get<std::string>().c_str(),
                    fit["slope"].get<double>(), fit["intercept"].get<double>(), fit["r_squared"].get<double>());
    }
    return kOk;
}

int cmd_synthesis(const CommonFlags& f, std::optional<double> fraction) {
    vsr::Scenario sc = build_scenario(f);
    if (!(sc.rates.gamma1 > 0.0) || !(sc.rates.gamma2 > 0.0)) {
        throw vsr::ValidationError("synthesis needs gamma1 > 0 and gamma2 > 0");
    }
    if (sc.n_values.size() != 1) throw vsr::ValidationError("synthesis needs exactly one --n");
    if (fraction) sc.synthesis_completion_fraction = *fraction;
    sc.init = vsr::InitialKind::v_standard;
    sc.validate();
    const vsr::RunResult res = vsr::run_single(sc.rates, sc.n_values.front(), sc.init, sc.solver);
    write_run(sc.output_dir, res, sc);
    const vsr::SynthesisReport rep = vsr::synthesis_report(res.series, sc.synthesis_completion_fraction);
    vsr::io::write_file_atomic(fs::path(sc.output_dir) / "synthesis.json", vsr::io::dump(vsr::io::to_json(rep)));
    std::printf("tau1D=%.6g tau2D=%.6g cascade_sum=%.6g (2N ensemble: %.6g)\n", rep.tau1d_formula,
                rep.tau2d_cascade_estimate, rep.cascade_sum, rep.cascade_sum_total_atoms);
    std::printf("mode1 peak t=%.6g  mode2 peak t=%.6g  completion(%.0f%%) t=%.6g  speedup=%.4g\n",
                rep.mode1_peak_time, rep.mode2_peak_time, 100.0 * rep.completion_fraction, rep.completion_time,
                rep.speedup);
    return kOk;
}

int cmd_verify(const vsr::oracle::BatteryOptions& opt) {
    const auto rep = vsr::oracle::run_battery(opt);
    double worst = 0.0;
    for (const auto& c : rep.cases) {
        worst = std::max(worst, c.max_deviation);
        std::printf("%s N=%d gamma=(%g,%g) max|dP|=%.3e mass_err=%.1e\n", c.pass ? "PASS" : "FAIL", c.n_half,
                    c.rates.gamma1, c.rates.gamma2, c.max_deviation, c.max_mass_error);
    }
    std::printf("closed form vs dense (N=1): %.3e\n", rep.closed_form_vs_dense);
    std::printf("observables vs closed form (N=1): %.3e\n", rep.observables_vs_closed_form);
    std::printf("%s: worst deviation %.3e (tolerance %.1e)\n", rep.pass ? "PASS" : "FAIL", worst, opt.tolerance);
    return rep.pass ? kOk : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-mode superradiance simulator for V-type three-level atoms"};
    app.require_subcommand(1);

    CommonFlags sim_flags, sweep_flags, synth_flags;
    auto* simulate = app.add_subcommand("simulate", "Integrate one scenario and write its time series");
    add_common(simulate, sim_flags, false);

    auto* sweep = app.add_subcommand("sweep", "Run a range of N and write a sweep summary");
    add_common(sweep, sweep_flags, true);

    std::string analyze_in;
    std::optional<std::string> analyze_out;
    std::optional<double> alpha;
    auto* analyze = app.add_subcommand("analyze", "Fit a sweep against the Dicke criteria");
    analyze->add_option("--in,--sweep-dir", analyze_in, "Sweep output directory")->required();
    analyze->add_option("--out,--out-dir", analyze_out, "Report directory (default: the sweep directory)");
    analyze->add_option("--alpha-offset", alpha, "Display offset alpha * tau_D added as a t_display column");

    std::optional<double> fraction;
    auto* synthesis = app.add_subcommand("synthesis", "Timing report for the two-pulse synthesis");
    add_common(synthesis, synth_flags, false);
    synthesis->add_option("--completion-fraction", fraction, "Photon fraction defining completion (default 0.9)");

    vsr::oracle::BatteryOptions verify_opt;
    auto* verify = app.add_subcommand("verify", "Check the integrator against the dense oracle");
    verify->add_option("--max-n", verify_opt.max_n, "Largest N checked");
    verify->add_option("--dim-cap", verify_opt.dim_cap, "Largest dense dimension allowed");
    verify->add_option("--probes", verify_opt.probes, "Probe times per case");
    verify->add_option("--tolerance", verify_opt.tolerance, "Max allowed probability deviation");
    verify->add_option("--perturb-rate", verify_opt.perturb, "Inject a relative rate error (negative control)");
    verify->add_option("--rel-tol", verify_opt.solver.rel_tol, "Relative tolerance");
    verify->add_option("--abs-tol", verify_opt.solver.abs_tol, "Absolute tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }

    try {
        if (*simulate) return cmd_simulate(sim_flags);
        if (*sweep) return cmd_sweep(sweep_flags);
        if (*analyze) return cmd_analyze(analyze_in, analyze_out, alpha);
        if (*synthesis) return cmd_synthesis(synth_flags, fraction);
        if (*verify) return cmd_verify(verify_opt);
    } catch (const vsr::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kValidation;
    } catch (const vsr::NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kNumerical;
    } catch (const vsr::IoError& e) {
        std::fprintf(stderr, "I/O error: %s\n", e.what());
        return kIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "I/O error: %s\n", e.what());
        return kIo;
    }
    return kOk;
}
