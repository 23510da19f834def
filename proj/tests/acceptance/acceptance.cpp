// Acceptance battery: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.
//
//   vsr_acceptance [--cli path/to/vsr] [--work dir] [--threads k]
//
// With --cli the determinism check re-runs a sweep through the command-line
// tool and compares the files byte for byte.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <string>
#include <thread>

#include "vsr/analysis.hpp"
#include "vsr/io.hpp"
#include "vsr/oracle.hpp"
#include "vsr/scenario.hpp"

namespace fs = std::filesystem;
using namespace vsr;

namespace {

struct Sweep {
    std::map<int, RunResult> runs;
    std::vector<std::string> failures;
};

Sweep run_family(const DecayRates& rates, InitialKind init, const std::vector<int>& ns, unsigned threads) {
    Scenario sc;
    sc.rates = rates;
    sc.init = init;
    sc.n_values = ns;
    Sweep out;
    std::mutex mu;
    const auto outcomes = run_sweep(sc, threads, [&](const RunResult& r) {
        std::lock_guard lock(mu);
        out.runs.emplace(r.series.n_half, r);
    });
    for (const auto& oc : outcomes) {
        if (!oc.ok) out.failures.push_back("N=" + std::to_string(oc.n_half) + ": " + oc.error);
    }
    return out;
}

int g_failed = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
    if (!pass) ++g_failed;
    std::printf("[%s] %2d %-26s %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::vector<int> range(int a, int b, int step) { return expand_range(a, b, step); }

bool same_file(const fs::path& a, const fs::path& b) {
    return fs::exists(a) && fs::exists(b) && io::read_file(a) == io::read_file(b);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vsr acceptance battery"};
    std::string cli;
    std::string work = (fs::temp_directory_path() / "vsr_acceptance").string();
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    app.add_option("--cli", cli, "vsr executable for the determinism check");
    app.add_option("--work", work, "Scratch directory");
    app.add_option("--threads", threads, "Worker threads for the sweeps");
    CLI11_PARSE(app, argc, argv);

    const auto started = std::chrono::steady_clock::now();

    // 1. Oracle equivalence.
    {
        const auto rep = oracle::run_battery({});
        double worst = 0.0;
        for (const auto& c : rep.cases) worst = std::max(worst, c.max_deviation);
        report(1, "oracle equivalence", rep.pass && worst <= 1e-8,
               fmt("%zu cases, N<=5, max|dP| = %.3e (tol 1e-8)", rep.cases.size(), worst));
    }

    // 2. Two-atom closed form.
    {
        SolverConfig cfg;
        cfg.completion_epsilon = 1e-12;
        const auto res = run_single({1.0, 1.0}, 1, InitialKind::v_standard, cfg);
        const auto a = asymptotics(res.series);
        double dev = 0.0;
        for (const auto& m : a.modes) {
            dev = std::max({dev, std::abs(m.area - 1.0), std::abs(m.tau - 0.75),
                            std::abs(m.sigma - std::sqrt(7.0) / 3.0)});
        }
        report(2, "two-atom closed form", dev <= 1e-6,
               fmt("A=%.9f tau=%.9f sigma=%.9f, max dev %.2e (tol 1e-6)", a.modes[0].area, a.modes[0].tau,
                   a.modes[0].sigma, dev));
    }

    const auto mid = range(50, 150, 10);
    std::printf("      running sweeps on %u thread(s)...\n", threads);
    std::fflush(stdout);
    Sweep s01 = run_family({1.0, 0.1}, InitialKind::v_standard, range(5, 150, 5), threads);
    Sweep s10 = run_family({1.0, 0.0}, InitialKind::two_level_conventional, mid, threads);
    Sweep s05 = run_family({1.0, 0.5}, InitialKind::v_standard, range(20, 150, 10), threads);
    Sweep s11 = run_family({1.0, 1.0}, InitialKind::v_standard, range(20, 150, 10), threads);
    std::vector<std::string> failures;
    for (const Sweep* s : {&s01, &s10, &s05, &s11}) {
        failures.insert(failures.end(), s->failures.begin(), s->failures.end());
    }
    for (const auto& f : failures) std::printf("      sweep failure: %s\n", f.c_str());

    auto have = [](const Sweep& s, const std::vector<int>& ns) {
        return std::all_of(ns.begin(), ns.end(), [&](int n) { return s.runs.count(n) > 0; });
    };

    // 3. Conservation and counting.
    {
        double mass_err = 0.0, count_err = 0.0;
        std::size_t runs = 0;
        for (const Sweep* s : {&s01, &s10, &s05, &s11}) {
            for (const auto& [n, r] : s->runs) {
                ++runs;
                for (double m : r.series.total_mass) mass_err = std::max(mass_err, std::abs(m - 1.0));
            }
        }
        for (const Sweep* s : {&s01, &s05, &s11}) {
            for (const auto& [n, r] : s->runs) {
                for (const auto& m : r.record.modes) count_err = std::max(count_err, std::abs(m.area_inf - n) / n);
            }
        }
        report(3, "conservation and counting", failures.empty() && mass_err <= 1e-8 && count_err <= 1e-4,
               fmt("%zu runs, max|sum P - 1| = %.2e (tol 1e-8), max|A-N|/N = %.2e (tol 1e-4)", runs, mass_err,
                   count_err));
    }

    // 4. N^2 peak scaling, mode 1 against the single-mode reduction.
    if (have(s01, mid) && have(s10, mid)) {
        std::vector<double> logn, log1, log2;
        double worst_ratio = 0.0;
        int worst_n = 0;
        for (int n : mid) {
            const auto& rec = s01.runs.at(n).record;
            logn.push_back(std::log(n));
            log1.push_back(std::log(rec.modes[0].peak->value));
            log2.push_back(std::log(rec.modes[1].peak->value));
            const double ref = s10.runs.at(n).record.modes[0].peak->value;
            const double dev = std::abs(rec.modes[0].peak->value / ref - 1.0);
            if (dev > worst_ratio) {
                worst_ratio = dev;
                worst_n = n;
            }
        }
        const double e1 = linear_fit(logn, log1).slope;
        const double e2 = linear_fit(logn, log2).slope;
        const bool pass = std::abs(e1 - 2.0) <= 0.1 && std::abs(e2 - 2.0) <= 0.1 && worst_ratio <= 0.10;
        report(4, "N^2 peak scaling", pass,
               fmt("exponents %.4f / %.4f (2 +- 0.1); mode-1 vs reduced peak worst %.2f%% at N=%d (tol 10%%)", e1,
                   e2, 100.0 * worst_ratio, worst_n));
    } else {
        report(4, "N^2 peak scaling", false, "missing runs");
    }

    // 5. Delay formula.
    if (have(s10, mid)) {
        std::vector<double> x, y;
        for (int n : mid) {
            x.push_back(dicke_delay(n));
            y.push_back(s10.runs.at(n).record.modes[0].tau_inf);
        }
        const auto fit = linear_fit(x, y);
        const double t150 = dicke_delay(150), t300 = dicke_delay(300), cascade = 11.0 * dicke_delay(300);
        const bool anchors = std::abs(t150 - 0.0373) < 5e-5 && std::abs(t300 - 0.0209) < 5e-5 &&
                             std::abs(cascade - 0.2303) < 5e-5;
        report(5, "delay formula", fit.r_squared >= 0.995 && std::abs(fit.slope - 1.0) <= 0.1 && anchors,
               fmt("R2 = %.6f (>= 0.995), slope = %.4f (1 +- 0.1); tau_D(150) = %.4f, tau_D(300) = %.4f, "
                   "cascade = %.4f",
                   fit.r_squared, fit.slope, t150, t300, cascade));
    } else {
        report(5, "delay formula", false, "missing runs");
    }

    // 6. Noise formula and sigma valley.
    {
        bool pass = failures.empty();
        double worst_r2 = 1.0;
        std::string valley_miss;
        for (const Sweep* s : {&s01, &s05, &s11}) {
            if (!have(*s, mid)) {
                pass = false;
                continue;
            }
            for (std::size_t k = 0; k < 2; ++k) {
                std::vector<double> x, y;
                for (int n : mid) {
                    x.push_back(dicke_sigma(n));
                    y.push_back(s->runs.at(n).record.modes[k].sigma_inf);
                }
                worst_r2 = std::min(worst_r2, linear_fit(x, y).r_squared);
            }
            for (const auto& [n, r] : s->runs) {
                if (n < 20) continue;
                for (const Mode m : {Mode::first, Mode::second}) {
                    if (!has_sigma_valley(r.track, m)) {
                        valley_miss += fmt(" (%g,%g)N=%d/mode%d", r.series.rates.gamma1, r.series.rates.gamma2, n,
                                           m == Mode::first ? 1 : 2);
                    }
                }
            }
        }
        pass = pass && worst_r2 >= 0.95 && valley_miss.empty();
        report(6, "noise formula", pass,
               fmt("worst R2 = %.6f (>= 0.95) over 3 rate sets x 2 modes; valley missing:%s", worst_r2,
                   valley_miss.empty() ? " none" : valley_miss.c_str()));
    }

    // 7. Width scaling.
    if (have(s10, mid)) {
        std::vector<double> w;
        for (int n : mid) w.push_back(*s10.runs.at(n).record.modes[0].fwhm * n);
        const double mean = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
        double var = 0.0;
        for (double v : w) var += (v - mean) * (v - mean);
        const double cv = std::sqrt(var / static_cast<double>(w.size())) / mean;
        report(7, "width scaling", cv <= 0.15, fmt("fwhm*N mean %.4f, CV = %.3f%% (<= 15%%)", mean, 100.0 * cv));
    } else {
        report(7, "width scaling", false, "missing runs");
    }

    // 8. Superradiant synthesis.
    if (s01.runs.count(150)) {
        const auto rep = synthesis_report(s01.runs.at(150).series, 0.9);
        const double t1 = rep.tau1d_formula;
        constexpr double kGoldenSpeedup = 3.832;
        const bool pass = std::abs(rep.mode1_peak_time / t1 - 1.0) <= 0.25 &&
                          rep.mode2_peak_time > rep.mode1_peak_time && rep.mode2_peak_time < 3.0 * t1 &&
                          rep.completion_time <= 0.5 * (t1 + rep.tau2d_cascade_estimate) && rep.speedup >= 2.0 &&
                          std::abs(rep.speedup / kGoldenSpeedup - 1.0) <= 0.01;
        report(8, "superradiant synthesis", pass,
               fmt("peak1 %.4f (tau_1D %.4f, +-25%%), peak2 %.4f (< %.4f), t90 %.4f (<= %.4f), speedup %.3f "
                   "(>= 2, golden %.3f)",
                   rep.mode1_peak_time, t1, rep.mode2_peak_time, 3.0 * t1, rep.completion_time,
                   0.5 * (t1 + rep.tau2d_cascade_estimate), rep.speedup, kGoldenSpeedup));
    } else {
        report(8, "superradiant synthesis", false, "missing N=150 run");
    }

    // 9. Short-time sigma limit.
    if (have(s01, {20, 100})) {
        const double target = 1.0 / std::sqrt(3.0);
        double worst = 0.0;
        for (int n : {20, 100}) {
            for (const auto& mt : s01.runs.at(n).track.modes) {
                worst = std::max(worst, std::abs(mt.sigma[mt.defined_from] / target - 1.0));
            }
        }
        report(9, "short-time sigma limit", worst <= 0.05,
               fmt("first defined sigma within %.2f%% of 1/sqrt(3) (<= 5%%)", 100.0 * worst));
    } else {
        report(9, "short-time sigma limit", false, "missing runs");
    }

    // 10. Determinism.
    {
        Scenario sc;
        sc.rates = {1.0, 0.1};
        sc.n_values = range(5, 40, 5);
        auto dump_all = [&](unsigned k) {
            std::string out;
            for (const auto& oc : run_sweep(sc, k)) out += oc.ok ? io::dump(io::to_json(*oc.record)) : oc.error;
            return out;
        };
        bool pass = dump_all(1) == dump_all(std::max(2u, threads));
        std::string detail = "in-process records identical across thread counts";
        if (!pass) detail = "in-process records differ";
        if (!cli.empty()) {
            const fs::path a = fs::path(work) / "det_a", b = fs::path(work) / "det_b";
            fs::remove_all(a);
            fs::remove_all(b);
            auto run_cli = [&](const fs::path& dir, int k) {
                const std::string cmd = "\"" + cli + "\" sweep --gamma1 1 --gamma2 0.1 --n-min 5 --n-max 40 " +
                                        "--n-step 5 --threads " + std::to_string(k) + " --out \"" + dir.string() +
                                        "\" > /dev/null";
                return std::system(cmd.c_str()) == 0;
            };
            bool files_ok = run_cli(a, 1) && run_cli(b, 3);
            std::size_t compared = 0;
            for (const std::string name : {"sweep_summary.json", "sweep_summary.csv"}) {
                files_ok = files_ok && same_file(a / name, b / name);
                ++compared;
            }
            for (int n : sc.n_values) {
                for (const std::string ext : {".csv", ".json"}) {
                    const std::string name = "run_N" + std::to_string(n) + ext;
                    files_ok = files_ok && same_file(a / name, b / name);
                    ++compared;
                }
            }
            pass = pass && files_ok;
            detail += files_ok ? fmt("; CLI sweep files byte-identical (%zu files)", compared)
                               : std::string("; CLI sweep files differ");
        }
        report(10, "determinism", pass, detail);
    }

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::printf("%d of 10 criteria failed (%.1f s)\n", g_failed, secs);
    return g_failed == 0 ? 0 : 1;
}
