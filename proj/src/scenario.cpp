#include "vsr/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <thread>

#include "vsr/errors.hpp"
#include "vsr/io.hpp"

namespace vsr {

using nlohmann::json;

void Scenario::validate() const {
    rates.validate();
    solver.validate();
    if (n_values.empty()) throw ValidationError("scenario has no N values");
    for (int n : n_values) {
        if (n < 1) throw ValidationError("N must be >= 1, got " + std::to_string(n));
    }
    if (!(synthesis_completion_fraction > 0.0 && synthesis_completion_fraction <= 1.0)) {
        throw ValidationError("synthesis_completion_fraction must be in (0, 1]");
    }
    if (init == InitialKind::custom) {
        throw ValidationError("custom initial distributions are not available from scenario files");
    }
}

std::vector<int> expand_range(int n_min, int n_max, int step) {
    if (step <= 0) throw ValidationError("range step must be positive, got " + std::to_string(step));
    if (n_min < 1 || n_max < n_min) {
        throw ValidationError("invalid N range [" + std::to_string(n_min) + ", " + std::to_string(n_max) + "]");
    }
    std::vector<int> out;
    for (int n = n_min; n <= n_max; n += step) out.push_back(n);
    return out;
}

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ValidationError(where + " must be a JSON object");
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) throw ValidationError("unknown key '" + key + "' in " + where);
    }
}

template <class T>
T get_as(const json& obj, const char* key, const std::string& where) {
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError("bad or missing '" + std::string(key) + "' in " + where);
    }
}

}  // namespace

Scenario parse_scenario(const json& doc) {
    reject_unknown(doc,
                   {"gamma1", "gamma2", "n_values", "init", "solver", "output_dir", "raw_eq2_intensity",
                    "synthesis_completion_fraction"},
                   "scenario");
    Scenario sc;
    if (doc.contains("gamma1")) sc.rates.gamma1 = get_as<double>(doc, "gamma1", "scenario");
    if (doc.contains("gamma2")) sc.rates.gamma2 = get_as<double>(doc, "gamma2", "scenario");
    if (doc.contains("n_values")) {
        const json& nv = doc.at("n_values");
        if (nv.is_array()) {
            for (const json& v : nv) {
                if (!v.is_number_integer()) throw ValidationError("n_values entries must be integers");
                sc.n_values.push_back(v.get<int>());
            }
        } else {
            reject_unknown(nv, {"min", "max", "step"}, "n_values");
            const int step = nv.contains("step") ? get_as<int>(nv, "step", "n_values") : 1;
            sc.n_values = expand_range(get_as<int>(nv, "min", "n_values"), get_as<int>(nv, "max", "n_values"), step);
        }
    }
    if (doc.contains("init")) sc.init = parse_initial_kind(get_as<std::string>(doc, "init", "scenario"));
    if (doc.contains("output_dir")) sc.output_dir = get_as<std::string>(doc, "output_dir", "scenario");
    if (doc.contains("raw_eq2_intensity")) {
        sc.solver.raw_eq2_intensity = get_as<bool>(doc, "raw_eq2_intensity", "scenario");
    }
    if (doc.contains("synthesis_completion_fraction")) {
        sc.synthesis_completion_fraction = get_as<double>(doc, "synthesis_completion_fraction", "scenario");
    }
    if (doc.contains("solver")) {
        const json& s = doc.at("solver");
        reject_unknown(s, {"rel_tol", "abs_tol", "t_max", "completion_epsilon", "sample_count", "max_steps"},
                       "solver");
        if (s.contains("rel_tol")) sc.solver.rel_tol = get_as<double>(s, "rel_tol", "solver");
        if (s.contains("abs_tol")) sc.solver.abs_tol = get_as<double>(s, "abs_tol", "solver");
        if (s.contains("completion_epsilon")) {
            sc.solver.completion_epsilon = get_as<double>(s, "completion_epsilon", "solver");
        }
        if (s.contains("sample_count")) sc.solver.sample_count = get_as<std::size_t>(s, "sample_count", "solver");
        if (s.contains("max_steps")) sc.solver.max_steps = get_as<std::size_t>(s, "max_steps", "solver");
        if (s.contains("t_max")) {
            const json& t = s.at("t_max");
            if (t.is_string() && t.get<std::string>() == "auto") {
                sc.solver.t_max.reset();
            } else if (t.is_number()) {
                sc.solver.t_max = t.get<double>();
            } else {
                throw ValidationError("solver.t_max must be a number or \"auto\"");
            }
        }
    }
    // n_values may still be empty here; the command line can supply them.
    sc.rates.validate();
    sc.solver.validate();
    for (int n : sc.n_values) {
        if (n < 1) throw ValidationError("N must be >= 1, got " + std::to_string(n));
    }
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
    const std::string text = io::read_file(path);
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw ValidationError(path.string() + ": scenario is not valid JSON");
    return parse_scenario(doc);
}

json scenario_json(const Scenario& sc) {
    json solver = {{"rel_tol", sc.solver.rel_tol},
                   {"abs_tol", sc.solver.abs_tol},
                   {"completion_epsilon", sc.solver.completion_epsilon},
                   {"sample_count", sc.solver.sample_count},
                   {"max_steps", sc.solver.max_steps}};
    if (sc.solver.t_max) {
        solver["t_max"] = *sc.solver.t_max;
    } else {
        solver["t_max"] = "auto";
    }
    return {{"gamma1", sc.rates.gamma1},
            {"gamma2", sc.rates.gamma2},
            {"n_values", sc.n_values},
            {"init", std::string(to_string(sc.init))},
            {"solver", solver},
            {"output_dir", sc.output_dir},
            {"raw_eq2_intensity", sc.solver.raw_eq2_intensity},
            {"synthesis_completion_fraction", sc.synthesis_completion_fraction}};
}

RunResult run_single(const DecayRates& rates, int n_half, InitialKind init, const SolverConfig& solver) {
    const StateSpace space(n_half);
    const Generator gen = build_generator(space, rates);
    RunResult out;
    out.series = integrate(gen, initial_distribution(space, init), solver);
    out.track = observable_track(out.series);
    out.record = summarize_run(out.series, init);
    return out;
}

std::vector<SweepOutcome> run_sweep(const Scenario& scenario, unsigned threads,
                                    const std::function<void(const RunResult&)>& on_result) {
    scenario.validate();
    const std::size_t count = scenario.n_values.size();
    std::vector<SweepOutcome> outcomes(count);
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        for (std::size_t i = next++; i < count; i = next++) {
            SweepOutcome& oc = outcomes[i];
            oc.n_half = scenario.n_values[i];
            try {
                RunResult res = run_single(scenario.rates, oc.n_half, scenario.init, scenario.solver);
                if (on_result) on_result(res);
                oc.record = std::move(res.record);
                oc.ok = true;
            } catch (const std::exception& e) {
                oc.ok = false;
                oc.error = e.what();
            }
        }
    };

    const unsigned n_threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_threads);
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }
    return outcomes;
}

}  // namespace vsr
