#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vsr/analysis.hpp"
#include "vsr/dynamics.hpp"
#include "vsr/integrator.hpp"
#include "vsr/observables.hpp"

namespace vsr {

/// One scenario: decay rates, the N values to run, the initial condition and
/// solver settings. Loaded from a JSON document; unknown keys are rejected.
struct Scenario {
    DecayRates rates;
    std::vector<int> n_values;
    InitialKind init = InitialKind::v_standard;
    SolverConfig solver;
    std::string output_dir = "out";
    double synthesis_completion_fraction = 0.9;

    void validate() const;
};

// Expands {min, max, step}; step must be positive and max >= min.
std::vector<int> expand_range(int n_min, int n_max, int step);

Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::filesystem::path& path);
nlohmann::json scenario_json(const Scenario& scenario);

struct RunResult {
    TimeSeries series;
    ObservableTrack track;
    SweepRecord record;
};

RunResult run_single(const DecayRates& rates, int n_half, InitialKind init, const SolverConfig& solver);

struct SweepOutcome {
    int n_half = 0;
    bool ok = false;
    std::string error;
    std::optional<SweepRecord> record;
};

// Runs every N of the scenario on `threads` workers. `on_result` is invoked
// from the worker thread that finished the run (it must be thread-safe); the
// outcomes are returned in n_values order regardless of scheduling.
std::vector<SweepOutcome> run_sweep(const Scenario& scenario, unsigned threads,
                                    const std::function<void(const RunResult&)>& on_result = {});

}  // namespace vsr
