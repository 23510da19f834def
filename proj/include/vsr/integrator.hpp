#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "vsr/dynamics.hpp"

namespace vsr {

struct SolverConfig {
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    std::optional<double> t_max;         // nullopt: auto horizon, run to completion
    double completion_epsilon = 1e-6;    // allowed mass outside absorbing states
    std::size_t sample_count = 2000;
    std::size_t max_steps = 5'000'000;
    // Report the bare cooperative sums, without the Γ weight.
    bool raw_eq2_intensity = false;

    void validate() const;
};

// Per-mode sampled observables. `moment1`/`moment2` are the integrals of
// t·I(t) and t²·I(t) from 0.
struct ModeSeries {
    std::vector<double> intensity;
    std::vector<double> area;
    std::vector<double> moment1;
    std::vector<double> moment2;
};

struct Snapshot {
    double time = 0.0;
    Distribution distribution;
};

struct SolverStats {
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
    double min_probability = 0.0;  // most negative entry seen at accepted steps
};

struct TimeSeries {
    int n_half = 0;
    DecayRates rates;
    bool raw_eq2_intensity = false;

    std::vector<double> times;
    std::array<ModeSeries, 2> modes;
    // Probability held by absorbing (zero-outflow) states. This is P(0,0)
    // whenever both rates are positive.
    std::vector<double> ground_mass;
    std::vector<double> total_mass;

    Distribution final_distribution;
    std::vector<Snapshot> snapshots;

    double t_end = 0.0;
    bool completed = false;
    SolverStats stats;

    const ModeSeries& mode(Mode k) const { return modes[k == Mode::first ? 0 : 1]; }
    ModeSeries& mode(Mode k) { return modes[k == Mode::first ? 0 : 1]; }
    std::size_t size() const noexcept { return times.size(); }
};

// Horizon estimate 20/(Γ_slow·2N) + 10·(E0 + ln N)/(N·Γ_fast), zero rates
// excluded from Γ_slow.
double auto_t_max(const DecayRates& rates, int n_half);

/// Integrates dP/dt = G P with the Dormand–Prince 5(4) pair.
///
/// The state is augmented with A_k, M1_k, M2_k (dA/dt = I_k, dM1/dt = t I_k,
/// dM2/dt = t² I_k) so the moments share the step-size control. Scalar
/// observables are resampled on a uniform grid over [0, t_end] through the
/// pair's continuous extension. The run stops once the absorbed mass reaches
/// 1 - completion_epsilon (and every snapshot time has been passed), at
/// t_max, or throws NumericalError when max_steps is exhausted.
///
/// `snapshot_times` must be sorted; the full distribution is captured at each
/// by landing a step on it exactly.
TimeSeries integrate(const Generator& generator, const Distribution& init,
                     const SolverConfig& config,
                     std::span<const double> snapshot_times = {});

}  // namespace vsr
