#pragma once

#include <optional>
#include <span>
#include <vector>

#include "vsr/dynamics.hpp"

namespace vsr::oracle {

inline constexpr std::size_t kMaxDenseDim = 5000;

struct OracleResult {
    std::vector<double> probe_times;
    // Indexed like StateSpace so callers can compare directly.
    std::vector<Distribution> distributions;
    double max_deviation_vs_production = 0.0;
};

/// Reference propagation P(t) = exp(G t) P(0) with a dense generator built
/// straight from the rate-equation stencil. Shares nothing with the sparse
/// generator except the StateSpace indexing used to report results.
OracleResult dense_expm_solve(const StateSpace& space, const DecayRates& rates,
                              const Distribution& init, std::span<const double> probe_times,
                              std::size_t max_dim = kMaxDenseDim);

struct ClosedFormMoments {
    double area = 0.0;
    double moment1 = 0.0;
    double moment2 = 0.0;
};

struct TwoAtomSolution {
    // Probabilities of (1,2), (1,1), (0,1), (0,0).
    double p12 = 0.0, p11 = 0.0, p01 = 0.0, p00 = 0.0;
    double intensity1 = 0.0, intensity2 = 0.0;
    // Integrals from 0 to t, only available for Γ1 == Γ2.
    std::optional<ClosedFormMoments> mode1, mode2;
};

// Exact N = 1 solution started from (1, 2). Pass t = +inf for the limits.
TwoAtomSolution two_atom_closed_form(double gamma1, double gamma2, double t);

}  // namespace vsr::oracle

#include "vsr/integrator.hpp"

namespace vsr::oracle {

struct BatteryOptions {
    int max_n = 5;
    std::size_t dim_cap = kMaxDenseDim;
    std::size_t probes = 20;
    double tolerance = 1e-8;
    // Relative error injected into one transition leaving the initial state of
    // the production generator (negative control).
    double perturb = 0.0;
    SolverConfig solver;
    std::vector<DecayRates> rate_sets = {{1.0, 1.0}, {1.0, 0.1}, {1.0, 0.0}, {0.0, 0.1}};
};

struct BatteryCase {
    int n_half = 0;
    DecayRates rates;
    double max_deviation = 0.0;
    double max_mass_error = 0.0;
    bool pass = false;
};

struct BatteryReport {
    std::vector<BatteryCase> cases;
    double closed_form_vs_dense = 0.0;         // N = 1, Γ = (1, 1)
    double observables_vs_closed_form = 0.0;  // tau, sigma, area at N = 1
    bool pass = false;
};

// Production integrator against the dense oracle for every N <= max_n and
// every rate set, plus the two-atom closed-form checks.
BatteryReport run_battery(const BatteryOptions& options);

}  // namespace vsr::oracle
