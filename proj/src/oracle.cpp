#include "vsr/oracle.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vsr/errors.hpp"

namespace vsr::oracle {

namespace {

// Own enumeration, m ascending then n ascending.
Eigen::Index local_index(int n, int m) { return static_cast<Eigen::Index>(m) * (m + 1) / 2 + n; }

}  // namespace

OracleResult dense_expm_solve(const StateSpace& space, const DecayRates& rates, const Distribution& init,
                              std::span<const double> probe_times, std::size_t max_dim) {
    const std::size_t dim = space.dim();
    if (dim > max_dim) {
        throw ValidationError("dense oracle limited to dimension " + std::to_string(max_dim) + ", got " +
                              std::to_string(dim));
    }
    if (init.size() != dim) {
        throw ValidationError("initial distribution size mismatch");
    }
    if (!std::is_sorted(probe_times.begin(), probe_times.end()) ||
        (!probe_times.empty() && probe_times.front() < 0.0)) {
        throw ValidationError("probe times must be sorted and non-negative");
    }
    rates.validate();

    const int top = space.total_atoms();
    const auto d = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d, d);
    auto i1 = [top](int n, int m) { return static_cast<double>(n) * (top - m + 1); };
    auto i2 = [top](int n, int m) { return static_cast<double>(m - n) * (top - m + 1); };
    for (int m = 0; m <= top; ++m) {
        for (int n = 0; n <= m; ++n) {
            const Eigen::Index row = local_index(n, m);
            g(row, row) -= rates.gamma1 * i1(n, m) + rates.gamma2 * i2(n, m);
            if (m + 1 <= top && n + 1 <= m + 1) {
                g(row, local_index(n + 1, m + 1)) += rates.gamma1 * i1(n + 1, m + 1);
            }
            if (m + 1 <= top) {
                g(row, local_index(n, m + 1)) += rates.gamma2 * i2(n, m + 1);
            }
        }
    }

    Eigen::VectorXd p0(d);
    for (int m = 0; m <= top; ++m) {
        for (int n = 0; n <= m; ++n) p0(local_index(n, m)) = init[space.index_of(n, m)];
    }

    OracleResult out;
    out.probe_times.assign(probe_times.begin(), probe_times.end());
    for (double t : probe_times) {
        Eigen::VectorXd p = p0;
        if (t > 0.0) {
            const Eigen::MatrixXd propagator = (g * t).exp();
            p = propagator * p0;
        }
        Distribution dist(dim);
        for (int m = 0; m <= top; ++m) {
            for (int n = 0; n <= m; ++n) dist[space.index_of(n, m)] = p(local_index(n, m));
        }
        out.distributions.push_back(std::move(dist));
    }
    return out;
}

namespace {

// (1 - e^{-a t}) / a, continuous through a = 0.
double phi(double a, double t) {
    if (std::isinf(t)) return a > 0.0 ? 1.0 / a : std::numeric_limits<double>::infinity();
    if (a == 0.0) return t;
    return -std::expm1(-a * t) / a;
}

// Integral of u^k e^{-s u} over [0, t].
double partial_gamma(int k, double s, double t) {
    double fact = 1.0;
    for (int j = 2; j <= k; ++j) fact *= j;
    const double full = fact / std::pow(s, k + 1);
    if (std::isinf(t)) return full;
    double sum = 0.0, term = 1.0;
    for (int j = 0; j <= k; ++j) {
        if (j > 0) term *= s * t / j;
        sum += term;
    }
    return full * (1.0 - std::exp(-s * t) * sum);
}

}  // namespace

TwoAtomSolution two_atom_closed_form(double gamma1, double gamma2, double t) {
    DecayRates{gamma1, gamma2}.validate();
    const double r = gamma1 + gamma2;
    TwoAtomSolution sol;
    if (std::isinf(t)) {
        sol.p00 = 1.0;
    } else {
        const double decay = std::exp(-r * t);
        sol.p12 = decay;
        // P11' = Γ2 e^{-rt} - 2Γ1 P11 and P01' = Γ1 e^{-rt} - 2Γ2 P01.
        sol.p11 = gamma2 * decay * phi(gamma1 - gamma2, t);
        sol.p01 = gamma1 * decay * phi(gamma2 - gamma1, t);
        sol.p00 = 1.0 - sol.p12 - sol.p11 - sol.p01;
    }
    sol.intensity1 = gamma1 * (sol.p12 + 2.0 * sol.p11);
    sol.intensity2 = gamma2 * (sol.p12 + 2.0 * sol.p01);

    if (gamma1 == gamma2) {
        // I(t) = γ e^{-2γt} (1 + 2γt) for both modes.
        const double g = gamma1, s = 2.0 * g;
        ClosedFormMoments mom;
        mom.area = g * partial_gamma(0, s, t) + 2.0 * g * g * partial_gamma(1, s, t);
        mom.moment1 = g * partial_gamma(1, s, t) + 2.0 * g * g * partial_gamma(2, s, t);
        mom.moment2 = g * partial_gamma(2, s, t) + 2.0 * g * g * partial_gamma(3, s, t);
        sol.mode1 = mom;
        sol.mode2 = mom;
    }
    return sol;
}

}  // namespace vsr::oracle
