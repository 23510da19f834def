#include <algorithm>
#include <cmath>
#include <limits>

#include "vsr/errors.hpp"
#include "vsr/observables.hpp"
#include "vsr/oracle.hpp"

namespace vsr::oracle {

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t count) {
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    return out;
}

BatteryCase run_case(int n_half, const DecayRates& rates, const BatteryOptions& opt) {
    const StateSpace space(n_half);
    Generator gen = build_generator(space, rates);
    const Distribution init = initial_distribution(space, InitialKind::v_standard);
    if (opt.perturb != 0.0) {
        const auto start = static_cast<std::uint32_t>(space.index_of(n_half, 2 * n_half));
        const auto& trs = gen.transitions();
        const auto it = std::find_if(trs.begin(), trs.end(), [&](const Transition& t) { return t.source == start; });
        if (it != trs.end()) gen.perturb_transition(static_cast<std::size_t>(it - trs.begin()), opt.perturb);
    }

    // First pass fixes the horizon; second lands steps on the probes.
    const TimeSeries scout = integrate(gen, init, opt.solver);
    const std::vector<double> probes = linspace(0.0, scout.t_end, opt.probes);
    const TimeSeries run = integrate(gen, init, opt.solver, probes);
    const OracleResult ref = dense_expm_solve(space, rates, init, probes, opt.dim_cap);

    BatteryCase c;
    c.n_half = n_half;
    c.rates = rates;
    for (std::size_t p = 0; p < probes.size(); ++p) {
        const Distribution& prod = run.snapshots.at(p).distribution;
        const Distribution& dense = ref.distributions[p];
        double total = 0.0;
        for (std::size_t i = 0; i < prod.size(); ++i) {
            c.max_deviation = std::max(c.max_deviation, std::abs(prod[i] - dense[i]));
            total += prod[i];
        }
        c.max_mass_error = std::max(c.max_mass_error, std::abs(total - 1.0));
    }
    c.pass = c.max_deviation <= opt.tolerance;
    return c;
}

}  // namespace

BatteryReport run_battery(const BatteryOptions& opt) {
    if (opt.max_n < 1) throw ValidationError("max_n must be >= 1");
    if (dimension(opt.max_n) > opt.dim_cap) {
        throw ValidationError("N=" + std::to_string(opt.max_n) + " has dimension " +
                              std::to_string(dimension(opt.max_n)) + ", above the dense cap " +
                              std::to_string(opt.dim_cap));
    }
    if (opt.probes < 2) throw ValidationError("need at least 2 probe times");

    BatteryReport rep;
    rep.pass = true;
    for (int n = 1; n <= opt.max_n; ++n) {
        for (const DecayRates& rates : opt.rate_sets) {
            rep.cases.push_back(run_case(n, rates, opt));
            rep.pass = rep.pass && rep.cases.back().pass;
        }
    }

    // Closed form vs dense at N = 1.
    const StateSpace two(1);
    const Distribution init = initial_distribution(two, InitialKind::v_standard);
    const std::vector<double> probes = linspace(0.0, 8.0, opt.probes);
    const OracleResult dense = dense_expm_solve(two, {1.0, 1.0}, init, probes);
    for (std::size_t p = 0; p < probes.size(); ++p) {
        const TwoAtomSolution cf = two_atom_closed_form(1.0, 1.0, probes[p]);
        const Distribution& d = dense.distributions[p];
        rep.closed_form_vs_dense = std::max({rep.closed_form_vs_dense, std::abs(cf.p12 - d[two.index_of(1, 2)]),
                                             std::abs(cf.p11 - d[two.index_of(1, 1)]),
                                             std::abs(cf.p01 - d[two.index_of(0, 1)]),
                                             std::abs(cf.p00 - d[two.index_of(0, 0)])});
    }
    rep.pass = rep.pass && rep.closed_form_vs_dense <= 1e-12;

    // Observable pipeline at N = 1 against the analytic limits.
    SolverConfig tight = opt.solver;
    tight.completion_epsilon = 1e-12;
    const TimeSeries series = integrate(build_generator(two, {1.0, 1.0}), init, tight);
    const AsymptoticSummary asym = asymptotics(series);
    const TwoAtomSolution limit = two_atom_closed_form(1.0, 1.0, std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < 2; ++k) {
        const ClosedFormMoments& m = k == 0 ? *limit.mode1 : *limit.mode2;
        const double tau = m.moment1 / m.area;
        const double sigma = std::sqrt(m.moment2 / m.area - tau * tau) / tau;
        rep.observables_vs_closed_form =
            std::max({rep.observables_vs_closed_form, std::abs(asym.modes[k].area - m.area),
                      std::abs(asym.modes[k].tau - tau), std::abs(asym.modes[k].sigma - sigma)});
    }
    rep.pass = rep.pass && rep.observables_vs_closed_form <= 1e-6;
    return rep;
}

}  // namespace vsr::oracle
