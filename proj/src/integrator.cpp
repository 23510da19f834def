#include "vsr/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vsr/errors.hpp"

namespace vsr {

void SolverConfig::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
        throw ValidationError("solver tolerances must be positive");
    }
    if (!(completion_epsilon > 0.0) || completion_epsilon >= 1.0) {
        throw ValidationError("completion_epsilon must be in (0, 1)");
    }
    if (sample_count < 2) {
        throw ValidationError("sample_count must be >= 2");
    }
    if (t_max && !(*t_max > 0.0 && std::isfinite(*t_max))) {
        throw ValidationError("t_max must be positive and finite");
    }
    if (max_steps == 0) {
        throw ValidationError("max_steps must be positive");
    }
}

double auto_t_max(const DecayRates& rates, int n_half) {
    rates.validate();
    if (n_half < 1) {
        throw ValidationError("n_half must be >= 1");
    }
    const double fast = std::max(rates.gamma1, rates.gamma2);
    double slow = std::min(rates.gamma1, rates.gamma2);
    if (slow == 0.0) slow = fast;
    const double n = static_cast<double>(n_half);
    constexpr double kEuler = 0.5772156649015329;
    return 20.0 / (slow * 2.0 * n) + 10.0 * (kEuler + std::log(n)) / (n * fast);
}

namespace {

// Dormand–Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension (Hairer & Wanner, dopri5 contd5).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr std::size_t kAug = 6;       // A1 A2 M1_1 M1_2 M2_1 M2_2
constexpr std::size_t kScalars = 10;  // I1 I2 A1 A2 M1_1 M1_2 M2_1 M2_2 ground total

// Linear functionals of P evaluated alongside one generator product.
struct Functionals {
    double i1 = 0, i2 = 0, ground = 0, total = 0;      // of the input
    double di1 = 0, di2 = 0, dground = 0, dtotal = 0;  // of G * input
};

class Kernel {
public:
    Kernel(const Generator& g, bool raw) : g_(g), dim_(g.dim()) {
        const StateSpace& space = g.space();
        const double w1 = raw ? 1.0 : g.rates().gamma1;
        const double w2 = raw ? 1.0 : g.rates().gamma2;
        weight1_.resize(dim_);
        weight2_.resize(dim_);
        absorbing_.resize(dim_);
        for (std::size_t s = 0; s < dim_; ++s) {
            const auto [n, m] = space.state_of(s);
            weight1_[s] = w1 * static_cast<double>(coop_rate_mode1(n, m, space.n_half()));
            weight2_[s] = w2 * static_cast<double>(coop_rate_mode2(n, m, space.n_half()));
            absorbing_[s] = g.is_absorbing(s) ? 1.0 : 0.0;
        }
    }

    std::size_t dim() const noexcept { return dim_; }

    // k = f(t, y) for the augmented system; returns the scalar functionals.
    Functionals eval(double t, const double* y, double* k) const noexcept {
        const auto& diag = g_.diagonal();
        Functionals f;
        for (std::size_t s = 0; s < dim_; ++s) {
            double v = diag[s] * y[s];
            const std::uint32_t a = g_.source1(s);
            const std::uint32_t b = g_.source2(s);
            if (a != Generator::kNoSource) v += g_.rate1(s) * y[a];
            if (b != Generator::kNoSource) v += g_.rate2(s) * y[b];
            k[s] = v;
            f.i1 += weight1_[s] * y[s];
            f.i2 += weight2_[s] * y[s];
            f.ground += absorbing_[s] * y[s];
            f.total += y[s];
            f.di1 += weight1_[s] * v;
            f.di2 += weight2_[s] * v;
            f.dground += absorbing_[s] * v;
            f.dtotal += v;
        }
        k[dim_ + 0] = f.i1;
        k[dim_ + 1] = f.i2;
        k[dim_ + 2] = t * f.i1;
        k[dim_ + 3] = t * f.i2;
        k[dim_ + 4] = t * t * f.i1;
        k[dim_ + 5] = t * t * f.i2;
        return f;
    }

    // Scalar values of y in dense-output order.
    static std::array<double, kScalars> values(const Functionals& f, const double* aug) {
        return {f.i1, f.i2, aug[0], aug[1], aug[2], aug[3], aug[4], aug[5], f.ground, f.total};
    }
    // Scalar derivatives of a stage in dense-output order.
    static std::array<double, kScalars> derivatives(const Functionals& f, const double* kaug) {
        return {f.di1, f.di2, kaug[0], kaug[1], kaug[2], kaug[3], kaug[4], kaug[5], f.dground, f.dtotal};
    }

private:
    const Generator& g_;
    std::size_t dim_;
    std::vector<double> weight1_, weight2_, absorbing_;
};

struct DenseStep {
    double t0 = 0;
    double h = 0;
    std::array<std::array<double, kScalars>, 5> coeff{};

    double eval(std::size_t j, double t) const noexcept {
        const double theta = h > 0 ? std::clamp((t - t0) / h, 0.0, 1.0) : 0.0;
        const double theta1 = 1.0 - theta;
        return coeff[0][j] +
               theta * (coeff[1][j] + theta1 * (coeff[2][j] + theta * (coeff[3][j] + theta1 * coeff[4][j])));
    }
};

}  // namespace

TimeSeries integrate(const Generator& generator, const Distribution& init, const SolverConfig& config,
                     std::span<const double> snapshot_times) {
    config.validate();
    const std::size_t dim = generator.dim();
    if (init.size() != dim) {
        throw ValidationError("initial distribution has " + std::to_string(init.size()) +
                              " entries, generator has " + std::to_string(dim));
    }
    if (!std::is_sorted(snapshot_times.begin(), snapshot_times.end()) ||
        (!snapshot_times.empty() && snapshot_times.front() < 0.0)) {
        throw ValidationError("snapshot times must be sorted and non-negative");
    }

    const Kernel kernel(generator, config.raw_eq2_intensity);
    const std::size_t len = dim + kAug;
    const double horizon = config.t_max ? *config.t_max
                                        : 64.0 * auto_t_max(generator.rates(), generator.space().n_half());
    const double mass_target = 1.0 - config.completion_epsilon;
    const double negativity_floor = -10.0 * config.abs_tol;

    TimeSeries out;
    out.n_half = generator.space().n_half();
    out.rates = generator.rates();
    out.raw_eq2_intensity = config.raw_eq2_intensity;

    std::vector<double> y(len, 0.0), y1(len), ytmp(len);
    std::copy(init.begin(), init.end(), y.begin());
    std::array<std::vector<double>, 7> k;
    for (auto& v : k) v.assign(len, 0.0);

    double t = 0.0;
    Functionals f1 = kernel.eval(t, y.data(), k[0].data());
    std::array<double, kScalars> v0 = Kernel::values(f1, y.data() + dim);
    std::array<std::array<double, kScalars>, 7> sd{};
    sd[0] = Kernel::derivatives(f1, k[0].data() + dim);

    std::size_t next_snapshot = 0;
    while (next_snapshot < snapshot_times.size() && snapshot_times[next_snapshot] <= 0.0) {
        out.snapshots.push_back({snapshot_times[next_snapshot], init});
        ++next_snapshot;
    }
    const double last_snapshot = snapshot_times.empty() ? 0.0 : snapshot_times.back();

    std::vector<DenseStep> dense;
    double min_prob = *std::min_element(init.begin(), init.end());

    auto done = [&](double ground, double now) {
        return ground >= mass_target && now >= last_snapshot;
    };

    bool completed = done(v0[8], t);
    double h = std::min(horizon / 100.0, 1.0 / std::max(generator.max_outflow(), 1e-300));
    double err_old = 1e-4;
    bool last_rejected = false;
    const auto start_bound = [&]() { return config.t_max ? *config.t_max : horizon; };

    while (!completed && t < start_bound()) {
        if (out.stats.accepted_steps + out.stats.rejected_steps >= config.max_steps) {
            throw NumericalError("max_steps (" + std::to_string(config.max_steps) + ") exhausted at t=" +
                                 std::to_string(t));
        }
        double target = start_bound();
        if (next_snapshot < snapshot_times.size()) target = std::min(target, snapshot_times[next_snapshot]);
        bool lands = false;
        if (t + h >= target - 1e-12 * std::max(1.0, target)) {
            h = target - t;
            lands = true;
        }
        if (h <= 1e-14 * std::max(1.0, std::abs(t))) {
            throw NumericalError("step size underflow at t=" + std::to_string(t));
        }

        auto stage = [&](std::size_t idx, double c, auto&& combine) {
            for (std::size_t i = 0; i < len; ++i) ytmp[i] = y[i] + h * combine(i);
            const Functionals f = kernel.eval(t + c * h, ytmp.data(), k[idx].data());
            sd[idx] = Kernel::derivatives(f, k[idx].data() + dim);
        };
        const auto& K = k;
        stage(1, c2, [&](std::size_t i) { return a21 * K[0][i]; });
        stage(2, c3, [&](std::size_t i) { return a31 * K[0][i] + a32 * K[1][i]; });
        stage(3, c4, [&](std::size_t i) { return a41 * K[0][i] + a42 * K[1][i] + a43 * K[2][i]; });
        stage(4, c5, [&](std::size_t i) {
            return a51 * K[0][i] + a52 * K[1][i] + a53 * K[2][i] + a54 * K[3][i];
        });
        stage(5, 1.0, [&](std::size_t i) {
            return a61 * K[0][i] + a62 * K[1][i] + a63 * K[2][i] + a64 * K[3][i] + a65 * K[4][i];
        });
        for (std::size_t i = 0; i < len; ++i) {
            y1[i] = y[i] + h * (a71 * K[0][i] + a73 * K[2][i] + a74 * K[3][i] + a75 * K[4][i] +
                                a76 * K[5][i]);
        }
        const Functionals f7 = kernel.eval(t + h, y1.data(), k[6].data());
        sd[6] = Kernel::derivatives(f7, k[6].data() + dim);

        double err = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
            const double e = h * (e1 * K[0][i] + e3 * K[2][i] + e4 * K[3][i] + e5 * K[4][i] + e6 * K[5][i] +
                                  e7 * K[6][i]);
            const double scale = config.abs_tol + config.rel_tol * std::max(std::abs(y[i]), std::abs(y1[i]));
            err = std::max(err, std::abs(e) / scale);
        }
        if (!std::isfinite(err)) {
            throw NumericalError("non-finite error estimate at t=" + std::to_string(t));
        }

        constexpr double kSafety = 0.9, kBeta = 0.04, kMinShrink = 0.2, kMaxGrow = 10.0;
        if (err <= 1.0) {
            double step_min = 0.0;
            for (std::size_t i = 0; i < dim; ++i) step_min = std::min(step_min, y1[i]);
            min_prob = std::min(min_prob, step_min);
            if (step_min < negativity_floor) {
                throw NumericalError("probability went negative (" + std::to_string(step_min) + ") at t=" +
                                     std::to_string(t + h));
            }

            const std::array<double, kScalars> v1 = Kernel::values(f7, y1.data() + dim);
            DenseStep ds;
            ds.t0 = t;
            ds.h = h;
            for (std::size_t j = 0; j < kScalars; ++j) {
                const double dy = v1[j] - v0[j];
                const double bspl = h * sd[0][j] - dy;
                ds.coeff[0][j] = v0[j];
                ds.coeff[1][j] = dy;
                ds.coeff[2][j] = bspl;
                ds.coeff[3][j] = dy - h * sd[6][j] - bspl;
                ds.coeff[4][j] = h * (d1 * sd[0][j] + d3 * sd[2][j] + d4 * sd[3][j] + d5 * sd[4][j] +
                                      d6 * sd[5][j] + d7 * sd[6][j]);
            }
            dense.push_back(ds);

            t = lands ? target : t + h;
            std::swap(y, y1);
            std::swap(k[0], k[6]);
            sd[0] = sd[6];
            v0 = v1;
            ++out.stats.accepted_steps;

            while (next_snapshot < snapshot_times.size() && snapshot_times[next_snapshot] <= t) {
                out.snapshots.push_back({snapshot_times[next_snapshot], Distribution(y.begin(), y.begin() + dim)});
                ++next_snapshot;
            }
            completed = done(v0[8], t);

            const double fac11 = std::pow(err, 0.2 - kBeta * 0.75);
            double fac = fac11 / std::pow(err_old, kBeta) / kSafety;
            fac = std::clamp(fac, 1.0 / kMaxGrow, 1.0 / kMinShrink);
            double h_new = h / fac;
            if (last_rejected) h_new = std::min(h_new, h);
            err_old = std::max(err, 1e-4);
            last_rejected = false;
            h = h_new;
        } else {
            const double fac11 = std::pow(err, 0.2 - kBeta * 0.75);
            h = h / std::min(1.0 / kMinShrink, fac11 / kSafety);
            last_rejected = true;
            ++out.stats.rejected_steps;
        }
    }

    out.t_end = t;
    out.completed = completed;
    out.stats.min_probability = min_prob;
    out.final_distribution.assign(y.begin(), y.begin() + dim);

    // Resample on a uniform grid through the continuous extension.
    const std::size_t ns = config.sample_count;
    out.times.resize(ns);
    for (auto& m : out.modes) {
        m.intensity.resize(ns);
        m.area.resize(ns);
        m.moment1.resize(ns);
        m.moment2.resize(ns);
    }
    out.ground_mass.resize(ns);
    out.total_mass.resize(ns);

    std::size_t cursor = 0;
    for (std::size_t i = 0; i < ns; ++i) {
        const double ti = (i + 1 == ns) ? t : t * static_cast<double>(i) / static_cast<double>(ns - 1);
        out.times[i] = ti;
        std::array<double, kScalars> s{};
        if (dense.empty()) {
            s = v0;
        } else {
            while (cursor + 1 < dense.size() && dense[cursor].t0 + dense[cursor].h < ti) ++cursor;
            for (std::size_t j = 0; j < kScalars; ++j) s[j] = dense[cursor].eval(j, ti);
        }
        if (i + 1 == ns) s = v0;  // exact end state
        for (std::size_t mode = 0; mode < 2; ++mode) {
            ModeSeries& ms = out.modes[mode];
            ms.intensity[i] = std::max(0.0, s[mode]);
            ms.area[i] = std::max(0.0, s[2 + mode]);
            ms.moment1[i] = std::max(0.0, s[4 + mode]);
            ms.moment2[i] = std::max(0.0, s[6 + mode]);
            if (i > 0) {
                ms.area[i] = std::max(ms.area[i], ms.area[i - 1]);
                ms.moment1[i] = std::max(ms.moment1[i], ms.moment1[i - 1]);
                ms.moment2[i] = std::max(ms.moment2[i], ms.moment2[i - 1]);
            }
        }
        double g = std::clamp(s[8], 0.0, 1.0);
        if (i > 0) g = std::max(g, out.ground_mass[i - 1]);
        out.ground_mass[i] = g;
        out.total_mass[i] = s[9];
    }
    return out;
}

}  // namespace vsr
