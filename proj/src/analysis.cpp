#include "vsr/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "vsr/errors.hpp"

namespace vsr {

namespace {

void require_n(int n_half) {
    if (n_half < 2) {
        throw ValidationError("Dicke formulas need N >= 2, got " + std::to_string(n_half));
    }
}

void check_samples(const std::vector<double>& times, const std::vector<double>& values) {
    if (times.size() != values.size() || times.empty()) {
        throw ValidationError("times and values must be non-empty and of equal length");
    }
}

std::size_t argmax(const std::vector<double>& values) {
    return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

}  // namespace

double dicke_delay(int n_half) {
    require_n(n_half);
    const double n = static_cast<double>(n_half);
    return (kEulerGamma + std::log(n)) / n;
}

double dicke_sigma(int n_half) {
    require_n(n_half);
    return std::numbers::pi / (std::sqrt(6.0) * (kEulerGamma + std::log(static_cast<double>(n_half))));
}

Peak peak_extract(const std::vector<double>& times, const std::vector<double>& values) {
    check_samples(times, values);
    const std::size_t i = argmax(values);
    if (!(values[i] > 0.0)) {
        throw ValidationError("intensity track is identically zero");
    }
    if (i == 0) return {times[0], values[0], true};
    if (i + 1 == values.size()) return {times[i], values[i], false};

    // Parabola through the three samples around the maximum, in u = t - t_i.
    const double a = times[i] - times[i - 1];
    const double b = times[i + 1] - times[i];
    const double y0 = values[i - 1], y1 = values[i], y2 = values[i + 1];
    const double q = ((y2 - y1) / b + (y0 - y1) / a) / (a + b);
    const double p = (y2 - y1) / b - q * b;
    if (!(q < 0.0)) return {times[i], y1, false};
    const double u = std::clamp(-p / (2.0 * q), -a, b);
    return {times[i] + u, y1 + p * u + q * u * u, false};
}

Peak peak_extract(const TimeSeries& series, Mode mode) {
    return peak_extract(series.times, series.mode(mode).intensity);
}

double fwhm(const std::vector<double>& times, const std::vector<double>& values) {
    const Peak peak = peak_extract(times, values);
    const double half = 0.5 * peak.value;
    const std::size_t i = argmax(values);

    auto cross = [&](std::size_t lo, std::size_t hi) {
        // Linear interpolation of the half level between samples lo and hi.
        const double dv = values[hi] - values[lo];
        const double frac = dv != 0.0 ? (half - values[lo]) / dv : 0.5;
        return times[lo] + frac * (times[hi] - times[lo]);
    };

    std::size_t j = i;
    while (j < values.size() && values[j] >= half) ++j;
    if (j == values.size()) {
        throw ValidationError("pulse never falls below half maximum after the peak");
    }
    const double right = cross(j - 1, j);
    if (peak.at_boundary) {
        return 2.0 * (right - times[i]);
    }
    std::size_t l = i;
    while (l > 0 && values[l] >= half) --l;
    if (values[l] >= half) {
        throw ValidationError("pulse never rises through half maximum before the peak");
    }
    const double left = cross(l, l + 1);
    return right - left;
}

double fwhm(const TimeSeries& series, Mode mode) {
    return fwhm(series.times, series.mode(mode).intensity);
}

FitReport linear_fit(const std::vector<double>& xs, const std::vector<double>& ys, std::string x_label,
                     std::string y_label) {
    if (xs.size() != ys.size()) {
        throw ValidationError("linear_fit: xs and ys differ in length");
    }
    if (xs.size() < 3) {
        throw ValidationError("linear_fit needs at least 3 points, got " + std::to_string(xs.size()));
    }
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) {
        throw ValidationError("linear_fit: xs are all equal");
    }
    FitReport fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.points = xs.size();
    fit.x_label = std::move(x_label);
    fit.y_label = std::move(y_label);
    if (syy > 0.0) {
        double ss_res = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
            ss_res += r * r;
        }
        fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    }
    return fit;
}

namespace {

std::size_t sigma_minimum_index(const ModeTrack& mt) {
    if (mt.empty() || mt.sigma.size() != mt.tau.size()) {
        throw ValidationError("sigma track is nowhere defined");
    }
    const std::size_t defined = mt.sigma.size() - mt.defined_from;
    const std::size_t start = mt.defined_from + defined / 100;
    std::size_t best = start;
    for (std::size_t i = start + 1; i < mt.sigma.size(); ++i) {
        if (mt.sigma[i] < mt.sigma[best]) best = i;
    }
    return best;
}

}  // namespace

TimePoint sigma_minimum(const ObservableTrack& track, Mode mode) {
    const ModeTrack& mt = track.mode(mode);
    const std::size_t i = sigma_minimum_index(mt);
    return {track.times[i], mt.sigma[i]};
}

bool has_sigma_valley(const ObservableTrack& track, Mode mode) {
    const ModeTrack& mt = track.mode(mode);
    const std::size_t i = sigma_minimum_index(mt);
    const double final_value = mt.sigma.back();
    return i + 1 < mt.sigma.size() && mt.sigma[i] < final_value * (1.0 - 1e-9);
}

SweepRecord summarize_run(const TimeSeries& series, InitialKind init) {
    const AsymptoticSummary asym = asymptotics(series);
    const ObservableTrack track = observable_track(series);

    SweepRecord rec;
    rec.n_half = series.n_half;
    rec.rates = series.rates;
    rec.init = init;
    rec.t_end = series.t_end;
    rec.truncation_bound = asym.truncation_bound;
    for (double total : series.total_mass) {
        rec.max_mass_error = std::max(rec.max_mass_error, std::abs(total - 1.0));
    }

    for (std::size_t k = 0; k < 2; ++k) {
        const Mode mode = k == 0 ? Mode::first : Mode::second;
        ModeRecord& mr = rec.modes[k];
        const ModeAsymptotics& ma = asym.modes[k];
        mr.area_inf = ma.area;
        mr.tau_inf = ma.tau;
        mr.sigma_inf = ma.sigma;
        mr.active = ma.area > 0.0;
        if (!mr.active) continue;
        try {
            mr.peak = peak_extract(series, mode);
            mr.fwhm = fwhm(series, mode);
        } catch (const ValidationError&) {
        }
        try {
            mr.sigma_min = sigma_minimum(track, mode);
        } catch (const ValidationError&) {
        }
    }
    return rec;
}

std::vector<FitReport> criteria_battery(const SweepSummary& sweep) {
    if (sweep.records.size() < 5) {
        throw ValidationError("criteria battery needs at least 5 values of N, got " +
                              std::to_string(sweep.records.size()));
    }
    std::vector<FitReport> fits;
    for (std::size_t k = 0; k < 2; ++k) {
        const std::string prefix = k == 0 ? "mode1." : "mode2.";
        std::vector<double> n2, peak, td, tau, ts, sigma, inv_n, width;
        bool any_active = false;
        for (const SweepRecord& rec : sweep.records) {
            const ModeRecord& mr = rec.modes[k];
            if (!mr.active) continue;
            any_active = true;
            const double n = rec.n_half;
            if (mr.peak) {
                n2.push_back(n * n);
                peak.push_back(mr.peak->value);
            }
            td.push_back(dicke_delay(rec.n_half));
            tau.push_back(mr.tau_inf);
            ts.push_back(dicke_sigma(rec.n_half));
            sigma.push_back(mr.sigma_inf);
            if (mr.fwhm) {
                inv_n.push_back(1.0 / n);
                width.push_back(*mr.fwhm);
            }
        }
        if (!any_active) continue;
        fits.push_back(linear_fit(n2, peak, "N^2", prefix + "peak_intensity"));
        fits.push_back(linear_fit(td, tau, "dicke_delay(N)", prefix + "tau_inf"));
        fits.push_back(linear_fit(ts, sigma, "dicke_sigma(N)", prefix + "sigma_inf"));
        fits.push_back(linear_fit(inv_n, width, "1/N", prefix + "fwhm"));
    }
    return fits;
}

SynthesisReport synthesis_report(const TimeSeries& run, double completion_fraction) {
    if (!(run.rates.gamma1 > 0.0) || !(run.rates.gamma2 > 0.0)) {
        throw ValidationError("synthesis needs both decay rates positive (ratio Γ1/Γ2 undefined)");
    }
    if (!(completion_fraction > 0.0 && completion_fraction <= 1.0)) {
        throw ValidationError("completion fraction must be in (0, 1]");
    }
    if (run.times.empty()) {
        throw ValidationError("synthesis needs a simulated run");
    }
    const AsymptoticSummary asym = asymptotics(run);

    SynthesisReport rep;
    rep.n_half = run.n_half;
    rep.gamma_ratio = run.rates.gamma1 / run.rates.gamma2;
    rep.tau1d_formula = dicke_delay(run.n_half);
    rep.tau2d_cascade_estimate = rep.gamma_ratio * rep.tau1d_formula;
    rep.cascade_sum = rep.tau1d_formula + rep.tau2d_cascade_estimate;
    rep.cascade_sum_total_atoms = (1.0 + rep.gamma_ratio) * dicke_delay(2 * run.n_half);
    rep.mode1_peak_time = peak_extract(run, Mode::first).time;
    rep.mode2_peak_time = peak_extract(run, Mode::second).time;
    rep.completion_fraction = completion_fraction;

    const auto& a1 = run.mode(Mode::first).area;
    const auto& a2 = run.mode(Mode::second).area;
    const double target = completion_fraction * (asym.modes[0].area + asym.modes[1].area);
    std::size_t i = 0;
    while (i < a1.size() && a1[i] + a2[i] < target) ++i;
    if (i == a1.size()) i = a1.size() - 1;
    if (i == 0) {
        rep.completion_time = run.times[0];
    } else {
        const double lo = a1[i - 1] + a2[i - 1], hi = a1[i] + a2[i];
        const double frac = hi > lo ? (target - lo) / (hi - lo) : 1.0;
        rep.completion_time = run.times[i - 1] + frac * (run.times[i] - run.times[i - 1]);
    }
    rep.speedup = rep.completion_time > 0.0 ? rep.cascade_sum / rep.completion_time : 0.0;
    return rep;
}

std::vector<SurfaceRow> normalized_surface(const std::vector<const TimeSeries*>& runs,
                                           std::optional<double> alpha_offset) {
    if (runs.size() < 3) {
        throw ValidationError("normalized surface needs at least 3 runs");
    }
    std::vector<const TimeSeries*> sorted = runs;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const TimeSeries* a, const TimeSeries* b) { return a->n_half < b->n_half; });
    std::vector<SurfaceRow> rows;
    for (const TimeSeries* run : sorted) {
        const double tau_d = dicke_delay(run->n_half);
        const auto& i1 = run->mode(Mode::first).intensity;
        const auto& i2 = run->mode(Mode::second).intensity;
        const double p1 = i1.empty() ? 0.0 : *std::max_element(i1.begin(), i1.end());
        const double p2 = i2.empty() ? 0.0 : *std::max_element(i2.begin(), i2.end());
        for (std::size_t i = 0; i < run->times.size(); ++i) {
            SurfaceRow row;
            row.n_half = run->n_half;
            row.t = run->times[i];
            row.tau_d = tau_d;
            row.i1_norm = p1 > 0.0 ? i1[i] / p1 : 0.0;
            row.i2_norm = p2 > 0.0 ? i2[i] / p2 : 0.0;
            if (alpha_offset) row.t_display = row.t + *alpha_offset * tau_d;
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace vsr
