#include "vsr/observables.hpp"

#include <cmath>

#include "vsr/errors.hpp"

namespace vsr {

namespace {

std::size_t first_defined(const ModeSeries& ms) {
    const double final_area = ms.area.empty() ? 0.0 : ms.area.back();
    if (!(final_area > 0.0)) return ms.area.size();
    const double threshold = kAreaThreshold * final_area;
    std::size_t i = 0;
    // Strictly positive moment keeps tau > 0 where defined.
    while (i < ms.area.size() && !(ms.area[i] >= threshold && ms.area[i] > 0.0 && ms.moment1[i] > 0.0)) ++i;
    return i;
}

}  // namespace

ModeTrack delay_track(const TimeSeries& series, Mode mode) {
    const ModeSeries& ms = series.mode(mode);
    ModeTrack track;
    track.tau.assign(ms.area.size(), 0.0);
    track.defined_from = first_defined(ms);
    for (std::size_t i = track.defined_from; i < ms.area.size(); ++i) {
        track.tau[i] = ms.moment1[i] / ms.area[i];
    }
    return track;
}

ModeTrack sigma_track(const TimeSeries& series, Mode mode) {
    const ModeSeries& ms = series.mode(mode);
    ModeTrack track = delay_track(series, mode);
    track.sigma.assign(track.tau.size(), 0.0);
    for (std::size_t i = track.defined_from; i < track.tau.size(); ++i) {
        const double tau = track.tau[i];
        const double second = ms.moment2[i] / ms.area[i];
        // Round-off can push the variance slightly below zero at early times.
        const double radicand = std::max(0.0, second - tau * tau);
        track.sigma[i] = std::sqrt(radicand) / tau;
    }
    return track;
}

ObservableTrack observable_track(const TimeSeries& series) {
    ObservableTrack out;
    out.times = series.times;
    out.modes[0] = sigma_track(series, Mode::first);
    out.modes[1] = sigma_track(series, Mode::second);
    return out;
}

AsymptoticSummary asymptotics(const TimeSeries& series) {
    if (!series.completed) {
        throw ValidationError("run did not reach its completion criterion by t=" + std::to_string(series.t_end) +
                              "; extend t_max");
    }
    AsymptoticSummary out;
    out.t_end = series.t_end;
    const double absorbed = series.ground_mass.empty() ? 0.0 : series.ground_mass.back();
    out.truncation_bound = std::max(0.0, 1.0 - absorbed) * series.t_end;
    for (std::size_t k = 0; k < 2; ++k) {
        const ModeSeries& ms = series.modes[k];
        ModeAsymptotics& a = out.modes[k];
        a.area = ms.area.empty() ? 0.0 : ms.area.back();
        if (a.area > 0.0 && ms.moment1.back() > 0.0) {
            a.tau = ms.moment1.back() / a.area;
            const double second = ms.moment2.back() / a.area;
            a.sigma = std::sqrt(std::max(0.0, second - a.tau * a.tau)) / a.tau;
        }
    }
    return out;
}

}  // namespace vsr
