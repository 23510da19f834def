#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "vsr/integrator.hpp"

namespace vsr {

// Samples before `defined_from` are undefined; their values are 0 and must
// not be read.
struct ModeTrack {
    std::vector<double> tau;
    std::vector<double> sigma;
    std::size_t defined_from = 0;

    bool defined_at(std::size_t i) const noexcept { return i >= defined_from && i < tau.size(); }
    bool empty() const noexcept { return defined_from >= tau.size(); }
};

struct ObservableTrack {
    std::vector<double> times;
    std::array<ModeTrack, 2> modes;

    const ModeTrack& mode(Mode k) const { return modes[k == Mode::first ? 0 : 1]; }
};

struct ModeAsymptotics {
    double tau = 0.0;
    double sigma = 0.0;
    double area = 0.0;
};

struct AsymptoticSummary {
    std::array<ModeAsymptotics, 2> modes;
    double t_end = 0.0;
    // (1 - absorbed mass at t_end) * t_end
    double truncation_bound = 0.0;

    const ModeAsymptotics& mode(Mode k) const { return modes[k == Mode::first ? 0 : 1]; }
};

// Relative area threshold below which tau/sigma are left undefined.
inline constexpr double kAreaThreshold = 1e-12;

// <tau(t)> = M1/A. Returns the track with its first defined index.
ModeTrack delay_track(const TimeSeries& series, Mode mode);
// Adds sigma(t) = sqrt(M2/A - (M1/A)^2) / (M1/A) to the delay track.
ModeTrack sigma_track(const TimeSeries& series, Mode mode);
ObservableTrack observable_track(const TimeSeries& series);

// Moments evaluated at t_end. Throws ValidationError if the run never reached
// its completion criterion.
AsymptoticSummary asymptotics(const TimeSeries& series);

}  // namespace vsr
