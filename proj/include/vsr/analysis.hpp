#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vsr/dynamics.hpp"
#include "vsr/integrator.hpp"
#include "vsr/observables.hpp"

namespace vsr {

inline constexpr double kEulerGamma = 0.5772156649015329;

// Dicke delay (E0 + ln N)/N and noise π/(√6 (E0 + ln N)); N >= 2.
double dicke_delay(int n_half);
double dicke_sigma(int n_half);

struct Peak {
    double time = 0.0;
    double value = 0.0;
    bool at_boundary = false;  // maximum at t = 0, not refined
};

struct TimePoint {
    double time = 0.0;
    double value = 0.0;
};

// Sample-level routines; the TimeSeries overloads forward the mode intensity.
Peak peak_extract(const std::vector<double>& times, const std::vector<double>& values);
Peak peak_extract(const TimeSeries& series, Mode mode);
double fwhm(const std::vector<double>& times, const std::vector<double>& values);
double fwhm(const TimeSeries& series, Mode mode);

struct FitReport {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t points = 0;
    std::string x_label;
    std::string y_label;
};

/// Ordinary least squares. R² is reported as 0 when ys have no variance.
FitReport linear_fit(const std::vector<double>& xs, const std::vector<double>& ys,
                     std::string x_label = "x", std::string y_label = "y");

// Global minimum of sigma(t) over the defined region, skipping the first 1%
// of defined samples.
TimePoint sigma_minimum(const ObservableTrack& track, Mode mode);

// True when the sigma track dips strictly below its final value at an
// interior sample.
bool has_sigma_valley(const ObservableTrack& track, Mode mode);

struct ModeRecord {
    bool active = false;  // mode emitted a non-zero area
    std::optional<Peak> peak;
    std::optional<double> fwhm;
    double tau_inf = 0.0;
    double sigma_inf = 0.0;
    std::optional<TimePoint> sigma_min;
    double area_inf = 0.0;
};

struct SweepRecord {
    int n_half = 0;
    DecayRates rates;
    InitialKind init = InitialKind::v_standard;
    double t_end = 0.0;
    double truncation_bound = 0.0;
    std::array<ModeRecord, 2> modes;
    // Largest |sum P - 1| over the samples.
    double max_mass_error = 0.0;

    const ModeRecord& mode(Mode k) const { return modes[k == Mode::first ? 0 : 1]; }
};

// Extracts every per-run scalar used by the criteria. Requires a completed run.
SweepRecord summarize_run(const TimeSeries& series, InitialKind init);

struct SweepSummary {
    std::vector<SweepRecord> records;  // sorted by n_half
};

/// Four fits per active mode:
///   peak intensity vs N², tau_inf vs dicke_delay(N),
///   sigma_inf vs dicke_sigma(N), fwhm vs 1/N.
std::vector<FitReport> criteria_battery(const SweepSummary& sweep);

struct SynthesisReport {
    int n_half = 0;
    double gamma_ratio = 0.0;  // Γ1/Γ2
    double tau1d_formula = 0.0;
    double tau2d_cascade_estimate = 0.0;
    double cascade_sum = 0.0;
    // Same comparator evaluated for all 2N atoms in one ensemble.
    double cascade_sum_total_atoms = 0.0;
    double mode1_peak_time = 0.0;
    double mode2_peak_time = 0.0;
    double completion_fraction = 0.9;
    double completion_time = 0.0;
    double speedup = 0.0;
};

/// Compares the v_standard run at (Γ1, Γ2) against the cascade comparator
/// τ_1D + (Γ1/Γ2) τ_1D. completion_time is the earliest t at which
/// A1 + A2 reaches `completion_fraction` of its final value.
SynthesisReport synthesis_report(const TimeSeries& v_standard_run, double completion_fraction = 0.9);

struct SurfaceRow {
    int n_half = 0;
    double t = 0.0;
    double tau_d = 0.0;
    double i1_norm = 0.0;
    double i2_norm = 0.0;
    std::optional<double> t_display;  // t + alpha·tau_d when an offset is requested
};

// Per-N peak-normalized intensities in long format. Needs >= 3 runs.
std::vector<SurfaceRow> normalized_surface(const std::vector<const TimeSeries*>& runs,
                                           std::optional<double> alpha_offset = std::nullopt);

}  // namespace vsr
