#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vsr/analysis.hpp"
#include "vsr/integrator.hpp"
#include "vsr/observables.hpp"

namespace vsr::io {

using Json = nlohmann::json;

// Column order of the time-series CSV.
inline const std::vector<std::string> kSeriesColumns = {"t",    "I1",   "I2",     "A1",     "A2",
                                                       "tau1", "tau2", "sigma1", "sigma2", "P_ground"};

// 17 significant digits, shortest form.
std::string format_double(double v);

// Writes `content` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

std::string series_csv(const TimeSeries& series, const ObservableTrack& track);
void write_series_csv(const std::filesystem::path& path, const TimeSeries& series, const ObservableTrack& track);

// Parsed time-series CSV; undefined tau/sigma cells are nullopt.
struct SeriesTable {
    std::vector<double> t, i1, i2, a1, a2, p_ground;
    std::vector<std::optional<double>> tau1, tau2, sigma1, sigma2;
};

// Throws IoError on a missing file, a header mismatch (naming the column) or
// a malformed cell.
SeriesTable read_series_csv(const std::filesystem::path& path);

// Rebuilds a TimeSeries from a CSV table. Moments are recovered from tau and
// sigma where defined and left 0 elsewhere.
TimeSeries to_time_series(const SeriesTable& table, int n_half, const DecayRates& rates, bool completed);

// Lossless JSON image of a TimeSeries, including the final distribution.
Json checkpoint_json(const TimeSeries& series);
TimeSeries series_from_checkpoint(const Json& doc);
void save_checkpoint(const std::filesystem::path& path, const TimeSeries& series);
TimeSeries load_checkpoint(const std::filesystem::path& path);

Json to_json(const FitReport& fit);
Json to_json(const SynthesisReport& rep);
Json to_json(const AsymptoticSummary& summary);
Json to_json(const SweepRecord& rec);
SweepRecord record_from_json(const Json& doc);

std::string dump(const Json& doc);

}  // namespace vsr::io
