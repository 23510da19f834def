#include "vsr/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "vsr/errors.hpp"

namespace vsr::io {

namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string series_csv(const TimeSeries& series, const ObservableTrack& track) {
    std::string out;
    for (std::size_t c = 0; c < kSeriesColumns.size(); ++c) {
        if (c) out += ',';
        out += kSeriesColumns[c];
    }
    out += '\n';
    const auto& m1 = series.mode(Mode::first);
    const auto& m2 = series.mode(Mode::second);
    auto optional_cell = [&](const ModeTrack& mt, const std::vector<double>& v, std::size_t i) {
        return mt.defined_at(i) && i < v.size() ? format_double(v[i]) : std::string();
    };
    for (std::size_t i = 0; i < series.times.size(); ++i) {
        out += format_double(series.times[i]);
        out += ',' + format_double(m1.intensity[i]);
        out += ',' + format_double(m2.intensity[i]);
        out += ',' + format_double(m1.area[i]);
        out += ',' + format_double(m2.area[i]);
        out += ',' + optional_cell(track.modes[0], track.modes[0].tau, i);
        out += ',' + optional_cell(track.modes[1], track.modes[1].tau, i);
        out += ',' + optional_cell(track.modes[0], track.modes[0].sigma, i);
        out += ',' + optional_cell(track.modes[1], track.modes[1].sigma, i);
        out += ',' + format_double(series.ground_mass[i]);
        out += '\n';
    }
    return out;
}

void write_series_csv(const fs::path& path, const TimeSeries& series, const ObservableTrack& track) {
    write_file_atomic(path, series_csv(series, track));
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (ch != '\r') {
            cell += ch;
        }
    }
    cells.push_back(cell);
    return cells;
}

double parse_number(const std::string& cell, const fs::path& path, std::size_t line, const std::string& column) {
    double v = 0.0;
    const char* end = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
    if (cell.empty() || ec != std::errc() || ptr != end) {
        throw IoError(path.string() + ":" + std::to_string(line) + ": malformed value '" + cell +
                      "' in column " + column);
    }
    return v;
}

}  // namespace

SeriesTable read_series_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
    const auto header = split(line);
    for (std::size_t c = 0; c < kSeriesColumns.size(); ++c) {
        if (c >= header.size() || header[c] != kSeriesColumns[c]) {
            throw IoError(path.string() + ": header mismatch at column " + std::to_string(c) + ", expected '" +
                          kSeriesColumns[c] + "' got '" + (c < header.size() ? header[c] : "") + "'");
        }
    }
    if (header.size() != kSeriesColumns.size()) {
        throw IoError(path.string() + ": unexpected extra column '" + header[kSeriesColumns.size()] + "'");
    }

    SeriesTable table;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != kSeriesColumns.size()) {
            throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                          std::to_string(kSeriesColumns.size()) + " cells, got " + std::to_string(cells.size()));
        }
        auto num = [&](std::size_t c) { return parse_number(cells[c], path, lineno, kSeriesColumns[c]); };
        auto opt = [&](std::size_t c) -> std::optional<double> {
            if (cells[c].empty()) return std::nullopt;
            return num(c);
        };
        table.t.push_back(num(0));
        table.i1.push_back(num(1));
        table.i2.push_back(num(2));
        table.a1.push_back(num(3));
        table.a2.push_back(num(4));
        table.tau1.push_back(opt(5));
        table.tau2.push_back(opt(6));
        table.sigma1.push_back(opt(7));
        table.sigma2.push_back(opt(8));
        table.p_ground.push_back(num(9));
    }
    if (table.t.empty()) throw IoError(path.string() + ": no data rows");
    return table;
}

TimeSeries to_time_series(const SeriesTable& table, int n_half, const DecayRates& rates, bool completed) {
    TimeSeries s;
    s.n_half = n_half;
    s.rates = rates;
    s.completed = completed;
    s.times = table.t;
    s.ground_mass = table.p_ground;
    s.t_end = table.t.back();
    const std::vector<std::optional<double>>* taus[2] = {&table.tau1, &table.tau2};
    const std::vector<std::optional<double>>* sigmas[2] = {&table.sigma1, &table.sigma2};
    const std::vector<double>* intens[2] = {&table.i1, &table.i2};
    const std::vector<double>* areas[2] = {&table.a1, &table.a2};
    for (std::size_t k = 0; k < 2; ++k) {
        ModeSeries& ms = s.modes[k];
        ms.intensity = *intens[k];
        ms.area = *areas[k];
        ms.moment1.assign(ms.area.size(), 0.0);
        ms.moment2.assign(ms.area.size(), 0.0);
        for (std::size_t i = 0; i < ms.area.size(); ++i) {
            const auto& tau = (*taus[k])[i];
            const auto& sigma = (*sigmas[k])[i];
            if (tau && sigma) {
                ms.moment1[i] = *tau * ms.area[i];
                ms.moment2[i] = ms.area[i] * (*tau) * (*tau) * (1.0 + (*sigma) * (*sigma));
            }
        }
    }
    return s;
}

Json checkpoint_json(const TimeSeries& s) {
    Json doc;
    doc["format"] = "vsr-timeseries";
    doc["version"] = 1;
    doc["n_half"] = s.n_half;
    doc["gamma1"] = s.rates.gamma1;
    doc["gamma2"] = s.rates.gamma2;
    doc["raw_eq2_intensity"] = s.raw_eq2_intensity;
    doc["t_end"] = s.t_end;
    doc["completed"] = s.completed;
    doc["stats"] = {{"accepted_steps", s.stats.accepted_steps},
                    {"rejected_steps", s.stats.rejected_steps},
                    {"min_probability", s.stats.min_probability}};
    doc["times"] = s.times;
    for (std::size_t k = 0; k < 2; ++k) {
        const ModeSeries& ms = s.modes[k];
        doc[k == 0 ? "mode1" : "mode2"] = {{"intensity", ms.intensity},
                                           {"area", ms.area},
                                           {"moment1", ms.moment1},
                                           {"moment2", ms.moment2}};
    }
    doc["ground_mass"] = s.ground_mass;
    doc["total_mass"] = s.total_mass;
    doc["final_distribution"] = s.final_distribution;
    doc["snapshots"] = Json::array();
    for (const Snapshot& snap : s.snapshots) {
        doc["snapshots"].push_back({{"time", snap.time}, {"distribution", snap.distribution}});
    }
    return doc;
}

TimeSeries series_from_checkpoint(const Json& doc) {
    try {
        if (doc.at("format") != "vsr-timeseries" || doc.at("version") != 1) {
            throw IoError("not a time-series checkpoint");
        }
        TimeSeries s;
        s.n_half = doc.at("n_half").get<int>();
        s.rates = {doc.at("gamma1").get<double>(), doc.at("gamma2").get<double>()};
        s.raw_eq2_intensity = doc.at("raw_eq2_intensity").get<bool>();
        s.t_end = doc.at("t_end").get<double>();
        s.completed = doc.at("completed").get<bool>();
        s.stats.accepted_steps = doc.at("stats").at("accepted_steps").get<std::size_t>();
        s.stats.rejected_steps = doc.at("stats").at("rejected_steps").get<std::size_t>();
        s.stats.min_probability = doc.at("stats").at("min_probability").get<double>();
        s.times = doc.at("times").get<std::vector<double>>();
        for (std::size_t k = 0; k < 2; ++k) {
            const Json& m = doc.at(k == 0 ? "mode1" : "mode2");
            ModeSeries& ms = s.modes[k];
            ms.intensity = m.at("intensity").get<std::vector<double>>();
            ms.area = m.at("area").get<std::vector<double>>();
            ms.moment1 = m.at("moment1").get<std::vector<double>>();
            ms.moment2 = m.at("moment2").get<std::vector<double>>();
        }
        s.ground_mass = doc.at("ground_mass").get<std::vector<double>>();
        s.total_mass = doc.at("total_mass").get<std::vector<double>>();
        s.final_distribution = doc.at("final_distribution").get<std::vector<double>>();
        for (const Json& snap : doc.at("snapshots")) {
            s.snapshots.push_back({snap.at("time").get<double>(), snap.at("distribution").get<std::vector<double>>()});
        }
        return s;
    } catch (const Json::exception& e) {
        throw IoError(std::string("malformed checkpoint: ") + e.what());
    }
}

void save_checkpoint(const fs::path& path, const TimeSeries& series) {
    write_file_atomic(path, checkpoint_json(series).dump() + "\n");
}

TimeSeries load_checkpoint(const fs::path& path) {
    const std::string text = read_file(path);
    Json doc = Json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw IoError(path.string() + ": not valid JSON");
    return series_from_checkpoint(doc);
}

Json to_json(const FitReport& fit) {
    return {{"x_label", fit.x_label},     {"y_label", fit.y_label},     {"slope", fit.slope},
            {"intercept", fit.intercept}, {"r_squared", fit.r_squared}, {"points", fit.points}};
}

Json to_json(const SynthesisReport& r) {
    return {{"n_half", r.n_half},
            {"gamma_ratio", r.gamma_ratio},
            {"tau1d_formula", r.tau1d_formula},
            {"tau2d_cascade_estimate", r.tau2d_cascade_estimate},
            {"cascade_sum", r.cascade_sum},
            {"cascade_sum_total_atoms", r.cascade_sum_total_atoms},
            {"mode1_peak_time", r.mode1_peak_time},
            {"mode2_peak_time", r.mode2_peak_time},
            {"completion_fraction", r.completion_fraction},
            {"completion_time", r.completion_time},
            {"speedup", r.speedup}};
}

Json to_json(const AsymptoticSummary& a) {
    Json doc = {{"t_end", a.t_end}, {"truncation_bound", a.truncation_bound}};
    for (std::size_t k = 0; k < 2; ++k) {
        doc[k == 0 ? "mode1" : "mode2"] = {
            {"tau_inf", a.modes[k].tau}, {"sigma_inf", a.modes[k].sigma}, {"area_inf", a.modes[k].area}};
    }
    return doc;
}

namespace {

Json mode_json(const ModeRecord& m) {
    Json doc = {{"active", m.active},
                {"tau_inf", m.tau_inf},
                {"sigma_inf", m.sigma_inf},
                {"area_inf", m.area_inf},
                {"peak", nullptr},
                {"fwhm", nullptr},
                {"sigma_min", nullptr}};
    if (m.peak) doc["peak"] = {{"time", m.peak->time}, {"value", m.peak->value}, {"at_boundary", m.peak->at_boundary}};
    if (m.fwhm) doc["fwhm"] = *m.fwhm;
    if (m.sigma_min) doc["sigma_min"] = {{"time", m.sigma_min->time}, {"value", m.sigma_min->value}};
    return doc;
}

ModeRecord mode_from_json(const Json& doc) {
    ModeRecord m;
    m.active = doc.at("active").get<bool>();
    m.tau_inf = doc.at("tau_inf").get<double>();
    m.sigma_inf = doc.at("sigma_inf").get<double>();
    m.area_inf = doc.at("area_inf").get<double>();
    if (!doc.at("peak").is_null()) {
        const Json& p = doc.at("peak");
        m.peak = Peak{p.at("time").get<double>(), p.at("value").get<double>(), p.at("at_boundary").get<bool>()};
    }
    if (!doc.at("fwhm").is_null()) m.fwhm = doc.at("fwhm").get<double>();
    if (!doc.at("sigma_min").is_null()) {
        const Json& p = doc.at("sigma_min");
        m.sigma_min = TimePoint{p.at("time").get<double>(), p.at("value").get<double>()};
    }
    return m;
}

}  // namespace

Json to_json(const SweepRecord& rec) {
    return {{"n_half", rec.n_half},
            {"gamma1", rec.rates.gamma1},
            {"gamma2", rec.rates.gamma2},
            {"init", std::string(to_string(rec.init))},
            {"t_end", rec.t_end},
            {"truncation_bound", rec.truncation_bound},
            {"max_mass_error", rec.max_mass_error},
            {"mode1", mode_json(rec.modes[0])},
            {"mode2", mode_json(rec.modes[1])}};
}

SweepRecord record_from_json(const Json& doc) {
    try {
        SweepRecord rec;
        rec.n_half = doc.at("n_half").get<int>();
        rec.rates = {doc.at("gamma1").get<double>(), doc.at("gamma2").get<double>()};
        rec.init = parse_initial_kind(doc.at("init").get<std::string>());
        rec.t_end = doc.at("t_end").get<double>();
        rec.truncation_bound = doc.at("truncation_bound").get<double>();
        rec.max_mass_error = doc.at("max_mass_error").get<double>();
        rec.modes[0] = mode_from_json(doc.at("mode1"));
        rec.modes[1] = mode_from_json(doc.at("mode2"));
        return rec;
    } catch (const Json::exception& e) {
        throw IoError(std::string("malformed run record: ") + e.what());
    }
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

}  // namespace vsr::io
