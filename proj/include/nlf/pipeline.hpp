#pragma once

#include "nlf/crps.hpp"
#include "nlf/error.hpp"
#include "nlf/forecast.hpp"
#include "nlf/io.hpp"
#include "nlf/series.hpp"
#include "nlf/skill.hpp"
#include "nlf/synth.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace nlf {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kManifestFile = "manifest.json";

// ---------------------------------------------------------------------------
// Synthetic suite on disk

struct SuiteEntry {
    std::string scenario_id;
    PenetrationLevel penetration;
    Resolution resolution;
    std::string path;  // relative to the suite directory
    std::string sha256;
};

struct SuiteManifest {
    std::uint64_t seed = 0;
    Date start{};
    int days = 0;
    std::vector<SuiteEntry> scenarios;
};

inline nlohmann::ordered_json to_json(const SuiteManifest& m) {
    nlohmann::ordered_json j;
    j["tool_version"] = kToolVersion;
    j["seed"] = m.seed;
    j["start"] = format_date(m.start);
    j["days"] = m.days;
    j["scenarios"] = nlohmann::ordered_json::array();
    for (const auto& e : m.scenarios) {
        j["scenarios"].push_back({{"scenario_id", e.scenario_id},
                                  {"penetration", e.penetration.percent()},
                                  {"resolution", std::string(to_string(e.resolution))},
                                  {"path", e.path},
                                  {"sha256", e.sha256}});
    }
    return j;
}

inline SuiteManifest suite_manifest_from_json(const nlohmann::ordered_json& j) {
    try {
        SuiteManifest m;
        m.seed = j.at("seed").get<std::uint64_t>();
        m.start = parse_date(j.at("start").get<std::string>());
        m.days = j.at("days").get<int>();
        for (const auto& e : j.at("scenarios")) {
            auto res = try_parse_resolution(e.at("resolution").get<std::string>());
            if (!res) throw Error(ErrorCode::MalformedRow, "unknown resolution in manifest");
            m.scenarios.push_back({e.at("scenario_id").get<std::string>(),
                                   PenetrationLevel::from_percent(e.at("penetration").get<int>()), *res,
                                   e.at("path").get<std::string>(), e.value("sha256", std::string{})});
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedRow, std::string("bad suite manifest: ") + e.what());
    }
}

/// Generates the six-scenario suite and writes CSVs plus `manifest.json`.
inline SuiteManifest write_suite(const std::filesystem::path& out_dir, std::uint64_t seed, const Date& start,
                                 int days) {
    auto suite = generate_suite(seed, start, days);
    ensure_directory(out_dir);
    SuiteManifest m{seed, start, days, {}};
    for (const auto& series : suite) {
        const std::string file = series.scenario_id() + ".csv";
        const std::string csv = to_csv(series);
        write_file(out_dir / file, csv);
        m.scenarios.push_back({series.scenario_id(), series.penetration(), series.resolution(), file, sha256_hex(csv)});
    }
    write_file(out_dir / kManifestFile, to_json(m).dump(2) + "\n");
    return m;
}

inline SuiteManifest read_suite_manifest(const std::filesystem::path& dir) {
    const auto path = dir / kManifestFile;
    if (!std::filesystem::exists(path)) throw Error(ErrorCode::Io, "no manifest.json in " + dir.string());
    try {
        return suite_manifest_from_json(nlohmann::ordered_json::parse(read_file(path)));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::MalformedRow, std::string("manifest.json: ") + e.what());
    }
}

inline NetLoadSeries load_scenario(const std::filesystem::path& dir, const SuiteEntry& entry) {
    return parse_series(read_file(dir / entry.path), entry.resolution, entry.penetration, entry.scenario_id);
}

// ---------------------------------------------------------------------------
// Backtest and scoring

/// Built-in models addressable by id from the command line.
inline ForecasterSpec forecaster_for(const std::string& model_id) {
    if (model_id == "reference") return ForecasterSpec::reference();
    if (model_id == "candidate") return ForecasterSpec::candidate();
    throw Error(ErrorCode::ConfigInvalid, "unknown model '" + model_id + "' (known: reference, candidate)");
}

struct PointSkillEntry {
    std::string model_id;
    Timestamp target_time;
    double crpss;
};

struct ScenarioScores {
    std::string scenario_id;
    PenetrationLevel penetration;
    Resolution resolution;
    std::vector<ScoreRecord> records;       // by model order, then target time
    std::vector<DailySkill> daily;          // by model order, then date
    std::vector<PointSkillEntry> pointwise; // by model order, then target time
    std::size_t gaps = 0;                   // targets some model could not forecast
    std::size_t missing_observations = 0;
    std::size_t dropped_near_zero_reference = 0;
    std::size_t degenerate_days_skipped = 0;
};

/// Day-ahead backtest of every model over the full series span. A target is
/// scored only when its observation is present and every model forecast it.
inline ScenarioScores score_scenario(const NetLoadSeries& series, const std::vector<ForecasterSpec>& models,
                                     const std::string& reference_id) {
    if (series.empty()) throw Error(ErrorCode::EmptySeries, series.scenario_id() + ": empty series");
    const auto ref_it = std::find_if(models.begin(), models.end(),
                                     [&](const ForecasterSpec& s) { return s.model_id == reference_id; });
    if (ref_it == models.end()) throw Error(ErrorCode::ConfigInvalid, "models must include '" + reference_id + "'");
    const auto ref_index = static_cast<std::size_t>(ref_it - models.begin());

    ScenarioScores out{series.scenario_id(), series.penetration(), series.resolution(), {}, {}, {}, 0, 0, 0, 0};
    const Date first = series.start().date();
    const Date last = series.timestamp_at(series.size() - 1).date();

    std::vector<std::map<Timestamp, Forecast>> by_model(models.size());
    for (std::size_t m = 0; m < models.size(); ++m) {
        auto schedule = day_ahead_schedule(series, models[m], first, last);
        for (auto& f : schedule.forecasts) {
            const Timestamp t = f.target_time();
            by_model[m].emplace(t, std::move(f));
        }
    }

    // per model, records grouped by date
    std::vector<std::map<Date, std::vector<ScoreRecord>>> days(models.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        const Timestamp t = series.timestamp_at(i);
        bool all = true;
        for (const auto& fm : by_model) all = all && fm.count(t) > 0;
        if (!all) {
            ++out.gaps;
            continue;
        }
        if (!series[i]) {
            ++out.missing_observations;
            continue;
        }
        for (std::size_t m = 0; m < models.size(); ++m) {
            ScoreRecord r{models[m].model_id, t, series.penetration(), series.resolution(),
                          crps(by_model[m].at(t), *series[i])};
            days[m][t.date()].push_back(std::move(r));
        }
    }
    if (days[ref_index].empty()) {
        throw Error(ErrorCode::InsufficientHistory, series.scenario_id() + ": no scorable targets after warm-up");
    }

    for (std::size_t m = 0; m < models.size(); ++m) {
        for (const auto& [date, recs] : days[m]) {
            out.records.insert(out.records.end(), recs.begin(), recs.end());
            const auto& ref_recs = days[ref_index].at(date);
            try {
                out.daily.push_back(daily_skill(recs, ref_recs));
            } catch (const Error& e) {
                if (e.code() != ErrorCode::DegenerateReference) throw;
                ++out.degenerate_days_skipped;
            }
            auto points = pointwise_skill(recs, ref_recs);
            out.dropped_near_zero_reference += points.dropped_near_zero_reference;
            for (const auto& p : points.points) out.pointwise.push_back({models[m].model_id, p.target_time, p.crpss});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Score store on disk

struct StoreFiles {
    static std::string records(const std::string& scenario) { return scenario + ".records.jsonl"; }
    static std::string daily(const std::string& scenario) { return scenario + ".daily_skill.json"; }
    static std::string pointwise(const std::string& scenario) { return scenario + ".pointwise_skill.json"; }
};

inline nlohmann::ordered_json to_json(const PointSkillEntry& p, PenetrationLevel pen, Resolution res) {
    nlohmann::ordered_json j;
    j["model_id"] = p.model_id;
    j["target_time"] = format_timestamp(p.target_time);
    j["penetration"] = pen.percent();
    j["resolution"] = std::string(to_string(res));
    j["crpss"] = p.crpss;
    return j;
}

struct ScoreRunConfig {
    std::vector<std::string> models;
    std::string reference_model = "reference";
    nlohmann::ordered_json data_manifest;  // echoed into the run manifest
};

inline std::string records_jsonl(const ScenarioScores& s) {
    std::string out;
    out.reserve(s.records.size() * 110);
    for (const auto& r : s.records) {
        out += to_json(r).dump();
        out.push_back('\n');
    }
    return out;
}

inline std::string daily_json(const ScenarioScores& s) {
    std::string out = "[\n";
    for (std::size_t i = 0; i < s.daily.size(); ++i) {
        out += to_json(s.daily[i]).dump();
        out += i + 1 < s.daily.size() ? ",\n" : "\n";
    }
    out += "]\n";
    return out;
}

inline std::string pointwise_json(const ScenarioScores& s) {
    std::string out = "[\n";
    out.reserve(s.pointwise.size() * 120);
    for (std::size_t i = 0; i < s.pointwise.size(); ++i) {
        out += to_json(s.pointwise[i], s.penetration, s.resolution).dump();
        out += i + 1 < s.pointwise.size() ? ",\n" : "\n";
    }
    out += "]\n";
    return out;
}

/// Writes one scenario's three store files; returns its manifest entry.
inline nlohmann::ordered_json write_scenario_scores(const std::filesystem::path& out_dir, const ScenarioScores& s) {
    auto file_entry = [&](const std::string& name, const std::string& body, std::size_t count) {
        write_file(out_dir / name, body);
        return nlohmann::ordered_json{{"path", name}, {"sha256", sha256_hex(body)}, {"count", count}};
    };
    nlohmann::ordered_json j;
    j["scenario_id"] = s.scenario_id;
    j["penetration"] = s.penetration.percent();
    j["resolution"] = std::string(to_string(s.resolution));
    j["records"] = file_entry(StoreFiles::records(s.scenario_id), records_jsonl(s), s.records.size());
    j["daily_skill"] = file_entry(StoreFiles::daily(s.scenario_id), daily_json(s), s.daily.size());
    j["pointwise_skill"] = file_entry(StoreFiles::pointwise(s.scenario_id), pointwise_json(s), s.pointwise.size());
    j["diagnostics"] = {{"gaps", s.gaps},
                        {"missing_observations", s.missing_observations},
                        {"dropped_near_zero_reference", s.dropped_near_zero_reference},
                        {"degenerate_days_skipped", s.degenerate_days_skipped}};
    return j;
}

inline nlohmann::ordered_json run_manifest(const ScoreRunConfig& config, nlohmann::ordered_json scenarios) {
    nlohmann::ordered_json j;
    j["tool_version"] = kToolVersion;
    j["config"] = {{"models", config.models},
                   {"reference_model", config.reference_model},
                   {"data", config.data_manifest}};
    j["scenarios"] = std::move(scenarios);
    return j;
}

/// Median daily CRPSS for one model, if it has any scored days.
inline std::optional<double> median_daily_skill(const ScenarioScores& s, const std::string& model_id) {
    std::vector<double> v;
    for (const auto& d : s.daily) {
        if (d.model_id == model_id) v.push_back(d.crpss);
    }
    if (v.empty()) return std::nullopt;
    return box_stats(v).median;
}

} // namespace nlf
