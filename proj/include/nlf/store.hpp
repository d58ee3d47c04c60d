#pragma once

#include "nlf/error.hpp"
#include "nlf/io.hpp"
#include "nlf/pipeline.hpp"
#include "nlf/skill.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace nlf {

/// (model_id, penetration, resolution)
struct GroupKey {
    std::string model_id;
    int penetration;
    Resolution resolution;

    friend auto operator<=>(const GroupKey&, const GroupKey&) = default;
};

struct StoreGroup {
    std::vector<ScoreRecord> records;  // by target time
    std::vector<DailySkill> daily;     // by date
    std::vector<PointSkill> points;    // by target time
};

struct StoreScenarioInfo {
    std::string scenario_id;
    int penetration;
    Resolution resolution;
    std::size_t record_count;
    std::size_t daily_count;
    std::size_t point_count;
    nlohmann::ordered_json diagnostics;
};

/// Immutable, indexed view of a score directory.
class ScoreStore {
public:
    /// Loads and validates a directory written by the scoring stage: file
    /// digests must match the manifest and a 1% sample of daily and pointwise
    /// entries must recompute from the records.
    static ScoreStore load(const std::filesystem::path& dir) {
        ScoreStore store;
        nlohmann::ordered_json manifest;
        try {
            manifest = nlohmann::ordered_json::parse(read_file(dir / kManifestFile));
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorCode::StoreInvalid, std::string("manifest.json: ") + e.what());
        } catch (const Error& e) {
            throw Error(ErrorCode::StoreInvalid, e.what());
        }
        try {
            store.reference_model_ = manifest.at("config").at("reference_model").get<std::string>();
            for (const auto& scen : manifest.at("scenarios")) store.load_scenario(dir, scen);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::StoreInvalid, std::string("manifest.json: ") + e.what());
        }
        if (store.groups_.empty()) throw Error(ErrorCode::StoreInvalid, "store has no scenarios");
        store.finalize();
        store.spot_verify();
        return store;
    }

    /// Builds a store straight from in-memory scenario scores.
    static ScoreStore from_scores(const std::vector<ScenarioScores>& scenarios, std::string reference_model) {
        ScoreStore store;
        store.reference_model_ = std::move(reference_model);
        for (const auto& s : scenarios) {
            for (const auto& r : s.records) store.group(r.model_id, s.penetration.percent(), s.resolution).records.push_back(r);
            for (const auto& d : s.daily) store.group(d.model_id, s.penetration.percent(), s.resolution).daily.push_back(d);
            for (const auto& p : s.pointwise) {
                store.group(p.model_id, s.penetration.percent(), s.resolution).points.push_back({p.target_time, p.crpss});
            }
            store.scenarios_.push_back({s.scenario_id, s.penetration.percent(), s.resolution, s.records.size(),
                                        s.daily.size(), s.pointwise.size(),
                                        {{"gaps", s.gaps},
                                         {"missing_observations", s.missing_observations},
                                         {"dropped_near_zero_reference", s.dropped_near_zero_reference},
                                         {"degenerate_days_skipped", s.degenerate_days_skipped}}});
        }
        store.finalize();
        store.spot_verify();
        return store;
    }

    const std::string& reference_model() const { return reference_model_; }
    const std::vector<std::string>& models() const { return models_; }
    const std::vector<int>& penetrations() const { return penetrations_; }
    const std::vector<Resolution>& resolutions() const { return resolutions_; }
    const std::vector<StoreScenarioInfo>& scenarios() const { return scenarios_; }
    const std::map<GroupKey, StoreGroup>& groups() const { return groups_; }

    std::size_t record_count() const {
        std::size_t n = 0;
        for (const auto& s : scenarios_) n += s.record_count;
        return n;
    }

    const StoreGroup* find(const std::string& model, int penetration, Resolution resolution) const {
        auto it = groups_.find(GroupKey{model, penetration, resolution});
        return it == groups_.end() ? nullptr : &it->second;
    }

    bool has_model(const std::string& model) const {
        return std::find(models_.begin(), models_.end(), model) != models_.end();
    }

    /// Default model for queries: the first non-reference model, else the reference.
    const std::string& default_model() const {
        for (const auto& m : models_) {
            if (m != reference_model_) return m;
        }
        return reference_model_;
    }

    std::optional<Date> first_scored_date() const { return first_date_; }
    std::optional<Date> last_scored_date() const { return last_date_; }

    /// First date that feeds the month x hour heatmap. A leading month only
    /// partly covered because of warm-up is left out, so a run starting on
    /// Jan 1 with a 30-day window has Feb-Dec rows.
    std::optional<Date> patterns_start() const {
        if (!first_date_) return std::nullopt;
        const Date d = *first_date_;
        if (d.day() == std::chrono::day{1}) return d;
        const auto next = std::chrono::year_month{d.year(), d.month()} + std::chrono::months{1};
        return Date{next / std::chrono::day{1}};
    }

    /// Months (ascending) with pointwise skill on or after patterns_start().
    const std::vector<int>& pattern_months() const { return pattern_months_; }

private:
    StoreGroup& group(const std::string& model, int penetration, Resolution resolution) {
        return groups_[GroupKey{model, penetration, resolution}];
    }

    void load_scenario(const std::filesystem::path& dir, const nlohmann::ordered_json& scen) {
        const int pen = PenetrationLevel::from_percent(scen.at("penetration").get<int>()).percent();
        const auto res = try_parse_resolution(scen.at("resolution").get<std::string>());
        if (!res) throw Error(ErrorCode::StoreInvalid, "unknown resolution in manifest");
        auto read_checked = [&](const char* key) {
            const auto& entry = scen.at(key);
            const auto body = read_file(dir / entry.at("path").get<std::string>());
            if (sha256_hex(body) != entry.at("sha256").get<std::string>()) {
                throw Error(ErrorCode::StoreInvalid, entry.at("path").get<std::string>() + ": digest mismatch");
            }
            return body;
        };
        StoreScenarioInfo info{scen.at("scenario_id").get<std::string>(), pen, *res, 0, 0, 0,
                               scen.value("diagnostics", nlohmann::ordered_json::object())};

        const auto records = read_checked("records");
        std::string_view rest = records;
        while (!rest.empty()) {
            const auto nl = rest.find('\n');
            const auto line = rest.substr(0, nl);
            rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
            if (line.empty()) continue;
            auto r = score_record_from_json(nlohmann::ordered_json::parse(line));
            if (r.penetration.percent() != pen || r.resolution != *res) {
                throw Error(ErrorCode::StoreInvalid, info.scenario_id + ": record from another scenario");
            }
            group(r.model_id, pen, *res).records.push_back(std::move(r));
            ++info.record_count;
        }
        for (const auto& j : nlohmann::ordered_json::parse(read_checked("daily_skill"))) {
            auto d = daily_skill_from_json(j);
            group(d.model_id, pen, *res).daily.push_back(std::move(d));
            ++info.daily_count;
        }
        for (const auto& j : nlohmann::ordered_json::parse(read_checked("pointwise_skill"))) {
            group(j.at("model_id").get<std::string>(), pen, *res)
                .points.push_back({parse_timestamp(j.at("target_time").get<std::string>()), j.at("crpss").get<double>()});
            ++info.point_count;
        }
        scenarios_.push_back(std::move(info));
    }

    void finalize() {
        std::set<std::string> models;
        std::set<int> pens;
        std::set<Resolution> ress;
        std::set<int> months;
        for (auto& [key, g] : groups_) {
            models.insert(key.model_id);
            pens.insert(key.penetration);
            ress.insert(key.resolution);
            std::stable_sort(g.records.begin(), g.records.end(),
                             [](const auto& a, const auto& b) { return a.target_time < b.target_time; });
            std::stable_sort(g.daily.begin(), g.daily.end(), [](const auto& a, const auto& b) { return a.date < b.date; });
            std::stable_sort(g.points.begin(), g.points.end(),
                             [](const auto& a, const auto& b) { return a.target_time < b.target_time; });
            for (const auto& d : g.daily) {
                if (!first_date_ || d.date < *first_date_) first_date_ = d.date;
                if (!last_date_ || d.date > *last_date_) last_date_ = d.date;
            }
        }
        if (!models.count(reference_model_)) {
            throw Error(ErrorCode::StoreInvalid, "reference model '" + reference_model_ + "' has no records");
        }
        if (const auto start = patterns_start()) {
            for (const auto& [key, g] : groups_) {
                for (const auto& p : g.points) {
                    if (p.target_time.date() >= *start) months.insert(p.target_time.month());
                }
            }
        }
        models_.assign(models.begin(), models.end());
        penetrations_.assign(pens.begin(), pens.end());
        resolutions_.assign(ress.begin(), ress.end());
        pattern_months_.assign(months.begin(), months.end());
        std::sort(scenarios_.begin(), scenarios_.end(), [](const auto& a, const auto& b) {
            return std::tie(a.penetration, a.resolution) < std::tie(b.penetration, b.resolution);
        });
    }

    // Every 100th daily and pointwise entry must recompute from the records.
    void spot_verify() const {
        auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); };
        for (const auto& [key, g] : groups_) {
            if (g.daily.empty() && g.points.empty()) continue;
            const auto* ref = find(reference_model_, key.penetration, key.resolution);
            if (!ref) throw Error(ErrorCode::StoreInvalid, "no reference records for " + key.model_id);
            auto records_on = [](const StoreGroup& grp, const Date& date) {
                std::vector<ScoreRecord> out;
                auto lo = std::lower_bound(grp.records.begin(), grp.records.end(), Timestamp{date, 0},
                                           [](const ScoreRecord& r, const Timestamp& t) { return r.target_time < t; });
                for (; lo != grp.records.end() && lo->target_time.date() == date; ++lo) out.push_back(*lo);
                return out;
            };
            for (std::size_t i = 0; i < g.daily.size(); i += 100) {
                const auto& d = g.daily[i];
                const auto check = daily_skill(records_on(g, d.date), records_on(*ref, d.date));
                if (!close(check.crpss, d.crpss)) {
                    throw Error(ErrorCode::StoreInvalid, key.model_id + " daily skill on " + format_date(d.date) +
                                                             " does not match its records");
                }
            }
            auto crps_at = [](const StoreGroup& grp, const Timestamp& t) -> std::optional<double> {
                auto it = std::lower_bound(grp.records.begin(), grp.records.end(), t,
                                           [](const ScoreRecord& r, const Timestamp& x) { return r.target_time < x; });
                if (it == grp.records.end() || it->target_time != t) return std::nullopt;
                return it->crps;
            };
            for (std::size_t i = 0; i < g.points.size(); i += 100) {
                const auto& p = g.points[i];
                const auto m = crps_at(g, p.target_time);
                const auto r = crps_at(*ref, p.target_time);
                if (!m || !r || !close(crpss(*m, *r), p.crpss)) {
                    throw Error(ErrorCode::StoreInvalid, key.model_id + " pointwise skill at " +
                                                             format_timestamp(p.target_time) +
                                                             " does not match its records");
                }
            }
        }
    }

    std::string reference_model_;
    std::map<GroupKey, StoreGroup> groups_;
    std::vector<StoreScenarioInfo> scenarios_;
    std::vector<std::string> models_;
    std::vector<int> penetrations_;
    std::vector<Resolution> resolutions_;
    std::vector<int> pattern_months_;
    std::optional<Date> first_date_;
    std::optional<Date> last_date_;
};

} // namespace nlf
