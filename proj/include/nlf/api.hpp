#pragma once

#include "nlf/error.hpp"
#include "nlf/skill.hpp"
#include "nlf/store.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nlf::api {

using Json = nlohmann::ordered_json;
using Params = std::map<std::string, std::string>;

/// Parsed query string shared by the comparison and patterns endpoints.
struct QueryFilter {
    std::string model_id;
    std::optional<int> penetration;  // nullopt = all levels (comparison mode)
    std::optional<Resolution> resolution;
    std::optional<Date> start;
    std::optional<Date> end;
    std::optional<std::vector<int>> months;

    bool comparison_mode() const { return !penetration.has_value(); }

    bool admits(const Date& d) const {
        if (start && d < *start) return false;
        if (end && d > *end) return false;
        return true;
    }
};

namespace detail {

inline int parse_int(const std::string& text, const char* what) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        throw Error(ErrorCode::InvalidFilter, std::string("invalid ") + what + " '" + text + "'");
    }
    return value;
}

inline std::optional<Date> parse_date_param(const Params& params, const char* key) {
    auto it = params.find(key);
    if (it == params.end() || it->second.empty()) return std::nullopt;
    auto d = try_parse_date(it->second);
    if (!d) throw Error(ErrorCode::InvalidFilter, std::string(key) + " must be YYYY-MM-DD");
    return d;
}

} // namespace detail

/// Validates query parameters against the store. Throws InvalidFilter for
/// malformed input and UnknownPenetration for a level the store lacks.
inline QueryFilter parse_filter(const Params& params, const ScoreStore& store) {
    QueryFilter f;
    auto get = [&](const char* key) -> std::optional<std::string> {
        auto it = params.find(key);
        if (it == params.end()) return std::nullopt;
        return it->second;
    };

    f.model_id = get("model").value_or(store.default_model());
    if (!store.has_model(f.model_id)) throw Error(ErrorCode::InvalidFilter, "unknown model '" + f.model_id + "'");

    if (auto p = get("penetration"); p && *p != "all" && !p->empty()) {
        const int percent = detail::parse_int(*p, "penetration");
        const auto& pens = store.penetrations();
        if (std::find(pens.begin(), pens.end(), percent) == pens.end()) {
            throw Error(ErrorCode::UnknownPenetration, "no penetration level " + *p + " in the store");
        }
        f.penetration = percent;
    }
    if (auto r = get("resolution"); r && !r->empty()) {
        f.resolution = try_parse_resolution(*r);
        if (!f.resolution) throw Error(ErrorCode::InvalidFilter, "resolution must be 15min or 1h");
    }
    f.start = detail::parse_date_param(params, "start");
    f.end = detail::parse_date_param(params, "end");
    if (f.start && f.end && *f.start > *f.end) throw Error(ErrorCode::InvalidFilter, "start is after end");

    if (auto m = get("months")) {
        std::vector<int> months;
        std::string_view rest = *m;
        while (true) {
            const auto comma = rest.find(',');
            const std::string item(rest.substr(0, comma));
            const int month = detail::parse_int(item, "month");
            if (month < 1 || month > 12) throw Error(ErrorCode::InvalidFilter, "month out of range: " + item);
            if (std::find(months.begin(), months.end(), month) != months.end()) {
                throw Error(ErrorCode::InvalidFilter, "duplicate month " + item);
            }
            months.push_back(month);
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        std::sort(months.begin(), months.end());
        f.months = std::move(months);
    }
    return f;
}

namespace detail {

struct Selected {
    int penetration;
    Resolution resolution;
    const StoreGroup* group;  // null when the store has no such group for the model
};

/// Groups addressed by the filter, ordered by penetration then resolution.
inline std::vector<Selected> select_groups(const ScoreStore& store, const QueryFilter& f) {
    std::vector<Selected> out;
    for (int pen : store.penetrations()) {
        if (f.penetration && *f.penetration != pen) continue;
        for (Resolution res : store.resolutions()) {
            if (f.resolution && *f.resolution != res) continue;
            out.push_back({pen, res, store.find(f.model_id, pen, res)});
        }
    }
    return out;
}

inline Json date_or_null(const std::optional<Date>& d) { return d ? Json(format_date(*d)) : Json(nullptr); }

inline Json filter_echo(const QueryFilter& f) {
    Json j;
    j["model_id"] = f.model_id;
    j["penetration"] = f.penetration ? Json(*f.penetration) : Json("all");
    j["resolution"] = f.resolution ? Json(std::string(to_string(*f.resolution))) : Json(nullptr);
    j["start"] = date_or_null(f.start);
    j["end"] = date_or_null(f.end);
    j["months"] = f.months ? Json(*f.months) : Json(nullptr);
    return j;
}

} // namespace detail

inline Json meta(const ScoreStore& store) {
    Json j;
    j["models"] = store.models();
    j["reference_model"] = store.reference_model();
    j["default_model"] = store.default_model();
    j["penetrations"] = store.penetrations();
    Json res = Json::array();
    for (auto r : store.resolutions()) res.push_back(std::string(to_string(r)));
    j["resolutions"] = res;
    j["date_span"] = {{"start", detail::date_or_null(store.first_scored_date())},
                      {"end", detail::date_or_null(store.last_scored_date())}};
    j["patterns_span"] = {{"start", detail::date_or_null(store.patterns_start())},
                          {"end", detail::date_or_null(store.last_scored_date())}};
    j["pattern_months"] = store.pattern_months();
    j["record_count"] = store.record_count();
    Json scenarios = Json::array();
    for (const auto& s : store.scenarios()) {
        scenarios.push_back({{"scenario_id", s.scenario_id},
                             {"penetration", s.penetration},
                             {"resolution", std::string(to_string(s.resolution))},
                             {"record_count", s.record_count},
                             {"daily_count", s.daily_count},
                             {"point_count", s.point_count},
                             {"diagnostics", s.diagnostics}});
    }
    j["scenarios"] = scenarios;
    return j;
}

/// Box-plot statistics and the raw per-date points of every addressed group.
inline Json comparison(const ScoreStore& store, const QueryFilter& f) {
    Json groups = Json::array();
    for (const auto& sel : detail::select_groups(store, f)) {
        std::vector<double> values;
        Json points = Json::array();
        if (sel.group) {
            for (const auto& d : sel.group->daily) {
                if (!f.admits(d.date)) continue;
                values.push_back(d.crpss);
                points.push_back({{"date", format_date(d.date)}, {"crpss", d.crpss}});
            }
        }
        Json g;
        g["penetration"] = sel.penetration;
        g["resolution"] = std::string(to_string(sel.resolution));
        g["n"] = values.size();
        g["box"] = values.empty() ? Json(nullptr) : to_json(box_stats(values));
        g["points"] = std::move(points);
        groups.push_back(std::move(g));
    }
    Json j;
    j["filter"] = detail::filter_echo(f);
    j["groups"] = std::move(groups);
    return j;
}

/// Month x hour mean pointwise CRPSS for every addressed group. Rows are the
/// store's pattern months restricted by the months filter; the date filter
/// applies on top of both.
inline Json patterns(const ScoreStore& store, const QueryFilter& f) {
    std::vector<int> rows;
    for (int m : store.pattern_months()) {
        if (!f.months || std::binary_search(f.months->begin(), f.months->end(), m)) rows.push_back(m);
    }
    const auto span_start = store.patterns_start();
    std::optional<double> lo;
    std::optional<double> hi;
    Json grids = Json::array();
    for (const auto& sel : detail::select_groups(store, f)) {
        std::vector<PointSkill> points;
        if (sel.group && span_start) {
            for (const auto& p : sel.group->points) {
                const Date d = p.target_time.date();
                if (d >= *span_start && f.admits(d)) points.push_back(p);
            }
        }
        const auto cells = heatmap_aggregate(points, rows);
        Json jcells = Json::array();
        std::size_t n = 0;
        for (const auto& c : cells) {
            if (c.mean_crpss) {
                lo = lo ? std::min(*lo, *c.mean_crpss) : *c.mean_crpss;
                hi = hi ? std::max(*hi, *c.mean_crpss) : *c.mean_crpss;
            }
            n += c.n;
            jcells.push_back(to_json(c));
        }
        Json g;
        g["penetration"] = sel.penetration;
        g["resolution"] = std::string(to_string(sel.resolution));
        g["months"] = rows;
        g["n"] = n;
        g["cells"] = std::move(jcells);
        grids.push_back(std::move(g));
    }
    Json j;
    j["filter"] = detail::filter_echo(f);
    j["min_mean_crpss"] = lo ? Json(*lo) : Json(nullptr);
    j["max_mean_crpss"] = hi ? Json(*hi) : Json(nullptr);
    j["grids"] = std::move(grids);
    return j;
}

} // namespace nlf::api
