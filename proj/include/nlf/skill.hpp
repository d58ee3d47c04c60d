#pragma once

#include "nlf/crps.hpp"
#include "nlf/error.hpp"
#include "nlf/time.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nlf {

/// CRPS of one (model, target timestamp, scenario) triple.
struct ScoreRecord {
    std::string model_id;
    Timestamp target_time;
    PenetrationLevel penetration;
    Resolution resolution;
    double crps;
};

struct SkillScore {
    double value;
    bool degenerate;  // both scores zero; value is 0 by convention
};

/// 1 - model/reference, with the degenerate zero-reference cases resolved.
inline SkillScore crpss_checked(double crps_model, double crps_reference) {
    if (!(crps_model >= 0.0) || !(crps_reference >= 0.0) || !std::isfinite(crps_model) ||
        !std::isfinite(crps_reference)) {
        throw Error(ErrorCode::NegativeScore, "CRPS inputs must be finite and non-negative");
    }
    if (crps_reference == 0.0) {
        if (crps_model > 0.0) {
            throw Error(ErrorCode::DegenerateReference, "reference CRPS is zero while model CRPS is positive");
        }
        return {0.0, true};
    }
    return {1.0 - crps_model / crps_reference, false};
}

inline double crpss(double crps_model, double crps_reference) {
    return crpss_checked(crps_model, crps_reference).value;
}

struct DailySkill {
    std::string model_id;
    Date date;
    PenetrationLevel penetration;
    Resolution resolution;
    double crpss;
    bool degenerate = false;
};

namespace detail {

inline void check_same_day(std::span<const ScoreRecord> records, const ScoreRecord& anchor) {
    for (const auto& r : records) {
        if (r.target_time.date() != anchor.target_time.date() || r.penetration != anchor.penetration ||
            r.resolution != anchor.resolution) {
            throw Error(ErrorCode::TimepointMismatch, "records span more than one date/scenario");
        }
    }
}

inline double mean_crps(std::span<const ScoreRecord> records) {
    CompensatedSum sum;
    for (const auto& r : records) sum.add(r.crps);
    return sum.value() / static_cast<double>(records.size());
}

inline std::vector<Timestamp> sorted_times(std::span<const ScoreRecord> records) {
    std::vector<Timestamp> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.target_time);
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace detail

/// Skill of the day's mean CRPS against the reference's mean CRPS.
inline DailySkill daily_skill(std::span<const ScoreRecord> model, std::span<const ScoreRecord> reference) {
    if (model.empty() || reference.empty()) throw Error(ErrorCode::EmptyDay, "no records for the day");
    const auto& anchor = model.front();
    detail::check_same_day(model, anchor);
    detail::check_same_day(reference, anchor);
    if (detail::sorted_times(model) != detail::sorted_times(reference)) {
        throw Error(ErrorCode::TimepointMismatch, "model and reference cover different target times on " +
                                                      format_date(anchor.target_time.date()));
    }
    const auto s = crpss_checked(detail::mean_crps(model), detail::mean_crps(reference));
    return {anchor.model_id, anchor.target_time.date(), anchor.penetration, anchor.resolution, s.value, s.degenerate};
}

/// Pointwise (timestamp, CRPSS) pair.
struct PointSkill {
    Timestamp target_time;
    double crpss;
};

/// Reference CRPS below this is too close to zero for a stable ratio.
inline constexpr double kNearZeroReferenceKw = 1e-9;

struct PointSkillSet {
    std::vector<PointSkill> points;
    std::size_t dropped_near_zero_reference = 0;
};

/// Pointwise CRPSS for matching target times. Records are paired by
/// target_time; pairs whose reference CRPS is below the near-zero guard are
/// dropped and counted.
inline PointSkillSet pointwise_skill(std::span<const ScoreRecord> model, std::span<const ScoreRecord> reference) {
    std::vector<const ScoreRecord*> m;
    std::vector<const ScoreRecord*> r;
    for (const auto& x : model) m.push_back(&x);
    for (const auto& x : reference) r.push_back(&x);
    auto by_time = [](const ScoreRecord* a, const ScoreRecord* b) { return a->target_time < b->target_time; };
    std::sort(m.begin(), m.end(), by_time);
    std::sort(r.begin(), r.end(), by_time);
    if (m.size() != r.size()) throw Error(ErrorCode::TimepointMismatch, "record counts differ");
    PointSkillSet out;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i]->target_time != r[i]->target_time) {
            throw Error(ErrorCode::TimepointMismatch, "unmatched target time " + format_timestamp(m[i]->target_time));
        }
        if (r[i]->crps < kNearZeroReferenceKw) {
            ++out.dropped_near_zero_reference;
            continue;
        }
        out.points.push_back({m[i]->target_time, crpss(m[i]->crps, r[i]->crps)});
    }
    return out;
}

/// Tukey box-plot summary.
struct BoxStats {
    double median;
    double q1;
    double q3;
    double whisker_lo;
    double whisker_hi;
    std::vector<double> outliers;  // ascending
    std::size_t n;
};

/// Quartiles interpolate order statistics at position p*(n-1); whiskers are
/// the most extreme data values inside [q1 - 1.5 IQR, q3 + 1.5 IQR].
inline BoxStats box_stats(std::span<const double> values) {
    if (values.empty()) throw Error(ErrorCode::EmptyInput, "box_stats of empty data");
    std::vector<double> sorted(values.begin(), values.end());
    for (double v : sorted) {
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "non-finite value in box_stats");
    }
    std::sort(sorted.begin(), sorted.end());
    BoxStats b{};
    b.n = sorted.size();
    b.q1 = quantile_sorted(sorted, 0.25);
    b.median = quantile_sorted(sorted, 0.5);
    b.q3 = quantile_sorted(sorted, 0.75);
    const double iqr = b.q3 - b.q1;
    const double lo_fence = b.q1 - 1.5 * iqr;
    const double hi_fence = b.q3 + 1.5 * iqr;
    b.whisker_lo = b.q1;
    b.whisker_hi = b.q3;
    bool lo_set = false;
    for (double v : sorted) {
        if (v < lo_fence || v > hi_fence) {
            b.outliers.push_back(v);
            continue;
        }
        if (!lo_set) {
            b.whisker_lo = v;
            lo_set = true;
        }
        b.whisker_hi = v;
    }
    return b;
}

/// Mean CRPSS for one (month, hour-of-day) pair; absent when no records.
struct HeatmapCell {
    int month;
    int hour;
    std::optional<double> mean_crpss;
    std::size_t n;
};

/// Groups point skills by (month, hour) over the given month rows, returning
/// `months.size() * 24` cells in row-major order. Points in other months are
/// ignored.
inline std::vector<HeatmapCell> heatmap_aggregate(std::span<const PointSkill> points, std::span<const int> months) {
    std::array<int, 13> row_of{};
    row_of.fill(-1);
    for (std::size_t r = 0; r < months.size(); ++r) {
        const int m = months[r];
        if (m < 1 || m > 12) throw Error(ErrorCode::InvalidFilter, "month out of range: " + std::to_string(m));
        if (row_of[m] >= 0) throw Error(ErrorCode::InvalidFilter, "duplicate month " + std::to_string(m));
        row_of[m] = static_cast<int>(r);
    }
    std::vector<CompensatedSum> sums(months.size() * 24);
    std::vector<std::size_t> counts(months.size() * 24, 0);
    for (const auto& p : points) {
        const int row = row_of[p.target_time.month()];
        if (row < 0) continue;
        const auto cell = static_cast<std::size_t>(row) * 24 + static_cast<std::size_t>(p.target_time.hour_of_day());
        sums[cell].add(p.crpss);
        ++counts[cell];
    }
    std::vector<HeatmapCell> out;
    out.reserve(sums.size());
    for (std::size_t r = 0; r < months.size(); ++r) {
        for (int h = 0; h < 24; ++h) {
            const auto cell = r * 24 + static_cast<std::size_t>(h);
            std::optional<double> mean;
            if (counts[cell] > 0) mean = sums[cell].value() / static_cast<double>(counts[cell]);
            out.push_back({months[r], h, mean, counts[cell]});
        }
    }
    return out;
}

// JSON schemas shared by the score store and the HTTP service.

inline nlohmann::ordered_json to_json(const ScoreRecord& r) {
    nlohmann::ordered_json j;
    j["model_id"] = r.model_id;
    j["target_time"] = format_timestamp(r.target_time);
    j["penetration"] = r.penetration.percent();
    j["resolution"] = std::string(to_string(r.resolution));
    j["crps"] = r.crps;
    return j;
}

inline ScoreRecord score_record_from_json(const nlohmann::ordered_json& j) {
    try {
        auto res = try_parse_resolution(j.at("resolution").get<std::string>());
        if (!res) throw Error(ErrorCode::MalformedRow, "unknown resolution");
        ScoreRecord r{j.at("model_id").get<std::string>(), parse_timestamp(j.at("target_time").get<std::string>()),
                      PenetrationLevel::from_percent(j.at("penetration").get<int>()), *res, j.at("crps").get<double>()};
        if (!(r.crps >= 0.0) || !std::isfinite(r.crps)) throw Error(ErrorCode::NegativeScore, "bad crps value");
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedRow, std::string("bad score record: ") + e.what());
    }
}

inline nlohmann::ordered_json to_json(const DailySkill& d) {
    nlohmann::ordered_json j;
    j["model_id"] = d.model_id;
    j["date"] = format_date(d.date);
    j["penetration"] = d.penetration.percent();
    j["resolution"] = std::string(to_string(d.resolution));
    j["crpss"] = d.crpss;
    if (d.degenerate) j["degenerate"] = true;
    return j;
}

inline DailySkill daily_skill_from_json(const nlohmann::ordered_json& j) {
    try {
        auto res = try_parse_resolution(j.at("resolution").get<std::string>());
        if (!res) throw Error(ErrorCode::MalformedRow, "unknown resolution");
        return {j.at("model_id").get<std::string>(), parse_date(j.at("date").get<std::string>()),
                PenetrationLevel::from_percent(j.at("penetration").get<int>()), *res, j.at("crpss").get<double>(),
                j.value("degenerate", false)};
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedRow, std::string("bad daily skill: ") + e.what());
    }
}

inline nlohmann::ordered_json to_json(const BoxStats& b) {
    nlohmann::ordered_json j;
    j["median"] = b.median;
    j["q1"] = b.q1;
    j["q3"] = b.q3;
    j["whisker_lo"] = b.whisker_lo;
    j["whisker_hi"] = b.whisker_hi;
    j["outliers"] = b.outliers;
    j["n"] = b.n;
    return j;
}

inline nlohmann::ordered_json to_json(const HeatmapCell& c) {
    nlohmann::ordered_json j;
    j["month"] = c.month;
    j["hour"] = c.hour;
    j["mean_crpss"] = c.mean_crpss ? nlohmann::ordered_json(*c.mean_crpss) : nlohmann::ordered_json(nullptr);
    j["n"] = c.n;
    return j;
}

} // namespace nlf
