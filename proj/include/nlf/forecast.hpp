#pragma once

#include "nlf/error.hpp"
#include "nlf/series.hpp"
#include "nlf/time.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace nlf {

struct Ensemble {
    std::vector<double> members;
};

struct Quantiles {
    std::vector<double> levels;
    std::vector<double> values;
};

/// Probabilistic prediction for one target timestamp.
///
/// Construction validates the representation: ensemble members are non-empty
/// and finite; quantile levels are strictly increasing inside (0, 1) and the
/// values are rearranged (sorted) so they are non-decreasing.
class Forecast {
public:
    using Representation = std::variant<Ensemble, Quantiles>;

    Forecast(std::string model_id, Timestamp issue_time, Timestamp target_time, Representation rep)
        : model_id_(std::move(model_id)), issue_time_(issue_time), target_time_(target_time), rep_(std::move(rep)) {
        if (!(issue_time_ < target_time_)) {
            throw Error(ErrorCode::InvalidForecast, "issue_time must precede target_time");
        }
        if (auto* e = std::get_if<Ensemble>(&rep_)) {
            if (e->members.empty()) throw Error(ErrorCode::EmptyEnsemble, "ensemble has no members");
            for (double m : e->members) {
                if (!std::isfinite(m)) throw Error(ErrorCode::NonFinite, "non-finite ensemble member");
            }
        } else {
            auto& q = std::get<Quantiles>(rep_);
            if (q.levels.empty()) throw Error(ErrorCode::LevelOrder, "no quantile levels");
            if (q.levels.size() != q.values.size()) {
                throw Error(ErrorCode::LengthMismatch, "quantile levels and values differ in length");
            }
            for (std::size_t i = 0; i < q.levels.size(); ++i) {
                const double lvl = q.levels[i];
                if (!(lvl > 0.0 && lvl < 1.0) || (i > 0 && !(q.levels[i - 1] < lvl))) {
                    throw Error(ErrorCode::LevelOrder, "quantile levels must be strictly increasing in (0,1)");
                }
                if (!std::isfinite(q.values[i])) throw Error(ErrorCode::NonFinite, "non-finite quantile value");
            }
            std::sort(q.values.begin(), q.values.end());
        }
    }

    const std::string& model_id() const { return model_id_; }
    const Timestamp& issue_time() const { return issue_time_; }
    const Timestamp& target_time() const { return target_time_; }
    const Representation& representation() const { return rep_; }

    bool is_ensemble() const { return std::holds_alternative<Ensemble>(rep_); }
    const Ensemble& ensemble() const { return std::get<Ensemble>(rep_); }
    const Quantiles& quantiles() const { return std::get<Quantiles>(rep_); }

    friend bool operator==(const Forecast& a, const Forecast& b) {
        if (a.model_id_ != b.model_id_ || a.issue_time_ != b.issue_time_ || a.target_time_ != b.target_time_ ||
            a.rep_.index() != b.rep_.index()) {
            return false;
        }
        if (a.is_ensemble()) return a.ensemble().members == b.ensemble().members;
        return a.quantiles().levels == b.quantiles().levels && a.quantiles().values == b.quantiles().values;
    }

private:
    std::string model_id_;
    Timestamp issue_time_;
    Timestamp target_time_;
    Representation rep_;
};

enum class ForecasterKind { Reference30Day, CandidateClimatology };

/// The 19 levels 0.05, 0.10, ..., 0.95.
inline std::vector<double> default_quantile_levels() {
    std::vector<double> levels;
    for (int k = 1; k <= 19; ++k) levels.push_back(k / 20.0);
    return levels;
}

struct ForecasterSpec {
    std::string model_id;
    ForecasterKind kind = ForecasterKind::Reference30Day;
    int window_days = 30;
    double blend_weight = 0.5;
    std::vector<double> quantile_levels;

    static ForecasterSpec reference(std::string id = "reference", int window_days = 30) {
        return {std::move(id), ForecasterKind::Reference30Day, window_days, 0.0, {}};
    }

    static ForecasterSpec candidate(std::string id = "candidate", int window_days = 14, double blend_weight = 0.5) {
        return {std::move(id), ForecasterKind::CandidateClimatology, window_days, blend_weight,
                default_quantile_levels()};
    }

    void validate() const {
        if (model_id.empty()) throw Error(ErrorCode::ConfigInvalid, "model_id must not be empty");
        if (window_days < 1) throw Error(ErrorCode::ConfigInvalid, "window_days must be >= 1");
        if (!std::isfinite(blend_weight)) throw Error(ErrorCode::ConfigInvalid, "blend_weight must be finite");
        if (kind == ForecasterKind::CandidateClimatology && quantile_levels.empty()) {
            throw Error(ErrorCode::ConfigInvalid, "candidate forecaster needs quantile levels");
        }
    }
};

/// Same-time-of-day observations on the days strictly before `target`'s date,
/// most recent first. Days where that time point is missing (or lies outside
/// the series) are skipped and the walk reaches further back until `count`
/// values are collected.
inline std::vector<double> same_time_history(const NetLoadSeries& series, const Timestamp& target, int count) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    const int minute = target.minute_of_day();
    const Date first_day = series.start().date();
    for (Date day = add_days(target.date(), -1);
         std::chrono::sys_days{day} >= std::chrono::sys_days{first_day} && static_cast<int>(out.size()) < count;
         day = add_days(day, -1)) {
        if (auto idx = series.index_of(Timestamp{day, minute})) {
            if (const auto& v = series[*idx]) out.push_back(*v);
        }
    }
    if (static_cast<int>(out.size()) < count) {
        throw Error(ErrorCode::InsufficientHistory, "only " + std::to_string(out.size()) + " of " +
                                                        std::to_string(count) + " prior days usable for " +
                                                        format_timestamp(target));
    }
    return out;
}

/// Type-7 (linear interpolation at position p*(n-1)) quantile of sorted data.
inline double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw Error(ErrorCode::EmptyInput, "quantile of empty data");
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

/// Issue time for a day-ahead forecast of `target`: last grid point of the prior day.
inline Timestamp day_ahead_issue_time(const Timestamp& target, Resolution resolution) {
    return Timestamp{target.date(), 0}.plus_minutes(-step_minutes(resolution));
}

/// Persistence reference: the observed values at the target's time of day on
/// the `window_days` most recent usable prior days, as an ensemble.
inline Forecast reference_forecast(const NetLoadSeries& series, const Timestamp& target, int window_days = 30,
                                   std::string model_id = "reference") {
    if (window_days < 1) throw Error(ErrorCode::ConfigInvalid, "window_days must be >= 1");
    auto members = same_time_history(series, target, window_days);
    return Forecast{std::move(model_id), day_ahead_issue_time(target, series.resolution()), target,
                    Ensemble{std::move(members)}};
}

/// History-only candidate: empirical window quantiles shifted toward
/// yesterday's anomaly from the window median.
inline Forecast candidate_forecast(const NetLoadSeries& series, const Timestamp& target, const ForecasterSpec& spec) {
    spec.validate();
    auto window = same_time_history(series, target, spec.window_days);
    const double yesterday = window.front();
    std::sort(window.begin(), window.end());
    const double shift = spec.blend_weight * (yesterday - quantile_sorted(window, 0.5));
    Quantiles q;
    q.levels = spec.quantile_levels;
    q.values.reserve(q.levels.size());
    for (double level : q.levels) q.values.push_back(quantile_sorted(window, level) + shift);
    return Forecast{spec.model_id, day_ahead_issue_time(target, series.resolution()), target, std::move(q)};
}

inline Forecast make_forecast(const NetLoadSeries& series, const Timestamp& target, const ForecasterSpec& spec) {
    switch (spec.kind) {
    case ForecasterKind::Reference30Day: return reference_forecast(series, target, spec.window_days, spec.model_id);
    case ForecasterKind::CandidateClimatology: return candidate_forecast(series, target, spec);
    }
    throw Error(ErrorCode::ConfigInvalid, "unknown forecaster kind");
}

struct Schedule {
    std::vector<Forecast> forecasts;  // ordered by target_time
    std::vector<Timestamp> gaps;      // targets whose history requirement failed
};

/// Day-ahead backtest schedule: every grid time of every date in
/// [first, last]. Forecasts are issued at the last grid point of the previous
/// day and see only observations stamped strictly before it; the value stamped
/// at the issue time covers an interval that has not finished yet.
inline Schedule day_ahead_schedule(const NetLoadSeries& series, const ForecasterSpec& spec, const Date& first,
                                   const Date& last) {
    spec.validate();
    if (std::chrono::sys_days{first} > std::chrono::sys_days{last}) {
        throw Error(ErrorCode::EmptyRange, format_date(first) + " is after " + format_date(last));
    }
    Schedule out;
    const int steps = steps_per_day(series.resolution());
    const int step = step_minutes(series.resolution());
    const auto origin = series.start().minutes_since_epoch();
    for (Date day = first; std::chrono::sys_days{day} <= std::chrono::sys_days{last}; day = add_days(day, 1)) {
        const Timestamp issue = Timestamp{day, 0}.plus_minutes(-step);
        const auto delta = issue.minutes_since_epoch() - origin;
        const auto visible = delta <= 0 ? std::size_t{0} : static_cast<std::size_t>((delta + step - 1) / step);
        const NetLoadSeries history = series.head(visible);
        for (int k = 0; k < steps; ++k) {
            const Timestamp target{day, k * step};
            try {
                out.forecasts.push_back(make_forecast(history, target, spec));
            } catch (const Error& e) {
                if (e.code() != ErrorCode::InsufficientHistory) throw;
                out.gaps.push_back(target);
            }
        }
    }
    return out;
}

inline nlohmann::ordered_json to_json(const Forecast& f) {
    nlohmann::ordered_json j;
    j["model_id"] = f.model_id();
    j["issue_time"] = format_timestamp(f.issue_time());
    j["target_time"] = format_timestamp(f.target_time());
    if (f.is_ensemble()) {
        j["ensemble"] = f.ensemble().members;
    } else {
        j["quantile_levels"] = f.quantiles().levels;
        j["quantile_values"] = f.quantiles().values;
    }
    return j;
}

inline Forecast forecast_from_json(const nlohmann::ordered_json& j) {
    try {
        auto issue = parse_timestamp(j.at("issue_time").get<std::string>());
        auto target = parse_timestamp(j.at("target_time").get<std::string>());
        if (j.contains("ensemble")) {
            return Forecast{j.at("model_id").get<std::string>(), issue, target,
                            Ensemble{j.at("ensemble").get<std::vector<double>>()}};
        }
        return Forecast{j.at("model_id").get<std::string>(), issue, target,
                        Quantiles{j.at("quantile_levels").get<std::vector<double>>(),
                                  j.at("quantile_values").get<std::vector<double>>()}};
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedRow, std::string("bad forecast JSON: ") + e.what());
    }
}

/// One JSON object per line, in input order.
inline std::string to_jsonl(std::span<const Forecast> forecasts) {
    std::string out;
    for (const auto& f : forecasts) {
        out += to_json(f).dump();
        out.push_back('\n');
    }
    return out;
}

} // namespace nlf
