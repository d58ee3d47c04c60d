#pragma once

#include "nlf/error.hpp"
#include "nlf/time.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nlf {

/// A net-load observation in kW; nullopt is an explicit missing marker.
using Observation = std::optional<double>;

/// Uniformly spaced net-load observations for one penetration scenario.
///
/// Immutable after construction. Index `i` maps to `start + i * step`; the
/// start is aligned to the resolution grid and every present value is finite.
/// Only slicing can produce an empty series.
class NetLoadSeries {
public:
    NetLoadSeries(Resolution resolution, PenetrationLevel penetration, Timestamp start,
                  std::vector<Observation> values, std::string scenario_id = {})
        : resolution_(resolution),
          penetration_(penetration),
          start_(start),
          values_(std::move(values)),
          scenario_id_(std::move(scenario_id)) {
        if (!is_on_grid(start_, resolution_)) {
            throw Error(ErrorCode::GridMisaligned,
                        "series start " + format_timestamp(start_) + " is off the " +
                            std::string(to_string(resolution_)) + " grid");
        }
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (values_[i] && !std::isfinite(*values_[i])) {
                throw Error(ErrorCode::NonFinite, "non-finite value at index " + std::to_string(i));
            }
        }
    }

    Resolution resolution() const { return resolution_; }
    PenetrationLevel penetration() const { return penetration_; }
    const Timestamp& start() const { return start_; }
    const std::string& scenario_id() const { return scenario_id_; }
    std::span<const Observation> values() const { return values_; }

    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }
    const Observation& operator[](std::size_t i) const { return values_[i]; }

    int step() const { return step_minutes(resolution_); }

    Timestamp timestamp_at(std::size_t i) const {
        return start_.plus_minutes(static_cast<std::int64_t>(i) * step());
    }

    /// Grid index of `ts`, or nullopt when it is off-grid or outside the series.
    std::optional<std::size_t> index_of(const Timestamp& ts) const {
        const auto delta = ts.minutes_since_epoch() - start_.minutes_since_epoch();
        if (delta < 0 || delta % step() != 0) return std::nullopt;
        const auto idx = static_cast<std::size_t>(delta / step());
        if (idx >= values_.size()) return std::nullopt;
        return idx;
    }

    std::size_t missing_count() const {
        std::size_t n = 0;
        for (const auto& v : values_) n += v ? 0 : 1;
        return n;
    }

    /// First `n` points (clamped to size).
    NetLoadSeries head(std::size_t n) const {
        n = std::min(n, values_.size());
        return NetLoadSeries{resolution_, penetration_, start_,
                             std::vector<Observation>(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(n)),
                             scenario_id_};
    }

    NetLoadSeries with_scenario_id(std::string id) const {
        return NetLoadSeries{resolution_, penetration_, start_, values_, std::move(id)};
    }

    friend bool operator==(const NetLoadSeries& a, const NetLoadSeries& b) {
        return a.resolution_ == b.resolution_ && a.penetration_ == b.penetration_ &&
               a.start_ == b.start_ && a.values_ == b.values_;
    }

private:
    Resolution resolution_;
    PenetrationLevel penetration_;
    Timestamp start_;
    std::vector<Observation> values_;
    std::string scenario_id_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline Observation parse_value(std::string_view field) {
    field = trim(field);
    if (field.empty()) return std::nullopt;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

} // namespace detail

/// Parses `timestamp,net_load_kw` CSV text into a contiguous series.
///
/// Grid points absent from the file and non-numeric values become missing.
inline NetLoadSeries parse_series(std::string_view csv_text, Resolution resolution,
                                  PenetrationLevel penetration, std::string scenario_id = {}) {
    std::vector<std::pair<Timestamp, Observation>> rows;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (!csv_text.empty()) {
        const auto nl = csv_text.find('\n');
        std::string_view line = csv_text.substr(0, nl);
        csv_text = nl == std::string_view::npos ? std::string_view{} : csv_text.substr(nl + 1);
        ++line_no;
        line = detail::trim(line);
        if (line.empty()) continue;
        if (!header_seen) {
            if (line != "timestamp,net_load_kw") {
                throw Error(ErrorCode::MalformedRow, "expected header 'timestamp,net_load_kw'");
            }
            header_seen = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string_view::npos) {
            throw Error(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": missing comma");
        }
        const auto ts_text = detail::trim(line.substr(0, comma));
        auto ts = try_parse_timestamp(ts_text);
        if (!ts) {
            throw Error(ErrorCode::MalformedRow,
                        "line " + std::to_string(line_no) + ": bad timestamp '" + std::string(ts_text) + "'");
        }
        if (!is_on_grid(*ts, resolution)) {
            throw Error(ErrorCode::GridMisaligned,
                        "line " + std::to_string(line_no) + ": " + format_timestamp(*ts) + " is off the " +
                            std::string(to_string(resolution)) + " grid");
        }
        if (!rows.empty() && !(rows.back().first < *ts)) {
            throw Error(ErrorCode::NonMonotonic,
                        "line " + std::to_string(line_no) + ": timestamps not strictly increasing");
        }
        rows.emplace_back(*ts, detail::parse_value(line.substr(comma + 1)));
    }
    if (!header_seen) throw Error(ErrorCode::MalformedRow, "empty CSV (no header)");
    if (rows.empty()) throw Error(ErrorCode::EmptySeries, "CSV has no data rows");

    const int step = step_minutes(resolution);
    const Timestamp start = rows.front().first;
    const auto span = rows.back().first.minutes_since_epoch() - start.minutes_since_epoch();
    std::vector<Observation> values(static_cast<std::size_t>(span / step) + 1);
    for (const auto& [ts, value] : rows) {
        values[static_cast<std::size_t>((ts.minutes_since_epoch() - start.minutes_since_epoch()) / step)] = value;
    }
    return NetLoadSeries{resolution, penetration, start, std::move(values), std::move(scenario_id)};
}

/// Writes the series as CSV. Values use the shortest round-trip representation.
inline std::string to_csv(const NetLoadSeries& series) {
    std::string out = "timestamp,net_load_kw\n";
    out.reserve(out.size() + series.size() * 28);
    char buf[64];
    for (std::size_t i = 0; i < series.size(); ++i) {
        out += format_timestamp(series.timestamp_at(i));
        out.push_back(',');
        if (const auto& v = series[i]) {
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), *v);
            (void)ec;
            out.append(buf, ptr);
        }
        out.push_back('\n');
    }
    return out;
}

/// Down-samples by interval mean. An output step with any missing source
/// value is missing. Same-resolution input is returned unchanged.
inline NetLoadSeries resample(const NetLoadSeries& series, Resolution target) {
    if (series.resolution() == target) return series;
    if (step_minutes(target) < series.step()) {
        throw Error(ErrorCode::Upsample, "cannot resample " + std::string(to_string(series.resolution())) +
                                             " to finer " + std::string(to_string(target)));
    }
    const auto ratio = static_cast<std::size_t>(step_minutes(target) / series.step());
    const auto& start = series.start();
    // first source index whose timestamp lies on the target grid
    std::size_t offset = 0;
    while (offset < series.size() && !is_on_grid(series.timestamp_at(offset), target)) ++offset;
    if (offset == series.size()) {
        Timestamp aligned{start.date(), (start.minute_of_day() / step_minutes(target) + 1) * step_minutes(target)};
        return NetLoadSeries{target, series.penetration(), aligned, {}, series.scenario_id()};
    }
    const Timestamp out_start = series.timestamp_at(offset);
    std::vector<Observation> out;
    out.reserve((series.size() - offset) / ratio);
    for (std::size_t i = offset; i + ratio <= series.size(); i += ratio) {
        double sum = 0.0;
        bool complete = true;
        for (std::size_t k = 0; k < ratio; ++k) {
            const auto& v = series[i + k];
            if (!v) {
                complete = false;
                break;
            }
            sum += *v;
        }
        out.push_back(complete ? Observation{sum / static_cast<double>(ratio)} : std::nullopt);
    }
    return NetLoadSeries{target, series.penetration(), out_start, std::move(out), series.scenario_id()};
}

/// All grid points whose date lies in [start_date, end_date].
inline NetLoadSeries slice(const NetLoadSeries& series, const Date& start_date, const Date& end_date) {
    if (std::chrono::sys_days{start_date} > std::chrono::sys_days{end_date}) {
        throw Error(ErrorCode::InvertedRange, format_date(start_date) + " is after " + format_date(end_date));
    }
    const auto origin = series.start().minutes_since_epoch();
    const auto step = static_cast<std::int64_t>(series.step());
    const auto n = static_cast<std::int64_t>(series.size());
    // first grid index at or after a given instant, clamped to [0, n]
    auto ceil_index = [&](const Timestamp& ts) {
        const auto delta = ts.minutes_since_epoch() - origin;
        if (delta <= 0) return std::int64_t{0};
        return std::min(n, (delta + step - 1) / step);
    };
    const auto lo = ceil_index(Timestamp{start_date, 0});
    const auto hi = ceil_index(Timestamp{add_days(end_date, 1), 0});
    std::vector<Observation> out;
    Timestamp first{start_date, 0};
    if (lo < hi) {
        out.assign(series.values().begin() + lo, series.values().begin() + hi);
        first = series.timestamp_at(static_cast<std::size_t>(lo));
    }
    return NetLoadSeries{series.resolution(), series.penetration(), first, std::move(out), series.scenario_id()};
}

} // namespace nlf
