#pragma once

#include "nlf/error.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace nlf {

using Date = std::chrono::year_month_day;

namespace detail {

inline std::optional<int> parse_fixed_int(std::string_view text) {
    if (text.empty()) return std::nullopt;
    for (char c : text) {
        if (c < '0' || c > '9') return std::nullopt;
    }
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

inline void append_padded(std::string& out, int value, int width) {
    std::array<char, 16> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    (void)ec;
    const auto len = static_cast<int>(ptr - buf.data());
    for (int i = len; i < width; ++i) out.push_back('0');
    out.append(buf.data(), ptr);
}

} // namespace detail

/// Parses a strict `YYYY-MM-DD` date. Returns nullopt on any deviation.
inline std::optional<Date> try_parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    auto y = detail::parse_fixed_int(text.substr(0, 4));
    auto m = detail::parse_fixed_int(text.substr(5, 2));
    auto d = detail::parse_fixed_int(text.substr(8, 2));
    if (!y || !m || !d) return std::nullopt;
    Date date{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
              std::chrono::day{static_cast<unsigned>(*d)}};
    if (!date.ok()) return std::nullopt;
    return date;
}

inline Date parse_date(std::string_view text) {
    if (auto date = try_parse_date(text)) return *date;
    throw Error(ErrorCode::MalformedRow, "invalid date '" + std::string(text) + "'");
}

inline std::string format_date(const Date& date) {
    std::string out;
    out.reserve(10);
    detail::append_padded(out, static_cast<int>(date.year()), 4);
    out.push_back('-');
    detail::append_padded(out, static_cast<int>(static_cast<unsigned>(date.month())), 2);
    out.push_back('-');
    detail::append_padded(out, static_cast<int>(static_cast<unsigned>(date.day())), 2);
    return out;
}

inline Date add_days(const Date& date, int days) {
    return Date{std::chrono::sys_days{date} + std::chrono::days{days}};
}

inline int days_between(const Date& from, const Date& to) {
    return static_cast<int>((std::chrono::sys_days{to} - std::chrono::sys_days{from}).count());
}

/// 1-based day of year.
inline int day_of_year(const Date& date) {
    const Date jan1{date.year(), std::chrono::January, std::chrono::day{1}};
    return days_between(jan1, date) + 1;
}

/// Timezone-naive wall-clock instant with minute precision.
class Timestamp {
public:
    using Minutes = std::chrono::sys_time<std::chrono::minutes>;

    constexpr Timestamp() = default;
    constexpr explicit Timestamp(Minutes tp) : tp_(tp) {}
    Timestamp(const Date& date, int minute_of_day)
        : tp_(std::chrono::sys_days{date} + std::chrono::minutes{minute_of_day}) {}

    constexpr Minutes time_point() const { return tp_; }
    std::int64_t minutes_since_epoch() const { return tp_.time_since_epoch().count(); }

    Date date() const { return Date{std::chrono::floor<std::chrono::days>(tp_)}; }
    int minute_of_day() const {
        return static_cast<int>((tp_ - std::chrono::floor<std::chrono::days>(tp_)).count());
    }
    int hour_of_day() const { return minute_of_day() / 60; }
    int minute() const { return minute_of_day() % 60; }
    int month() const { return static_cast<int>(static_cast<unsigned>(date().month())); }

    Timestamp plus_minutes(std::int64_t minutes) const {
        return Timestamp{tp_ + std::chrono::minutes{minutes}};
    }

    friend constexpr auto operator<=>(const Timestamp&, const Timestamp&) = default;

private:
    Minutes tp_{};
};

/// Parses a strict `YYYY-MM-DDTHH:MM` timestamp.
inline std::optional<Timestamp> try_parse_timestamp(std::string_view text) {
    if (text.size() != 16 || text[10] != 'T' || text[13] != ':') return std::nullopt;
    auto date = try_parse_date(text.substr(0, 10));
    auto hh = detail::parse_fixed_int(text.substr(11, 2));
    auto mm = detail::parse_fixed_int(text.substr(14, 2));
    if (!date || !hh || !mm || *hh > 23 || *mm > 59) return std::nullopt;
    return Timestamp{*date, *hh * 60 + *mm};
}

inline Timestamp parse_timestamp(std::string_view text) {
    if (auto ts = try_parse_timestamp(text)) return *ts;
    throw Error(ErrorCode::MalformedRow, "invalid timestamp '" + std::string(text) + "'");
}

inline std::string format_timestamp(const Timestamp& ts) {
    std::string out = format_date(ts.date());
    out.push_back('T');
    detail::append_padded(out, ts.hour_of_day(), 2);
    out.push_back(':');
    detail::append_padded(out, ts.minute(), 2);
    return out;
}

enum class Resolution { Min15, Hour1 };

constexpr int steps_per_day(Resolution r) noexcept { return r == Resolution::Min15 ? 96 : 24; }
constexpr int step_minutes(Resolution r) noexcept { return r == Resolution::Min15 ? 15 : 60; }

constexpr std::string_view to_string(Resolution r) noexcept {
    return r == Resolution::Min15 ? "15min" : "1h";
}

inline std::optional<Resolution> try_parse_resolution(std::string_view text) {
    if (text == "15min") return Resolution::Min15;
    if (text == "1h") return Resolution::Hour1;
    return std::nullopt;
}

inline bool is_on_grid(const Timestamp& ts, Resolution r) {
    return ts.minute_of_day() % step_minutes(r) == 0;
}

/// Solar penetration scenario label; only 20, 30 and 50 percent exist.
class PenetrationLevel {
public:
    static constexpr std::array<int, 3> kLevels{20, 30, 50};

    static bool is_valid(int percent) noexcept {
        for (int level : kLevels) {
            if (level == percent) return true;
        }
        return false;
    }

    static PenetrationLevel from_percent(int percent) {
        if (!is_valid(percent)) {
            throw Error(ErrorCode::UnknownPenetration,
                        "penetration must be one of 20, 30, 50 (got " + std::to_string(percent) + ")");
        }
        return PenetrationLevel{percent};
    }

    constexpr int percent() const noexcept { return percent_; }
    constexpr double fraction() const noexcept { return percent_ / 100.0; }

    friend constexpr auto operator<=>(const PenetrationLevel&, const PenetrationLevel&) = default;

private:
    constexpr explicit PenetrationLevel(int percent) : percent_(percent) {}
    int percent_ = 20;
};

} // namespace nlf
