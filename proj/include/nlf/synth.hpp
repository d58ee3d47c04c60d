#pragma once

#include "nlf/error.hpp"
#include "nlf/series.hpp"
#include "nlf/time.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace nlf {

struct ScenarioConfig {
    PenetrationLevel penetration = PenetrationLevel::from_percent(20);
    Resolution resolution = Resolution::Min15;
    Date start_date{std::chrono::year{2023}, std::chrono::January, std::chrono::day{1}};
    int days = 365;
    std::uint64_t seed = 42;
    double base_load_kw = 100.0;
    double solar_capacity_kw = 120.0;
    double noise_sd_kw = 4.0;
    // Test hook: replaces penetration/100 as the solar scale (0 removes solar).
    std::optional<double> solar_scale_override;

    static constexpr int kMinDays = 32;

    void validate() const {
        if (days < kMinDays) {
            throw Error(ErrorCode::ConfigInvalid,
                        "days must be >= " + std::to_string(kMinDays) + " (30-day warm-up plus scored days), got " +
                            std::to_string(days));
        }
        if (!start_date.ok()) throw Error(ErrorCode::ConfigInvalid, "invalid start date");
        if (!(base_load_kw > 0.0) || !(solar_capacity_kw > 0.0) || !(noise_sd_kw > 0.0)) {
            throw Error(ErrorCode::ConfigInvalid, "base load, solar capacity and noise sd must be positive");
        }
        if (solar_scale_override && !(*solar_scale_override >= 0.0)) {
            throw Error(ErrorCode::ConfigInvalid, "solar scale override must be non-negative");
        }
    }

    double solar_scale() const { return solar_scale_override.value_or(penetration.fraction()); }
};

namespace synth {

inline constexpr double kMorningPeakHour = 8.0;
inline constexpr double kMorningPeakWidth = 2.5;
inline constexpr double kEveningPeakHour = 19.0;
inline constexpr double kEveningPeakWidth = 3.0;

/// Gaussian bump in hour-of-day with wrap-around distance; peak value 1.
inline double peak_bump(double hour, double center, double width) {
    double d = std::abs(hour - center);
    d = std::min(d, 24.0 - d);
    return std::exp(-0.5 * (d / width) * (d / width));
}

inline double seasonal_factor(int doy) {
    return 1.0 + 0.15 * std::cos(2.0 * std::numbers::pi * (doy - 15) / 365.0);
}

/// Demand in kW before noise.
inline double demand_kw(double base_load_kw, double hour, int doy) {
    return base_load_kw *
           (0.7 + 0.2 * peak_bump(hour, kMorningPeakHour, kMorningPeakWidth) +
            0.3 * peak_bump(hour, kEveningPeakHour, kEveningPeakWidth)) *
           seasonal_factor(doy);
}

/// Half-sine over daylight, 06:00-18:00 widened by up to 1.5 h on each side at
/// the June solstice (narrowed by the same in December). Zero at night.
inline double irradiance_shape(double hour, int doy) {
    const double widen = 1.5 * std::cos(2.0 * std::numbers::pi * (doy - 172) / 365.0);
    const double sunrise = 6.0 - widen;
    const double sunset = 18.0 + widen;
    if (hour <= sunrise || hour >= sunset) return 0.0;
    return std::sin(std::numbers::pi * (hour - sunrise) / (sunset - sunrise));
}

struct Components {
    std::vector<double> demand_plus_noise;
    std::vector<double> irradiance;
    Timestamp start;
};

/// Shared realization of demand, noise and irradiance; the noise stream is
/// drawn sequentially from the seed.
inline Components components(const ScenarioConfig& config) {
    config.validate();
    const int steps = steps_per_day(config.resolution);
    const int step = step_minutes(config.resolution);
    const auto total = static_cast<std::size_t>(config.days) * static_cast<std::size_t>(steps);
    Components c;
    c.start = Timestamp{config.start_date, 0};
    c.demand_plus_noise.reserve(total);
    c.irradiance.reserve(total);
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> noise(0.0, config.noise_sd_kw);
    for (int d = 0; d < config.days; ++d) {
        const int doy = day_of_year(add_days(config.start_date, d));
        for (int k = 0; k < steps; ++k) {
            const double hour = k * step / 60.0;
            c.demand_plus_noise.push_back(demand_kw(config.base_load_kw, hour, doy) + noise(rng));
            c.irradiance.push_back(irradiance_shape(hour, doy));
        }
    }
    return c;
}

inline NetLoadSeries net_load_from(const Components& c, const ScenarioConfig& config, std::string scenario_id) {
    const double solar_kw = config.solar_scale() * config.solar_capacity_kw;
    std::vector<Observation> values;
    values.reserve(c.irradiance.size());
    for (std::size_t i = 0; i < c.irradiance.size(); ++i) {
        values.emplace_back(c.demand_plus_noise[i] - solar_kw * c.irradiance[i]);
    }
    return NetLoadSeries{config.resolution, config.penetration, c.start, std::move(values), std::move(scenario_id)};
}

} // namespace synth

inline std::string scenario_id(PenetrationLevel p, Resolution r) {
    return "pen" + std::to_string(p.percent()) + "_" + std::string(to_string(r));
}

/// Deterministic synthetic net load:
///   demand(t) - scale * solar_capacity * irradiance(t) + noise(t).
inline NetLoadSeries generate(const ScenarioConfig& config) {
    return synth::net_load_from(synth::components(config), config, scenario_id(config.penetration, config.resolution));
}

/// The 3 penetrations x 2 resolutions grid from one shared 15-minute
/// realization; hourly series are resampled from their 15-minute parents.
/// Ordered by penetration, then 15min before 1h.
inline std::vector<NetLoadSeries> generate_suite(std::uint64_t seed, const Date& start_date, int days) {
    ScenarioConfig config;
    config.seed = seed;
    config.start_date = start_date;
    config.days = days;
    config.resolution = Resolution::Min15;
    const auto shared = synth::components(config);
    std::vector<NetLoadSeries> suite;
    for (int percent : PenetrationLevel::kLevels) {
        config.penetration = PenetrationLevel::from_percent(percent);
        auto fine = synth::net_load_from(shared, config, scenario_id(config.penetration, Resolution::Min15));
        auto coarse = resample(fine, Resolution::Hour1)
                          .with_scenario_id(scenario_id(config.penetration, Resolution::Hour1));
        suite.push_back(std::move(fine));
        suite.push_back(std::move(coarse));
    }
    return suite;
}

} // namespace nlf
