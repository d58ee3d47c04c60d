#pragma once

#include "nlf/error.hpp"
#include "nlf/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace nlf {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

namespace detail {

inline void check_ensemble(std::span<const double> members, double observation) {
    if (members.empty()) throw Error(ErrorCode::EmptyEnsemble, "ensemble has no members");
    if (!std::isfinite(observation)) throw Error(ErrorCode::NonFinite, "non-finite observation");
    for (double m : members) {
        if (!std::isfinite(m)) throw Error(ErrorCode::NonFinite, "non-finite ensemble member");
    }
}

} // namespace detail

/// Ensemble CRPS by its pairwise (energy) definition, O(n^2):
///   (1/n) sum_i |x_i - y|  -  1/(2 n^2) sum_i sum_j |x_i - x_j|
inline double crps_ensemble_pairwise(std::span<const double> members, double observation) {
    detail::check_ensemble(members, observation);
    const auto n = static_cast<double>(members.size());
    CompensatedSum spread;
    CompensatedSum error;
    for (double xi : members) {
        error.add(std::abs(xi - observation));
        for (double xj : members) spread.add(std::abs(xi - xj));
    }
    return std::max(0.0, error.value() / n - spread.value() / (2.0 * n * n));
}

/// Ensemble CRPS, O(n log n). On sorted members the pairwise spread term
/// reduces to (1/n^2) sum_i (2i - n - 1) x_(i) for 1-based i.
inline double crps_ensemble(std::span<const double> members, double observation) {
    detail::check_ensemble(members, observation);
    std::vector<double> sorted(members.begin(), members.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    CompensatedSum error;
    CompensatedSum spread;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        error.add(std::abs(sorted[i] - observation));
        spread.add((2.0 * static_cast<double>(i + 1) - n - 1.0) * sorted[i]);
    }
    return std::max(0.0, error.value() / n - spread.value() / (n * n));
}

/// Pinball (check) loss u * (tau - 1{u < 0}) with u = observation - value.
inline double pinball_loss(double level, double value, double observation) {
    const double u = observation - value;
    return u * (level - (u < 0.0 ? 1.0 : 0.0));
}

/// Quantile-set CRPS approximation: twice the mean pinball loss over levels.
inline double crps_quantile(std::span<const double> levels, std::span<const double> values, double observation) {
    if (levels.size() != values.size()) {
        throw Error(ErrorCode::LengthMismatch, "quantile levels and values differ in length");
    }
    if (levels.empty()) throw Error(ErrorCode::LevelOrder, "no quantile levels");
    if (!std::isfinite(observation)) throw Error(ErrorCode::NonFinite, "non-finite observation");
    CompensatedSum total;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (!(levels[i] > 0.0 && levels[i] < 1.0) || (i > 0 && !(levels[i - 1] < levels[i]))) {
            throw Error(ErrorCode::LevelOrder, "quantile levels must be strictly increasing in (0,1)");
        }
        if (!std::isfinite(values[i])) throw Error(ErrorCode::NonFinite, "non-finite quantile value");
        if (i > 0 && values[i] < values[i - 1]) {
            throw Error(ErrorCode::LevelOrder, "quantile values must be non-decreasing");
        }
        total.add(pinball_loss(levels[i], values[i], observation));
    }
    return 2.0 * total.value() / static_cast<double>(levels.size());
}

inline double crps(const Forecast& forecast, double observation) {
    if (forecast.is_ensemble()) return crps_ensemble(forecast.ensemble().members, observation);
    const auto& q = forecast.quantiles();
    return crps_quantile(q.levels, q.values, observation);
}

} // namespace nlf
