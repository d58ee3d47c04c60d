#include "test_support.hpp"

#include <boost/math/distributions/normal.hpp>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace nlf;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected nlf::Error";
    return ErrorCode::Io;
}

// Integral of (F(x) - 1{x >= y})^2 over the real line. Between consecutive
// breakpoints (members and y) the integrand is constant, so summing
// constant * width over the intervals is exact.
double crps_by_integration(std::vector<double> members, double y) {
    std::vector<double> knots = members;
    knots.push_back(y);
    std::sort(knots.begin(), knots.end());
    std::sort(members.begin(), members.end());
    const double n = static_cast<double>(members.size());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double mid = 0.5 * (knots[i] + knots[i + 1]);
        const double cdf =
            static_cast<double>(std::upper_bound(members.begin(), members.end(), mid) - members.begin()) / n;
        const double step = mid >= y ? 1.0 : 0.0;
        total += (cdf - step) * (cdf - step) * (knots[i + 1] - knots[i]);
    }
    return total;
}

double gaussian_crps(double mu, double sigma, double y) {
    const boost::math::normal std_normal;
    const double z = (y - mu) / sigma;
    return sigma * (z * (2.0 * boost::math::cdf(std_normal, z) - 1.0) + 2.0 * boost::math::pdf(std_normal, z) -
                    1.0 / std::sqrt(std::numbers::pi));
}

ScoreRecord rec(const std::string& model, const char* ts, double crps) {
    return {model, parse_timestamp(ts), PenetrationLevel::from_percent(20), Resolution::Hour1, crps};
}

} // namespace

TEST(CrpsEnsemble, Examples) {
    EXPECT_EQ(crps_ensemble(std::vector<double>{5.0}, 5.0), 0.0);
    EXPECT_DOUBLE_EQ(crps_ensemble(std::vector<double>{2.0}, 5.0), 3.0);
    const std::vector<double> two{0.0, 1.0};
    EXPECT_NEAR(crps_by_integration(two, 0.5), 0.25, 1e-15);  // oracle value
    EXPECT_DOUBLE_EQ(crps_ensemble(two, 0.5), 0.25);
}

TEST(CrpsEnsemble, Errors) {
    EXPECT_EQ(code_of([] { crps_ensemble(std::vector<double>{}, 1.0); }), ErrorCode::EmptyEnsemble);
    EXPECT_EQ(code_of([] { crps_ensemble(std::vector<double>{1.0, NAN}, 1.0); }), ErrorCode::NonFinite);
    EXPECT_EQ(code_of([] { crps_ensemble(std::vector<double>{1.0}, INFINITY); }), ErrorCode::NonFinite);
}

TEST(CrpsEnsemble, MatchesIntegrationAndPairwiseForm) {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> size(1, 50);
    std::normal_distribution<double> value(50.0, 20.0);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> m(static_cast<std::size_t>(size(rng)));
        for (auto& x : m) x = value(rng);
        const double y = value(rng);
        const double fast = crps_ensemble(m, y);
        EXPECT_NEAR(fast, crps_by_integration(m, y), 1e-6);
        const double slow = crps_ensemble_pairwise(m, y);
        EXPECT_LE(std::abs(fast - slow), 1e-9 * std::max(std::abs(slow), 1e-300));
    }
}

TEST(CrpsEnsemble, NonNegativeZeroOnlyWhenExact) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> m(8);
        for (auto& x : m) x = u(rng);
        EXPECT_GT(crps_ensemble(m, u(rng)), 0.0);
    }
    EXPECT_EQ(crps_ensemble(std::vector<double>(5, 3.5), 3.5), 0.0);
}

TEST(CrpsEnsemble, TranslationInvariantAndHomogeneous) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> m(12);
        for (auto& x : m) x = u(rng);
        const double y = u(rng);
        const double base = crps_ensemble(m, y);
        const double c = u(rng);
        const double k = std::abs(u(rng)) + 0.1;
        std::vector<double> shifted = m;
        std::vector<double> scaled = m;
        for (auto& x : shifted) x += c;
        for (auto& x : scaled) x *= k;
        EXPECT_NEAR(crps_ensemble(shifted, y + c), base, 1e-9 * (1.0 + base));
        EXPECT_NEAR(crps_ensemble(scaled, y * k), base * k, 1e-9 * (1.0 + base * k));
    }
}

TEST(CrpsQuantile, Examples) {
    EXPECT_EQ(crps_quantile(std::vector<double>{0.5}, std::vector<double>{5.0}, 5.0), 0.0);
    EXPECT_EQ(crps_quantile(std::vector<double>{0.5}, std::vector<double>{3.0}, 5.0), 2.0);
}

TEST(CrpsQuantile, MedianOnlyIsAbsoluteError) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double v = u(rng);
        const double y = u(rng);
        EXPECT_EQ(crps_quantile(std::vector<double>{0.5}, std::vector<double>{v}, y), std::abs(y - v));
    }
}

TEST(CrpsQuantile, PercentileGridAgainstGaussianClosedForm) {
    const boost::math::normal std_normal;
    std::vector<double> levels;
    std::vector<double> values;
    for (int k = 1; k <= 99; ++k) {
        levels.push_back(k / 100.0);
        values.push_back(boost::math::quantile(std_normal, k / 100.0));
    }
    const double approx = crps_quantile(levels, values, 0.0);
    // 2 x mean pinball on the 1%-step grid, frozen from an independent scipy evaluation
    EXPECT_NEAR(approx, 0.2359119878133653, 1e-9);
    // closed form sigma * (2 phi(0) - 1/sqrt(pi)); the 99-level grid sits 2.2e-3 above it
    EXPECT_NEAR(gaussian_crps(0.0, 1.0, 0.0), 0.23369497725510913, 1e-12);
    EXPECT_NEAR(approx - gaussian_crps(0.0, 1.0, 0.0), 2.2170e-3, 1e-6);
}

TEST(CrpsQuantile, DenseGridConverges) {
    const boost::math::normal std_normal;
    std::vector<double> levels;
    std::vector<double> values;
    for (int k = 1; k <= 9999; ++k) {
        levels.push_back(k / 10000.0);
        values.push_back(boost::math::quantile(std_normal, k / 10000.0));
    }
    for (double z : {-3.0, -1.0, 0.0, 0.5, 2.0, 3.0}) {
        EXPECT_NEAR(crps_quantile(levels, values, z), gaussian_crps(0.0, 1.0, z), 2e-3) << "z=" << z;
    }
}

TEST(CrpsQuantile, Errors) {
    const std::vector<double> two{0.2, 0.8};
    EXPECT_EQ(code_of([&] { crps_quantile(two, std::vector<double>{1.0}, 0.0); }), ErrorCode::LengthMismatch);
    EXPECT_EQ(code_of([] { crps_quantile(std::vector<double>{0.8, 0.2}, std::vector<double>{1.0, 2.0}, 0.0); }),
              ErrorCode::LevelOrder);
    EXPECT_EQ(code_of([] { crps_quantile(std::vector<double>{0.5, 1.0}, std::vector<double>{1.0, 2.0}, 0.0); }),
              ErrorCode::LevelOrder);
    EXPECT_EQ(code_of([&] { crps_quantile(two, std::vector<double>{2.0, 1.0}, 0.0); }), ErrorCode::LevelOrder);
}

TEST(Crpss, Examples) {
    EXPECT_EQ(crpss(0.5, 0.5), 0.0);
    EXPECT_EQ(crpss(0.0, 0.5), 1.0);
    EXPECT_DOUBLE_EQ(crpss(0.2, 0.8), 0.75);
}

TEST(Crpss, DegenerateReference) {
    EXPECT_EQ(code_of([] { crpss(0.1, 0.0); }), ErrorCode::DegenerateReference);
    const auto both_zero = crpss_checked(0.0, 0.0);
    EXPECT_EQ(both_zero.value, 0.0);
    EXPECT_TRUE(both_zero.degenerate);
    EXPECT_EQ(code_of([] { crpss(-0.1, 1.0); }), ErrorCode::NegativeScore);
}

TEST(Crpss, SignFollowsScoreDifferenceAndBoundedByOne) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const double m = u(rng);
        const double r = u(rng) + 1e-6;
        const double s = crpss(m, r);
        EXPECT_EQ(std::signbit(s) && s != 0.0, r - m < 0.0);
        EXPECT_EQ(s == 0.0, r == m);
        EXPECT_LE(s, 1.0);
    }
}

TEST(DailySkill, Examples) {
    const std::vector<ScoreRecord> model{rec("c", "2023-03-01T00:00", 0.1), rec("c", "2023-03-01T01:00", 0.3)};
    const std::vector<ScoreRecord> ref{rec("r", "2023-03-01T00:00", 0.4), rec("r", "2023-03-01T01:00", 0.4)};
    const auto d = daily_skill(model, ref);
    // brute force: mean(0.1, 0.3) = 0.2, mean(0.4, 0.4) = 0.4
    EXPECT_DOUBLE_EQ(d.crpss, 1.0 - ((0.1 + 0.3) / 2.0) / ((0.4 + 0.4) / 2.0));
    EXPECT_DOUBLE_EQ(d.crpss, 0.5);
    EXPECT_EQ(format_date(d.date), "2023-03-01");
    EXPECT_EQ(daily_skill(ref, ref).crpss, 0.0);
    const std::vector<ScoreRecord> perfect{rec("c", "2023-03-01T00:00", 0.0), rec("c", "2023-03-01T01:00", 0.0)};
    EXPECT_EQ(daily_skill(perfect, ref).crpss, 1.0);
}

TEST(DailySkill, Errors) {
    const std::vector<ScoreRecord> a{rec("c", "2023-03-01T00:00", 0.1)};
    const std::vector<ScoreRecord> b{rec("r", "2023-03-01T01:00", 0.1)};
    const std::vector<ScoreRecord> two_days{rec("c", "2023-03-01T00:00", 0.1), rec("c", "2023-03-02T00:00", 0.1)};
    EXPECT_EQ(code_of([&] { daily_skill(a, b); }), ErrorCode::TimepointMismatch);
    EXPECT_EQ(code_of([&] { daily_skill(two_days, two_days); }), ErrorCode::TimepointMismatch);
    EXPECT_EQ(code_of([&] { daily_skill({}, b); }), ErrorCode::EmptyDay);
}

TEST(PointwiseSkill, DropsNearZeroReference) {
    const std::vector<ScoreRecord> model{rec("c", "2023-03-01T00:00", 0.1), rec("c", "2023-03-01T01:00", 0.3)};
    const std::vector<ScoreRecord> ref{rec("r", "2023-03-01T01:00", 0.6), rec("r", "2023-03-01T00:00", 1e-12)};
    const auto p = pointwise_skill(model, ref);
    ASSERT_EQ(p.points.size(), 1u);
    EXPECT_EQ(p.dropped_near_zero_reference, 1u);
    EXPECT_DOUBLE_EQ(p.points[0].crpss, 0.5);
    EXPECT_EQ(p.points[0].target_time.hour_of_day(), 1);
}

TEST(BoxStats, Examples) {
    const auto a = box_stats(std::vector<double>{1, 2, 3, 4, 5});
    EXPECT_EQ(a.median, 3.0);
    EXPECT_EQ(a.q1, 2.0);
    EXPECT_EQ(a.q3, 4.0);
    EXPECT_EQ(a.whisker_lo, 1.0);
    EXPECT_EQ(a.whisker_hi, 5.0);
    EXPECT_TRUE(a.outliers.empty());

    const auto z = box_stats(std::vector<double>{0, 0, 0, 0});
    EXPECT_EQ(z.median, 0.0);
    EXPECT_EQ(z.q1, 0.0);
    EXPECT_EQ(z.q3, 0.0);
    EXPECT_EQ(z.whisker_lo, 0.0);
    EXPECT_EQ(z.whisker_hi, 0.0);
    EXPECT_TRUE(z.outliers.empty());

    // positions 0.25*4 = 1 and 0.75*4 = 3; IQR 2; upper fence 4 + 3 = 7
    const auto o = box_stats(std::vector<double>{1, 2, 3, 4, 100});
    EXPECT_EQ(o.q1, 2.0);
    EXPECT_EQ(o.q3, 4.0);
    EXPECT_EQ(o.whisker_hi, 4.0);
    EXPECT_EQ(o.whisker_lo, 1.0);
    EXPECT_EQ(o.outliers, std::vector<double>{100.0});

    const auto one = box_stats(std::vector<double>{0.3});
    EXPECT_EQ(one.median, 0.3);
    EXPECT_EQ(one.whisker_lo, 0.3);
    EXPECT_EQ(one.whisker_hi, 0.3);
    EXPECT_EQ(code_of([] { box_stats(std::vector<double>{}); }), ErrorCode::EmptyInput);
}

TEST(BoxStats, PropertiesOnRandomData) {
    std::mt19937_64 rng(6);
    std::student_t_distribution<double> heavy(2.0);
    std::uniform_int_distribution<int> size(1, 80);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> v(static_cast<std::size_t>(size(rng)));
        for (auto& x : v) x = heavy(rng);
        const auto b = box_stats(v);
        EXPECT_LE(b.whisker_lo, b.q1);
        EXPECT_LE(b.q1, b.median);
        EXPECT_LE(b.median, b.q3);
        EXPECT_LE(b.q3, b.whisker_hi);
        EXPECT_NE(std::find(v.begin(), v.end(), b.whisker_lo), v.end());
        EXPECT_NE(std::find(v.begin(), v.end(), b.whisker_hi), v.end());
        const double iqr = b.q3 - b.q1;
        std::size_t inside = 0;
        for (double x : v) inside += (x >= b.q1 - 1.5 * iqr && x <= b.q3 + 1.5 * iqr) ? 1 : 0;
        for (double x : b.outliers) EXPECT_TRUE(x < b.q1 - 1.5 * iqr || x > b.q3 + 1.5 * iqr);
        EXPECT_EQ(inside + b.outliers.size(), v.size());

        auto shuffled = v;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const auto s = box_stats(shuffled);
        EXPECT_EQ(s.median, b.median);
        EXPECT_EQ(s.q1, b.q1);
        EXPECT_EQ(s.q3, b.q3);
    }
}

TEST(Heatmap, EmptyInputGivesAbsentFebToDecGrid) {
    const std::vector<int> feb_dec{2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    const auto cells = heatmap_aggregate({}, feb_dec);
    ASSERT_EQ(cells.size(), 264u);
    for (const auto& c : cells) {
        EXPECT_FALSE(c.mean_crpss.has_value());
        EXPECT_EQ(c.n, 0u);
    }
    EXPECT_EQ(cells.front().month, 2);
    EXPECT_EQ(cells.back().month, 12);
    EXPECT_EQ(cells.back().hour, 23);
}

TEST(Heatmap, SingletonAndGroupMean) {
    const std::vector<int> all{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    const std::vector<PointSkill> one{{parse_timestamp("2023-06-10T12:00"), 0.4}};
    const auto cells = heatmap_aggregate(one, all);
    std::size_t present = 0;
    for (const auto& c : cells) {
        if (!c.mean_crpss) continue;
        ++present;
        EXPECT_EQ(c.month, 6);
        EXPECT_EQ(c.hour, 12);
        EXPECT_EQ(*c.mean_crpss, 0.4);
        EXPECT_EQ(c.n, 1u);
    }
    EXPECT_EQ(present, 1u);

    const std::vector<PointSkill> three{{parse_timestamp("2023-06-10T12:00"), 0.1},
                                        {parse_timestamp("2023-06-11T12:15"), 0.2},
                                        {parse_timestamp("2023-06-30T12:45"), 0.6}};
    const auto grid = heatmap_aggregate(three, all);
    const auto& cell = grid[5 * 24 + 12];
    EXPECT_EQ(cell.n, 3u);
    EXPECT_NEAR(*cell.mean_crpss, (0.1 + 0.2 + 0.6) / 3.0, 1e-15);
    EXPECT_NEAR(*cell.mean_crpss, 0.3, 1e-15);
}

TEST(Heatmap, CountsSumToInputAndMatchGroupBy) {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> day(0, 364);
    std::uniform_int_distribution<int> slot(0, 95);
    std::normal_distribution<double> skill(0.1, 0.3);
    std::vector<PointSkill> points;
    for (int i = 0; i < 5000; ++i) {
        points.push_back({Timestamp{add_days(nlf::test::ymd(2023, 1, 1), day(rng)), slot(rng) * 15}, skill(rng)});
    }
    const std::vector<int> all{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    const auto cells = heatmap_aggregate(points, all);
    std::size_t total = 0;
    for (const auto& c : cells) total += c.n;
    EXPECT_EQ(total, points.size());
    // independent group-by scan
    for (const auto& c : cells) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& p : points) {
            if (p.target_time.month() == c.month && p.target_time.hour_of_day() == c.hour) {
                sum += p.crpss;
                ++n;
            }
        }
        ASSERT_EQ(n, c.n);
        if (n > 0) {
            EXPECT_NEAR(*c.mean_crpss, sum / static_cast<double>(n), 1e-12);
        }
    }
}
