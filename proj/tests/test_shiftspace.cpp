#include <subdyn/shiftspace.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace subdyn;

namespace {

// sum of 2^-|i| over |i| > r and |i|_inf <= R by enumeration
double brute_tail(int k, double r, long long R)
{
    double s = 0;
    if (k == 1) {
        for (long long i = -R; i <= R; ++i)
            if (std::fabs(static_cast<double>(i)) > r) s += std::exp2(-std::fabs(static_cast<double>(i)));
        return s;
    }
    for (long long i = -R; i <= R; ++i)
        for (long long j = -R; j <= R; ++j) {
            double n = std::hypot(static_cast<double>(i), static_cast<double>(j));
            if (n > r) s += std::exp2(-n);
        }
    return s;
}

} // namespace

TEST(ShiftMetric, Examples)
{
    auto x = random_configuration(2, 3, 2, 1);
    EXPECT_EQ(metric_d(x, x).on_window, 0.0);
    auto y = x;
    y.at({0, 0}) ^= 1;
    EXPECT_EQ(metric_d(x, y).on_window, 1.0);
    Configuration a(1, 1, 2), b(1, 1, 2);
    b.cells = {1, 1, 1};
    EXPECT_DOUBLE_EQ(metric_d(a, b).on_window, 2.0);
    // k = 1: sum_{|i| > 1} 2^-|i| = 2 (1/4) / (1 - 1/2) = 1
    EXPECT_NEAR(metric_d(a, b).tail, 1.0, 1e-13);
}

TEST(ShiftMetric, TailBoundsMatchEnumeration)
{
    for (double r : {0.0, 1.5, 5.17, 10.0}) {
        double exact = brute_tail(2, r, 400);
        double bound = tail_ball(2, r);
        EXPECT_GE(bound, exact * (1 - 1e-12)) << r;
        EXPECT_NEAR(bound, exact, 1e-10 * exact) << r;
    }
    EXPECT_NEAR(tail_ball(1, 1.5), 1.0, 1e-13);
    // box tail of radius W: everything minus the box
    double inside = 0;
    for (long long i = -6; i <= 6; ++i)
        for (long long j = -6; j <= 6; ++j) inside += std::exp2(-std::hypot(static_cast<double>(i), static_cast<double>(j)));
    EXPECT_NEAR(tail_box(2, 6) + inside, tail_ball(2, -1), 1e-10);
}

TEST(ShiftMetric, SmallDistanceForcesAgreement)
{
    auto x = random_configuration(2, 10, 3, 2);
    for (unsigned seed = 0; seed < 50; ++seed) {
        auto y = x;
        std::mt19937 rng(seed);
        std::uniform_int_distribution<std::size_t> cell(0, y.size() - 1);
        std::size_t c0 = cell(rng);
        y.cells[c0] = (y.cells[c0] + 1) % 3;
        double d = metric_d(x, y).on_window;
        if (d == 0) continue;
        for (std::size_t c = 0; c < x.size(); ++c)
            if (cell_norm(x.point(c)) < std::log2(1.0 / d) - 1e-9) EXPECT_EQ(x.cells[c], y.cells[c]);
    }
}

TEST(ShiftMetric, MonotoneInAgreementRadius)
{
    auto x = random_configuration(2, 12, 2, 3);
    double last = std::numeric_limits<double>::infinity();
    for (int r = 0; r <= 12; ++r) {
        auto y = x;
        for (std::size_t c = 0; c < y.size(); ++c)
            if (max_abs(y.point(c)) > r) y.cells[c] ^= 1;
        auto y2 = restrict_to(y, 12);
        double d = metric_d(x, y2).upper();
        EXPECT_LT(d, last) << r;
        last = d;
    }
}

TEST(ShiftAction, ShiftExamples)
{
    Configuration x(1, 3, 2);
    x.at({1}) = 1;
    EXPECT_EQ(shift_apply({0}, x), x);
    auto y = shift_apply({1}, x);
    EXPECT_EQ(y.W, 2);
    EXPECT_EQ(y.at({0}), 1);
    EXPECT_EQ(y.at({1}), 0);
    auto z = random_configuration(2, 6, 3, 4);
    auto a = shift_apply({1, -2}, shift_apply({-1, 1}, z));
    auto b = restrict_to(shift_apply({0, -1}, z), a.W);
    EXPECT_EQ(a, b);
}

TEST(ShiftAction, Errors)
{
    Configuration x(2, 2, 2), y(2, 3, 2);
    EXPECT_THROW(
        {
            try {
                metric_d(x, y);
            } catch (const Error& e) {
                EXPECT_EQ(e.kind(), ErrorKind::WindowMismatch);
                throw;
            }
        },
        Error);
    try {
        shift_apply({3, 0}, x);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::WindowExhausted);
    }
}

TEST(ShiftShadow, ExactOrbitReturnsItsPoint)
{
    auto z = random_configuration(2, 12, 2, 5);
    auto box = box_window(2, 4, Direction::rational({1, 0}));
    auto o = noisy_shift_orbit(z, box, 8, 1e9, 1);
    EXPECT_EQ(metric_d(o.configs[0], o.configs[0]).on_window, 0.0);
    EXPECT_EQ(symbolic_defect(o).on_window, 0.0);
    auto xs = shadow_shift(o);
    EXPECT_EQ(xs, restrict_to(z, 4));
}

TEST(ShiftShadow, BruteForceWithinTailBound)
{
    const double delta = std::exp2(-8);
    auto box = box_window(2, 6, Direction::rational({1, 0}));
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto z = random_configuration(2, 30, 2, 100 + seed);
        auto o = noisy_shift_orbit(z, box, 24, 10, seed, false, 1);
        ASSERT_LE(o.delta, delta);
        auto xs = shadow_shift(o);
        auto c = verify_shift_shadow(o, xs, delta);
        EXPECT_NEAR(c.radius, 8 - 2 * std::sqrt(2.0), 1e-12);
        EXPECT_EQ(c.disagreements_inside, 0);
        EXPECT_LE(c.max_error, c.epsilon);
        EXPECT_GT(c.max_error, 0.0);
        EXPECT_GT(c.max_unknown, 0.0);
    }
}

TEST(Ledrappier, Validate)
{
    Configuration zero(2, 4, 2);
    EXPECT_TRUE(ledrappier_validate(zero));
    auto x = ledrappier_random(7, 6);
    EXPECT_TRUE(ledrappier_validate(x));
    EXPECT_TRUE(ledrappier_validate(shift_apply({2, -1}, x)));
    auto y = x;
    y.at({0, 0}) ^= 1;
    EXPECT_FALSE(ledrappier_validate(y));
    EXPECT_THROW(ledrappier_validate(random_configuration(1, 3, 2, 1)), Error);
}

TEST(Ledrappier, CompletionIsPascalMod2)
{
    // one seed at (0, -W): row -W + t holds C(t, -i) mod 2 for -t <= i <= 0
    const int W = 7;
    Configuration b(2, W, 2);
    b.at({0, -W}) = 1;
    auto x = ledrappier_complete(b);
    EXPECT_EQ(x.at({0, -W + 1}), 1);
    EXPECT_EQ(x.at({-1, -W + 1}), 1);
    for (long long t = 0; t <= 2 * W; ++t)
        for (long long i = -W; i <= W; ++i) {
            long long s = -i;
            int expect = (s >= 0 && s <= t && (s & t) == s) ? 1 : 0;
            EXPECT_EQ(x.at({i, -W + t}), expect) << i << "," << t;
        }
    EXPECT_TRUE(ledrappier_validate(x));
}

TEST(Ledrappier, IsolatedSymbolIsInconsistent)
{
    // x(0,0) = 1 with zeros on its row and column breaks the relation at (0,0)
    Configuration b(2, 3, 2);
    b.at({0, 0}) = 1;
    try {
        ledrappier_complete(b, true);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Inconsistent);
    }
    EXPECT_NO_THROW(ledrappier_complete(ledrappier_random(3, 3), true));
}

TEST(Ledrappier, ShadowOfValidOrbitIsValid)
{
    auto box = box_window(2, 6, Direction::rational({1, 0}));
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        auto z = ledrappier_random(seed + 40, 30);
        auto o = noisy_shift_orbit(z, box, 24, 18, seed, true);
        for (const auto& x : o.configs) ASSERT_TRUE(ledrappier_validate(x));
        EXPECT_LE(o.delta, std::exp2(-8));
        auto xs = shadow_shift(o);
        EXPECT_TRUE(ledrappier_validate(xs));
        auto c = verify_shift_shadow(o, xs, std::exp2(-8));
        EXPECT_LE(c.max_error, c.epsilon);
    }
}
