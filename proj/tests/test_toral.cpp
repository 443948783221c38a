#include "fixtures.hpp"

#include <subdyn/toral.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace subdyn;
using namespace fixtures;

TEST(Toral, ApplyExamples)
{
    auto spec = example33();
    Vec x{{0.3, 0.71}};
    EXPECT_EQ(apply(spec, {0, 0}, x), x);
    Vec y = apply(spec, {1, 1}, x);
    EXPECT_EQ(y, x);
    Vec z = apply(spec, {1, 0}, Vec{{0.5, 0.5}});
    EXPECT_EQ(z[0], 0.5);
    EXPECT_EQ(z[1], 0.0);
}

TEST(Toral, ApplyHugePowerStaysExact)
{
    // A1^n (1/2, 0): entries of A1^n are Fibonacci numbers, the result only
    // depends on their parity, which has period 3.
    auto spec = example33();
    for (long long n : {300LL, 301LL, 302LL}) {
        Vec y = apply(spec, {n, 0}, Vec{{0.5, 0.0}});
        Vec z = apply(spec, {n % 3, 0}, Vec{{0.5, 0.0}});
        EXPECT_EQ(y, z) << n;
    }
}

TEST(Toral, GroupLaw)
{
    auto spec = example35();
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> U(0, 1);
    std::uniform_int_distribution<int> I(-3, 3);
    for (int t = 0; t < 200; ++t) {
        Vec x{{U(rng), U(rng), U(rng), U(rng)}};
        IntVec n{I(rng), I(rng)}, m{I(rng), I(rng)};
        Vec a = apply(spec, add(n, m), x);
        Vec b = apply(spec, n, apply(spec, m, x));
        EXPECT_LE(torus_dist(a, b), 1e-12);
    }
}

TEST(Toral, GeneratorsCommuteExactly)
{
    for (const auto& spec : {example33(), example34(), example35()})
        for (int i = 0; i < spec.k; ++i)
            for (int j = 0; j < spec.k; ++j)
                EXPECT_TRUE(spec.big[static_cast<std::size_t>(i)] * spec.big[static_cast<std::size_t>(j)] ==
                            spec.big[static_cast<std::size_t>(j)] * spec.big[static_cast<std::size_t>(i)]);
}

TEST(Toral, Metric)
{
    EXPECT_NEAR(torus_dist(Vec{{0.99, 0.0}}, Vec{{0.01, 0.0}}), 0.02, 1e-15);
    EXPECT_NEAR(torus_dist(Vec{{0.2, 0.9}}, Vec{{0.3, 0.1}}), 0.2, 1e-15);
}

TEST(Toral, ExactOrbitHasNoDefect)
{
    auto spec = example33();
    auto w = tube_lattice_points(Direction::rational({1, 0}), 0.0, 20.0);
    auto orbit = perturbed_pseudo_orbit(spec, w, Vec{{0.123, 0.456}}, 0.0, 9);
    EXPECT_LE(verify_pseudo_orbit(spec, orbit), 1e-15);
    // per-step rounding grows by the expansion rate along the walk
    for (std::size_t p = 0; p < w.size(); ++p)
        EXPECT_LE(torus_dist(orbit.points[p], apply(spec, w.points[p], Vec{{0.123, 0.456}})),
                  1e-15 * std::pow(2.62, static_cast<double>(max_abs(w.points[p]))));
}

TEST(Toral, DisplacedPointDefect)
{
    // Displacing x_0 by eta e1 on an axis-1 line: the incoming edge sees eta,
    // the outgoing edge sees |A1 e1|_inf eta = 2 eta.
    auto spec = example33();
    auto w = tube_lattice_points(Direction::rational({1, 0}), 0.0, 3.0);
    auto orbit = perturbed_pseudo_orbit(spec, w, Vec{{0.25, 0.5}}, 0.0, 1);
    const double eta = 1e-7;
    int o = *w.find({0, 0});
    orbit.points[static_cast<std::size_t>(o)][0] += eta;
    double d = verify_pseudo_orbit(spec, orbit);
    Eigen::JacobiSVD<Mat> svd(spec.real(0));
    EXPECT_NEAR(d, 2 * eta, 1e-15);
    EXPECT_GE(d, eta * svd.singularValues()[1]);
    EXPECT_LE(d, eta * svd.singularValues()[0]);
}

TEST(Toral, PerturbedOrbitDefect)
{
    auto spec = example33();
    auto w = tube_lattice_points(Direction::rational({1, 0}), 0.0, 2.0);
    ASSERT_EQ(w.size(), 5u);
    auto orbit = perturbed_pseudo_orbit(spec, w, Vec{{0.1, 0.2}}, 1e-6, 42);
    double d = verify_pseudo_orbit(spec, orbit);
    EXPECT_LE(d, 1e-6 * (1 + 1e-9));
    EXPECT_GT(d, 0.0);
    double normA = std::max(spec.big[0].inf_norm(), spec.big[1].inf_norm());
    EXPECT_LE(d, 1e-6 * (1 + normA));
}

TEST(Toral, PerturbedOrbitDeterministic)
{
    auto spec = example34();
    auto w = tube_lattice_points(Direction::rational({1, 0}), 0.0, 50.0);
    auto a = perturbed_pseudo_orbit(spec, w, Vec{{0.1, 0.2, 0.3}}, 1e-6, 7);
    auto b = perturbed_pseudo_orbit(spec, w, Vec{{0.1, 0.2, 0.3}}, 1e-6, 7);
    for (std::size_t p = 0; p < w.size(); ++p) EXPECT_EQ(a.points[p], b.points[p]);
}

TEST(Toral, NoisyOrbitBoundsEveryEdge)
{
    auto spec = example33();
    auto box = box_window(2, 3, Direction::rational({1, 0}));
    auto orbit = noisy_orbit(spec, box, Vec{{0.3, 0.6}}, 1e-6, 3);
    EXPECT_LE(verify_pseudo_orbit(spec, orbit), 1e-6 * (1 + 1e-9));
    auto tube = tube_lattice_points(Direction::irrational(Vec{{1.0, std::sqrt(2.0)}}), std::sqrt(2.0), 30.0);
    auto o2 = noisy_orbit(spec, tube, Vec{{0.3, 0.6}}, 1e-6, 4);
    EXPECT_LE(verify_pseudo_orbit(spec, o2), 1e-6 * (1 + 1e-9));
}

TEST(Toral, DefectIndependentOfOrdering)
{
    auto spec = example33();
    auto box = box_window(2, 2, Direction::rational({1, 0}));
    auto orbit = noisy_orbit(spec, box, Vec{{0.3, 0.6}}, 1e-5, 3);
    // same points, window ordered along another line
    auto other = box_window(2, 2, Direction::rational({1, -3}));
    PseudoOrbit re;
    re.window = other;
    for (const auto& n : other.points) re.points.push_back(orbit.at(n));
    EXPECT_EQ(verify_pseudo_orbit(spec, orbit), verify_pseudo_orbit(spec, re));
}

TEST(Toral, Errors)
{
    auto spec = example33();
    auto w = make_window({{0, 0}, {2, 2}}, Direction::rational({1, 1}));
    try {
        perturbed_pseudo_orbit(spec, w, Vec{{0.1, 0.1}}, 1e-6, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DisconnectedWindow);
    }
    auto line = tube_lattice_points(Direction::rational({1, 0}), 0.0, 2.0);
    EXPECT_THROW(perturbed_pseudo_orbit(spec, line, Vec{{0.1, 0.1}}, 0.25, 1), Error);
}
