#include "fixtures.hpp"

#include <subdyn/suspension.hpp>

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <random>

using namespace subdyn;
using namespace fixtures;

namespace {

Vec random_point(std::mt19937_64& rng, int m)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vec x(m);
    for (Eigen::Index i = 0; i < m; ++i) x[i] = u(rng);
    return x;
}

// A x mod 1 in plain doubles, for small integer A.
Vec naive_apply(const IntMatrix& A, const Vec& x)
{
    Vec y = A.cast<double>() * x;
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] -= std::floor(y[i]);
    return y;
}

double point_dist(const SuspensionPoint& a, const SuspensionPoint& b)
{
    return std::max((a.u - b.u).cwiseAbs().maxCoeff(), torus_dist(a.x, b.x));
}

} // namespace

TEST(Flow, ZeroTimeIsIdentity)
{
    auto spec = example33();
    SuspensionPoint p{Vec{{0.25, 0.5}}, Vec{{0.1, 0.7}}};
    auto q = flow(spec, Vec::Zero(2), p);
    EXPECT_EQ(q.u, p.u);
    EXPECT_EQ(q.x, p.x);
}

TEST(Flow, UnitTimeAppliesGenerator)
{
    auto spec = example34();
    std::mt19937_64 rng(1);
    for (int i = 0; i < 2; ++i) {
        Vec x = random_point(rng, 3);
        Vec w = Vec::Zero(2);
        w[i] = 1.0;
        auto q = flow(spec, w, {Vec::Zero(2), x});
        EXPECT_EQ(q.u, Vec::Zero(2));
        EXPECT_LT(torus_dist(q.x, naive_apply(spec[i], x)), 1e-14);
    }
    // negative time crosses back
    Vec x = random_point(rng, 3);
    auto q = flow(spec, Vec{{-0.5, 0.0}}, {Vec{{0.25, 0.0}}, x});
    EXPECT_NEAR(q.u[0], 0.75, 1e-15);
    EXPECT_LT(torus_dist(naive_apply(spec[0], q.x), x), 1e-14);
}

TEST(Flow, GroupLaw)
{
    auto spec = example33();
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> w(-3.0, 3.0);
    for (int t = 0; t < 500; ++t) {
        SuspensionPoint p{random_point(rng, 2), random_point(rng, 2)};
        Vec w1{{w(rng), w(rng)}}, w2{{w(rng), w(rng)}};
        auto a = flow(spec, w1, flow(spec, w2, p));
        auto b = flow(spec, w1 + w2, p);
        // a fiber coordinate within rounding of an integer may land on either side
        if ((a.u - b.u).cwiseAbs().maxCoeff() > 0.5) continue;
        EXPECT_LT(point_dist(a, b), 1e-12) << t;
    }
}

TEST(Flow, QuotientWellDefined)
{
    auto spec = example33();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> w(-2.0, 2.0);
    std::uniform_int_distribution<int> shift(-3, 3);
    int checked = 0;
    for (int t = 0; t < 1000; ++t) {
        SuspensionPoint p{random_point(rng, 2), random_point(rng, 2)};
        IntVec n{shift(rng), shift(rng)};
        IntVec neg{-n[0], -n[1]};
        SuspensionPoint rep{p.u + to_real(n), apply(spec, neg, p.x)};
        Vec ww{{w(rng), w(rng)}};
        auto a = flow(spec, ww, rep);
        auto b = flow(spec, ww, p);
        if ((a.u - b.u).cwiseAbs().maxCoeff() > 0.5) continue;
        EXPECT_LT(point_dist(a, b), 1e-12) << t;
        ++checked;
    }
    EXPECT_GT(checked, 990);
}

TEST(Flow, ModulusConstant)
{
    // c = (1,-1) gives A1^2 = [[5,3],[3,2]]
    EXPECT_EQ(modulus_constant(example33()), 8.0);
    EXPECT_EQ(modulus_constant(make_action({mat({{1, 0}, {0, 1}})})), 1.0);
}

TEST(Chain, ExactSegmentsHaveZeroDefect)
{
    auto spec = example33();
    auto c = random_chain(spec, Vec{{1.0, 0.0}}, 50, 1.1, 2.0, 0.0, 4);
    auto r = verify_chain(spec, c);
    EXPECT_EQ(r.defect, 0.0);
    EXPECT_GT(r.min_jump, 1.1 - 1e-12);

    Chain one;
    one.nodes.push_back({Vec::Zero(2), Vec{{0.3, 0.4}}});
    auto s = verify_chain(spec, one);
    EXPECT_EQ(s.defect, 0.0);
    EXPECT_TRUE(std::isinf(s.min_jump));
}

TEST(Chain, FromToralPseudoOrbit)
{
    // lattice pseudo-orbit x_{j+1} ~ A1 x_j, read at times 1.5 p along (1,0);
    // a jump crossing two lattice steps costs at most delta (1 + ||A1||)
    auto spec = example33();
    const double delta = 1e-7;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> noise(-delta, delta);
    std::vector<Vec> xs{random_point(rng, 2)};
    for (int j = 0; j < 160; ++j) {
        Vec y = apply(spec, {1, 0}, xs.back());
        for (Eigen::Index i = 0; i < 2; ++i) y[i] += noise(rng);
        xs.push_back(wrap01(y));
    }
    Chain c;
    for (int p = 0; p <= 100; ++p) {
        double T = 1.5 * p;
        c.nodes.push_back({Vec{{T - std::floor(T), 0.0}}, xs[static_cast<std::size_t>(std::floor(T))]});
        if (p < 100) c.jumps.push_back(Vec{{1.5, 0.0}});
    }
    auto r = verify_chain(spec, c);
    EXPECT_GT(r.defect, 0.0);
    EXPECT_LE(r.defect, delta * (1 + 3.0) + 1e-15);
}

TEST(ChainShadow, ExactChainIsItsOwnShadow)
{
    auto spec = example33();
    auto sp = common_eigenstructure(spec);
    auto c = random_chain(spec, Vec{{1.0, 0.0}}, 40, 1.1, 2.5, 0.0, 6);
    auto r = shadow_chain(spec, sp, c, Direction::rational({1, 0}));
    EXPECT_LT(r.epsilon, 1e-12);
    EXPECT_LT(torus_dist(r.point.x, c.nodes[0].x), 1e-12);
    EXPECT_EQ(r.point.u, c.nodes[0].u);
}

TEST(ChainShadow, CatChainWithinBound)
{
    auto spec = example33();
    auto sp = common_eigenstructure(spec);
    const double delta = 1e-6;
    auto t0 = std::chrono::steady_clock::now();
    auto c = random_chain(spec, Vec{{1.0, 0.0}}, 500, 1.0 + 1e-9, 2.5, delta, 7);
    auto r = shadow_chain(spec, sp, c, Direction::rational({1, 0}));
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_LT(secs, 5.0);
    EXPECT_TRUE(r.hyperbolic);
    EXPECT_TRUE(r.reduction_sound);
    EXPECT_LT(r.phase_drift, 1e-9);
    EXPECT_EQ(r.coarse.size(), c.nodes.size());
    EXPECT_GT(r.epsilon, 0.0);
    EXPECT_LE(r.epsilon, r.L * delta);
    EXPECT_LE(r.epsilon, r.bound);
    EXPECT_EQ(r.C, 8.0);

    // recompute each error from alpha^{m_p} with m_p = floor(u_0 + t_p)
    Vec T = c.nodes[0].u;
    double worst = 0;
    for (std::size_t p = 0; p < c.nodes.size(); ++p) {
        if (p > 0) T += c.jumps[p - 1];
        IntVec m{static_cast<long long>(std::floor(T[0])), static_cast<long long>(std::floor(T[1]))};
        ASSERT_EQ(m, r.lattice[p]) << p;
        hp::FVec y = hp::mul(action_matrix(spec, m), r.point_fixed);
        for (auto& v : y) hp::mod1(v, r.bits);
        double e = torus_dist(hp::from_fixed(y, r.bits), c.nodes[p].x);
        EXPECT_NEAR(e, r.errors[p], 1e-15);
        worst = std::max(worst, e);
    }
    EXPECT_NEAR(worst, r.epsilon, 1e-15);
}

TEST(ChainShadow, GroupsNonSeparatingSteps)
{
    // short jumps along (1, sqrt 2): single lattice steps such as (1,0) expand
    // the stable block, so nodes are grouped; intermediate nodes obey the
    // chained-defect bound from their coarse node
    auto spec = example33();
    auto sp = common_eigenstructure(spec);
    const double delta = 1e-9;
    Vec dir{{1.0, std::sqrt(2.0)}};
    auto c = random_chain(spec, dir, 300, 0.6, 1.2, delta, 8);
    auto r = shadow_chain(spec, sp, c, Direction::irrational(dir));
    ASSERT_LT(r.coarse.size(), c.nodes.size());
    ASSERT_GT(r.coarse.size(), 10u);
    std::size_t q = 0;
    for (std::size_t p = 0; p < c.nodes.size(); ++p) {
        while (q + 1 < r.coarse.size() && static_cast<std::size_t>(r.coarse[q + 1]) <= p) ++q;
        auto base = static_cast<std::size_t>(r.coarse[q]);
        if (base == p) {
            EXPECT_LE(r.errors[p], r.L * delta) << p;
            continue;
        }
        double bound = action_matrix(spec, sub(r.lattice[p], r.lattice[base])).inf_norm() * r.errors[base];
        for (std::size_t s = base; s < p; ++s) bound += action_matrix(spec, sub(r.lattice[p], r.lattice[s + 1])).inf_norm() * delta;
        EXPECT_LE(r.errors[p], bound * (1 + 1e-9)) << p;
    }
}

TEST(ChainShadow, CenterDirectionQuasiShadows)
{
    auto spec = example34();
    auto sp = common_eigenstructure(spec);
    const double delta = 1e-6;
    auto c = random_chain(spec, Vec{{1.0, 0.0}}, 300, 1.05, 2.5, delta, 9);
    auto r = shadow_chain(spec, sp, c, Direction::rational({1, 0}));
    EXPECT_FALSE(r.hyperbolic);
    ASSERT_TRUE(r.quasi.has_value());
    EXPECT_LT(r.quasi->center_residual, 1e-12);
    EXPECT_LT(r.quasi->torus_recurrence_residual, 1e-12);
    EXPECT_GT(r.quasi->max_translation, 0.0);
    EXPECT_LE(r.quasi->sup_error, r.bound);
}

TEST(ChainShadow, Errors)
{
    auto spec = example33();
    auto sp = common_eigenstructure(spec);
    auto kind = [&](const Chain& c, const Direction& d) {
        try {
            shadow_chain(spec, sp, c, d);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::InvalidInput;
    };
    auto c = random_chain(spec, Vec{{1.0, 0.0}}, 5, 1.1, 2.0, 1e-8, 10);
    auto off = c;
    off.jumps[2][1] = 0.3;
    EXPECT_EQ(kind(off, Direction::rational({1, 0})), ErrorKind::JumpOffLine);
    auto mixed = c;
    mixed.jumps[3] = -mixed.jumps[3];
    EXPECT_EQ(kind(mixed, Direction::rational({1, 0})), ErrorKind::MixedOrientation);
    auto diag = random_chain(spec, Vec{{1.0, 1.0}}, 5, 1.1, 2.0, 1e-8, 11);
    EXPECT_EQ(kind(diag, Direction::rational({1, 1})), ErrorKind::RatesFailed);
}

TEST(ChainShadow, BackwardChain)
{
    auto spec = example33();
    auto sp = common_eigenstructure(spec);
    auto c = random_chain(spec, Vec{{-1.0, 0.0}}, 100, 1.1, 2.0, 1e-8, 12);
    auto r = shadow_chain(spec, sp, c, Direction::rational({1, 0}));
    EXPECT_LE(r.epsilon, r.L * 1e-8);
    EXPECT_LT(r.lattice.back()[0], -100);
}

TEST(LineDistance, Sampled)
{
    auto spec = example33();
    Vec x{{0.2, 0.3}};
    auto d = Direction::rational({1, 0});
    EXPECT_EQ(sampled_line_distance(spec, d, x, x, 0.25, 10), 0.0);
    Vec y = x + Vec{{1e-6, 0.0}};
    double s = sampled_line_distance(spec, d, x, y, 0.25, 10);
    EXPECT_GE(s, 1e-6 * (1 - 1e-9));
    EXPECT_GT(s, 1e-3); // expanded by one of the two directions
}
