#include "fixtures.hpp"

#include <subdyn/shadowing.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace subdyn;
using namespace fixtures;

namespace {

std::vector<Vec> line_points(const PseudoOrbit& o)
{
    std::vector<Vec> x;
    for (const auto& v : o.points) x.push_back(v);
    return x;
}

struct LineSetup {
    ActionSpec spec;
    LyapunovSpectrum sp;
    LatticeWindow w;
    StepSystem steps;
    ShadowContext ctx;
};

LineSetup cat_line(double R)
{
    LineSetup s{example33(), {}, {}, {}, {}};
    s.sp = common_eigenstructure(s.spec);
    Direction d = Direction::rational({1, 0});
    s.w = tube_lattice_points(d, 0.0, R);
    s.steps = make_steps(s.spec, line_steps(s.w));
    s.ctx = prepare_shadow(s.sp, splitting_for(s.sp, d.unit()), s.steps);
    return s;
}

double fixed_dist(const hp::FVec& y, const Vec& x, long B)
{
    hp::FVec xf = hp::to_fixed(x, B);
    mpz_class worst = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        mpz_class d = y[i] - xf[i];
        hp::wrap_half(d, B);
        if (mpz_cmpabs(d.get_mpz_t(), worst.get_mpz_t()) > 0) worst = abs(d);
    }
    return hp::from_fixed(worst, B);
}

} // namespace

TEST(Shadowing, LipschitzConstantForCatLine)
{
    auto s = cat_line(10);
    // step (1,0): chi = -/+ lambda, a = lambda / 2, so b = lambda / 2
    const double b = cat_exponent() / 2;
    EXPECT_NEAR(s.ctx.b, b, 1e-9);
    EXPECT_NEAR(s.ctx.L, s.sp.kappa * std::sqrt(2.0) * (1 + std::exp(-b)) / (1 - std::exp(-b)), 1e-9);
    EXPECT_NEAR(s.sp.kappa, 1.0, 1e-9); // symmetric generators
}

TEST(Shadowing, ExactDyadicOrbitIsItsOwnShadow)
{
    auto s = cat_line(40);
    std::vector<Vec> x{Vec{{0.375, 0.3125}}};
    for (int p = 0; p < s.steps.size(); ++p) x.push_back(apply(s.spec, s.steps.dn[static_cast<std::size_t>(p)], x.back()));
    auto r = shadow_hyperbolic(s.ctx, s.steps, x);
    EXPECT_EQ(r.defect, 0.0);
    EXPECT_EQ(r.sup_error, 0.0);
    EXPECT_EQ(r.point, x.front());
}

TEST(Shadowing, SingleStepHandSolve)
{
    // P = 1 with M = A1 symmetric: v0 = -Pu e / lambda_u, v1 = Ps e.
    auto spec = example33();
    auto sp = common_eigenstructure(spec);
    Direction d = Direction::rational({1, 0});
    auto steps = make_steps(spec, {{1, 0}});
    auto ctx = prepare_shadow(sp, splitting_for(sp, d.unit()), steps);
    Vec x0{{0.2, 0.7}}, x1{{0.1 + 3e-4, 0.9 - 1e-4}};
    Vec e = wrap_half(Vec{{2 * 0.2 + 0.7, 0.2 + 0.7}} - x1);
    const double lu = (3 + std::sqrt(5.0)) / 2;
    Vec u{{1.0, lu - 2}};
    u.normalize();
    Mat Pu = u * u.transpose();
    Mat Ps = Mat::Identity(2, 2) - Pu;
    auto r = shadow_hyperbolic(ctx, steps, {x0, x1});
    EXPECT_LE((r.corrections[0] - (-(Pu * e) / lu)).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LE((r.corrections[1] - Ps * e).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_NEAR(r.per_step_errors[1], r.corrections[1].cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_NEAR(r.per_step_errors[0], r.corrections[0].cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Shadowing, LongCatLineWithinLipschitzBound)
{
    auto s = cat_line(1000);
    ASSERT_EQ(s.w.size(), 2001u);
    const double delta = 1e-8;
    auto orbit = perturbed_pseudo_orbit(s.spec, s.w, Vec{{0.31, 0.47}}, delta, 5);
    auto r = shadow_hyperbolic(s.ctx, s.steps, line_points(orbit));
    EXPECT_LE(r.defect, delta * (1 + 1e-9));
    EXPECT_LE(r.sup_error, s.ctx.L * r.defect);
    EXPECT_GT(r.sup_error, 0.0);
    // independent re-evaluation of the shadowing point by direct powers
    for (std::size_t p : {0u, 1u, 500u, 1000u, 1999u, 2000u}) {
        hp::FVec y = hp::mul(action_matrix(s.spec, sub(s.w.points[p], s.w.points[0])), r.point_fixed);
        EXPECT_EQ(fixed_dist(y, orbit.points[p], r.bits), r.per_step_errors[p]) << p;
    }
}

TEST(Shadowing, ErrorScalesWithDefect)
{
    auto s = cat_line(300);
    auto a = perturbed_pseudo_orbit(s.spec, s.w, Vec{{0.61, 0.13}}, 2e-8, 11);
    auto b = perturbed_pseudo_orbit(s.spec, s.w, Vec{{0.61, 0.13}}, 1e-8, 11);
    auto ra = shadow_hyperbolic(s.ctx, s.steps, line_points(a));
    auto rb = shadow_hyperbolic(s.ctx, s.steps, line_points(b));
    EXPECT_NEAR(rb.sup_error / ra.sup_error, 0.5, 0.05);
    EXPECT_NEAR(rb.lipschitz_ratio, ra.lipschitz_ratio, 0.1 * ra.lipschitz_ratio);
}

TEST(Shadowing, AnchorsDecayAwayFromEnds)
{
    auto s = cat_line(100);
    const int P = s.steps.size();
    auto orbit = perturbed_pseudo_orbit(s.spec, s.w, Vec{{0.4, 0.8}}, 1e-8, 2);
    auto base = shadow_hyperbolic(s.ctx, s.steps, line_points(orbit));
    ShadowOptions opt;
    opt.anchor_stable = Vec{{1e-3, -2e-3}};
    opt.anchor_unstable = Vec{{2e-3, 1e-3}};
    auto moved = shadow_hyperbolic(s.ctx, s.steps, line_points(orbit), opt);
    const double lam = cat_exponent();
    for (int p = 0; p <= P; ++p) {
        double diff = (moved.corrections[static_cast<std::size_t>(p)] - base.corrections[static_cast<std::size_t>(p)])
                          .cwiseAbs()
                          .maxCoeff();
        double bound = 3e-3 * std::sqrt(2.0) * (std::exp(-lam * p) + std::exp(-lam * (P - p))) + 1e-20;
        EXPECT_LE(diff, bound) << p;
    }
    EXPECT_GT((moved.corrections[0] - base.corrections[0]).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Shadowing, Errors)
{
    auto spec = example34();
    auto sp = common_eigenstructure(spec);
    Direction d = Direction::rational({1, 0});
    auto steps = make_steps(spec, {{1, 0}});
    auto ctx = prepare_shadow(sp, splitting_for(sp, d.unit()), steps);
    try {
        shadow_hyperbolic(ctx, steps, {Vec::Zero(3), Vec::Zero(3)});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotHyperbolic);
    }
    auto s = cat_line(1);
    std::vector<Vec> bad{Vec{{0.0, 0.0}}, Vec{{0.4, 0.4}}, Vec{{0.0, 0.0}}};
    try {
        shadow_hyperbolic(s.ctx, s.steps, bad);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DefectTooLarge);
    }
    EXPECT_THROW(shadow_hyperbolic(s.ctx, s.steps, {Vec{{0.0, 0.0}}}), Error);
}

TEST(QuasiShadowing, CenterTranslationsOnExample34)
{
    auto spec = example34();
    auto sp = common_eigenstructure(spec);
    Direction d = Direction::rational({1, 0});
    auto w = tube_lattice_points(d, 0.0, 500);
    auto steps = make_steps(spec, line_steps(w));
    auto ctx = prepare_shadow(sp, splitting_for(sp, d.unit()), steps);
    EXPECT_EQ(ctx.split.dim_c(), 1);
    const double delta = 1e-6;
    auto orbit = perturbed_pseudo_orbit(spec, w, Vec{{0.2, 0.3, 0.4}}, delta, 8);
    auto r = quasi_shadow(ctx, steps, line_points(orbit));
    EXPECT_LE(r.recurrence_residual, 1e-12);
    EXPECT_LE(r.center_residual, 1e-12);
    EXPECT_LE(r.translation_offcenter, 1e-12);
    EXPECT_LE(r.correction_center, 1e-12);
    EXPECT_LE(r.torus_recurrence_residual, 1e-12);
    EXPECT_LE(r.max_translation, delta * sp.kappa * (1 + 1e-9));
    EXPECT_LE(r.sup_error, ctx.L * r.defect);
    // the center direction of example34 is the first coordinate
    EXPECT_NEAR(ctx.Pc_d(0, 0), 1.0, 1e-12);
    EXPECT_NEAR(ctx.Pc_d.cwiseAbs().sum(), 1.0, 1e-12);
}

TEST(QuasiShadowing, PureCenterErrorsNeedNoCorrection)
{
    auto spec = example34();
    auto sp = common_eigenstructure(spec);
    Direction d = Direction::rational({1, 0});
    auto steps = make_steps(spec, std::vector<IntVec>(50, IntVec{1, 0}));
    auto ctx = prepare_shadow(sp, splitting_for(sp, d.unit()), steps);
    const double c = 3e-7;
    std::vector<Vec> x{Vec{{0.1, 0.2, 0.3}}};
    for (int p = 0; p < 50; ++p) x.push_back(wrap01(apply(spec, {1, 0}, x.back()) + Vec{{c, 0.0, 0.0}}));
    auto r = quasi_shadow(ctx, steps, x);
    EXPECT_LE(r.sup_error, 1e-15);
    for (std::size_t p = 1; p < r.translations.size(); ++p)
        EXPECT_LE((r.translations[p] - Vec{{c, 0.0, 0.0}}).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(QuasiShadowing, HyperbolicCaseHasNoTranslation)
{
    auto s = cat_line(50);
    auto orbit = perturbed_pseudo_orbit(s.spec, s.w, Vec{{0.3, 0.9}}, 1e-7, 4);
    auto q = quasi_shadow(s.ctx, s.steps, line_points(orbit));
    auto h = shadow_hyperbolic(s.ctx, s.steps, line_points(orbit));
    EXPECT_LE(q.max_translation, 1e-15);
    for (std::size_t p = 0; p < q.corrections.size(); ++p)
        EXPECT_LE((q.corrections[p] - h.corrections[p]).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Shadowing, RationalTubeWindow)
{
    auto spec = example33();
    auto sp = common_eigenstructure(spec);
    Direction d = Direction::rational({1, 0});
    auto w = tube_lattice_points(d, 1.0, 60);
    const double delta = 1e-7;
    auto orbit = noisy_orbit(spec, w, Vec{{0.77, 0.05}}, delta, 6);
    auto r = shadow_rational_tube(spec, sp, orbit, d);
    EXPECT_EQ(r.generator, (IntVec{1, 0}));
    EXPECT_EQ(r.first_multiple, -60);
    EXPECT_LE(r.line.sup_error, r.line.L * delta);
    // off-line points sit one A2^{+-1} step from the line; both have norm 3
    EXPECT_LE(r.window_sup_error, (3 * r.line.L + 1) * delta);
    EXPECT_LE(torus_dist(r.origin_point, orbit.at({0, 0})), r.line.L * delta);
}

TEST(Expansiveness, RegularAndSingularDirections)
{
    auto spec = example33();
    auto sp = common_eigenstructure(spec);
    auto c = expansiveness_certificate(spec, sp, Direction::rational({1, 0}), 300);
    ASSERT_TRUE(c.has_value());
    EXPECT_EQ(c->separated, c->pairs);
    EXPECT_GT(c->rho, 0.0);
    EXPECT_LE(c->max_needed, c->horizon);
    EXPECT_FALSE(expansiveness_certificate(spec, sp, Direction::rational({1, 1})).has_value());
}

TEST(BoxShadowing, RowsGlueAtTheOrigin)
{
    auto spec = example33();
    auto sp = common_eigenstructure(spec);
    auto box = box_window(2, 3, Direction::rational({1, 0}));
    const double delta = 1e-7;
    auto orbit = noisy_orbit(spec, box, Vec{{0.15, 0.85}}, delta, 12);
    auto r = glue_box_shadow(spec, sp, orbit, 3);
    ASSERT_EQ(r.row_errors.size(), 7u);
    for (double e : r.row_errors) EXPECT_LE(e, r.L * delta);
    EXPECT_LE(r.disagreement, 2 * r.L * delta);
    EXPECT_LE(r.defect, delta * (1 + 1e-9));
}
