#ifndef SUBDYN_SHADOWING_HPP
#define SUBDYN_SHADOWING_HPP

// Shadowing points for pseudo-orbits of sequences of commuting toral
// automorphisms M_p = alpha^{dn_p}. With e_p = lift(M_p x_p - x_{p+1}) the
// correction v_p (y_p = x_p + v_p) solves v_{p+1} = M_p v_p + e_p + u_{p+1}:
// stable part forward from the left end, unstable part backward from the
// right end, u the center translation (zero when hyperbolic).

#include "error.hpp"
#include "geometry.hpp"
#include "highprec.hpp"
#include "linalg.hpp"
#include "spectrum.hpp"
#include "toral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <vector>

namespace subdyn {

/// The matrices of a step sequence, deduplicated.
struct StepSystem {
    std::vector<IntVec> dn;
    std::vector<BigMatrix> mats, invs;
    std::vector<int> which;

    int size() const { return static_cast<int>(dn.size()); }
    const BigMatrix& M(int p) const { return mats[static_cast<std::size_t>(which[static_cast<std::size_t>(p)])]; }
    const BigMatrix& Minv(int p) const { return invs[static_cast<std::size_t>(which[static_cast<std::size_t>(p)])]; }
};

inline StepSystem make_steps(const ActionSpec& spec, const std::vector<IntVec>& dn)
{
    StepSystem s;
    s.dn = dn;
    std::map<IntVec, int> seen;
    for (const auto& d : dn) {
        auto it = seen.find(d);
        if (it == seen.end()) {
            it = seen.emplace(d, static_cast<int>(s.mats.size())).first;
            s.mats.push_back(action_matrix(spec, d));
            IntVec neg(d.size());
            for (std::size_t i = 0; i < d.size(); ++i) neg[i] = -d[i];
            s.invs.push_back(action_matrix(spec, neg));
        }
        s.which.push_back(it->second);
    }
    return s;
}

/// Projectors and constants for one step system and splitting.
struct ShadowContext {
    Splitting split;
    long bits = 128; // vector scale
    long pbits = 192; // projector scale
    hp::FMat Ps, Pu;
    Mat Ps_d, Pu_d, Pc_d;
    double kappa = 1;
    double b = 0;      // per-step contraction rate used in L
    double L = 0;      // kappa sqrt(m) (1 + e^-b) / (1 - e^-b)
    int m = 0;
};

namespace detail {

inline double step_chi(const LyapunovSpectrum& sp, int j, const IntVec& d)
{
    double s = 0;
    for (int i = 0; i < sp.k; ++i) s += static_cast<double>(d[static_cast<std::size_t>(i)]) * sp.lambda(i, j);
    return s;
}

} // namespace detail

/// Build the context. `split` fixes J1/J2/J3; projectors are computed to
/// high precision from one step matrix whose block moduli separate them.
inline ShadowContext prepare_shadow(const LyapunovSpectrum& sp, const Splitting& split, const StepSystem& steps,
                                    std::optional<double> a = std::nullopt)
{
    if (steps.size() == 0) throw Error(ErrorKind::InvalidInput, "empty step sequence");
    ShadowContext ctx;
    ctx.split = split;
    ctx.m = sp.m;
    ctx.kappa = sp.kappa;
    double log_growth = 0;
    for (int p = 0; p < steps.size(); ++p)
        log_growth += std::log2(std::max({1.0, steps.M(p).inf_norm(), steps.Minv(p).inf_norm()}));
    ctx.bits = 128 + static_cast<long>(std::ceil(log_growth));
    ctx.pbits = ctx.bits + 64;

    auto in = [](const std::vector<int>& J, int j) { return std::find(J.begin(), J.end(), j) != J.end(); };
    const double inf = std::numeric_limits<double>::infinity();
    // per-step rate: gap constants of the step vector (J sets from the direction)
    double bmin = inf;
    std::optional<double> a_used = a;
    for (std::size_t u = 0; u < steps.mats.size(); ++u) {
        const IntVec* d = nullptr;
        for (int p = 0; p < steps.size(); ++p)
            if (steps.which[static_cast<std::size_t>(p)] == static_cast<int>(u)) {
                d = &steps.dn[static_cast<std::size_t>(p)];
                break;
            }
        double sum = 0, sum_abs = 0, mn = inf;
        for (long long x : *d) {
            sum += static_cast<double>(x);
            sum_abs += std::fabs(static_cast<double>(x));
        }
        for (int j = 0; j < sp.s(); ++j)
            if (!in(split.J3, j)) mn = std::min(mn, std::fabs(detail::step_chi(sp, j, *d)));
        if (!a_used) a_used = mn / (2 * sum_abs);
        double b1 = -inf, b2 = inf;
        for (int j = 0; j < sp.s(); ++j) {
            double c = detail::step_chi(sp, j, *d);
            if (in(split.J1, j)) b1 = std::max(b1, c + *a_used * sum);
            if (in(split.J2, j)) b2 = std::min(b2, c - *a_used * sum);
        }
        bmin = std::min(bmin, std::min(-b1, b2));
    }
    ctx.b = bmin;
    ctx.L = bmin > 0 && bmin < inf ? ctx.kappa * std::sqrt(static_cast<double>(sp.m)) * (1 + std::exp(-bmin)) /
                                         (1 - std::exp(-bmin))
                                   : inf;

    // Projectors from the first step whose block moduli separate J1 < J3 < J2.
    bool done = false;
    for (std::size_t u = 0; u < steps.mats.size() && !done; ++u) {
        const IntVec* d = nullptr;
        for (int p = 0; p < steps.size(); ++p)
            if (steps.which[static_cast<std::size_t>(p)] == static_cast<int>(u)) {
                d = &steps.dn[static_cast<std::size_t>(p)];
                break;
            }
        double s_hi = -inf, c_lo = inf, c_hi = -inf, u_lo = inf;
        for (int j = 0; j < sp.s(); ++j) {
            double c = detail::step_chi(sp, j, *d);
            if (in(split.J1, j)) s_hi = std::max(s_hi, c);
            else if (in(split.J2, j)) u_lo = std::min(u_lo, c);
            else {
                c_lo = std::min(c_lo, c);
                c_hi = std::max(c_hi, c);
            }
        }
        double below_u = std::max(s_hi, c_hi), above_s = std::min(u_lo, c_lo);
        const double gap = 1e-6;
        if (!(u_lo == inf || u_lo > below_u + gap) || !(s_hi == -inf || above_s > s_hi + gap)) continue;
        const BigMatrix& G = steps.mats[u];
        if (u_lo == inf) ctx.Pu = hp::FMat(sp.m, ctx.pbits);
        else ctx.Pu = hp::outer_projector(G, below_u == -inf ? u_lo - 1.0 : 0.5 * (below_u + u_lo), ctx.pbits);
        if (s_hi == -inf) ctx.Ps = hp::FMat(sp.m, ctx.pbits);
        else {
            hp::FMat outer =
                hp::outer_projector(G, above_s == inf ? s_hi + 1.0 : 0.5 * (s_hi + above_s), ctx.pbits);
            ctx.Ps = hp::FMat::identity(sp.m, ctx.pbits) - outer;
        }
        done = true;
    }
    if (!done) throw Error(ErrorKind::DegenerateDecomposition, "no step matrix separates the splitting");
    ctx.Ps_d = ctx.Ps.to_double();
    ctx.Pu_d = ctx.Pu.to_double();
    ctx.Pc_d = Mat::Identity(sp.m, sp.m) - ctx.Ps_d - ctx.Pu_d;
    return ctx;
}

struct ShadowOptions {
    std::optional<Vec> anchor_stable;   // stable part of v_0 (default 0)
    std::optional<Vec> anchor_unstable; // unstable part of v_P (default 0)
};

struct ShadowResult {
    Vec point;               // x* at p = 0, rounded
    hp::FVec point_fixed;    // x* at p = 0, scale 2^bits
    long bits = 0;
    std::vector<hp::FVec> trajectory; // exact orbit of x*, mod 1
    std::vector<double> per_step_errors;
    std::vector<Vec> corrections; // v_p
    double sup_error = 0;
    double defect = 0;
    double lipschitz_ratio = 0;
    double L = 0;
};

/// Hyperbolic shadowing of x_0..x_P along the step system; all arithmetic
/// in fixed point, sup_error from exact re-simulation of the returned point.
inline ShadowResult shadow_hyperbolic(const ShadowContext& ctx, const StepSystem& steps, const std::vector<Vec>& x,
                                      const ShadowOptions& opt = {})
{
    if (!ctx.split.J3.empty()) throw Error(ErrorKind::NotHyperbolic, "splitting has a center part");
    const int P = steps.size();
    if (static_cast<int>(x.size()) != P + 1) throw Error(ErrorKind::InvalidInput, "orbit length must be steps + 1");
    const long B = ctx.bits;
    std::vector<hp::FVec> X(x.size());
    for (std::size_t p = 0; p < x.size(); ++p) X[p] = hp::to_fixed(x[p], B);

    ShadowResult r;
    r.bits = B;
    r.L = ctx.L;
    std::vector<hp::FVec> E(static_cast<std::size_t>(P));
    mpz_class worst = 0;
    for (int p = 0; p < P; ++p) {
        hp::FVec e = hp::sub(hp::mul(steps.M(p), X[static_cast<std::size_t>(p)]), X[static_cast<std::size_t>(p) + 1]);
        for (auto& c : e) {
            hp::wrap_half(c, B);
            if (mpz_cmpabs(c.get_mpz_t(), worst.get_mpz_t()) > 0) worst = abs(c);
        }
        E[static_cast<std::size_t>(p)] = std::move(e);
    }
    r.defect = hp::from_fixed(worst, B);
    if (r.defect >= 0.25) throw Error(ErrorKind::DefectTooLarge, "pseudo-orbit defect is not below 1/4");

    const int m = ctx.m;
    auto rescale = [](hp::FVec v, long from, long to) {
        for (auto& c : v) {
            if (to < from) hp::shift_round(c, from - to);
            else mpz_mul_2exp(c.get_mpz_t(), c.get_mpz_t(), static_cast<mp_bitcnt_t>(to - from));
        }
        return v;
    };

    // Only S_0 and U_0 enter the point. The forward stable recursion feeds the
    // corrections alone and runs at a short scale; an error in U_p reaches the
    // closed loop amplified by the growth of steps p..P, so U_p keeps
    // B - (growth of steps 0..p) bits.
    const long Bs = std::min<long>(B, 256);
    std::vector<long> ub(static_cast<std::size_t>(P) + 1, B);
    double g = 0;
    for (int p = 1; p <= P; ++p) {
        g += std::log2(std::max({1.0, steps.M(p - 1).inf_norm(), steps.Minv(p - 1).inf_norm()}));
        ub[static_cast<std::size_t>(p)] = std::max<long>(Bs, B - static_cast<long>(std::floor(g)));
    }

    hp::FVec S0 = opt.anchor_stable ? ctx.Ps.apply(hp::to_fixed(*opt.anchor_stable, B)) : hp::FVec(static_cast<std::size_t>(m), 0);
    std::vector<hp::FVec> S(static_cast<std::size_t>(P) + 1), U(static_cast<std::size_t>(P) + 1);
    const hp::FMat Ps_short = ctx.Ps.rescaled(Bs + 64);
    S[0] = rescale(S0, B, Bs);
    for (int p = 0; p < P; ++p)
        S[static_cast<std::size_t>(p) + 1] = Ps_short.apply(
            hp::add(hp::mul(steps.M(p), S[static_cast<std::size_t>(p)]), rescale(E[static_cast<std::size_t>(p)], B, Bs)));

    U[static_cast<std::size_t>(P)] =
        opt.anchor_unstable ? rescale(ctx.Pu.apply(hp::to_fixed(*opt.anchor_unstable, B)), B, ub.back())
                            : hp::FVec(static_cast<std::size_t>(m), 0);
    hp::FMat Pu_p;
    for (int p = P - 1; p >= 0; --p) {
        const long b = ub[static_cast<std::size_t>(p)];
        if (Pu_p.bits != b + 64) Pu_p = ctx.Pu.rescaled(b + 64);
        hp::FVec next = rescale(U[static_cast<std::size_t>(p) + 1], ub[static_cast<std::size_t>(p) + 1], b);
        U[static_cast<std::size_t>(p)] =
            Pu_p.apply(hp::mul(steps.Minv(p), hp::sub(next, rescale(E[static_cast<std::size_t>(p)], B, b))));
    }

    r.corrections.reserve(static_cast<std::size_t>(P) + 1);
    for (int p = 0; p <= P; ++p)
        r.corrections.push_back(hp::from_fixed(S[static_cast<std::size_t>(p)], Bs) +
                                hp::from_fixed(U[static_cast<std::size_t>(p)], ub[static_cast<std::size_t>(p)]));

    hp::FVec y = hp::add(X[0], hp::add(S0, U[0]));
    for (auto& c : y) hp::mod1(c, B);
    r.point_fixed = y;
    r.point = hp::from_fixed(y, B);
    for (Eigen::Index i = 0; i < r.point.size(); ++i)
        if (r.point[i] >= 1.0) r.point[i] = 0.0;

    // closed loop
    r.trajectory.reserve(static_cast<std::size_t>(P) + 1);
    r.trajectory.push_back(y);
    for (int p = 0; p <= P; ++p) {
        const hp::FVec& cur = r.trajectory.back();
        mpz_class worst_p = 0;
        for (int i = 0; i < m; ++i) {
            mpz_class d = cur[static_cast<std::size_t>(i)] - X[static_cast<std::size_t>(p)][static_cast<std::size_t>(i)];
            hp::wrap_half(d, B);
            if (mpz_cmpabs(d.get_mpz_t(), worst_p.get_mpz_t()) > 0) worst_p = abs(d);
        }
        double err = hp::from_fixed(worst_p, B);
        r.per_step_errors.push_back(err);
        r.sup_error = std::max(r.sup_error, err);
        if (p < P) {
            hp::FVec nxt = hp::mul(steps.M(p), cur);
            for (auto& c : nxt) hp::mod1(c, B);
            r.trajectory.push_back(std::move(nxt));
        }
    }
    r.lipschitz_ratio = r.defect > 0 ? r.sup_error / r.defect : 0.0;
    return r;
}

struct QuasiShadowResult {
    std::vector<Vec> points;       // y_p
    std::vector<Vec> translations; // u_p (u_0 = 0)
    std::vector<Vec> corrections;  // v_p in E^s + E^u
    double sup_error = 0;          // sup |v_p|
    double defect = 0;
    double max_translation = 0;
    double recurrence_residual = 0;       // |v_{p+1} - M v_p - e_p - u_{p+1}| in lifted coordinates
    double torus_recurrence_residual = 0; // d(y_{p+1}, M y_p + u_{p+1})
    double center_residual = 0;           // |u_{p+1} + Pc e_p|
    double translation_offcenter = 0;     // |u - Pc u|
    double correction_center = 0;         // |Pc v|
    double L = 0;
};

inline QuasiShadowResult quasi_shadow(const ShadowContext& ctx, const StepSystem& steps, const std::vector<Vec>& x)
{
    const int P = steps.size();
    if (static_cast<int>(x.size()) != P + 1) throw Error(ErrorKind::InvalidInput, "orbit length must be steps + 1");
    const int m = ctx.m;
    std::vector<Mat> Md(steps.mats.size()), Mi(steps.mats.size());
    for (std::size_t u = 0; u < steps.mats.size(); ++u) {
        Md[u] = steps.mats[u].to_double();
        Mi[u] = steps.invs[u].to_double();
    }
    auto Mof = [&](int p) -> const Mat& { return Md[static_cast<std::size_t>(steps.which[static_cast<std::size_t>(p)])]; };
    auto Mio = [&](int p) -> const Mat& { return Mi[static_cast<std::size_t>(steps.which[static_cast<std::size_t>(p)])]; };

    QuasiShadowResult r;
    r.L = ctx.L;
    std::vector<Vec> E(static_cast<std::size_t>(P));
    for (int p = 0; p < P; ++p) {
        E[static_cast<std::size_t>(p)] =
            wrap_half(apply_matrix(steps.M(p), x[static_cast<std::size_t>(p)]) - x[static_cast<std::size_t>(p) + 1]);
        r.defect = std::max(r.defect, E[static_cast<std::size_t>(p)].cwiseAbs().maxCoeff());
    }
    if (r.defect >= 0.25) throw Error(ErrorKind::DefectTooLarge, "pseudo-orbit defect is not below 1/4");

    std::vector<Vec> S(static_cast<std::size_t>(P) + 1), U(static_cast<std::size_t>(P) + 1);
    S[0] = Vec::Zero(m);
    for (int p = 0; p < P; ++p)
        S[static_cast<std::size_t>(p) + 1] = ctx.Ps_d * (Mof(p) * S[static_cast<std::size_t>(p)] + E[static_cast<std::size_t>(p)]);
    U[static_cast<std::size_t>(P)] = Vec::Zero(m);
    for (int p = P - 1; p >= 0; --p)
        U[static_cast<std::size_t>(p)] =
            ctx.Pu_d * (Mio(p) * (U[static_cast<std::size_t>(p) + 1] - E[static_cast<std::size_t>(p)]));

    r.translations.push_back(Vec::Zero(m));
    for (int p = 0; p <= P; ++p) {
        Vec v = S[static_cast<std::size_t>(p)] + U[static_cast<std::size_t>(p)];
        r.corrections.push_back(v);
        r.points.push_back(wrap01(x[static_cast<std::size_t>(p)] + v));
        r.sup_error = std::max(r.sup_error, v.cwiseAbs().maxCoeff());
        r.correction_center = std::max(r.correction_center, (ctx.Pc_d * v).cwiseAbs().maxCoeff());
        if (p < P) {
            Vec u = -(ctx.Pc_d * E[static_cast<std::size_t>(p)]);
            r.translations.push_back(u);
            r.max_translation = std::max(r.max_translation, u.cwiseAbs().maxCoeff());
            r.translation_offcenter = std::max(r.translation_offcenter, (u - ctx.Pc_d * u).cwiseAbs().maxCoeff());
        }
    }
    for (int p = 0; p < P; ++p) {
        const auto q = static_cast<std::size_t>(p);
        Vec res = r.corrections[q + 1] - Mof(p) * r.corrections[q] - E[q] - r.translations[q + 1];
        r.recurrence_residual = std::max(r.recurrence_residual, res.cwiseAbs().maxCoeff());
        r.center_residual =
            std::max(r.center_residual, (r.translations[q + 1] + ctx.Pc_d * E[q]).cwiseAbs().maxCoeff());
        Vec img = wrap01(apply_matrix(steps.M(p), r.points[q]) + r.translations[q + 1]);
        r.torus_recurrence_residual = std::max(r.torus_recurrence_residual, torus_dist(r.points[q + 1], img));
    }
    return r;
}

/// Steps between consecutive points of a window lying on one line.
inline std::vector<IntVec> line_steps(const LatticeWindow& w)
{
    std::vector<IntVec> out;
    for (std::size_t p = 0; p + 1 < w.size(); ++p) out.push_back(sub(w.points[p + 1], w.points[p]));
    return out;
}

struct WindowShadowResult {
    ShadowResult line;    // solve along the lattice points of the line
    Vec origin_point;     // shadowing point seen at n = 0
    hp::FVec origin_fixed;
    double window_sup_error = 0; // sup over every window point
    IntVec generator;
    long long first_multiple = 0; // line points are (first_multiple + p) * generator
};

/// Shadow a pseudo-orbit on a tube around a rational line: solve along the
/// multiples of the smallest generator, then measure the returned point on
/// every window point.
inline WindowShadowResult shadow_rational_tube(const ActionSpec& spec, const LyapunovSpectrum& sp, const PseudoOrbit& orbit,
                                               const Direction& dir)
{
    auto g = smallest_integer_generator(dir);
    if (!g) throw Error(ErrorKind::InvalidInput, "direction must be rational");
    const auto& w = orbit.window;
    std::vector<long long> mult;
    for (const auto& n : w.points) {
        // n = j g ?
        long long j = 0;
        bool on = true, set = false;
        for (std::size_t i = 0; i < n.size(); ++i) {
            if ((*g)[i] == 0) {
                on = on && n[i] == 0;
                continue;
            }
            if (n[i] % (*g)[i] != 0) {
                on = false;
                break;
            }
            long long q = n[i] / (*g)[i];
            if (set && q != j) on = false;
            j = q;
            set = true;
        }
        if (on) mult.push_back(j);
    }
    std::sort(mult.begin(), mult.end());
    if (mult.size() < 2) throw Error(ErrorKind::MissingLatticePoint, "window holds fewer than two points of the line");
    for (std::size_t q = 1; q < mult.size(); ++q)
        if (mult[q] != mult[q - 1] + 1) throw Error(ErrorKind::MissingLatticePoint, "line points of the window are not consecutive");

    auto scaled = [&](long long j) {
        IntVec n = *g;
        for (auto& v : n) v *= j;
        return n;
    };
    std::vector<Vec> x;
    for (long long j : mult) x.push_back(orbit.at(scaled(j)));
    StepSystem steps = make_steps(spec, std::vector<IntVec>(mult.size() - 1, *g));
    Splitting split = splitting_for(sp, dir.unit());
    ShadowContext ctx = prepare_shadow(sp, split, steps);

    WindowShadowResult out;
    out.generator = *g;
    out.first_multiple = mult.front();
    out.line = shadow_hyperbolic(ctx, steps, x);
    const long B = out.line.bits;
    ActionCache cache(spec);
    out.origin_fixed = hp::mul(cache(scaled(-mult.front())), out.line.point_fixed);
    for (auto& c : out.origin_fixed) hp::mod1(c, B);
    out.origin_point = hp::from_fixed(out.origin_fixed, B);

    Vec gu = to_real(*g);
    double gg = gu.squaredNorm();
    for (std::size_t p = 0; p < w.size(); ++p) {
        const IntVec& n = w.points[p];
        auto j = static_cast<long long>(std::llround(to_real(n).dot(gu) / gg));
        j = std::clamp(j, mult.front(), mult.back());
        const hp::FVec& base = out.line.trajectory[static_cast<std::size_t>(j - mult.front())];
        hp::FVec y = hp::mul(cache(sub(n, scaled(j))), base);
        hp::FVec xf = hp::to_fixed(orbit.points[p], B);
        mpz_class worst = 0;
        for (std::size_t c = 0; c < y.size(); ++c) {
            mpz_class d = y[c] - xf[c];
            hp::wrap_half(d, B);
            if (mpz_cmpabs(d.get_mpz_t(), worst.get_mpz_t()) > 0) worst = abs(d);
        }
        out.window_sup_error = std::max(out.window_sup_error, hp::from_fixed(worst, B));
    }
    return out;
}

struct ExpansivenessCertificate {
    double rho = 0;
    int doubling_steps = 0; // ceil(log 2 / b) along the unit direction
    int horizon = 64;
    int pairs = 0;
    int separated = 0;
    int max_needed = 0; // largest |pi_V(n)| used before separation
};

/// Expansiveness along a regular direction: rho from the splitting
/// condition number and the generator step norm, checked on random pairs.
inline std::optional<ExpansivenessCertificate> expansiveness_certificate(const ActionSpec& spec, const LyapunovSpectrum& sp,
                                                                         const Direction& dir, int pairs = 1000,
                                                                         int horizon = 64, std::uint64_t seed = 1)
{
    Vec u = dir.unit();
    if (classify_direction(sp, u).tag != DirectionTag::Regular) return std::nullopt;
    ExpansivenessCertificate c;
    c.horizon = horizon;
    auto g = gap_constants(sp, u);
    c.doubling_steps = static_cast<int>(std::ceil(std::log(2.0) / g.bv));

    // lattice points to probe, ordered by |pi_V|
    LatticeWindow w = dir.is_rational() ? tube_lattice_points(dir, 0.0, horizon)
                                        : tube_lattice_points(dir, std::sqrt(static_cast<double>(spec.k)), horizon);
    std::vector<int> order(w.size());
    for (std::size_t p = 0; p < w.size(); ++p) order[p] = static_cast<int>(p);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::fabs(w.line_coordinate[static_cast<std::size_t>(a)]) < std::fabs(w.line_coordinate[static_cast<std::size_t>(b)]);
    });
    ActionCache cache(spec);
    double step_norm = 1;
    if (dir.is_rational()) {
        IntVec n = *dir.integer_generator(), neg = n;
        for (auto& v : neg) v = -v;
        step_norm = std::max(cache(n).inf_norm(), cache(neg).inf_norm());
    } else {
        for (int i = 0; i < spec.k; ++i) step_norm = std::max({step_norm, spec.big[static_cast<std::size_t>(i)].inf_norm(),
                                                               spec.big_inv[static_cast<std::size_t>(i)].inf_norm()});
    }
    c.rho = 1.0 / (2.0 * sp.kappa * step_norm);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0), S(std::log(1e-6), std::log(0.5));
    std::normal_distribution<double> N(0.0, 1.0);
    for (int t = 0; t < pairs; ++t) {
        Vec x(spec.m), dv(spec.m);
        for (int i = 0; i < spec.m; ++i) {
            x[i] = U(rng);
            dv[i] = N(rng);
        }
        double sep = std::exp(S(rng));
        dv *= sep / dv.cwiseAbs().maxCoeff();
        Vec y = wrap01(x + dv);
        ++c.pairs;
        for (int idx : order) {
            const IntVec& n = w.points[static_cast<std::size_t>(idx)];
            const BigMatrix& A = cache(n);
            if (torus_dist(apply_matrix(A, x), apply_matrix(A, y)) > c.rho) {
                ++c.separated;
                c.max_needed = std::max(c.max_needed,
                                        static_cast<int>(std::ceil(std::fabs(w.line_coordinate[static_cast<std::size_t>(idx)]))));
                break;
            }
        }
    }
    return c;
}

struct BoxShadowResult {
    Vec point; // glued point at the origin
    double sup_error = 0;
    double disagreement = 0;
    std::vector<double> row_errors;
    double defect = 0;
    double L = 0;
};

/// Box [-r, r]^2 pseudo-orbit shadowed row by row along e_1 and glued at the
/// origin. Candidates of adjacent rows are compared along both rows.
inline BoxShadowResult glue_box_shadow(const ActionSpec& spec, const LyapunovSpectrum& sp, const PseudoOrbit& orbit, long long r)
{
    if (spec.k != 2) throw Error(ErrorKind::InvalidInput, "box gluing is implemented for k = 2");
    Direction row_dir = Direction::rational({1, 0});
    Splitting split = splitting_for(sp, row_dir.unit());
    std::vector<IntVec> dn(static_cast<std::size_t>(2 * r), IntVec{1, 0});
    StepSystem steps = make_steps(spec, dn);
    ShadowContext ctx = prepare_shadow(sp, split, steps);
    const long B = ctx.bits;
    BoxShadowResult out;
    out.L = ctx.L;
    std::vector<hp::FVec> cand;
    for (long long j = -r; j <= r; ++j) {
        std::vector<Vec> row;
        for (long long i = -r; i <= r; ++i) row.push_back(orbit.at({i, j}));
        auto res = shadow_hyperbolic(ctx, steps, row);
        out.row_errors.push_back(res.sup_error);
        out.defect = std::max(out.defect, res.defect);
        // move from (-r, j) back to the origin
        hp::FVec w = hp::mul(action_matrix(spec, {r, -j}), res.point_fixed);
        for (auto& c : w) hp::mod1(c, B);
        cand.push_back(std::move(w));
    }
    ActionCache cache(spec);
    auto dist_at = [&](const hp::FVec& a, const hp::FVec& b, const IntVec& n) {
        hp::FVec d = hp::mul(cache(n), hp::sub(a, b));
        mpz_class worst = 0;
        for (auto& c : d) {
            hp::wrap_half(c, B);
            if (mpz_cmpabs(c.get_mpz_t(), worst.get_mpz_t()) > 0) worst = abs(c);
        }
        return hp::from_fixed(worst, B);
    };
    for (std::size_t q = 0; q + 1 < cand.size(); ++q)
        for (long long row : {static_cast<long long>(q) - r, static_cast<long long>(q) + 1 - r})
            for (long long i = -r; i <= r; ++i)
                out.disagreement = std::max(out.disagreement, dist_at(cand[q], cand[q + 1], {i, row}));
    // sup error of the middle-row candidate over the whole box
    const hp::FVec& mid = cand[static_cast<std::size_t>(r)];
    for (long long j = -r; j <= r; ++j)
        for (long long i = -r; i <= r; ++i) {
            hp::FVec y = hp::mul(cache({i, j}), mid);
            hp::FVec xf = hp::to_fixed(orbit.at({i, j}), B);
            out.sup_error = std::max(out.sup_error, [&] {
                mpz_class worst = 0;
                for (std::size_t c = 0; c < y.size(); ++c) {
                    mpz_class d = y[c] - xf[c];
                    hp::wrap_half(d, B);
                    if (mpz_cmpabs(d.get_mpz_t(), worst.get_mpz_t()) > 0) worst = abs(d);
                }
                return hp::from_fixed(worst, B);
            }());
        }
    out.point = hp::from_fixed(mid, B);
    return out;
}

} // namespace subdyn

#endif
