#ifndef SUBDYN_SUSPENSION_HPP
#define SUBDYN_SUSPENSION_HPP

// The suspension R^k-action on (R^k x T^m) / Z^k, where n acts by
// (u, x) -> (u - n, alpha^n x), and chains of flow segments along a line.

#include "error.hpp"
#include "geometry.hpp"
#include "highprec.hpp"
#include "linalg.hpp"
#include "shadowing.hpp"
#include "spectrum.hpp"
#include "toral.hpp"

#include <cmath>
#include <optional>
#include <random>
#include <vector>

namespace subdyn {

struct SuspensionPoint {
    Vec u; // fiber coordinate, [0,1)^k once normalized
    Vec x; // point of T^m
};

/// Integer part of u, with entries that round up to 1 treated as carries.
inline IntVec floor_vec(const Vec& u)
{
    IntVec n(static_cast<std::size_t>(u.size()));
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        double f = std::floor(u[i]);
        if (u[i] - f >= 1.0) f += 1.0;
        n[static_cast<std::size_t>(i)] = static_cast<long long>(f);
    }
    return n;
}

/// Representative with u in [0,1)^k.
inline SuspensionPoint normalize(const ActionSpec& spec, const SuspensionPoint& pt)
{
    if (pt.u.size() != spec.k || pt.x.size() != spec.m) throw Error(ErrorKind::InvalidInput, "suspension point has wrong dimensions");
    IntVec n = floor_vec(pt.u);
    SuspensionPoint r;
    r.u = pt.u - to_real(n);
    for (Eigen::Index i = 0; i < r.u.size(); ++i)
        if (r.u[i] < 0.0 || r.u[i] >= 1.0) r.u[i] = 0.0;
    r.x = gcd_all(n) == 0 ? wrap01(pt.x) : apply(spec, n, pt.x);
    return r;
}

/// Time-w map of the suspension, result normalized.
inline SuspensionPoint flow(const ActionSpec& spec, const Vec& w, const SuspensionPoint& pt)
{
    if (w.size() != spec.k) throw Error(ErrorKind::InvalidInput, "flow time has wrong dimension");
    return normalize(spec, {pt.u + w, pt.x});
}

/// max(1, max ||alpha^c||_inf over c in {-1,0,1}^k): Lipschitz constant in x
/// of the time-w map over one fundamental-domain crossing per axis.
inline double modulus_constant(const ActionSpec& spec)
{
    double C = 1.0;
    IntVec c(static_cast<std::size_t>(spec.k), -1);
    while (true) {
        C = std::max(C, action_matrix(spec, c).inf_norm());
        std::size_t i = 0;
        while (i < c.size() && c[i] == 1) c[i++] = -1;
        if (i == c.size()) break;
        ++c[i];
    }
    return C;
}

struct Chain {
    std::vector<SuspensionPoint> nodes;
    std::vector<Vec> jumps; // v_p, one fewer than nodes
    double delta = 0;       // claimed, recomputed by verify_chain
    double a = 0;
};

struct ChainCheck {
    double defect = 0;   // sup d(pi_M flow(v_p, node_p), x_{p+1})
    double min_jump = 0; // min |v_p|, +inf for a single node
};

inline ChainCheck verify_chain(const ActionSpec& spec, const Chain& c)
{
    if (c.nodes.empty()) throw Error(ErrorKind::InvalidInput, "chain has no nodes");
    if (c.jumps.size() + 1 != c.nodes.size()) throw Error(ErrorKind::InvalidInput, "chain needs one jump per consecutive node pair");
    ChainCheck r;
    r.min_jump = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < c.jumps.size(); ++p) {
        SuspensionPoint y = flow(spec, c.jumps[p], c.nodes[p]);
        r.defect = std::max(r.defect, torus_dist(y.x, c.nodes[p + 1].x));
        r.min_jump = std::min(r.min_jump, c.jumps[p].norm());
    }
    return r;
}

/// Chain of jumps s_p * dir/|dir| with s_p uniform in [lo, hi], exact flow
/// segments plus uniform noise of sup norm below delta on every node after
/// the first.
inline Chain random_chain(const ActionSpec& spec, const Vec& dir, int P, double lo, double hi, double delta,
                          std::uint64_t seed)
{
    if (dir.size() != spec.k || dir.norm() == 0) throw Error(ErrorKind::InvalidInput, "bad chain direction");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0), len(lo, hi), noise(-0.9 * delta, 0.9 * delta);
    Chain c;
    c.delta = delta;
    c.a = lo;
    SuspensionPoint pt{Vec(spec.k), Vec(spec.m)};
    for (Eigen::Index i = 0; i < spec.k; ++i) pt.u[i] = unit(rng);
    for (Eigen::Index i = 0; i < spec.m; ++i) pt.x[i] = unit(rng);
    c.nodes.push_back(pt);
    Vec e = dir.normalized();
    for (int p = 0; p < P; ++p) {
        Vec v = len(rng) * e;
        SuspensionPoint nxt = flow(spec, v, c.nodes.back());
        for (Eigen::Index i = 0; i < spec.m; ++i) nxt.x[i] += noise(rng);
        nxt.x = wrap01(nxt.x);
        c.jumps.push_back(v);
        c.nodes.push_back(nxt);
    }
    return c;
}

struct ChainShadowResult {
    Direction direction = Direction::irrational(Vec::Ones(1));
    bool hyperbolic = true;
    ChainCheck chain;
    double C = 1;                  // modulus constant
    double L = 0;                  // shadowing constant of the coarse step system
    double lattice_defect = 0;     // defect of the reduced lattice pseudo-orbit
    bool reduction_sound = false;  // lattice_defect <= delta * C
    double phase_drift = 0;        // max |u_0 + t_p - m_p - u_p|
    std::vector<IntVec> lattice;   // m_p
    std::vector<int> coarse;       // node indices shadowed directly
    // hyperbolic case: the shadowing point is (u_0, x)
    SuspensionPoint point;
    hp::FVec point_fixed;
    long bits = 0;
    std::vector<double> errors; // d(x_p, pi_M flow(t_p, (u_0, x)))
    double epsilon = 0;         // sup of errors
    double bound = 0;           // L * delta * C
    std::optional<QuasiShadowResult> quasi;
};

namespace detail {

inline bool step_separates(const LyapunovSpectrum& sp, const Splitting& split, const IntVec& d)
{
    if (gcd_all(d) == 0) return false;
    const double tol = 1e-9 * std::max(1.0, sp.max_abs_lambda());
    for (int j : split.J1)
        if (!(step_chi(sp, j, d) < -tol)) return false;
    for (int j : split.J2)
        if (!(step_chi(sp, j, d) > tol)) return false;
    return true;
}

} // namespace detail

/// Shadow a chain along the line spanned by `dir`. Node p sits over the
/// lattice point m_p = m_{p-1} + floor(u_{p-1} + v_{p-1}); consecutive nodes
/// are grouped until their lattice step separates the splitting of the line,
/// the grouped nodes are shadowed, and every node is re-measured exactly.
inline ChainShadowResult shadow_chain(const ActionSpec& spec, const LyapunovSpectrum& sp, const Chain& c,
                                      const Direction& dir)
{
    if (dir.dim() != spec.k) throw Error(ErrorKind::InvalidInput, "direction dimension does not match k");
    ChainShadowResult out;
    out.direction = dir;
    out.chain = verify_chain(spec, c);
    const Vec e = dir.unit();
    int orient = 0;
    for (const auto& v : c.jumps) {
        double along = v.dot(e);
        if ((v - along * e).norm() > 1e-9 * std::max(1.0, v.norm())) throw Error(ErrorKind::JumpOffLine, "jump is not on the line");
        int s = along > 0 ? 1 : -1;
        if (orient != 0 && s != orient) throw Error(ErrorKind::MixedOrientation, "jumps point both ways along the line");
        orient = s;
    }
    DirectionClass dc = classify_direction(sp, dir.generator());
    if (dc.tag == DirectionTag::SecondTypeSingular) throw Error(ErrorKind::RatesFailed, "no hyperbolic part along this line");
    Splitting split = splitting_for(sp, orient < 0 ? Vec(-dir.generator()) : dir.generator());
    out.hyperbolic = split.J3.empty();
    out.C = modulus_constant(spec);

    std::vector<SuspensionPoint> nodes;
    for (const auto& n : c.nodes) nodes.push_back(normalize(spec, n));
    const std::size_t N = nodes.size();
    out.lattice.push_back(IntVec(static_cast<std::size_t>(spec.k), 0));
    Vec t = Vec::Zero(spec.k);
    for (std::size_t p = 0; p + 1 < N; ++p) {
        IntVec step = floor_vec(nodes[p].u + c.jumps[p]);
        IntVec next = out.lattice.back();
        for (std::size_t i = 0; i < next.size(); ++i) next[i] += step[i];
        out.lattice.push_back(next);
        t += c.jumps[p];
        Vec drift = nodes[0].u + t - to_real(next) - nodes[p + 1].u;
        out.phase_drift = std::max(out.phase_drift, drift.cwiseAbs().maxCoeff());
        Vec img = apply(spec, step, nodes[p].x);
        out.lattice_defect = std::max(out.lattice_defect, torus_dist(img, nodes[p + 1].x));
    }
    out.reduction_sound = out.lattice_defect <= std::max(c.delta, out.chain.defect) * out.C;

    // greedy grouping into separating lattice steps
    out.coarse.push_back(0);
    for (std::size_t p = 1; p < N; ++p)
        if (detail::step_separates(sp, split, sub(out.lattice[p], out.lattice[static_cast<std::size_t>(out.coarse.back())])))
            out.coarse.push_back(static_cast<int>(p));
    if (out.coarse.size() < 2) throw Error(ErrorKind::RatesFailed, "chain never completes a separating lattice step");

    std::vector<IntVec> dn;
    std::vector<Vec> xs;
    for (std::size_t q = 0; q < out.coarse.size(); ++q) {
        xs.push_back(nodes[static_cast<std::size_t>(out.coarse[q])].x);
        if (q > 0)
            dn.push_back(sub(out.lattice[static_cast<std::size_t>(out.coarse[q])],
                             out.lattice[static_cast<std::size_t>(out.coarse[q - 1])]));
    }
    StepSystem steps = make_steps(spec, dn);
    ShadowContext ctx = prepare_shadow(sp, split, steps);
    out.L = ctx.L;
    out.bound = out.L * std::max(c.delta, out.chain.defect) * out.C;

    if (!out.hyperbolic) {
        out.quasi = quasi_shadow(ctx, steps, xs);
        out.epsilon = out.quasi->sup_error;
        return out;
    }

    ShadowResult r = shadow_hyperbolic(ctx, steps, xs);
    out.bits = r.bits;
    out.point_fixed = r.point_fixed;
    out.point = {nodes[0].u, r.point};
    // every node, read forward from the last coarse node at or before it
    ActionCache cache(spec);
    std::size_t q = 0;
    for (std::size_t p = 0; p < N; ++p) {
        while (q + 1 < out.coarse.size() && static_cast<std::size_t>(out.coarse[q + 1]) <= p) ++q;
        const std::size_t base = static_cast<std::size_t>(out.coarse[q]);
        hp::FVec y = r.trajectory[q];
        if (base != p) {
            y = hp::mul(cache(sub(out.lattice[p], out.lattice[base])), y);
            for (auto& v : y) hp::mod1(v, r.bits);
        }
        hp::FVec X = hp::to_fixed(nodes[p].x, r.bits);
        mpz_class worst = 0;
        for (std::size_t i = 0; i < X.size(); ++i) {
            mpz_class d = y[i] - X[i];
            hp::wrap_half(d, r.bits);
            if (mpz_cmpabs(d.get_mpz_t(), worst.get_mpz_t()) > 0) worst = abs(d);
        }
        out.errors.push_back(hp::from_fixed(worst, r.bits));
        out.epsilon = std::max(out.epsilon, out.errors.back());
    }
    return out;
}

/// sup over sampled times s in [-T, T] (spacing h) of
/// d(pi_M flow(s e, (0, x)), pi_M flow(s e, (0, y))). Sampling makes this an
/// empirical lower estimate of the distance along the whole line.
inline double sampled_line_distance(const ActionSpec& spec, const Direction& dir, const Vec& x, const Vec& y, double h,
                                    double T)
{
    if (!(h > 0) || !(T >= 0)) throw Error(ErrorKind::InvalidInput, "sampling step must be positive");
    const Vec e = dir.unit();
    const SuspensionPoint px{Vec::Zero(spec.k), x}, py{Vec::Zero(spec.k), y};
    double best = 0;
    const long n = static_cast<long>(std::floor(T / h));
    for (long i = -n; i <= n; ++i) {
        Vec w = (static_cast<double>(i) * h) * e;
        best = std::max(best, torus_dist(flow(spec, w, px).x, flow(spec, w, py).x));
    }
    return best;
}

} // namespace subdyn

#endif
