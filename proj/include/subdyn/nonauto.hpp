#ifndef SUBDYN_NONAUTO_HPP
#define SUBDYN_NONAUTO_HPP

// Lattice step sequences inside a tube around an irrational line, the
// nonautonomous system g_p = alpha^{n^(p+1) - n^(p)} they generate, its rate
// conditions, and shadowing along it.

#include "error.hpp"
#include "geometry.hpp"
#include "linalg.hpp"
#include "shadowing.hpp"
#include "spectrum.hpp"
#include "toral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace subdyn {

struct StepSequence {
    Vec direction;
    double t0 = 0;
    int N = 1;
    std::vector<IntVec> points; // n^(0) = 0, ..., n^(P)

    int steps() const { return static_cast<int>(points.size()) - 1; }
    IntVec delta(int p) const { return sub(points[static_cast<std::size_t>(p) + 1], points[static_cast<std::size_t>(p)]); }
    std::vector<IntVec> deltas() const
    {
        std::vector<IntVec> d;
        for (int p = 0; p < steps(); ++p) d.push_back(delta(p));
        return d;
    }
};

inline int sign_of(double x) { return (x > 0) - (x < 0); }

inline double distance_to_line(const IntVec& n, const Vec& v)
{
    Vec u = v.normalized(), x = to_real(n);
    return (x - x.dot(u) * u).norm();
}

struct SequenceCheck {
    bool tube = true;
    bool signs = true;
    bool n2n = true;
    double max_distance = 0; // farthest n^(p) from the line
    int min_step = 0, max_step = 0; // range of max_i |Delta_i|
    bool ok() const { return tube && signs && n2n; }
};

/// Post-hoc check of the three sequence invariants.
inline SequenceCheck check_sequence(const StepSequence& s)
{
    SequenceCheck c;
    c.min_step = std::numeric_limits<int>::max();
    for (const auto& n : s.points) {
        double d = distance_to_line(n, s.direction);
        c.max_distance = std::max(c.max_distance, d);
        if (d > s.t0) c.tube = false;
    }
    for (int p = 0; p < s.steps(); ++p) {
        IntVec d = s.delta(p);
        for (std::size_t i = 0; i < d.size(); ++i)
            if (sign_of(static_cast<double>(d[i])) != sign_of(s.direction[static_cast<Eigen::Index>(i)])) c.signs = false;
        int mx = static_cast<int>(max_abs(d));
        c.min_step = std::min(c.min_step, mx);
        c.max_step = std::max(c.max_step, mx);
        if (mx < s.N || mx > 2 * s.N) c.n2n = false;
    }
    if (s.steps() == 0) c.min_step = 0;
    return c;
}

/// Walk along the coordinate of largest |v_i|: from lead value t the next
/// point is round(t' v / |v_lead|) for the smallest t' in [t + N, t + 2N]
/// passing the sign and step bounds. Rounding keeps every point within
/// sqrt(k - 1) / 2 of the line.
inline StepSequence build_step_sequence(const Direction& dir, double t0, int N, int P)
{
    if (dir.is_rational()) throw Error(ErrorKind::InvalidInput, "step sequences are built for irrational directions");
    const int k = dir.dim();
    const double rk = std::sqrt(static_cast<double>(k));
    if (!(t0 >= rk && t0 < 2 * rk)) throw Error(ErrorKind::InvalidInput, "t0 must lie in [sqrt(k), 2 sqrt(k))");
    if (N < 1 || P < 0) throw Error(ErrorKind::InvalidInput, "N must be positive and P nonnegative");
    const Vec& v = dir.generator();
    Eigen::Index lead = 0;
    v.cwiseAbs().maxCoeff(&lead);
    const Vec r = v / std::fabs(v[lead]);

    StepSequence s;
    s.direction = v;
    s.t0 = t0;
    s.N = N;
    s.points.push_back(IntVec(static_cast<std::size_t>(k), 0));
    long long t = 0;
    auto at = [&](long long tt) {
        IntVec n(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) n[static_cast<std::size_t>(i)] = std::llround(static_cast<double>(tt) * r[i]);
        return n;
    };
    for (int p = 0; p < P; ++p) {
        const IntVec& cur = s.points.back();
        bool found = false;
        int blocking = -1;
        for (long long tn = t + N; tn <= t + 2LL * N && !found; ++tn) {
            IntVec n = at(tn);
            IntVec d = sub(n, cur);
            bool ok = true;
            for (int i = 0; i < k && ok; ++i)
                if (sign_of(static_cast<double>(d[static_cast<std::size_t>(i)])) != sign_of(v[i])) {
                    ok = false;
                    blocking = i;
                }
            long long mx = max_abs(d);
            if (ok && (mx < N || mx > 2LL * N)) {
                ok = false;
                blocking = static_cast<int>(lead);
            }
            if (ok && distance_to_line(n, v) > t0) ok = false;
            if (ok) {
                s.points.push_back(n);
                t = tn;
                found = true;
            }
        }
        if (!found)
            throw Error(ErrorKind::CannotAdvance,
                        "no admissible step at p = " + std::to_string(p) + " (blocking coordinate " + std::to_string(blocking) + ")");
    }
    return s;
}

/// g_p^m = g_{p+m-1} ... g_p as a product of step matrices.
inline BigMatrix compose(const ActionSpec& spec, const StepSequence& s, int p, int m)
{
    if (p < 0 || m < 0 || p + m > s.steps()) throw Error(ErrorKind::RangeExceeded, "step index range outside the sequence");
    BigMatrix out = BigMatrix::identity(spec.m);
    for (int q = p; q < p + m; ++q) out = action_matrix(spec, s.delta(q)) * out;
    return out;
}

struct RateReport {
    double a = 0;
    double lambda1 = 0; // max over steps and J1 of sum_i Delta_i (lambda_ij + a)
    double lambda2 = 0; // min over steps and J2 of sum_i Delta_i (lambda_ij - a)
    std::optional<double> lambda3;
    bool hyperbolic_ok = false; // lambda1 < 0 < lambda2
    bool center_ok = true;      // lambda3 <= min(-lambda1, lambda2)
    bool pass() const { return hyperbolic_ok && center_ok; }
};

/// J sets come from the sequence direction; a defaults to that of the gap
/// constants of the direction.
inline RateReport verify_rates(const LyapunovSpectrum& sp, const StepSequence& s, std::optional<double> a = std::nullopt)
{
    Vec u = s.direction.normalized();
    Splitting split = splitting_for(sp, u);
    RateReport r;
    r.a = a ? *a : gap_constants(sp, u).a;
    if (!(r.a > 0)) throw Error(ErrorKind::InvalidInput, "a must be positive");
    const double inf = std::numeric_limits<double>::infinity();
    r.lambda1 = -inf;
    r.lambda2 = inf;
    double l3 = -inf;
    auto in = [](const std::vector<int>& J, int j) { return std::find(J.begin(), J.end(), j) != J.end(); };
    for (int p = 0; p < s.steps(); ++p) {
        IntVec d = s.delta(p);
        double sum = 0;
        for (long long x : d) sum += static_cast<double>(x);
        for (int j = 0; j < sp.s(); ++j) {
            double chi = 0;
            for (int i = 0; i < sp.k; ++i) chi += static_cast<double>(d[static_cast<std::size_t>(i)]) * sp.lambda(i, j);
            if (in(split.J1, j)) r.lambda1 = std::max(r.lambda1, chi + r.a * sum);
            else if (in(split.J2, j)) r.lambda2 = std::min(r.lambda2, chi - r.a * sum);
            else l3 = std::max({l3, chi + r.a * sum, std::fabs(chi - r.a * sum)});
        }
    }
    r.hyperbolic_ok = r.lambda1 < 0 && r.lambda2 > 0;
    if (!split.J3.empty()) {
        r.lambda3 = l3;
        r.center_ok = l3 <= std::min(-r.lambda1, r.lambda2);
    }
    return r;
}

struct NSearchStep {
    int N = 0;
    double a = 0;
    bool pass = false;
};

struct NSearch {
    int N = 0;
    double a = 0;
    std::vector<NSearchStep> trace;
};

/// Smallest N in {1, 2, 4, ..., 256} whose sequence passes the rate checks.
/// Without a fixed a, each N also tries a0, a0/2, a0/4, a0/8 (a0 from the
/// gap constants); the center condition needs a strictly below a0 when the
/// direction is singular.
inline NSearch search_N(const LyapunovSpectrum& sp, const Direction& dir, double t0, int P, std::optional<double> a = std::nullopt)
{
    NSearch out;
    std::vector<double> as;
    if (a) as.push_back(*a);
    else {
        double a0 = gap_constants(sp, dir.unit()).a;
        for (int h = 0; h < 4; ++h) as.push_back(a0 / std::exp2(h));
    }
    for (int N = 1; N <= 256; N *= 2) {
        std::optional<StepSequence> seq;
        try {
            seq = build_step_sequence(dir, t0, N, P);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::CannotAdvance) throw;
        }
        for (double av : as) {
            bool pass = seq && verify_rates(sp, *seq, av).pass();
            out.trace.push_back({N, av, pass});
            if (pass) {
                out.N = N;
                out.a = av;
                return out;
            }
        }
    }
    throw Error(ErrorKind::RatesFailed, "no N up to 256 satisfies the rate conditions");
}

/// The same step repeated: the autonomous case as a sequence.
inline StepSequence constant_sequence(const IntVec& step, int P)
{
    StepSequence s;
    s.direction = to_real(step);
    s.t0 = std::sqrt(static_cast<double>(step.size()));
    s.N = static_cast<int>(max_abs(step));
    IntVec n(step.size(), 0);
    s.points.push_back(n);
    for (int p = 0; p < P; ++p) {
        n = add(n, step);
        s.points.push_back(n);
    }
    return s;
}

namespace detail {

// Monotone lattice path from a to b, each move taken on the coordinate that
// keeps the next point nearest the line.
inline std::vector<IntVec> staircase(const IntVec& a, const IntVec& b, const Vec& v)
{
    std::vector<IntVec> path{a};
    IntVec cur = a;
    while (cur != b) {
        int best = -1;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < cur.size(); ++i) {
            if (cur[i] == b[i]) continue;
            IntVec nx = cur;
            nx[i] += b[i] > cur[i] ? 1 : -1;
            double d = distance_to_line(nx, v);
            if (d < bd) {
                bd = d;
                best = static_cast<int>(i);
            }
        }
        cur[static_cast<std::size_t>(best)] += b[static_cast<std::size_t>(best)] > cur[static_cast<std::size_t>(best)] ? 1 : -1;
        path.push_back(cur);
    }
    return path;
}

} // namespace detail

struct SequenceShadowResult {
    RateReport rates;
    bool hyperbolic = true;
    std::optional<ShadowResult> hyp;
    std::optional<QuasiShadowResult> quasi;
    double L = 0;             // shadowing constant of the sequence system
    double L2 = 0;            // subsequence defect <= L2 * window defect
    double window_defect = 0; // measured on the whole window
    double sub_defect = 0;    // measured on the subsequence
    double sequence_sup_error = 0;
    double window_sup_error = 0; // over every window point between n^(0) and n^(P)
    double carry_norm = 0;       // max ||alpha^{n - n^(p)}|| used for window points
    int path_points_missing = 0; // staircase points outside the window
};

/// Shadow the subsequence x_{n^(p)} of a tube pseudo-orbit for the system
/// g_p, then measure the shadowing point on the whole window.
inline SequenceShadowResult shadow_along_sequence(const ActionSpec& spec, const LyapunovSpectrum& sp, const StepSequence& s,
                                                  const PseudoOrbit& orbit, std::optional<double> a = std::nullopt)
{
    SequenceShadowResult out;
    out.rates = verify_rates(sp, s, a);
    if (!out.rates.pass()) throw Error(ErrorKind::RatesFailed, "step sequence fails the rate conditions");
    Splitting split = splitting_for(sp, s.direction.normalized());
    out.hyperbolic = split.J3.empty();
    StepSystem steps = make_steps(spec, s.deltas());
    ShadowContext ctx = prepare_shadow(sp, split, steps, out.rates.a);
    out.L = ctx.L;

    std::vector<Vec> x;
    for (const auto& n : s.points) x.push_back(orbit.at(n));
    out.window_defect = verify_pseudo_orbit(spec, orbit);

    // L2: errors along a staircase from n^(p) to n^(p+1) carried to the end
    ActionCache cache(spec);
    for (int p = 0; p < s.steps(); ++p) {
        const IntVec& a0 = s.points[static_cast<std::size_t>(p)];
        const IntVec& b0 = s.points[static_cast<std::size_t>(p) + 1];
        auto path = detail::staircase(a0, b0, s.direction);
        double l2 = 0;
        for (std::size_t q = 1; q < path.size(); ++q) {
            if (!orbit.window.find(path[q])) ++out.path_points_missing;
            l2 += cache(sub(b0, path[q])).inf_norm();
        }
        out.L2 = std::max(out.L2, l2);
        Vec img = apply_matrix(cache(sub(b0, a0)), x[static_cast<std::size_t>(p)]);
        out.sub_defect = std::max(out.sub_defect, torus_dist(img, x[static_cast<std::size_t>(p) + 1]));
    }

    std::vector<Vec> y;
    if (out.hyperbolic) {
        out.hyp = shadow_hyperbolic(ctx, steps, x);
        out.sequence_sup_error = out.hyp->sup_error;
        for (const auto& f : out.hyp->trajectory) y.push_back(hp::from_fixed(f, out.hyp->bits));
    } else {
        out.quasi = quasi_shadow(ctx, steps, x);
        out.sequence_sup_error = out.quasi->sup_error;
        y = out.quasi->points;
    }
    for (auto& p : y) p = wrap01(p);

    // each window point is read from the last sequence point at or before
    // it along the line
    Vec u = s.direction.normalized();
    std::vector<double> seq_coord;
    for (const auto& n : s.points) seq_coord.push_back(to_real(n).dot(u));
    for (std::size_t q = 0; q < orbit.window.size(); ++q) {
        const IntVec& n = orbit.window.points[q];
        double c = to_real(n).dot(u);
        if (c < seq_coord.front() || c > seq_coord.back()) continue;
        auto it = std::upper_bound(seq_coord.begin(), seq_coord.end(), c);
        std::size_t p = static_cast<std::size_t>(std::distance(seq_coord.begin(), it)) - 1;
        const BigMatrix& carry = cache(sub(n, s.points[p]));
        out.carry_norm = std::max(out.carry_norm, carry.inf_norm());
        Vec img = apply_matrix(carry, y[p]);
        out.window_sup_error = std::max(out.window_sup_error, torus_dist(img, orbit.points[q]));
    }
    return out;
}

} // namespace subdyn

#endif
