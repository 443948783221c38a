#ifndef SUBDYN_TORAL_HPP
#define SUBDYN_TORAL_HPP

// The linear Z^k-action on the m-torus: exact evaluation, the flat metric,
// and generation / verification of pseudo-orbits over lattice windows.

#include "error.hpp"
#include "geometry.hpp"
#include "highprec.hpp"
#include "linalg.hpp"
#include "spectrum.hpp"

#include <cmath>
#include <map>
#include <queue>
#include <random>
#include <vector>

namespace subdyn {

/// alpha^n = prod_i A_i^{n_i}, exact.
inline BigMatrix action_matrix(const ActionSpec& spec, const IntVec& n)
{
    if (static_cast<int>(n.size()) != spec.k) throw Error(ErrorKind::InvalidInput, "lattice vector dimension does not match k");
    BigMatrix out = BigMatrix::identity(spec.m);
    for (int i = 0; i < spec.k; ++i) {
        long long e = n[static_cast<std::size_t>(i)];
        if (e == 0) continue;
        if (e < 0 && spec.big_inv.empty()) throw Error(ErrorKind::InvalidInput, "negative powers need an invertible (toral) action");
        const BigMatrix& base = e > 0 ? spec.big[static_cast<std::size_t>(i)] : spec.big_inv[static_cast<std::size_t>(i)];
        out = out * power(base, static_cast<unsigned long long>(e > 0 ? e : -e));
    }
    return out;
}

/// Coordinates reduced to [0, 1).
inline Vec wrap01(const Vec& x)
{
    Vec r = x;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        r[i] -= std::floor(r[i]);
        if (r[i] >= 1.0) r[i] = 0.0;
    }
    return r;
}

/// Lift of a torus difference to [-1/2, 1/2)^m.
inline Vec wrap_half(const Vec& x)
{
    Vec r = x;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        r[i] -= std::floor(r[i] + 0.5);
        if (r[i] >= 0.5) r[i] -= 1.0;
    }
    return r;
}

inline double torus_dist(const Vec& x, const Vec& y) { return wrap_half(x - y).cwiseAbs().maxCoeff(); }

/// M x mod 1 evaluated exactly on the binary expansion of x; the only
/// rounding is the final conversion back to double.
inline Vec apply_matrix(const BigMatrix& M, const Vec& x)
{
    long lowest = 0; // x = X * 2^lowest with X integral
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0) continue;
        int e = 0;
        std::frexp(x[i], &e);
        lowest = std::min(lowest, static_cast<long>(e) - 53);
    }
    const long bits = -lowest;
    hp::FVec X = hp::to_fixed(x, bits);
    hp::FVec Y = hp::mul(M, X);
    Vec out(x.size());
    for (std::size_t i = 0; i < Y.size(); ++i) {
        hp::mod1(Y[i], bits);
        out[static_cast<Eigen::Index>(i)] = hp::from_fixed(Y[i], bits);
        if (out[static_cast<Eigen::Index>(i)] >= 1.0) out[static_cast<Eigen::Index>(i)] = 0.0;
    }
    return out;
}

inline Vec apply(const ActionSpec& spec, const IntVec& n, const Vec& x)
{
    if (x.size() != spec.m) throw Error(ErrorKind::InvalidInput, "point dimension does not match m");
    return apply_matrix(action_matrix(spec, n), x);
}

/// Caches alpha^d for the displacements d that occur in a window.
class ActionCache {
public:
    explicit ActionCache(const ActionSpec& spec) : spec_(&spec) {}

    const BigMatrix& operator()(const IntVec& d)
    {
        auto it = cache_.find(d);
        if (it == cache_.end()) it = cache_.emplace(d, action_matrix(*spec_, d)).first;
        return it->second;
    }

private:
    const ActionSpec* spec_;
    std::map<IntVec, BigMatrix> cache_;
};

struct PseudoOrbit {
    LatticeWindow window;
    std::vector<Vec> points; // aligned with window.points
    double delta = 0.0;      // claimed bound, never trusted

    const Vec& at(const IntVec& n) const
    {
        auto p = window.find(n);
        if (!p) throw Error(ErrorKind::MissingLatticePoint, "lattice point not in the window");
        return points[static_cast<std::size_t>(*p)];
    }
};

/// max over points n and axes i of d(x_{n_{i+}}, alpha^{n_{i+} - n} x_n).
/// The n_{i-} terms of the defect are the same edges read backwards.
inline double verify_pseudo_orbit(const ActionSpec& spec, const PseudoOrbit& orbit)
{
    ActionCache cache(spec);
    double worst = 0.0;
    const auto& w = orbit.window;
    for (std::size_t p = 0; p < w.size(); ++p)
        for (int i = 0; i < spec.k; ++i) {
            int q = w.plus[p][static_cast<std::size_t>(i)];
            if (q == static_cast<int>(p)) continue;
            IntVec d = sub(w.points[static_cast<std::size_t>(q)], w.points[p]);
            Vec img = apply_matrix(cache(d), orbit.points[p]);
            worst = std::max(worst, torus_dist(orbit.points[static_cast<std::size_t>(q)], img));
        }
    return worst;
}

namespace detail {

struct TreeEdge {
    int parent;
    int child;
};

// Breadth-first spanning tree of the window's neighbor graph.
inline std::vector<TreeEdge> spanning_tree(const LatticeWindow& w, int root, int k)
{
    std::vector<TreeEdge> order;
    std::vector<bool> seen(w.size(), false);
    std::queue<int> q;
    q.push(root);
    seen[static_cast<std::size_t>(root)] = true;
    while (!q.empty()) {
        int p = q.front();
        q.pop();
        for (int i = 0; i < k; ++i)
            for (int nb : {w.plus[static_cast<std::size_t>(p)][static_cast<std::size_t>(i)],
                           w.minus[static_cast<std::size_t>(p)][static_cast<std::size_t>(i)]}) {
                if (seen[static_cast<std::size_t>(nb)]) continue;
                seen[static_cast<std::size_t>(nb)] = true;
                order.push_back({p, nb});
                q.push(nb);
            }
    }
    if (order.size() + 1 != w.size())
        throw Error(ErrorKind::DisconnectedWindow, "window neighbor graph is not connected");
    return order;
}

inline bool forward(const IntVec& d)
{
    for (long long x : d)
        if (x != 0) return x > 0;
    return true;
}

} // namespace detail

/// Walk a spanning tree of the window from the point nearest the origin
/// (which receives x0), each new point being the image of its tree parent
/// moved by a uniform perturbation in [-delta, delta]^m. Tree edges have
/// defect <= delta; edges closing cycles are only measured.
inline PseudoOrbit perturbed_pseudo_orbit(const ActionSpec& spec, const LatticeWindow& window, const Vec& x0,
                                          double delta, std::uint64_t seed)
{
    if (!(delta >= 0.0) || delta >= 0.25) throw Error(ErrorKind::DefectTooLarge, "delta must lie in [0, 0.25)");
    if (x0.size() != spec.m) throw Error(ErrorKind::InvalidInput, "seed point dimension does not match m");
    PseudoOrbit orbit;
    orbit.window = window;
    orbit.delta = delta;
    orbit.points.assign(window.size(), Vec());
    if (window.empty()) return orbit;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    ActionCache cache(spec);
    int root = window.nearest_origin();
    orbit.points[static_cast<std::size_t>(root)] = wrap01(x0);
    for (const auto& [parent, child] : detail::spanning_tree(window, root, spec.k)) {
        IntVec d = sub(window.points[static_cast<std::size_t>(child)], window.points[static_cast<std::size_t>(parent)]);
        Vec eta(spec.m);
        for (int j = 0; j < spec.m; ++j) eta[j] = delta * U(rng);
        const Vec& xp = orbit.points[static_cast<std::size_t>(parent)];
        if (detail::forward(d)) {
            orbit.points[static_cast<std::size_t>(child)] = wrap01(apply_matrix(cache(d), xp) + eta);
        } else {
            // x_child = alpha^d (x_parent - eta), so the forward edge has defect |eta|
            orbit.points[static_cast<std::size_t>(child)] = apply_matrix(cache(d), wrap01(xp - eta));
        }
    }
    return orbit;
}

/// x_n = alpha^n x0 + eta_n with |eta_n| <= delta / (1 + max_e ||alpha^e||),
/// e ranging over the window's neighbor displacements, so every edge of the
/// window, tree or not, has defect <= delta.
inline PseudoOrbit noisy_orbit(const ActionSpec& spec, const LatticeWindow& window, const Vec& x0, double delta,
                               std::uint64_t seed)
{
    if (!(delta >= 0.0) || delta >= 0.25) throw Error(ErrorKind::DefectTooLarge, "delta must lie in [0, 0.25)");
    PseudoOrbit orbit;
    orbit.window = window;
    orbit.delta = delta;
    orbit.points.assign(window.size(), Vec());
    if (window.empty()) return orbit;
    ActionCache cache(spec);
    double norm = 0.0;
    for (std::size_t p = 0; p < window.size(); ++p)
        for (int i = 0; i < spec.k; ++i) {
            int q = window.plus[p][static_cast<std::size_t>(i)];
            if (q != static_cast<int>(p))
                norm = std::max(norm, cache(sub(window.points[static_cast<std::size_t>(q)], window.points[p])).inf_norm());
        }
    const double amp = delta / (1.0 + norm);
    // exact orbit first: x0 is dyadic and integer matrices keep its denominator
    int root = window.nearest_origin();
    Vec base = wrap01(x0);
    long lowest = 0;
    for (Eigen::Index i = 0; i < base.size(); ++i)
        if (base[i] != 0.0) {
            int e = 0;
            std::frexp(base[i], &e);
            lowest = std::min(lowest, static_cast<long>(e) - 53);
        }
    const long bits = -lowest;
    std::vector<hp::FVec> exact(window.size());
    exact[static_cast<std::size_t>(root)] = hp::to_fixed(base, bits);
    for (const auto& [parent, child] : detail::spanning_tree(window, root, spec.k)) {
        IntVec d = sub(window.points[static_cast<std::size_t>(child)], window.points[static_cast<std::size_t>(parent)]);
        hp::FVec y = hp::mul(cache(d), exact[static_cast<std::size_t>(parent)]);
        for (auto& c : y) hp::mod1(c, bits);
        exact[static_cast<std::size_t>(child)] = std::move(y);
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (std::size_t p = 0; p < window.size(); ++p) {
        Vec eta(spec.m);
        for (int j = 0; j < spec.m; ++j) eta[j] = amp * U(rng);
        orbit.points[p] = wrap01(hp::from_fixed(exact[p], bits) + eta);
    }
    return orbit;
}

} // namespace subdyn

#endif
