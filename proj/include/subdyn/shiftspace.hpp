#ifndef SUBDYN_SHIFTSPACE_HPP
#define SUBDYN_SHIFTSPACE_HPP

// Z^k full shift on a finite alphabet, finite windows with explicit tails,
// the x*(i) = x_i(0) shadowing point and the Ledrappier three-dot subshift.
// Distances use the Euclidean norm |i| in the weights 2^-|i|.

#include "error.hpp"
#include "geometry.hpp"
#include "linalg.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <vector>

namespace subdyn {

/// Symbols on the box [-W, W]^k, stored lexicographically.
struct Configuration {
    int k = 2;
    int W = 0;
    int alphabet = 2;
    std::vector<int> cells;

    Configuration() = default;
    Configuration(int k_, int W_, int alphabet_) : k(k_), W(W_), alphabet(alphabet_)
    {
        std::size_t n = 1;
        for (int d = 0; d < k; ++d) n *= static_cast<std::size_t>(2 * W + 1);
        cells.assign(n, 0);
    }

    std::size_t size() const { return cells.size(); }

    bool contains(const IntVec& i) const
    {
        for (long long x : i)
            if (x < -W || x > W) return false;
        return true;
    }

    std::size_t index(const IntVec& i) const
    {
        std::size_t idx = 0;
        for (int d = 0; d < k; ++d) idx = idx * static_cast<std::size_t>(2 * W + 1) + static_cast<std::size_t>(i[static_cast<std::size_t>(d)] + W);
        return idx;
    }

    IntVec point(std::size_t idx) const
    {
        IntVec i(static_cast<std::size_t>(k));
        for (int d = k - 1; d >= 0; --d) {
            i[static_cast<std::size_t>(d)] = static_cast<long long>(idx % static_cast<std::size_t>(2 * W + 1)) - W;
            idx /= static_cast<std::size_t>(2 * W + 1);
        }
        return i;
    }

    int at(const IntVec& i) const
    {
        if (!contains(i)) throw Error(ErrorKind::WindowExhausted, "cell outside the configuration window");
        return cells[index(i)];
    }
    int& at(const IntVec& i)
    {
        if (!contains(i)) throw Error(ErrorKind::WindowExhausted, "cell outside the configuration window");
        return cells[index(i)];
    }

    friend bool operator==(const Configuration& a, const Configuration& b)
    {
        return a.k == b.k && a.W == b.W && a.alphabet == b.alphabet && a.cells == b.cells;
    }
};

inline double cell_norm(const IntVec& i) { return to_real(i).norm(); }

inline double cell_weight(const IntVec& i) { return std::exp2(-cell_norm(i)); }

namespace detail {

// Number of lattice points on the sup-sphere of radius s in Z^k.
inline double sup_sphere_count(int k, long long s)
{
    if (s == 0) return 1;
    return std::pow(2.0 * static_cast<double>(s) + 1, k) - std::pow(2.0 * static_cast<double>(s) - 1, k);
}

// Bound on the sum of 2^-|i| over |i|_inf > R, using |i| >= |i|_inf.
inline double far_tail(int k, long long R)
{
    double sum = 0;
    for (long long s = R + 1;; ++s) {
        double t = sup_sphere_count(k, s) * std::exp2(-static_cast<double>(s));
        sum += t;
        if (t < 1e-300 || (s > R + 64 && t < sum * 1e-18)) break;
    }
    return sum;
}

template <class F>
void for_box(int k, long long R, F&& f)
{
    IntVec i(static_cast<std::size_t>(k), -R);
    if (k == 0) return;
    while (true) {
        f(static_cast<const IntVec&>(i));
        int d = k - 1;
        while (d >= 0 && i[static_cast<std::size_t>(d)] == R) i[static_cast<std::size_t>(d--)] = -R;
        if (d < 0) return;
        ++i[static_cast<std::size_t>(d)];
    }
}

// 2^-|i| for the cells of [-W, W]^k in storage order.
inline const std::vector<double>& weight_table(int k, int W)
{
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::vector<double>> memo;
    std::lock_guard<std::mutex> lock(mu);
    auto it = memo.find({k, W});
    if (it == memo.end()) {
        std::vector<double> w;
        for_box(k, W, [&](const IntVec& i) { w.push_back(cell_weight(i)); });
        it = memo.emplace(std::make_pair(k, W), std::move(w)).first;
    }
    return it->second;
}

inline long long exact_margin(int k) { return k <= 2 ? 48 : (k == 3 ? 24 : 12); }

} // namespace detail

/// Upper bound on sum_{|i|_inf > W} 2^-|i|: exact over a margin shell, then
/// the sup-sphere series.
inline double tail_box(int k, long long W)
{
    static std::mutex mu;
    static std::map<std::pair<int, long long>, double> memo;
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = memo.find({k, W}); it != memo.end()) return it->second;
    const long long R = W + detail::exact_margin(k);
    double sum = 0;
    detail::for_box(k, R, [&](const IntVec& i) {
        if (max_abs(i) > W) sum += cell_weight(i);
    });
    return memo[{k, W}] = sum + detail::far_tail(k, R);
}

/// Upper bound on sum_{|i| > r} 2^-|i|.
inline double tail_ball(int k, double r)
{
    const long long R = static_cast<long long>(std::ceil(std::max(r, 0.0))) + detail::exact_margin(k);
    double sum = 0;
    detail::for_box(k, R, [&](const IntVec& i) {
        if (cell_norm(i) > r) sum += cell_weight(i);
    });
    return sum + detail::far_tail(k, R);
}

/// d(x, y) <= delta forces agreement on |i| < log2(1/delta); the shadowing
/// argument keeps a margin of 2 sqrt(k).
inline double agreement_radius(int k, double delta) { return std::log2(1.0 / delta) - 2.0 * std::sqrt(static_cast<double>(k)); }

inline double shadow_epsilon(int k, double delta) { return tail_ball(k, agreement_radius(k, delta)); }

struct MetricValue {
    double on_window = 0; // exact sum over the common window
    double tail = 0;      // bound on the part outside it
    double upper() const { return on_window + tail; }
};

inline MetricValue metric_d(const Configuration& x, const Configuration& y)
{
    if (x.k != y.k || x.W != y.W || x.alphabet != y.alphabet)
        throw Error(ErrorKind::WindowMismatch, "configurations have different windows");
    MetricValue d;
    const auto& wt = detail::weight_table(x.k, x.W);
    for (std::size_t c = 0; c < x.size(); ++c)
        if (x.cells[c] != y.cells[c]) d.on_window += wt[c];
    d.tail = tail_box(x.k, x.W);
    return d;
}

inline Configuration restrict_to(const Configuration& x, int W)
{
    if (W > x.W || W < 0) throw Error(ErrorKind::WindowExhausted, "cannot enlarge a configuration window");
    Configuration r(x.k, W, x.alphabet);
    std::size_t c = 0;
    detail::for_box(x.k, W, [&](const IntVec& i) { r.cells[c++] = x.cells[x.index(i)]; });
    return r;
}

/// (alpha^n x)(i) = x(n + i) on the window of radius W - |n|_inf.
inline Configuration shift_apply(const IntVec& n, const Configuration& x)
{
    if (static_cast<int>(n.size()) != x.k) throw Error(ErrorKind::InvalidInput, "shift vector dimension does not match k");
    long long r = x.W - max_abs(n);
    if (r < 0) throw Error(ErrorKind::WindowExhausted, "shift leaves the configuration window");
    Configuration out(x.k, static_cast<int>(r), x.alphabet);
    std::size_t c = 0;
    IntVec j(n.size());
    detail::for_box(x.k, r, [&](const IntVec& i) {
        for (std::size_t d = 0; d < n.size(); ++d) j[d] = n[d] + i[d];
        out.cells[c++] = x.cells[x.index(j)];
    });
    return out;
}

inline Configuration random_configuration(int k, int W, int alphabet, std::uint64_t seed)
{
    Configuration x(k, W, alphabet);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> U(0, alphabet - 1);
    for (auto& s : x.cells) s = U(rng);
    return x;
}

struct SymbolicPseudoOrbit {
    LatticeWindow window;
    std::vector<Configuration> configs; // aligned with window.points
    double delta = 0;

    const Configuration& at(const IntVec& n) const
    {
        auto p = window.find(n);
        if (!p) throw Error(ErrorKind::MissingLatticePoint, "lattice point not in the window");
        return configs[static_cast<std::size_t>(*p)];
    }
};

/// max over window edges of d(x_{n + e}, alpha^e x_n), compared on the
/// common radius; the tail of that radius is included.
inline MetricValue symbolic_defect(const SymbolicPseudoOrbit& o)
{
    MetricValue worst;
    const auto& w = o.window;
    for (std::size_t p = 0; p < w.size(); ++p)
        for (std::size_t i = 0; i < w.plus[p].size(); ++i) {
            auto q = static_cast<std::size_t>(w.plus[p][i]);
            if (q == p) continue;
            IntVec e = sub(w.points[q], w.points[p]);
            Configuration shifted = shift_apply(e, o.configs[p]);
            Configuration next = restrict_to(o.configs[q], shifted.W);
            MetricValue d = metric_d(next, shifted);
            if (d.upper() > worst.upper()) worst = d;
        }
    return worst;
}

/// Largest R with [-R, R]^k inside the window.
inline long long inner_box_radius(const LatticeWindow& w, int k)
{
    long long R = -1;
    while (true) {
        bool all = true;
        detail::for_box(k, R + 1, [&](const IntVec& i) {
            if (all && max_abs(i) == R + 1 && !w.find(i)) all = false;
        });
        if (!all) return R;
        ++R;
    }
}

/// x*(i) = x_i(0) over the largest box around the origin in the window.
inline Configuration shadow_shift(const SymbolicPseudoOrbit& o)
{
    if (o.configs.empty()) throw Error(ErrorKind::MissingLatticePoint, "empty pseudo-orbit");
    const int k = o.configs.front().k;
    long long R = inner_box_radius(o.window, k);
    if (R < 0) throw Error(ErrorKind::MissingLatticePoint, "window does not contain the origin");
    Configuration x(k, static_cast<int>(R), o.configs.front().alphabet);
    IntVec zero(static_cast<std::size_t>(k), 0);
    for (std::size_t c = 0; c < x.size(); ++c) x.cells[c] = o.at(x.point(c)).at(zero);
    return x;
}

struct ShiftShadowCheck {
    double radius = 0;      // agreement radius r(delta)
    double epsilon = 0;     // tail_ball(r)
    double max_error = 0;   // sup_n of the checkable part of d(x_n, alpha^n x*)
    double max_unknown = 0; // sup_n weight of cells x* does not cover, plus the tail
    int disagreements_inside = 0; // cells with |i| <= r where symbols differ
};

/// Brute-force comparison of x_n with alpha^n x* for every n in the window.
inline ShiftShadowCheck verify_shift_shadow(const SymbolicPseudoOrbit& o, const Configuration& xs, double delta)
{
    ShiftShadowCheck c;
    const int k = xs.k;
    c.radius = agreement_radius(k, delta);
    c.epsilon = tail_ball(k, c.radius);
    for (std::size_t p = 0; p < o.window.size(); ++p) {
        const IntVec& n = o.window.points[p];
        const Configuration& x = o.configs[p];
        const auto& wt = detail::weight_table(k, x.W);
        double err = 0, unknown = tail_box(k, x.W);
        std::size_t q = 0;
        IntVec j(n.size());
        detail::for_box(k, x.W, [&](const IntVec& i) {
            for (std::size_t d = 0; d < n.size(); ++d) j[d] = n[d] + i[d];
            const std::size_t cell = q++;
            if (!xs.contains(j)) {
                unknown += wt[cell];
                return;
            }
            if (x.cells[cell] != xs.cells[xs.index(j)]) {
                err += wt[cell];
                if (cell_norm(i) <= c.radius) ++c.disagreements_inside;
            }
        });
        c.max_error = std::max(c.max_error, err);
        c.max_unknown = std::max(c.max_unknown, unknown);
    }
    return c;
}

// ---- Ledrappier three-dot subshift: x(i,j) + x(i+1,j) + x(i,j+1) = 0 mod 2

namespace detail {

inline void require_ledrappier(const Configuration& x)
{
    if (x.k != 2 || x.alphabet != 2) throw Error(ErrorKind::InvalidInput, "three-dot relation needs k = 2 and alphabet {0, 1}");
}

} // namespace detail

inline bool ledrappier_validate(const Configuration& x)
{
    detail::require_ledrappier(x);
    const auto side = static_cast<std::size_t>(2 * x.W + 1);
    for (std::size_t i = 0; i + 1 < side; ++i)
        for (std::size_t j = 0; j + 1 < side; ++j)
            if ((x.cells[i * side + j] + x.cells[(i + 1) * side + j] + x.cells[i * side + j + 1]) % 2 != 0) return false;
    return true;
}

/// Fill the window row by row upward from its bottom row and right column,
/// x(i, j+1) = x(i, j) + x(i+1, j). With `strict`, any other cell of the
/// input that disagrees with the completion raises Inconsistent.
inline Configuration ledrappier_complete(const Configuration& boundary, bool strict = false)
{
    detail::require_ledrappier(boundary);
    Configuration x = boundary;
    const long long W = x.W;
    const auto side = static_cast<std::size_t>(2 * W + 1);
    // storage index of (i, j) is (i + W) * side + (j + W)
    for (std::size_t j = 0; j + 1 < side; ++j)
        for (std::size_t i = 0; i + 1 < side; ++i)
            x.cells[i * side + j + 1] = x.cells[i * side + j] ^ x.cells[(i + 1) * side + j];
    if (strict && !(x == boundary))
        throw Error(ErrorKind::Inconsistent, "configuration does not satisfy the three-dot relation off its boundary");
    return x;
}

/// Uniform bottom row and right column, completed.
inline Configuration ledrappier_random(std::uint64_t seed, int W)
{
    Configuration x(2, W, 2);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> bit(0, 1);
    for (long long i = -W; i <= W; ++i) x.at({i, -W}) = bit(rng);
    for (long long j = -W + 1; j <= W; ++j) x.at({W, j}) = bit(rng);
    return ledrappier_complete(x);
}

/// Pseudo-orbit x_n = alpha^n z + c_n on the window, radius W per point.
/// The noise c_n lives on |i| >= min_radius. Full shift: `flips` random
/// cells change symbol (every such cell with probability 1/2 if flips < 0).
/// Ledrappier: c_n is itself valid, seeded on the bottom row at
/// i <= -min_radius (seeds only spread left), so every x_n stays in the
/// subshift.
inline SymbolicPseudoOrbit noisy_shift_orbit(const Configuration& z, const LatticeWindow& window, int W, double min_radius,
                                             std::uint64_t seed, bool ledrappier = false, int flips = -1)
{
    SymbolicPseudoOrbit o;
    o.window = window;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> bit(0, 1), sym(1, std::max(1, z.alphabet - 1));
    const auto& wt = detail::weight_table(z.k, W);
    const double wmax = std::exp2(-min_radius);
    std::vector<std::size_t> far;
    for (std::size_t c = 0; c < wt.size(); ++c)
        if (wt[c] <= wmax) far.push_back(c);
    for (const auto& n : window.points) {
        if (max_abs(n) + W > z.W) throw Error(ErrorKind::WindowExhausted, "base configuration too small for the window");
        Configuration x = restrict_to(shift_apply(n, z), W);
        if (ledrappier) {
            detail::require_ledrappier(x);
            Configuration noise(2, W, 2);
            for (long long i = -W; i <= W; ++i)
                if (static_cast<double>(-i) >= min_radius) noise.at({i, -W}) = bit(rng);
            noise = ledrappier_complete(noise);
            for (std::size_t c = 0; c < x.size(); ++c) x.cells[c] ^= noise.cells[c];
        } else if (flips < 0) {
            for (std::size_t c : far)
                if (bit(rng)) x.cells[c] = (x.cells[c] + sym(rng)) % z.alphabet;
        } else if (!far.empty()) {
            std::uniform_int_distribution<std::size_t> pick(0, far.size() - 1);
            for (int f = 0; f < flips; ++f) {
                std::size_t c = far[pick(rng)];
                x.cells[c] = (x.cells[c] + sym(rng)) % z.alphabet;
            }
        }
        o.configs.push_back(std::move(x));
    }
    o.delta = symbolic_defect(o).upper();
    return o;
}

} // namespace subdyn

#endif
