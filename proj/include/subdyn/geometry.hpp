#ifndef SUBDYN_GEOMETRY_HPP
#define SUBDYN_GEOMETRY_HPP

// Lines through the origin of R^k, their tubes, and the lattice points those
// tubes contain together with the axis-neighbor structure used by
// pseudo-orbits.

#include "error.hpp"
#include "linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace subdyn {

/// A one-dimensional subspace of R^k. Rationality is declared by the caller,
/// never inferred from floating point data.
class Direction {
public:
    /// Rational direction spanned by an integer vector (reduced by its gcd).
    static Direction rational(const IntVec& n)
    {
        if (n.empty() || gcd_all(n) == 0) throw Error(ErrorKind::ZeroVector, "direction generator is zero");
        Direction d;
        d.generator_ = to_real(n);
        d.integer_ = reduce(n);
        return d;
    }

    /// Rational direction given by a real generator plus its integer data;
    /// the two must be parallel.
    static Direction rational(const Vec& generator, const IntVec& integer_generator)
    {
        Direction d = rational(integer_generator);
        if (generator.size() != static_cast<Eigen::Index>(integer_generator.size()))
            throw Error(ErrorKind::InvalidInput, "generator dimension mismatch");
        if (generator.norm() == 0) throw Error(ErrorKind::ZeroVector, "direction generator is zero");
        Vec a = generator.normalized();
        Vec b = to_real(*d.integer_).normalized();
        if (std::min((a - b).norm(), (a + b).norm()) > 1e-12)
            throw Error(ErrorKind::InvalidInput, "integer generator is not parallel to the real generator");
        d.generator_ = generator;
        return d;
    }

    static Direction irrational(const Vec& generator)
    {
        if (generator.size() == 0 || generator.norm() == 0)
            throw Error(ErrorKind::ZeroVector, "direction generator is zero");
        Direction d;
        d.generator_ = generator;
        return d;
    }

    int dim() const { return static_cast<int>(generator_.size()); }
    const Vec& generator() const { return generator_; }
    Vec unit() const { return generator_.normalized(); }
    bool is_rational() const { return integer_.has_value(); }
    const std::optional<IntVec>& integer_generator() const { return integer_; }

private:
    static IntVec reduce(IntVec n)
    {
        long long g = gcd_all(n);
        for (auto& x : n) x /= g;
        return n;
    }

    Vec generator_;
    std::optional<IntVec> integer_;
};

/// Smallest nonzero lattice vector on the line, sign-normalized so that its
/// first nonzero entry is positive. Irrational lines carry none.
inline std::optional<IntVec> smallest_integer_generator(const Direction& d)
{
    if (!d.is_rational()) return std::nullopt;
    IntVec n = *d.integer_generator();
    auto first = std::find_if(n.begin(), n.end(), [](long long x) { return x != 0; });
    if (first != n.end() && *first < 0)
        for (auto& x : n) x = -x;
    return n;
}

/// Orthogonal decomposition v = pi_V(v) + pi_{V-perp}(v).
inline std::pair<Vec, Vec> project(const Vec& v, const Direction& d)
{
    Vec u = d.unit();
    Vec along = v.dot(u) * u;
    return {along, v - along};
}

struct Tube {
    Direction direction;
    double thickness = 0.0;
    double extent = 1.0;
};

/// Lattice points of a tube, ordered by their coordinate along the line,
/// with the nearest axis neighbors n_{i+} and n_{i-} of each point
/// (a point with no neighbor on that side is its own neighbor).
struct LatticeWindow {
    std::vector<IntVec> points;
    std::vector<double> line_coordinate;
    std::vector<std::vector<int>> plus;  // plus[p][i]  = index of n_{i+}
    std::vector<std::vector<int>> minus; // minus[p][i] = index of n_{i-}
    std::map<IntVec, int> index;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }

    std::optional<int> find(const IntVec& n) const
    {
        auto it = index.find(n);
        if (it == index.end()) return std::nullopt;
        return it->second;
    }

    /// Index of the point closest to the origin (smallest Euclidean norm,
    /// ties by order).
    int nearest_origin() const
    {
        int best = 0;
        double bn = std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p < points.size(); ++p) {
            double nn = to_real(points[p]).squaredNorm();
            if (nn < bn) {
                bn = nn;
                best = static_cast<int>(p);
            }
        }
        return best;
    }
};

namespace detail {

struct TubeTest {
    Direction dir;
    double t;
    double r;

    // Exact for rational directions: compare |n|^2|g|^2 - (n.g)^2 with t^2|g|^2.
    bool contains(const IntVec& n) const
    {
        if (dir.is_rational()) {
            const IntVec& g = *dir.integer_generator();
            __int128 gg = 0, ng = 0, nn = 0;
            for (std::size_t i = 0; i < n.size(); ++i) {
                gg += static_cast<__int128>(g[i]) * g[i];
                ng += static_cast<__int128>(n[i]) * g[i];
                nn += static_cast<__int128>(n[i]) * n[i];
            }
            __int128 perp = nn * gg - ng * ng;
            long double gl = static_cast<long double>(gg);
            long double tl = static_cast<long double>(t);
            long double rl = static_cast<long double>(r);
            return static_cast<long double>(perp) <= tl * tl * gl &&
                   static_cast<long double>(ng * ng) <= rl * rl * gl;
        }
        Vec v = to_real(n);
        Vec u = dir.unit();
        double s = v.dot(u);
        double perp2 = std::max(0.0, v.squaredNorm() - s * s);
        return std::fabs(s) <= r && perp2 <= t * t;
    }
};

inline void fill_neighbors(LatticeWindow& w, int k)
{
    const auto n = w.points.size();
    w.plus.assign(n, std::vector<int>(static_cast<std::size_t>(k)));
    w.minus.assign(n, std::vector<int>(static_cast<std::size_t>(k)));
    // Group points by the line parallel to axis i they lie on.
    for (int i = 0; i < k; ++i) {
        std::map<IntVec, std::vector<std::pair<long long, int>>> fibers;
        for (std::size_t p = 0; p < n; ++p) {
            IntVec key = w.points[p];
            long long c = key[static_cast<std::size_t>(i)];
            key[static_cast<std::size_t>(i)] = 0;
            fibers[key].push_back({c, static_cast<int>(p)});
        }
        for (auto& [key, fiber] : fibers) {
            std::sort(fiber.begin(), fiber.end());
            for (std::size_t q = 0; q < fiber.size(); ++q) {
                int self = fiber[q].second;
                w.plus[static_cast<std::size_t>(self)][static_cast<std::size_t>(i)] =
                    q + 1 < fiber.size() ? fiber[q + 1].second : self;
                w.minus[static_cast<std::size_t>(self)][static_cast<std::size_t>(i)] =
                    q > 0 ? fiber[q - 1].second : self;
            }
        }
    }
}

} // namespace detail

/// Build a window from an explicit point set (used for boxes and for
/// windows read from files). Points are ordered by their coordinate along
/// `d`, ties broken lexicographically.
inline LatticeWindow make_window(std::vector<IntVec> pts, const Direction& d)
{
    LatticeWindow w;
    Vec u = d.unit();
    std::vector<std::pair<double, IntVec>> keyed;
    keyed.reserve(pts.size());
    for (auto& p : pts) keyed.push_back({to_real(p).dot(u), std::move(p)});
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;
    });
    for (auto& [s, p] : keyed) {
        w.index[p] = static_cast<int>(w.points.size());
        w.line_coordinate.push_back(s);
        w.points.push_back(std::move(p));
    }
    detail::fill_neighbors(w, d.dim());
    return w;
}

/// All integer points n with |pi_{V-perp}(n)| <= t and |pi_V(n)| <= R.
inline LatticeWindow tube_lattice_points(const Direction& d, double t, double R)
{
    if (!(t >= 0.0) || !(R > 0.0)) throw Error(ErrorKind::InvalidInput, "tube needs t >= 0 and R > 0");
    const int k = d.dim();
    detail::TubeTest test{d, t, R};
    Vec u = d.unit();
    // Sweep the coordinate where the line moves fastest; in every slice the
    // remaining coordinates live in a short interval around the line.
    int lead = 0;
    for (int i = 1; i < k; ++i)
        if (std::fabs(u[i]) > std::fabs(u[lead])) lead = i;
    const double ul = u[lead];
    const long long lead_max = static_cast<long long>(std::floor(R * std::fabs(ul) + t)) + 1;

    std::vector<IntVec> pts;
    IntVec n(static_cast<std::size_t>(k));
    std::vector<long long> lo(static_cast<std::size_t>(k)), hi(static_cast<std::size_t>(k));
    for (long long c = -lead_max; c <= lead_max; ++c) {
        double s0 = (static_cast<double>(c) - t) / ul;
        double s1 = (static_cast<double>(c) + t) / ul;
        if (s0 > s1) std::swap(s0, s1);
        for (int j = 0; j < k; ++j) {
            if (j == lead) {
                lo[static_cast<std::size_t>(j)] = hi[static_cast<std::size_t>(j)] = c;
                continue;
            }
            double a = s0 * u[j], b = s1 * u[j];
            lo[static_cast<std::size_t>(j)] = static_cast<long long>(std::floor(std::min(a, b) - t)) - 1;
            hi[static_cast<std::size_t>(j)] = static_cast<long long>(std::ceil(std::max(a, b) + t)) + 1;
        }
        n = lo;
        while (true) {
            if (test.contains(n)) pts.push_back(n);
            int j = 0;
            while (j < k) {
                auto sj = static_cast<std::size_t>(j);
                if (n[sj] < hi[sj]) {
                    ++n[sj];
                    break;
                }
                n[sj] = lo[sj];
                ++j;
            }
            if (j == k) break;
        }
    }
    return make_window(std::move(pts), d);
}

/// Box [-r, r]^k as a window; ordered along `d`.
inline LatticeWindow box_window(int k, long long r, const Direction& d)
{
    std::vector<IntVec> pts;
    IntVec n(static_cast<std::size_t>(k), -r);
    while (true) {
        pts.push_back(n);
        int j = 0;
        while (j < k) {
            auto sj = static_cast<std::size_t>(j);
            if (n[sj] < r) {
                ++n[sj];
                break;
            }
            n[sj] = -r;
            ++j;
        }
        if (j == k) break;
    }
    return make_window(std::move(pts), d);
}

} // namespace subdyn

#endif
