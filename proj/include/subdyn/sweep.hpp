#ifndef SUBDYN_SWEEP_HPP
#define SUBDYN_SWEEP_HPP

// Classification of every line through the origin of R^2 by an angle sweep:
// bucket centers are classified directly, and each sign change of some
// chi_j between neighboring centers is bisected down to a singular line.

#include "error.hpp"
#include "parallel.hpp"
#include "spectrum.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace subdyn {

struct SingularLine {
    double angle = 0; // in [0, pi)
    DirectionTag tag = DirectionTag::FirstTypeSingular;
    std::vector<int> blocks; // chi_j vanishing there
    int bucket = 0;
};

struct AngleSweep {
    int buckets = 0;
    std::vector<DirectionTag> center_tags;
    int regular = 0, first_type = 0, second_type = 0; // bucket-center counts
    std::vector<int> everywhere_singular;
    std::vector<SingularLine> lines;
};

inline Vec angle_vector(double th) { return Vec{{std::cos(th), std::sin(th)}}; }

inline AngleSweep angle_sweep(const LyapunovSpectrum& sp, int buckets = 3600, double tol = 1e-12, int threads = 1)
{
    if (sp.k != 2) throw Error(ErrorKind::InvalidInput, "angle sweep needs k = 2");
    if (buckets < 2) throw Error(ErrorKind::InvalidInput, "need at least two buckets");
    const double pi = std::numbers::pi;
    const double scale = std::max(1.0, sp.max_abs_lambda());
    AngleSweep out;
    out.buckets = buckets;
    auto center = [&](int b) { return (b + 0.5) * pi / buckets; };
    out.center_tags.resize(static_cast<std::size_t>(buckets));
    parallel_for(static_cast<std::size_t>(buckets), threads, [&](std::size_t b) {
        out.center_tags[b] = classify_direction(sp, angle_vector(center(static_cast<int>(b)))).tag;
    });
    for (auto t : out.center_tags) {
        if (t == DirectionTag::Regular) ++out.regular;
        else if (t == DirectionTag::FirstTypeSingular) ++out.first_type;
        else ++out.second_type;
    }

    auto f = [&](int j, double th) {
        return sp.lambda(0, j) * std::cos(th) + sp.lambda(1, j) * std::sin(th);
    };
    std::vector<double> roots;
    for (int j = 0; j < sp.s(); ++j) {
        if (std::hypot(sp.lambda(0, j), sp.lambda(1, j)) <= 1e-9 * scale) {
            out.everywhere_singular.push_back(j);
            continue;
        }
        for (int b = 0; b < buckets; ++b) {
            double lo = center(b), hi = lo + pi / buckets;
            double flo = f(j, lo), fhi = f(j, hi); // hi wraps to center(0) + pi
            if (flo == 0.0) {
                roots.push_back(lo);
                continue;
            }
            if ((flo > 0) == (fhi > 0) || fhi == 0.0) continue;
            while (hi - lo > tol) {
                double mid = 0.5 * (lo + hi), fm = f(j, mid);
                if ((fm > 0) == (flo > 0)) lo = mid, flo = fm;
                else hi = mid;
            }
            double r = 0.5 * (lo + hi);
            roots.push_back(r >= pi ? r - pi : r);
        }
    }
    std::sort(roots.begin(), roots.end());
    std::vector<double> merged;
    for (double r : roots)
        if (merged.empty() || r - merged.back() > 1e-9) merged.push_back(r);
    if (merged.size() > 1 && merged.front() + pi - merged.back() <= 1e-9) merged.pop_back();
    for (double r : merged) {
        SingularLine line;
        line.angle = r;
        DirectionClass dc = classify_direction(sp, angle_vector(r));
        line.tag = dc.tag;
        for (std::size_t j = 0; j < dc.sign.size(); ++j)
            if (dc.sign[j] == 0) line.blocks.push_back(static_cast<int>(j));
        line.bucket = std::min(buckets - 1, static_cast<int>(std::floor(r / pi * buckets)));
        out.lines.push_back(line);
    }
    return out;
}

} // namespace subdyn

#endif
