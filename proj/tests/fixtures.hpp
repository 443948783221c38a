#ifndef SUBDYN_TEST_FIXTURES_HPP
#define SUBDYN_TEST_FIXTURES_HPP

#include <subdyn/spectrum.hpp>

#include <cmath>

namespace fixtures {

inline subdyn::IntMatrix mat(std::initializer_list<std::initializer_list<long long>> rows)
{
    subdyn::IntMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index r = 0;
    for (const auto& row : rows) {
        Eigen::Index c = 0;
        for (long long x : row) m(r, c++) = x;
        ++r;
    }
    return m;
}

// Cat map and its inverse on the 2-torus.
inline subdyn::ActionSpec example33()
{
    return subdyn::make_action({mat({{2, 1}, {1, 1}}), mat({{1, -1}, {-1, 2}})});
}

// Same pair acting on the last two coordinates of the 3-torus.
inline subdyn::ActionSpec example34()
{
    return subdyn::make_action({mat({{1, 0, 0}, {0, 2, 1}, {0, 1, 1}}), mat({{1, 0, 0}, {0, 1, -1}, {0, -1, 2}})});
}

// A1 (x) I and I (x) A2 on the 4-torus, A1 = [[1,1],[2,1]], A2 = [[2,1],[3,2]].
inline subdyn::ActionSpec example35()
{
    return subdyn::make_action({mat({{1, 1, 0, 0}, {2, 1, 0, 0}, {0, 0, 1, 1}, {0, 0, 2, 1}}),
                                mat({{2, 0, 1, 0}, {0, 2, 0, 1}, {3, 0, 2, 0}, {0, 3, 0, 2}})});
}

inline double cat_exponent() { return std::log((3 + std::sqrt(5.0)) / 2); }
inline double silver_exponent() { return std::log(1 + std::sqrt(2.0)); }
inline double two_plus_root3_exponent() { return std::log(2 + std::sqrt(3.0)); }

} // namespace fixtures

#endif
