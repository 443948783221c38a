#ifndef SUBDYN_LINALG_HPP
#define SUBDYN_LINALG_HPP

// Exact integer matrices (int64 with overflow promotion to GMP integers) and
// the small amount of dense double linear algebra shared by the modules.

#include "error.hpp"

#include <Eigen/Dense>
#include <gmpxx.h>

#include <cmath>
#include <limits>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace subdyn {

using IntVec = std::vector<long long>;
using IntMatrix = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline Vec to_real(const IntVec& n)
{
    Vec v(static_cast<Eigen::Index>(n.size()));
    for (std::size_t i = 0; i < n.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = static_cast<double>(n[i]);
    return v;
}

inline IntVec add(const IntVec& a, const IntVec& b)
{
    IntVec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline IntVec sub(const IntVec& a, const IntVec& b)
{
    IntVec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline long long max_abs(const IntVec& a)
{
    long long r = 0;
    for (long long x : a) r = std::max(r, x < 0 ? -x : x);
    return r;
}

/// Dense matrix of arbitrary-precision integers. Only the handful of
/// operations the toral code needs.
class BigMatrix {
public:
    BigMatrix() = default;
    BigMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows * cols), 0) {}

    explicit BigMatrix(const IntMatrix& m) : BigMatrix(static_cast<int>(m.rows()), static_cast<int>(m.cols()))
    {
        for (int r = 0; r < rows_; ++r)
            for (int c = 0; c < cols_; ++c) (*this)(r, c) = static_cast<long>(m(r, c));
    }

    static BigMatrix identity(int n)
    {
        BigMatrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    mpz_class& operator()(int r, int c) { return a_[static_cast<std::size_t>(r * cols_ + c)]; }
    const mpz_class& operator()(int r, int c) const { return a_[static_cast<std::size_t>(r * cols_ + c)]; }

    friend BigMatrix operator*(const BigMatrix& x, const BigMatrix& y)
    {
        BigMatrix r(x.rows_, y.cols_);
        mpz_class t;
        for (int i = 0; i < x.rows_; ++i)
            for (int k = 0; k < x.cols_; ++k) {
                if (x(i, k) == 0) continue;
                for (int j = 0; j < y.cols_; ++j) {
                    mpz_mul(t.get_mpz_t(), x(i, k).get_mpz_t(), y(k, j).get_mpz_t());
                    r(i, j) += t;
                }
            }
        return r;
    }

    friend bool operator==(const BigMatrix& x, const BigMatrix& y)
    {
        return x.rows_ == y.rows_ && x.cols_ == y.cols_ && x.a_ == y.a_;
    }

    bool fits_int64() const
    {
        for (const auto& v : a_)
            if (!v.fits_slong_p()) return false;
        return true;
    }

    IntMatrix to_int() const
    {
        if (!fits_int64()) throw Error(ErrorKind::InvalidInput, "matrix entry exceeds 64 bits");
        IntMatrix m(rows_, cols_);
        for (int r = 0; r < rows_; ++r)
            for (int c = 0; c < cols_; ++c) m(r, c) = (*this)(r, c).get_si();
        return m;
    }

    Mat to_double() const
    {
        Mat m(rows_, cols_);
        for (int r = 0; r < rows_; ++r)
            for (int c = 0; c < cols_; ++c) m(r, c) = (*this)(r, c).get_d();
        return m;
    }

    /// Max row sum; the Lipschitz constant of the matrix for the max-norm.
    double inf_norm() const
    {
        double best = 0;
        for (int r = 0; r < rows_; ++r) {
            double s = 0;
            for (int c = 0; c < cols_; ++c) s += std::fabs((*this)(r, c).get_d());
            best = std::max(best, s);
        }
        return best;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<mpz_class> a_;
};

inline BigMatrix power(BigMatrix base, unsigned long long e)
{
    BigMatrix result = BigMatrix::identity(base.rows());
    while (e > 0) {
        if (e & 1ULL) result = result * base;
        e >>= 1ULL;
        if (e) base = base * base;
    }
    return result;
}

/// Exact determinant (fraction-free Bareiss elimination).
inline mpz_class determinant(const BigMatrix& a)
{
    const int n = a.rows();
    BigMatrix m = a;
    mpz_class prev = 1;
    int sign = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (m(k, k) == 0) {
            int p = k + 1;
            while (p < n && m(p, k) == 0) ++p;
            if (p == n) return 0;
            for (int c = 0; c < n; ++c) std::swap(m(k, c), m(p, c));
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i)
            for (int j = k + 1; j < n; ++j) {
                m(i, j) = (m(i, j) * m(k, k) - m(i, k) * m(k, j));
                mpz_divexact(m(i, j).get_mpz_t(), m(i, j).get_mpz_t(), prev.get_mpz_t());
            }
        prev = m(k, k);
    }
    return sign * m(n - 1, n - 1);
}

/// Inverse of a unimodular integer matrix (|det| = 1), computed exactly.
inline BigMatrix unimodular_inverse(const BigMatrix& a)
{
    const int n = a.rows();
    std::vector<mpq_class> m(static_cast<std::size_t>(n * 2 * n));
    auto at = [&](int r, int c) -> mpq_class& { return m[static_cast<std::size_t>(r * 2 * n + c)]; };
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) at(r, c) = a(r, c);
        at(r, n + r) = 1;
    }
    for (int col = 0; col < n; ++col) {
        int piv = col;
        while (piv < n && at(piv, col) == 0) ++piv;
        if (piv == n) throw Error(ErrorKind::InvalidInput, "matrix is singular");
        if (piv != col)
            for (int c = 0; c < 2 * n; ++c) std::swap(at(piv, c), at(col, c));
        mpq_class p = at(col, col);
        for (int c = 0; c < 2 * n; ++c) at(col, c) /= p;
        for (int r = 0; r < n; ++r) {
            if (r == col || at(r, col) == 0) continue;
            mpq_class f = at(r, col);
            for (int c = 0; c < 2 * n; ++c) at(r, c) -= f * at(col, c);
        }
    }
    BigMatrix inv(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const mpq_class& q = at(r, n + c);
            if (q.get_den() != 1) throw Error(ErrorKind::InvalidInput, "matrix is not unimodular");
            inv(r, c) = q.get_num();
        }
    return inv;
}

inline long long gcd_all(const IntVec& v)
{
    long long g = 0;
    for (long long x : v) g = std::gcd(g, x < 0 ? -x : x);
    return g;
}

inline double cond2(const Mat& m)
{
    Eigen::JacobiSVD<Mat> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0) return 1.0;
    double smin = s[s.size() - 1];
    if (smin <= 0) return std::numeric_limits<double>::infinity();
    return s[0] / smin;
}

/// Max row sum of a double matrix.
inline double inf_norm(const Mat& m)
{
    return m.rows() == 0 ? 0.0 : m.cwiseAbs().rowwise().sum().maxCoeff();
}

} // namespace subdyn

#endif
