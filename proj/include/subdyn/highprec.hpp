#ifndef SUBDYN_HIGHPREC_HPP
#define SUBDYN_HIGHPREC_HPP

// Binary fixed-point vectors and matrices on GMP integers. A value z with
// scale B stands for z / 2^B. Used where long orbit segments of expanding
// maps must be re-simulated exactly.

#include "error.hpp"
#include "linalg.hpp"

#include <gmpxx.h>

#include <cmath>
#include <vector>

namespace subdyn::hp {

using FVec = std::vector<mpz_class>;

inline mpz_class to_fixed(double x, long bits)
{
    if (x == 0.0) return 0;
    int e = 0;
    double f = std::frexp(x, &e); // x = f * 2^e, 0.5 <= |f| < 1
    mpz_class z(static_cast<long>(std::ldexp(f, 53)));
    long shift = static_cast<long>(e) - 53 + bits;
    if (shift >= 0) mpz_mul_2exp(z.get_mpz_t(), z.get_mpz_t(), static_cast<mp_bitcnt_t>(shift));
    else mpz_fdiv_q_2exp(z.get_mpz_t(), z.get_mpz_t(), static_cast<mp_bitcnt_t>(-shift));
    return z;
}

inline double from_fixed(const mpz_class& z, long bits)
{
    long e = 0;
    double d = mpz_get_d_2exp(&e, z.get_mpz_t());
    return std::ldexp(d, static_cast<int>(e - bits));
}

inline FVec to_fixed(const Vec& v, long bits)
{
    FVec out;
    out.reserve(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(to_fixed(v[i], bits));
    return out;
}

inline Vec from_fixed(const FVec& v, long bits)
{
    Vec out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = from_fixed(v[i], bits);
    return out;
}

/// Reduce to [0, 2^bits), i.e. mod 1.
inline void mod1(mpz_class& z, long bits)
{
    mpz_fdiv_r_2exp(z.get_mpz_t(), z.get_mpz_t(), static_cast<mp_bitcnt_t>(bits));
}

/// Reduce to [-2^(bits-1), 2^(bits-1)), i.e. the lift to [-1/2, 1/2).
inline void wrap_half(mpz_class& z, long bits)
{
    mod1(z, bits);
    if (mpz_tstbit(z.get_mpz_t(), static_cast<mp_bitcnt_t>(bits - 1))) {
        mpz_class one;
        mpz_setbit(one.get_mpz_t(), static_cast<mp_bitcnt_t>(bits));
        z -= one;
    }
}

/// Round-to-nearest right shift.
inline void shift_round(mpz_class& z, long s)
{
    if (s <= 0) return;
    mpz_class half;
    mpz_setbit(half.get_mpz_t(), static_cast<mp_bitcnt_t>(s - 1));
    z += half;
    mpz_fdiv_q_2exp(z.get_mpz_t(), z.get_mpz_t(), static_cast<mp_bitcnt_t>(s));
}

/// Exact product of an integer matrix with a fixed-point vector.
inline FVec mul(const BigMatrix& M, const FVec& v)
{
    FVec out(static_cast<std::size_t>(M.rows()));
    for (int r = 0; r < M.rows(); ++r) {
        mpz_class& acc = out[static_cast<std::size_t>(r)];
        for (int c = 0; c < M.cols(); ++c)
            if (M(r, c) != 0) mpz_addmul(acc.get_mpz_t(), M(r, c).get_mpz_t(), v[static_cast<std::size_t>(c)].get_mpz_t());
    }
    return out;
}

inline FVec add(const FVec& a, const FVec& b)
{
    FVec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline FVec sub(const FVec& a, const FVec& b)
{
    FVec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

/// Square fixed-point matrix with its own scale.
struct FMat {
    int n = 0;
    long bits = 0;
    std::vector<mpz_class> a;

    FMat() = default;
    FMat(int n_, long bits_) : n(n_), bits(bits_), a(static_cast<std::size_t>(n_ * n_), 0) {}

    mpz_class& operator()(int r, int c) { return a[static_cast<std::size_t>(r * n + c)]; }
    const mpz_class& operator()(int r, int c) const { return a[static_cast<std::size_t>(r * n + c)]; }

    static FMat identity(int n, long bits)
    {
        FMat m(n, bits);
        for (int i = 0; i < n; ++i) mpz_setbit(m(i, i).get_mpz_t(), static_cast<mp_bitcnt_t>(bits));
        return m;
    }

    static FMat from_int(const BigMatrix& M, long bits)
    {
        FMat m(M.rows(), bits);
        for (int r = 0; r < M.rows(); ++r)
            for (int c = 0; c < M.cols(); ++c)
                mpz_mul_2exp(m(r, c).get_mpz_t(), M(r, c).get_mpz_t(), static_cast<mp_bitcnt_t>(bits));
        return m;
    }

    /// Same matrix at a coarser scale.
    FMat rescaled(long new_bits) const
    {
        FMat m(n, new_bits);
        for (std::size_t i = 0; i < a.size(); ++i) {
            m.a[i] = a[i];
            if (new_bits < bits) shift_round(m.a[i], bits - new_bits);
            else mpz_mul_2exp(m.a[i].get_mpz_t(), m.a[i].get_mpz_t(), static_cast<mp_bitcnt_t>(new_bits - bits));
        }
        return m;
    }

    Mat to_double() const
    {
        Mat m(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) m(r, c) = from_fixed((*this)(r, c), bits);
        return m;
    }

    friend FMat operator+(const FMat& x, const FMat& y)
    {
        FMat r(x.n, x.bits);
        for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] = x.a[i] + y.a[i];
        return r;
    }

    friend FMat operator-(const FMat& x, const FMat& y)
    {
        FMat r(x.n, x.bits);
        for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] = x.a[i] - y.a[i];
        return r;
    }

    friend FMat operator*(const FMat& x, const FMat& y)
    {
        FMat r(x.n, x.bits);
        for (int i = 0; i < x.n; ++i)
            for (int j = 0; j < x.n; ++j) {
                mpz_class acc = 0;
                for (int k = 0; k < x.n; ++k) mpz_addmul(acc.get_mpz_t(), x(i, k).get_mpz_t(), y(k, j).get_mpz_t());
                shift_round(acc, x.bits);
                r(i, j) = acc;
            }
        return r;
    }

    void halve()
    {
        for (auto& v : a) shift_round(v, 1);
    }

    /// Apply to a vector of scale `vbits`, result at scale `vbits`.
    FVec apply(const FVec& v) const
    {
        FVec out(static_cast<std::size_t>(n));
        for (int r = 0; r < n; ++r) {
            mpz_class acc = 0;
            for (int c = 0; c < n; ++c)
                mpz_addmul(acc.get_mpz_t(), (*this)(r, c).get_mpz_t(), v[static_cast<std::size_t>(c)].get_mpz_t());
            shift_round(acc, bits);
            out[static_cast<std::size_t>(r)] = acc;
        }
        return out;
    }
};

/// Gauss-Jordan inverse with partial pivoting.
inline FMat inverse(const FMat& m)
{
    const int n = m.n;
    FMat a = m, inv = FMat::identity(n, m.bits);
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (mpz_cmpabs(a(r, col).get_mpz_t(), a(piv, col).get_mpz_t()) > 0) piv = r;
        if (a(piv, col) == 0) throw Error(ErrorKind::DegenerateDecomposition, "singular matrix in fixed-point inverse");
        if (piv != col)
            for (int c = 0; c < n; ++c) {
                std::swap(a(piv, c), a(col, c));
                std::swap(inv(piv, c), inv(col, c));
            }
        mpz_class p = a(col, col);
        for (int c = 0; c < n; ++c) {
            mpz_mul_2exp(a(col, c).get_mpz_t(), a(col, c).get_mpz_t(), static_cast<mp_bitcnt_t>(m.bits));
            mpz_tdiv_q(a(col, c).get_mpz_t(), a(col, c).get_mpz_t(), p.get_mpz_t());
            mpz_mul_2exp(inv(col, c).get_mpz_t(), inv(col, c).get_mpz_t(), static_cast<mp_bitcnt_t>(m.bits));
            mpz_tdiv_q(inv(col, c).get_mpz_t(), inv(col, c).get_mpz_t(), p.get_mpz_t());
        }
        for (int r = 0; r < n; ++r) {
            if (r == col || a(r, col) == 0) continue;
            mpz_class f = a(r, col);
            for (int c = 0; c < n; ++c) {
                mpz_class t = f * a(col, c);
                shift_round(t, m.bits);
                a(r, c) -= t;
                t = f * inv(col, c);
                shift_round(t, m.bits);
                inv(r, c) -= t;
            }
        }
    }
    return inv;
}

/// Spectral projector of an integer matrix G onto the sum of its generalized
/// eigenspaces with modulus > r, where log r = `log_radius`. Computed as
/// (I + sign W) / 2 for the Cayley transform W = (G - r)(G + r)^-1, with the
/// Newton iteration Z <- (Z + Z^-1) / 2.
inline FMat outer_projector(const BigMatrix& G, double log_radius, long bits)
{
    const int n = G.rows();
    const long work = bits + 64;
    FMat g = FMat::from_int(G, work);
    mpz_class r = to_fixed(std::exp(log_radius), work);
    FMat rI(n, work);
    for (int i = 0; i < n; ++i) rI(i, i) = r;
    FMat Z = (g - rI) * inverse(g + rI);
    mpz_class tol;
    mpz_setbit(tol.get_mpz_t(), 24);
    bool converged = false;
    for (int it = 0; it < 400 && !converged; ++it) {
        FMat next = Z + inverse(Z);
        next.halve();
        converged = true;
        for (std::size_t i = 0; i < Z.a.size(); ++i)
            if (mpz_class diff = next.a[i] - Z.a[i]; mpz_cmpabs(diff.get_mpz_t(), tol.get_mpz_t()) > 0) converged = false;
        Z = std::move(next);
    }
    if (!converged) throw Error(ErrorKind::DegenerateDecomposition, "matrix sign iteration did not converge");
    FMat P = FMat::identity(n, work) + Z;
    P.halve();
    FMat out(n, bits);
    for (std::size_t i = 0; i < P.a.size(); ++i) {
        out.a[i] = P.a[i];
        shift_round(out.a[i], work - bits);
    }
    return out;
}

} // namespace subdyn::hp

#endif
