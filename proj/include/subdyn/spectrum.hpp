#ifndef SUBDYN_SPECTRUM_HPP
#define SUBDYN_SPECTRUM_HPP

// Lyapunov data of a linear Z^k-action generated by commuting integer
// matrices: joint modulus blocks, the functionals chi_j, Weyl chambers,
// direction classification, splittings and gap constants.

#include "error.hpp"
#include "linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace subdyn {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using cplx = std::complex<double>;

struct ActionSpec {
    int k = 0;
    int m = 0;
    std::vector<IntMatrix> generators;
    bool toral = true;
    std::vector<BigMatrix> big;     // exact copies of the generators
    std::vector<BigMatrix> big_inv; // exact inverses (toral only)

    const IntMatrix& operator[](int i) const { return generators[static_cast<std::size_t>(i)]; }
    Mat real(int i) const { return generators[static_cast<std::size_t>(i)].cast<double>(); }
};

/// Validate and normalize an action. Throws NonCommuting naming the pair,
/// InvalidInput on shape problems or |det| != 1 for toral actions.
inline ActionSpec make_action(std::vector<IntMatrix> gens, bool toral = true)
{
    if (gens.empty()) throw Error(ErrorKind::InvalidInput, "at least one generator is required");
    ActionSpec s;
    s.k = static_cast<int>(gens.size());
    s.m = static_cast<int>(gens[0].rows());
    if (s.m == 0) throw Error(ErrorKind::InvalidInput, "generators must be nonempty");
    for (const auto& g : gens)
        if (g.rows() != s.m || g.cols() != s.m) throw Error(ErrorKind::InvalidInput, "generators must be square of equal size");
    s.toral = toral;
    for (const auto& g : gens) s.big.emplace_back(g);
    for (int i = 0; i < s.k; ++i)
        for (int j = i + 1; j < s.k; ++j)
            if (!(s.big[static_cast<std::size_t>(i)] * s.big[static_cast<std::size_t>(j)] ==
                  s.big[static_cast<std::size_t>(j)] * s.big[static_cast<std::size_t>(i)]))
                throw Error(ErrorKind::NonCommuting,
                            "generators " + std::to_string(i + 1) + " and " + std::to_string(j + 1) + " do not commute");
    if (toral) {
        for (int i = 0; i < s.k; ++i) {
            mpz_class d = determinant(s.big[static_cast<std::size_t>(i)]);
            if (abs(d) != 1)
                throw Error(ErrorKind::InvalidInput, "generator " + std::to_string(i + 1) + " has |det| != 1");
            s.big_inv.push_back(unimodular_inverse(s.big[static_cast<std::size_t>(i)]));
        }
    }
    s.generators = std::move(gens);
    return s;
}

struct SpectralBlock {
    Mat basis;                     // m x m_j, orthonormal columns spanning E_j
    std::vector<double> exponents; // lambda_{i,j}, i = 0..k-1
    bool complex = false;          // contains a conjugate eigenvalue pair
    int multiplicity() const { return static_cast<int>(basis.cols()); }
};

struct LyapunovSpectrum {
    int k = 0;
    int m = 0;
    std::vector<SpectralBlock> blocks;
    Mat T;          // [E_1 | ... | E_s]
    Mat T_inv;
    double kappa = 1.0; // cond_2(T)
    double invariance_residual = 0.0;

    int s() const { return static_cast<int>(blocks.size()); }
    double lambda(int i, int j) const
    {
        return blocks[static_cast<std::size_t>(j)].exponents[static_cast<std::size_t>(i)];
    }
    double max_abs_lambda() const
    {
        double r = 0;
        for (const auto& b : blocks)
            for (double l : b.exponents) r = std::max(r, std::fabs(l));
        return r;
    }
    /// First column of T belonging to block j.
    int offset(int j) const
    {
        int o = 0;
        for (int q = 0; q < j; ++q) o += blocks[static_cast<std::size_t>(q)].multiplicity();
        return o;
    }
};

namespace detail {

inline Mat orthonormal_columns(const Mat& a, int expect)
{
    Eigen::ColPivHouseholderQR<Mat> qr(a);
    qr.setThreshold(1e-8);
    if (qr.rank() != expect) return Mat();
    Mat q = qr.householderQ() * Mat::Identity(a.rows(), expect);
    return q;
}

inline CMat null_space(const CMat& a, int dim)
{
    Eigen::JacobiSVD<CMat> svd(a, Eigen::ComputeFullV);
    return svd.matrixV().rightCols(dim);
}

struct Cluster {
    cplx mu;
    int size;
};

inline std::vector<Cluster> cluster_eigenvalues(const CVec& ev)
{
    std::vector<Cluster> out;
    std::vector<bool> used(static_cast<std::size_t>(ev.size()), false);
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (used[static_cast<std::size_t>(i)]) continue;
        double tol = 1e-5 * std::max(1.0, std::abs(ev[i]));
        cplx sum = 0;
        int n = 0;
        for (Eigen::Index j = i; j < ev.size(); ++j)
            if (!used[static_cast<std::size_t>(j)] && std::abs(ev[j] - ev[i]) <= tol) {
                used[static_cast<std::size_t>(j)] = true;
                sum += ev[j];
                ++n;
            }
        out.push_back({sum / static_cast<double>(n), n});
    }
    return out;
}

// One decomposition attempt with the combination C = sum c_i A_i; empty on
// failure (collision or inaccurate invariant subspace).
inline std::optional<std::vector<SpectralBlock>> try_decompose(const ActionSpec& spec, const std::vector<int>& c,
                                                                double& residual)
{
    const int m = spec.m;
    Mat C = Mat::Zero(m, m);
    for (int i = 0; i < spec.k; ++i) C += static_cast<double>(c[static_cast<std::size_t>(i)]) * spec.real(i);
    const double scale = std::max(1.0, C.norm());
    Eigen::EigenSolver<Mat> es(C, false);
    if (es.info() != Eigen::Success) return std::nullopt;
    auto clusters = cluster_eigenvalues(es.eigenvalues());

    std::vector<SpectralBlock> raw;
    residual = 0;
    int total = 0;
    for (const auto& cl : clusters) {
        double tol = 1e-5 * std::max(1.0, std::abs(cl.mu));
        if (cl.mu.imag() < -tol) continue; // handled with its conjugate
        bool is_complex = cl.mu.imag() > tol;
        CMat shifted = (C.cast<cplx>() - cl.mu * CMat::Identity(m, m)) / scale;
        CMat p = CMat::Identity(m, m);
        for (int r = 0; r < cl.size; ++r) p = p * shifted;
        CMat N = null_space(p, cl.size);
        Mat B;
        if (is_complex) {
            Mat re_im(m, 2 * cl.size);
            re_im << N.real(), N.imag();
            B = orthonormal_columns(re_im, 2 * cl.size);
        } else {
            // Real eigenvalue: rotate the complex kernel to a real basis.
            Mat re_im(m, 2 * cl.size);
            re_im << N.real(), N.imag();
            B = orthonormal_columns(re_im, cl.size);
        }
        if (B.size() == 0) return std::nullopt;
        total += static_cast<int>(B.cols());

        SpectralBlock blk;
        blk.complex = is_complex;
        for (int i = 0; i < spec.k; ++i) {
            Mat A = spec.real(i);
            Mat R = B.transpose() * A * B;
            double res = (A * B - B * R).norm() / std::max(1.0, A.norm());
            residual = std::max(residual, res);
            if (res > 1e-7) return std::nullopt;
            Eigen::EigenSolver<Mat> er(R, false);
            double lo = std::numeric_limits<double>::infinity(), hi = 0, logsum = 0;
            for (Eigen::Index q = 0; q < R.rows(); ++q) {
                double a = std::abs(er.eigenvalues()[q]);
                lo = std::min(lo, a);
                hi = std::max(hi, a);
                logsum += std::log(a);
            }
            if (!(lo > 0) || hi > lo * (1 + 1e-6)) return std::nullopt;
            blk.exponents.push_back(logsum / static_cast<double>(R.rows()));
        }
        blk.basis = std::move(B);
        raw.push_back(std::move(blk));
    }
    if (total != m) return std::nullopt;
    return raw;
}

} // namespace detail

/// Coarsest common refinement of the generators into joint modulus blocks.
/// Blocks are sorted by exponent vector, lexicographically descending.
inline LyapunovSpectrum common_eigenstructure(const ActionSpec& spec)
{
    std::mt19937 rng(0x5eedu);
    std::uniform_int_distribution<int> coef(1, 9);
    std::bernoulli_distribution flip(0.5);
    double residual = 0;
    for (int attempt = 0; attempt < 16; ++attempt) {
        std::vector<int> c(static_cast<std::size_t>(spec.k));
        for (auto& x : c) x = coef(rng) * (flip(rng) ? -1 : 1);
        auto raw = detail::try_decompose(spec, c, residual);
        if (!raw) continue;

        std::sort(raw->begin(), raw->end(),
                  [](const SpectralBlock& a, const SpectralBlock& b) { return a.exponents > b.exponents; });
        LyapunovSpectrum out;
        out.k = spec.k;
        out.m = spec.m;
        out.invariance_residual = residual;
        for (auto& b : *raw) {
            if (!out.blocks.empty()) {
                auto& last = out.blocks.back();
                double d = 0, sc = 1;
                for (std::size_t i = 0; i < b.exponents.size(); ++i) {
                    d = std::max(d, std::fabs(b.exponents[i] - last.exponents[i]));
                    sc = std::max(sc, std::fabs(b.exponents[i]));
                }
                if (d <= 1e-8 * sc) {
                    Mat joined(spec.m, last.basis.cols() + b.basis.cols());
                    joined << last.basis, b.basis;
                    last.basis = detail::orthonormal_columns(joined, static_cast<int>(joined.cols()));
                    last.complex = last.complex || b.complex;
                    if (last.basis.size() == 0) break;
                    continue;
                }
            }
            out.blocks.push_back(std::move(b));
        }
        bool ok = true;
        for (const auto& b : out.blocks) ok = ok && b.basis.size() > 0;
        if (!ok) continue;
        out.T.resize(spec.m, spec.m);
        int col = 0;
        for (const auto& b : out.blocks) {
            out.T.middleCols(col, b.basis.cols()) = b.basis;
            col += static_cast<int>(b.basis.cols());
        }
        out.kappa = cond2(out.T);
        out.T_inv = out.T.fullPivLu().inverse();
        return out;
    }
    throw Error(ErrorKind::DegenerateDecomposition, "joint block extraction failed after 16 attempts");
}

inline std::vector<double> chi(const LyapunovSpectrum& sp, const Vec& v)
{
    std::vector<double> out;
    for (const auto& b : sp.blocks) {
        double s = 0;
        for (int i = 0; i < sp.k; ++i) s += v[i] * b.exponents[static_cast<std::size_t>(i)];
        out.push_back(s);
    }
    return out;
}

enum class DirectionTag { Regular, FirstTypeSingular, SecondTypeSingular };

inline const char* to_string(DirectionTag t)
{
    switch (t) {
    case DirectionTag::Regular: return "regular";
    case DirectionTag::FirstTypeSingular: return "first-type singular";
    case DirectionTag::SecondTypeSingular: return "second-type singular";
    }
    return "?";
}

struct DirectionClass {
    DirectionTag tag = DirectionTag::Regular;
    std::vector<double> chi;
    std::vector<int> sign; // -1, 0, +1 per block after the zero test
    bool near_singular = false;
};

inline double zero_tolerance(const LyapunovSpectrum& sp, const Vec& v)
{
    return 1e-9 * v.norm() * sp.max_abs_lambda();
}

inline DirectionClass classify_direction(const LyapunovSpectrum& sp, const Vec& v)
{
    if (v.size() != sp.k) throw Error(ErrorKind::InvalidInput, "vector dimension does not match k");
    if (v.norm() == 0) throw Error(ErrorKind::ZeroVector, "cannot classify the zero vector");
    DirectionClass dc;
    dc.chi = chi(sp, v);
    const double tol = zero_tolerance(sp, v);
    int zeros = 0;
    for (double c : dc.chi) {
        int sg = std::fabs(c) <= tol ? 0 : (c > 0 ? 1 : -1);
        if (sg == 0) ++zeros;
        else if (std::fabs(c) <= 1e3 * tol) dc.near_singular = true;
        dc.sign.push_back(sg);
    }
    if (zeros == 0) dc.tag = DirectionTag::Regular;
    else if (zeros == static_cast<int>(dc.chi.size())) dc.tag = DirectionTag::SecondTypeSingular;
    else dc.tag = DirectionTag::FirstTypeSingular;
    return dc;
}

struct WeylChambers {
    std::vector<Vec> normals;           // one per distinct Lyapunov hyperplane
    std::vector<int> everywhere_singular; // blocks whose functional vanishes identically
    // k = 2 only
    std::vector<double> singular_angles; // sorted, in [0, pi)
    std::vector<std::pair<double, double>> arcs;
};

inline WeylChambers weyl_chambers(const LyapunovSpectrum& sp)
{
    WeylChambers w;
    const double scale = std::max(1.0, sp.max_abs_lambda());
    for (int j = 0; j < sp.s(); ++j) {
        Vec n(sp.k);
        for (int i = 0; i < sp.k; ++i) n[i] = sp.lambda(i, j);
        if (n.norm() <= 1e-9 * scale) {
            w.everywhere_singular.push_back(j);
            continue;
        }
        Vec u = n.normalized();
        bool dup = false;
        for (const auto& q : w.normals) dup = dup || std::fabs(std::fabs(q.normalized().dot(u)) - 1.0) <= 1e-12;
        if (!dup) w.normals.push_back(n);
    }
    if (sp.k == 2) {
        for (const auto& n : w.normals) {
            double th = std::atan2(n[0], -n[1]);
            if (th < 0) th += std::numbers::pi;
            if (th >= std::numbers::pi) th -= std::numbers::pi;
            w.singular_angles.push_back(th);
        }
        std::sort(w.singular_angles.begin(), w.singular_angles.end());
        const auto& a = w.singular_angles;
        if (a.empty()) {
            // everything is one chamber unless some functional vanishes identically
            if (w.everywhere_singular.empty()) w.arcs.push_back({0.0, std::numbers::pi});
        } else if (w.everywhere_singular.empty()) {
            for (std::size_t i = 0; i + 1 < a.size(); ++i) w.arcs.push_back({a[i], a[i + 1]});
            w.arcs.push_back({a.back(), a.front() + std::numbers::pi});
        }
    }
    return w;
}

struct Splitting {
    std::vector<int> J1, J2, J3;
    Mat Es, Eu, Ec;
    Mat Ps, Pu, Pc;
    int dim_s() const { return static_cast<int>(Es.cols()); }
    int dim_u() const { return static_cast<int>(Eu.cols()); }
    int dim_c() const { return static_cast<int>(Ec.cols()); }
};

inline Splitting splitting_for(const LyapunovSpectrum& sp, const Vec& v)
{
    DirectionClass dc = classify_direction(sp, v);
    Splitting s;
    const int m = sp.m;
    Vec sel_s = Vec::Zero(m), sel_u = Vec::Zero(m), sel_c = Vec::Zero(m);
    auto append = [m](Mat& dst, const Mat& b) {
        Mat t(m, dst.cols() + b.cols());
        t << dst, b;
        dst = std::move(t);
    };
    s.Es = s.Eu = s.Ec = Mat(m, 0);
    for (int j = 0; j < sp.s(); ++j) {
        const auto& b = sp.blocks[static_cast<std::size_t>(j)];
        int off = sp.offset(j);
        int sg = dc.sign[static_cast<std::size_t>(j)];
        if (sg < 0) {
            s.J1.push_back(j);
            append(s.Es, b.basis);
            sel_s.segment(off, b.multiplicity()).setOnes();
        } else if (sg > 0) {
            s.J2.push_back(j);
            append(s.Eu, b.basis);
            sel_u.segment(off, b.multiplicity()).setOnes();
        } else {
            s.J3.push_back(j);
            append(s.Ec, b.basis);
            sel_c.segment(off, b.multiplicity()).setOnes();
        }
    }
    s.Ps = sp.T * sel_s.asDiagonal() * sp.T_inv;
    s.Pu = sp.T * sel_u.asDiagonal() * sp.T_inv;
    s.Pc = sp.T * sel_c.asDiagonal() * sp.T_inv;
    return s;
}

struct GapConstants {
    double a = 0;
    double b1 = 0; // max over J1, -inf if J1 empty
    double b2 = 0; // min over J2, +inf if J2 empty
    double bv = 0;
    bool holds = false; // b1 < 0 < b2
    std::optional<double> b3; // only when J3 is nonempty
    bool b3_ok = true;        // b3 < max(b2, -b1)
};

/// Constants of the gap inequalities for v; a defaults to
/// min_{j not in J3} |chi_j(v)| / (2 sum |v_i|).
inline GapConstants gap_constants(const LyapunovSpectrum& sp, const Vec& v, std::optional<double> a = std::nullopt)
{
    DirectionClass dc = classify_direction(sp, v);
    if (dc.tag == DirectionTag::SecondTypeSingular)
        throw Error(ErrorKind::SecondTypeSingular, "no gap exists along a second-type singular direction");
    double sum_abs = v.cwiseAbs().sum();
    double sum = v.sum();
    GapConstants g;
    if (a) {
        if (!(*a > 0)) throw Error(ErrorKind::InvalidInput, "a must be positive");
        g.a = *a;
    } else {
        double mn = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < dc.chi.size(); ++j)
            if (dc.sign[j] != 0) mn = std::min(mn, std::fabs(dc.chi[j]));
        g.a = mn / (2 * sum_abs);
    }
    const double inf = std::numeric_limits<double>::infinity();
    g.b1 = -inf;
    g.b2 = inf;
    double b3 = -inf;
    bool any_c = false;
    for (std::size_t j = 0; j < dc.chi.size(); ++j) {
        double plus = dc.chi[j] + g.a * sum, minus = dc.chi[j] - g.a * sum;
        if (dc.sign[j] < 0) g.b1 = std::max(g.b1, plus);
        else if (dc.sign[j] > 0) g.b2 = std::min(g.b2, minus);
        else {
            any_c = true;
            b3 = std::max(b3, std::max(plus, std::fabs(minus)));
        }
    }
    g.bv = std::min(-g.b1, g.b2);
    g.holds = g.b1 < 0 && g.b2 > 0;
    if (any_c) {
        g.b3 = b3;
        g.b3_ok = b3 < std::max(g.b2, -g.b1);
    }
    return g;
}

/// First lattice vector (by max-norm shell, then Euclidean norm, then
/// lexicographically descending) on which every chi_j is nonzero.
inline std::optional<IntVec> find_regular_integer_vector(const LyapunovSpectrum& sp, int max_radius = 64)
{
    for (const auto& b : sp.blocks) {
        bool all_zero = true;
        for (double l : b.exponents) all_zero = all_zero && std::fabs(l) <= 1e-12;
        if (all_zero) return std::nullopt;
    }
    const int k = sp.k;
    for (long long r = 1; r <= max_radius; ++r) {
        std::vector<IntVec> shell;
        IntVec n(static_cast<std::size_t>(k), -r);
        while (true) {
            if (max_abs(n) == r) shell.push_back(n);
            int j = 0;
            while (j < k && n[static_cast<std::size_t>(j)] == r) n[static_cast<std::size_t>(j++)] = -r;
            if (j == k) break;
            ++n[static_cast<std::size_t>(j)];
        }
        std::sort(shell.begin(), shell.end(), [](const IntVec& a, const IntVec& b) {
            double na = to_real(a).squaredNorm(), nb = to_real(b).squaredNorm();
            if (na != nb) return na < nb;
            return a > b;
        });
        for (const auto& c : shell)
            if (classify_direction(sp, to_real(c)).tag == DirectionTag::Regular) return c;
    }
    return std::nullopt;
}

struct CriterionResult {
    bool statement2 = false; // every diagonal index has some |a_jj| != 1
    bool statement3 = false; // no joint eigenvector with all eigenvalues on the unit circle
    bool holds() const { return statement2; }
};

/// Lipschitz shadowing test for commuting upper-triangular complex matrices.
inline CriterionResult lipschitz_shadowing_criterion(const std::vector<CMat>& A, double tol = 1e-9)
{
    if (A.empty()) throw Error(ErrorKind::InvalidInput, "no matrices");
    const auto m = A[0].rows();
    for (const auto& a : A) {
        if (a.rows() != m || a.cols() != m) throw Error(ErrorKind::InvalidInput, "matrices must be square of equal size");
        double sc = std::max(1.0, a.norm());
        for (Eigen::Index r = 0; r < m; ++r)
            for (Eigen::Index c = 0; c < r; ++c)
                if (std::abs(a(r, c)) > tol * sc) throw Error(ErrorKind::InvalidInput, "matrix is not upper triangular");
    }
    for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t j = i + 1; j < A.size(); ++j) {
            double sc = std::max(1.0, A[i].norm() * A[j].norm());
            if ((A[i] * A[j] - A[j] * A[i]).norm() > tol * sc)
                throw Error(ErrorKind::NonCommuting,
                            "matrices " + std::to_string(i + 1) + " and " + std::to_string(j + 1) + " do not commute");
        }

    CriterionResult res;
    res.statement2 = true;
    for (Eigen::Index j = 0; j < m; ++j) {
        bool some = false;
        for (const auto& a : A) some = some || std::fabs(std::abs(a(j, j)) - 1.0) > tol;
        res.statement2 = res.statement2 && some;
    }

    // Brute force over unit-modulus candidates from each matrix's diagonal.
    std::vector<std::vector<cplx>> cand(A.size());
    for (std::size_t i = 0; i < A.size(); ++i)
        for (Eigen::Index j = 0; j < m; ++j) {
            cplx d = A[i](j, j);
            if (std::fabs(std::abs(d) - 1.0) > tol) continue;
            bool dup = false;
            for (auto c : cand[i]) dup = dup || std::abs(c - d) <= tol;
            if (!dup) cand[i].push_back(d);
        }
    res.statement3 = true;
    std::vector<std::size_t> idx(A.size(), 0);
    bool empty = std::any_of(cand.begin(), cand.end(), [](const auto& c) { return c.empty(); });
    while (!empty) {
        CMat stacked(m * static_cast<Eigen::Index>(A.size()), m);
        for (std::size_t i = 0; i < A.size(); ++i)
            stacked.middleRows(static_cast<Eigen::Index>(i) * m, m) = A[i] - cand[i][idx[i]] * CMat::Identity(m, m);
        Eigen::JacobiSVD<CMat> svd(stacked);
        double smin = svd.singularValues()[m - 1];
        double sc = std::max(1.0, svd.singularValues()[0]);
        if (smin <= 1e-7 * sc) {
            res.statement3 = false;
            break;
        }
        std::size_t i = 0;
        while (i < A.size() && ++idx[i] == cand[i].size()) idx[i++] = 0;
        if (i == A.size()) break;
    }
    return res;
}

/// Simultaneous unitary triangularization of commuting real matrices via the
/// Schur form of a generic combination.
inline std::vector<CMat> triangularize(const std::vector<Mat>& A)
{
    if (A.empty()) return {};
    std::mt19937 rng(0x7a1u);
    std::uniform_real_distribution<double> coef(0.5, 2.0);
    for (int attempt = 0; attempt < 16; ++attempt) {
        Mat C = Mat::Zero(A[0].rows(), A[0].cols());
        for (const auto& a : A) C += coef(rng) * a;
        Eigen::ComplexSchur<CMat> schur(C.cast<cplx>());
        const CMat& Q = schur.matrixU();
        std::vector<CMat> out;
        bool ok = true;
        for (const auto& a : A) {
            CMat t = Q.adjoint() * a.cast<cplx>() * Q;
            double sc = std::max(1.0, t.norm());
            for (Eigen::Index r = 0; r < t.rows(); ++r)
                for (Eigen::Index c = 0; c < r; ++c) {
                    if (std::abs(t(r, c)) > 1e-8 * sc) ok = false;
                    t(r, c) = 0;
                }
            out.push_back(std::move(t));
        }
        if (ok) return out;
    }
    throw Error(ErrorKind::DegenerateDecomposition, "simultaneous triangularization failed");
}

inline std::vector<CMat> triangularize(const ActionSpec& spec)
{
    std::vector<Mat> A;
    for (int i = 0; i < spec.k; ++i) A.push_back(spec.real(i));
    return triangularize(A);
}

} // namespace subdyn

#endif
