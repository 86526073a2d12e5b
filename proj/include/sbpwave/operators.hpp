#pragma once

// Staggered-grid SBP operator sets in exact rational arithmetic.
//
// Grid convention for a set with n_count N-points:
//   N-grid  x_j = x_L + j*dx,        j = 0..n_count-1   (both boundaries included)
//   M-grid  x_j = x_L + (j+1/2)*dx,  j = 0..n_count-2
// Stored matrices are for dx = 1. DN and DM are applied with a factor 1/dx,
// AM and AN with a factor dx.

#include <array>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sbpwave/rational.hpp"

namespace sbpwave {

using RationalVector = std::vector<Rational>;

class RationalMatrix {
public:
    RationalMatrix() = default;
    RationalMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    Rational& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
    const Rational& operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

    RationalMatrix transpose() const {
        RationalMatrix t(cols_, rows_);
        for (int r = 0; r < rows_; ++r)
            for (int c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
        return t;
    }

    bool is_zero() const {
        for (const auto& v : data_)
            if (!v.is_zero()) return false;
        return true;
    }

    bool row_is_zero(int r) const {
        for (int c = 0; c < cols_; ++c)
            if (!(*this)(r, c).is_zero()) return false;
        return true;
    }

    bool col_is_zero(int c) const {
        for (int r = 0; r < rows_; ++r)
            if (!(*this)(r, c).is_zero()) return false;
        return true;
    }

    friend bool operator==(const RationalMatrix&, const RationalMatrix&) = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<Rational> data_;
};

enum class Variant { Extrapolating, Intertwined };

inline const char* to_string(Variant v) {
    return v == Variant::Extrapolating ? "extrapolating" : "intertwined";
}

struct OperatorSet1D {
    Variant variant = Variant::Extrapolating;
    int n_count = 0;
    int m_count = 0;
    double dx = 1.0;
    RationalVector AM;  // m_count
    RationalVector AN;  // n_count
    RationalMatrix DN;  // m_count x n_count
    RationalMatrix DM;  // n_count x m_count
    RationalVector PL;  // m_count
    RationalVector PR;  // m_count
    bool reset_left = false;
    bool reset_right = false;
};

class OperatorSizeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class OperatorStructureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class AccuracyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kMinNCount = 9;

namespace detail {

inline Rational q(long long p, long long d = 1) { return Rational(p, d); }

}  // namespace detail

/// Builds the unscaled operator set. Boundary blocks are mirror-completed on
/// the right; the two variants differ only in the first and last rows of DM.
inline OperatorSet1D build_operator_set(Variant variant, int n_count) {
    using detail::q;
    if (n_count < kMinNCount)
        throw OperatorSizeError("operator set needs n_count >= " + std::to_string(kMinNCount) +
                                ", got " + std::to_string(n_count));

    OperatorSet1D s;
    s.variant = variant;
    s.n_count = n_count;
    s.m_count = n_count - 1;
    const int n = n_count;
    const int m = s.m_count;

    s.AM.assign(m, q(1));
    s.AN.assign(n, q(1));
    const std::array<Rational, 3> am_head{q(13, 12), q(7, 8), q(25, 24)};
    const std::array<Rational, 4> an_head{q(7, 18), q(9, 8), q(1), q(71, 72)};
    for (int i = 0; i < 3; ++i) s.AM[i] = s.AM[m - 1 - i] = am_head[i];
    for (int i = 0; i < 4; ++i) s.AN[i] = s.AN[n - 1 - i] = an_head[i];

    const std::array<Rational, 4> interior{q(1, 24), q(-9, 8), q(9, 8), q(-1, 24)};

    // DN: M-point i+1/2 <- N-points.
    s.DN = RationalMatrix(m, n);
    const std::array<std::array<Rational, 5>, 3> dn_head{{
        {q(-79, 78), q(27, 26), q(-1, 26), q(1, 78), q(0)},
        {q(2, 21), q(-9, 7), q(9, 7), q(-2, 21), q(0)},
        {q(1, 75), q(0), q(-27, 25), q(83, 75), q(-1, 25)},
    }};
    for (int i = 3; i < m - 3; ++i)
        for (int k = 0; k < 4; ++k) s.DN(i, i - 1 + k) = interior[k];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 5; ++j) {
            s.DN(i, j) = dn_head[i][j];
            s.DN(m - 1 - i, n - 1 - j) = -dn_head[i][j];
        }

    // DM: N-point i <- M-points.
    s.DM = RationalMatrix(n, m);
    std::array<std::array<Rational, 5>, 4> dm_head{{
        {q(-2), q(3), q(-1), q(0), q(0)},
        {q(-1), q(1), q(0), q(0), q(0)},
        {q(1, 24), q(-9, 8), q(9, 8), q(-1, 24), q(0)},
        {q(-1, 71), q(6, 71), q(-83, 71), q(81, 71), q(-3, 71)},
    }};
    if (variant == Variant::Intertwined) dm_head[0] = {q(79, 28), q(-3, 14), q(-1, 28), q(0), q(0)};
    for (int i = 4; i < n - 4; ++i)
        for (int k = 0; k < 4; ++k) s.DM(i, i - 2 + k) = interior[k];
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 5; ++j) {
            s.DM(i, j) = dm_head[i][j];
            s.DM(n - 1 - i, m - 1 - j) = -dm_head[i][j];
        }

    // Extrapolation of M-grid data to the two boundary points.
    s.PL.assign(m, q(0));
    s.PR.assign(m, q(0));
    const std::array<Rational, 3> proj{q(15, 8), q(-5, 4), q(3, 8)};
    for (int i = 0; i < 3; ++i) {
        s.PL[i] = proj[i];
        s.PR[m - 1 - i] = proj[i];
    }
    return s;
}

/// Zeroes the boundary row of DM and boundary column of DN on each requested
/// side. Resetting an already reset side is a no-op.
inline OperatorSet1D apply_strong_reset(OperatorSet1D set, bool left, bool right) {
    auto zero_side = [&set](int row, int col) {
        for (int c = 0; c < set.m_count; ++c) set.DM(row, c) = 0;
        for (int r = 0; r < set.m_count; ++r) set.DN(r, col) = 0;
    };
    if (left) {
        zero_side(0, 0);
        set.reset_left = true;
    }
    if (right) {
        zero_side(set.n_count - 1, set.n_count - 1);
        set.reset_right = true;
    }
    return set;
}

/// Q = AN*DM + (AM*DN)^T, unscaled.
inline RationalMatrix compute_q(const OperatorSet1D& set) {
    RationalMatrix q(set.n_count, set.m_count);
    for (int i = 0; i < set.n_count; ++i)
        for (int j = 0; j < set.m_count; ++j)
            q(i, j) = set.AN[i] * set.DM(i, j) + set.AM[j] * set.DN(j, i);
    return q;
}

/// Recovers PL = -(first row of Q)^T and PR = (last row of Q)^T.
inline std::pair<RationalVector, RationalVector> projection_vectors(const OperatorSet1D& set) {
    RationalMatrix q = compute_q(set);
    for (int i = 1; i + 1 < q.rows(); ++i)
        if (!q.row_is_zero(i))
            throw OperatorStructureError("Q has nonzero interior row " + std::to_string(i) +
                                         "; operator set is unsuitable for SAT imposition");
    RationalVector pl(set.m_count), pr(set.m_count);
    for (int j = 0; j < set.m_count; ++j) {
        pl[j] = -q(0, j);
        pr[j] = q(set.n_count - 1, j);
    }
    return {pl, pr};
}

inline Rational n_coord(int j) { return Rational(j); }
inline Rational m_coord(int j) { return Rational(2 * static_cast<long long>(j) + 1, 2); }

struct RowAccuracy {
    char matrix = 'N';  // 'N' for DN, 'M' for DM
    int row = 0;
    int degree = -1;    // highest d with 1..x^d all differentiated exactly; -1 for a zero row
    bool boundary = false;
    bool reset = false;
};

struct AccuracyReport {
    std::vector<RowAccuracy> rows;
    bool ok = true;
    std::string failure;
};

namespace detail {

inline Rational ipow(const Rational& x, int p) {
    Rational r(1);
    for (int i = 0; i < p; ++i) r *= x;
    return r;
}

// Highest polynomial degree (<= max_degree) reproduced exactly by a stencil.
// Highest d such that the stencil differentiates (x - origin)^k exactly for
// all k <= d. With vanishing_at_origin only k >= 1 is tested.
inline int exact_degree(const std::vector<std::pair<Rational, Rational>>& stencil, const Rational& target,
                        int max_degree, const Rational& origin = Rational(0), bool vanishing_at_origin = false) {
    int best = vanishing_at_origin ? 0 : -1;
    for (int d = vanishing_at_origin ? 1 : 0; d <= max_degree; ++d) {
        Rational sum(0);
        for (const auto& [x, w] : stencil) sum += w * ipow(x - origin, d);
        Rational exact = d == 0 ? Rational(0) : Rational(d) * ipow(target - origin, d - 1);
        if (sum != exact) break;
        best = d;
    }
    return best;
}

}  // namespace detail

/// Checks every row of DN and DM against monomials up to x^4. Boundary-block
/// rows must reach degree 2, interior rows degree 4. Rows zeroed by a strong
/// reset are recorded but not checked.
inline AccuracyReport verify_accuracy(const OperatorSet1D& set) {
    constexpr int kMaxDegree = 4;
    AccuracyReport rep;
    const int n = set.n_count;
    const int m = set.m_count;

    auto record = [&rep](RowAccuracy ra) {
        int need = ra.boundary ? 2 : 4;
        if (!ra.reset && ra.degree < need && rep.ok) {
            rep.ok = false;
            rep.failure = std::string(ra.matrix == 'N' ? "DN" : "DM") + " row " + std::to_string(ra.row) +
                          " exact only to degree " + std::to_string(ra.degree) + " (need " +
                          std::to_string(need) + ")";
        }
        rep.rows.push_back(ra);
    };

    for (int i = 0; i < m; ++i) {
        std::vector<std::pair<Rational, Rational>> st;
        for (int j = 0; j < n; ++j)
            if (!set.DN(i, j).is_zero()) st.emplace_back(n_coord(j), set.DN(i, j));
        // A reset column drops the surface value, so only functions vanishing there are differentiated.
        const bool near_left = set.reset_left && i < 3;
        const bool near_right = set.reset_right && i >= m - 3;
        const Rational origin = near_right ? n_coord(n - 1) : Rational(0);
        RowAccuracy ra{'N', i, detail::exact_degree(st, m_coord(i), kMaxDegree, origin, near_left || near_right),
                       i < 3 || i >= m - 3, false};
        record(ra);
    }

    for (int i = 0; i < n; ++i) {
        bool reset = (i == 0 && set.reset_left) || (i == n - 1 && set.reset_right);
        std::vector<std::pair<Rational, Rational>> st;
        for (int j = 0; j < m; ++j)
            if (!set.DM(i, j).is_zero()) st.emplace_back(m_coord(j), set.DM(i, j));
        // Truncated rows: put back the surface stress coefficient.
        if (set.variant == Variant::Intertwined && !reset) {
            if (i == 0) st.emplace_back(n_coord(0), Rational(-18, 7));
            if (i == n - 1) st.emplace_back(n_coord(n - 1), Rational(18, 7));
        }
        RowAccuracy ra{'M', i, reset ? -1 : detail::exact_degree(st, n_coord(i), kMaxDegree),
                       i < 4 || i >= n - 4, reset};
        record(ra);
    }
    return rep;
}

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Structural invariants of a single set: quadrature sums, mirror symmetry,
/// boundary-only Q and row accuracy.
inline std::vector<Check> check_invariants(const OperatorSet1D& set) {
    std::vector<Check> out;
    const int n = set.n_count;
    const int m = set.m_count;

    Rational sum_m(0), sum_n(0);
    for (const auto& v : set.AM) sum_m += v;
    for (const auto& v : set.AN) sum_n += v;
    out.push_back({"quadrature AM", sum_m == Rational(m), "sum(AM) = " + sum_m.str()});
    out.push_back({"quadrature AN", sum_n == Rational(n - 1), "sum(AN) = " + sum_n.str()});

    bool norm_mirror = true;
    for (int i = 0; i < m; ++i) norm_mirror &= set.AM[i] == set.AM[m - 1 - i];
    for (int i = 0; i < n; ++i) norm_mirror &= set.AN[i] == set.AN[n - 1 - i];
    out.push_back({"norm mirror", norm_mirror, ""});

    bool dn_mirror = true, dm_mirror = true;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) dn_mirror &= set.DN(i, j) == -set.DN(m - 1 - i, n - 1 - j);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) dm_mirror &= set.DM(i, j) == -set.DM(n - 1 - i, m - 1 - j);
    if (set.reset_left != set.reset_right) dn_mirror = dm_mirror = true;  // one-sided reset breaks symmetry
    out.push_back({"DN negative mirror", dn_mirror, ""});
    out.push_back({"DM negative mirror", dm_mirror, ""});

    RationalMatrix q = compute_q(set);
    bool interior_zero = true;
    for (int i = 1; i + 1 < n; ++i) interior_zero &= q.row_is_zero(i);
    out.push_back({"Q boundary-only", interior_zero, ""});
    if (set.reset_left) out.push_back({"Q first row zero after reset", q.row_is_zero(0), ""});
    if (set.reset_right) out.push_back({"Q last row zero after reset", q.row_is_zero(n - 1), ""});
    if (set.variant == Variant::Intertwined)
        out.push_back({"Q identically zero", q.is_zero(), ""});

    AccuracyReport acc = verify_accuracy(set);
    out.push_back({"polynomial exactness", acc.ok, acc.failure});
    return out;
}

namespace detail {

inline void dump_matrix(std::ostream& os, const char* name, const RationalMatrix& a) {
    os << "[" << name << "] " << a.rows() << " x " << a.cols() << "\n";
    for (int r = 0; r < a.rows(); ++r) {
        for (int c = 0; c < a.cols(); ++c) os << (c ? " " : "") << a(r, c).str();
        os << "\n";
    }
    os << "\n";
}

inline void dump_vector(std::ostream& os, const char* name, const RationalVector& v) {
    os << "[" << name << "] " << v.size() << "\n";
    for (size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i].str();
    os << "\n\n";
}

}  // namespace detail

/// Plain-text dump: one section per matrix (AM, AN, DN, DM, Q, PL, PR),
/// row-major, entries as exact "p/q".
inline void dump_operators(std::ostream& os, const OperatorSet1D& set) {
    os << "# variant=" << to_string(set.variant) << " n_count=" << set.n_count << " m_count=" << set.m_count
       << " reset_left=" << set.reset_left << " reset_right=" << set.reset_right << "\n\n";
    detail::dump_vector(os, "AM", set.AM);
    detail::dump_vector(os, "AN", set.AN);
    detail::dump_matrix(os, "DN", set.DN);
    detail::dump_matrix(os, "DM", set.DM);
    detail::dump_matrix(os, "Q", compute_q(set));
    detail::dump_vector(os, "PL", set.PL);
    detail::dump_vector(os, "PR", set.PR);
}

}  // namespace sbpwave
