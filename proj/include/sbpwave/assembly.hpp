#pragma once

// Semi-discrete systems assembled from 1D operator sets.
//
// 2D fields are stored x-major: flat index = ix * ny + iy, so a Kronecker
// product A_x (x) B_y acts on the flat vector exactly as written. The y axis
// is depth, with the top surface at y = 0.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sbpwave/operators.hpp"
#include "sbpwave/sparse.hpp"

namespace sbpwave {

enum class Equation { Wave1D, Acoustic2D, Elastic2D };
enum class BcMode { Strong, Weak };
enum class GridKind { N, M };
enum class VarKind { Velocity, Stress };

/// Which staggered sub-grid carries the stress in a 1D system. StressOnN is
/// the standard layout; StressOnM is a single column of the elastic layout
/// where the surface stress point is truncated away.
enum class Column1D { StressOnN, StressOnM };

inline const char* to_string(Equation e) {
    switch (e) {
        case Equation::Wave1D: return "wave1d";
        case Equation::Acoustic2D: return "acoustic2d";
        case Equation::Elastic2D: return "elastic2d";
    }
    return "?";
}
inline const char* to_string(BcMode b) { return b == BcMode::Strong ? "strong" : "weak"; }

class AssemblyError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

using Fields = std::vector<std::vector<double>>;

struct AxisGrid {
    int n_count = 1;
    double spacing = 1.0;
    double origin = 0.0;

    int count(GridKind g) const { return g == GridKind::N ? n_count : n_count - 1; }
    double coord(GridKind g, int i) const {
        return origin + (static_cast<double>(i) + (g == GridKind::M ? 0.5 : 0.0)) * spacing;
    }
    double length() const { return spacing * (n_count - 1); }
};

struct Variable {
    std::string name;
    VarKind kind = VarKind::Stress;
    GridKind gx = GridKind::N;
    GridKind gy = GridKind::N;
    int nx = 0;
    int ny = 1;
    /// Norm weight per point, including the dx (dx*dy) scaling.
    std::vector<double> weight;
    /// Strong-mode surface points whose update rows are identically zero.
    std::vector<char> constrained;
    /// Rate contributions of a unit point source on this variable: for each
    /// affected variable, a per-point coefficient (inverse material factor).
    std::vector<std::pair<int, std::vector<double>>> source_map;

    size_t size() const { return static_cast<size_t>(nx) * ny; }
    size_t flat(int ix, int iy) const { return static_cast<size_t>(ix) * ny + iy; }
};

/// rate[target] += coef .* (D along `axis`) source
struct Term {
    int target = 0;
    int source = 0;
    int axis = 0;
    SparseOp op;
    std::vector<double> coef;
};

/// E += 1/2 * sum_i weight_a[i] * U_a[i] * coef[i] * U_b[i]
struct EnergyPair {
    int a = 0;
    int b = 0;
    std::vector<double> coef;
};

struct MediumSpec {
    int dimension = 1;
    std::function<double(double, double)> rho;
    std::function<double(double, double)> beta;    // compressibility 1/(rho c^2)
    std::function<double(double, double)> lambda;  // elastic only
    std::function<double(double, double)> mu;

    bool is_elastic() const { return static_cast<bool>(lambda); }

    static MediumSpec homogeneous_acoustic(int dimension, double rho, double c) {
        MediumSpec m;
        m.dimension = dimension;
        m.rho = [rho](double, double) { return rho; };
        double beta = 1.0 / (rho * c * c);
        m.beta = [beta](double, double) { return beta; };
        return m;
    }

    static MediumSpec homogeneous_elastic(double rho, double lambda, double mu) {
        MediumSpec m;
        m.dimension = 2;
        m.rho = [rho](double, double) { return rho; };
        m.lambda = [lambda](double, double) { return lambda; };
        m.mu = [mu](double, double) { return mu; };
        return m;
    }
};

class SemiDiscreteSystem {
public:
    Equation equation = Equation::Wave1D;
    BcMode bc_mode = BcMode::Strong;
    Column1D column = Column1D::StressOnN;
    int dimension = 1;
    AxisGrid x;
    AxisGrid y;
    std::vector<Variable> vars;
    std::vector<Term> terms;
    std::vector<EnergyPair> energy;
    double max_speed = 0.0;

    int index_of(std::string_view name) const {
        for (size_t i = 0; i < vars.size(); ++i)
            if (vars[i].name == name) return static_cast<int>(i);
        throw std::out_of_range("no variable named '" + std::string(name) + "'");
    }

    Fields zero_fields() const {
        Fields f;
        f.reserve(vars.size());
        for (const auto& v : vars) f.emplace_back(v.size(), 0.0);
        return f;
    }

    double inverse_spacing_norm() const {
        double s = 1.0 / (x.spacing * x.spacing);
        if (dimension == 2) s += 1.0 / (y.spacing * y.spacing);
        return std::sqrt(s);
    }

    /// C = c_max * dt * sqrt(sum 1/h^2); the interior stencil limit is 6/7
    /// in both 1D and 2D under this definition.
    double courant(double dt) const { return max_speed * dt * inverse_spacing_norm(); }
    double dt_for_courant(double c) const { return c / (max_speed * inverse_spacing_norm()); }

    /// Overwrites rates[v] for every variable of `kind` with its semi-discrete
    /// right-hand side (no sources).
    void compute_rates(VarKind kind, const Fields& f, Fields& rates) const {
        for (size_t v = 0; v < vars.size(); ++v)
            if (vars[v].kind == kind) std::fill(rates[v].begin(), rates[v].end(), 0.0);
        std::vector<double> line;
        for (const auto& t : terms) {
            if (vars[t.target].kind != kind) continue;
            const Variable& tv = vars[t.target];
            const Variable& sv = vars[t.source];
            const double* src = f[t.source].data();
            double* out = rates[t.target].data();
            const double* coef = t.coef.data();
            if (t.axis == 0) {
                const int ny = tv.ny;
                line.assign(ny, 0.0);
                for (int i = 0; i < tv.nx; ++i) {
                    std::fill(line.begin(), line.end(), 0.0);
                    for (int k = t.op.row_ptr[i]; k < t.op.row_ptr[i + 1]; ++k) {
                        const double a = t.op.val[k];
                        const double* s = src + static_cast<size_t>(t.op.col[k]) * ny;
                        for (int j = 0; j < ny; ++j) line[j] += a * s[j];
                    }
                    const size_t base = static_cast<size_t>(i) * ny;
                    for (int j = 0; j < ny; ++j) out[base + j] += coef[base + j] * line[j];
                }
            } else {
                const int tny = tv.ny;
                const int sny = sv.ny;
                for (int i = 0; i < tv.nx; ++i) {
                    const double* s = src + static_cast<size_t>(i) * sny;
                    const size_t base = static_cast<size_t>(i) * tny;
                    for (int j = 0; j < tny; ++j) {
                        double acc = 0.0;
                        for (int k = t.op.row_ptr[j]; k < t.op.row_ptr[j + 1]; ++k)
                            acc += t.op.val[k] * s[t.op.col[k]];
                        out[base + j] += coef[base + j] * acc;
                    }
                }
            }
        }
    }
};

struct EnergyRate {
    double value = 0.0;
    double scale = 0.0;  // sum of the magnitudes of the contributing products
};

/// dE/dt of the semi-discrete system (no sources) at a state where all
/// fields live at the same time level.
inline EnergyRate energy_rate(const SemiDiscreteSystem& sys, const Fields& f) {
    Fields r = sys.zero_fields();
    sys.compute_rates(VarKind::Velocity, f, r);
    sys.compute_rates(VarKind::Stress, f, r);
    EnergyRate out;
    for (const auto& p : sys.energy) {
        const auto& w = sys.vars[p.a].weight;
        for (size_t i = 0; i < w.size(); ++i) {
            const double x = 0.5 * w[i] * p.coef[i] * f[p.a][i] * r[p.b][i];
            const double y = 0.5 * w[i] * p.coef[i] * r[p.a][i] * f[p.b][i];
            out.value += x + y;
            out.scale += std::abs(x) + std::abs(y);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rational SAT folding

/// DN + AM^{-1} (PL e_L^T - PR e_R^T): penalty on a velocity equation whose
/// stress lives on the N-grid.
inline RationalMatrix sat_modified_dn(const OperatorSet1D& set) {
    auto [pl, pr] = projection_vectors(set);
    RationalMatrix d = set.DN;
    const int last = set.n_count - 1;
    for (int j = 0; j < set.m_count; ++j) {
        d(j, 0) += pl[j] / set.AM[j];
        d(j, last) -= pr[j] / set.AM[j];
    }
    return d;
}

/// DM + AN^{-1} (e_L PL^T - e_R PR^T): penalty on a velocity equation whose
/// stress lives on the M-grid.
inline RationalMatrix sat_modified_dm(const OperatorSet1D& set) {
    auto [pl, pr] = projection_vectors(set);
    RationalMatrix d = set.DM;
    const int last = set.n_count - 1;
    for (int j = 0; j < set.m_count; ++j) {
        d(0, j) += pl[j] / set.AN[0];
        d(last, j) -= pr[j] / set.AN[last];
    }
    return d;
}

/// The operators a Weak system actually uses, as a rational set.
inline OperatorSet1D weak_effective_set(const OperatorSet1D& set, Column1D column) {
    OperatorSet1D eff = set;
    if (column == Column1D::StressOnN)
        eff.DN = sat_modified_dn(set);
    else
        eff.DM = sat_modified_dm(set);
    return eff;
}

// ---------------------------------------------------------------------------
// Elastic compatibility

struct RequirementReport {
    std::vector<Check> checks;
    bool ok() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

/// Exact checks on the four as-used 1D sets of the elastic layout: norms
/// shared between the N-column and M-column flavors, vanishing Q for each
/// set, and a shared DN.
inline RequirementReport check_elastic_requirements(const OperatorSet1D& x_n, const OperatorSet1D& x_m,
                                                    const OperatorSet1D& y_n, const OperatorSet1D& y_m) {
    RequirementReport rep;
    auto shared = [&rep](const char* axis, const OperatorSet1D& a, const OperatorSet1D& b) {
        bool sizes = a.n_count == b.n_count;
        rep.checks.push_back({std::string("shared norms ") + axis, sizes && a.AN == b.AN && a.AM == b.AM, ""});
        rep.checks.push_back({std::string("shared DN ") + axis, sizes && a.DN == b.DN, ""});
    };
    auto skew = [&rep](const std::string& name, const OperatorSet1D& s) {
        RationalMatrix q = compute_q(s);
        std::string detail;
        if (!q.is_zero()) {
            for (int i = 0; i < q.rows() && detail.empty(); ++i)
                if (!q.row_is_zero(i)) {
                    detail = "row " + std::to_string(i) + ":";
                    for (int j = 0; j < q.cols(); ++j)
                        if (!q(i, j).is_zero()) detail += " " + q(i, j).str();
                }
        }
        rep.checks.push_back({"skew-symmetric " + name, q.is_zero(), detail});
    };
    shared("x", x_n, x_m);
    shared("y", y_n, y_m);
    skew("x/N-column", x_n);
    skew("x/M-column", x_m);
    skew("y/N-column", y_n);
    skew("y/M-column", y_m);
    return rep;
}

// ---------------------------------------------------------------------------
// Assembly helpers

namespace detail {

struct GridPoint {
    double x;
    double y;
};

inline std::vector<GridPoint> points(const AxisGrid& ax, GridKind gx, const AxisGrid& ay, GridKind gy,
                                     int dimension) {
    std::vector<GridPoint> p;
    const int nx = ax.count(gx);
    const int ny = dimension == 2 ? ay.count(gy) : 1;
    p.reserve(static_cast<size_t>(nx) * ny);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) p.push_back({ax.coord(gx, i), dimension == 2 ? ay.coord(gy, j) : 0.0});
    return p;
}

inline Variable make_variable(std::string name, VarKind kind, GridKind gx, GridKind gy, const AxisGrid& ax,
                              const AxisGrid& ay, int dimension, const RationalVector& norm_x,
                              const RationalVector* norm_y) {
    Variable v;
    v.name = std::move(name);
    v.kind = kind;
    v.gx = gx;
    v.gy = gy;
    v.nx = ax.count(gx);
    v.ny = dimension == 2 ? ay.count(gy) : 1;
    if (static_cast<int>(norm_x.size()) != v.nx ||
        (norm_y && static_cast<int>(norm_y->size()) != v.ny))
        throw AssemblyError("norm size does not match grid for variable " + v.name);
    v.weight.resize(v.size());
    v.constrained.assign(v.size(), 0);
    for (int i = 0; i < v.nx; ++i)
        for (int j = 0; j < v.ny; ++j) {
            double w = norm_x[i].to_double() * ax.spacing;
            if (norm_y) w *= (*norm_y)[j].to_double() * ay.spacing;
            v.weight[v.flat(i, j)] = w;
        }
    return v;
}

template <class F>
std::vector<double> sample(const std::vector<GridPoint>& pts, F&& f) {
    std::vector<double> out(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) out[i] = f(pts[i].x, pts[i].y);
    return out;
}

inline std::vector<double> masked(std::vector<double> coef, const Variable& v, int axis,
                                  const std::vector<double>& mask) {
    // mask runs along the axis orthogonal to the derivative.
    for (int i = 0; i < v.nx; ++i)
        for (int j = 0; j < v.ny; ++j) coef[v.flat(i, j)] *= axis == 0 ? mask[j] : mask[i];
    return coef;
}

inline std::vector<double> boundary_mask(int count, bool reset) {
    std::vector<double> m(count, 1.0);
    if (reset) m.front() = m.back() = 0.0;
    return m;
}

inline void require_positive(const std::vector<double>& v, const char* what) {
    for (double a : v)
        if (!(a > 0.0) || !std::isfinite(a)) throw AssemblyError(std::string("medium: ") + what + " must be > 0");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// 1D

/// Free surface at both ends. StressOnN: V on M, Sigma on N; Weak folds the
/// SAT into DN, Strong zeroes the boundary row/column on both sides.
/// StressOnM: V on N, Sigma on M; Strong expects the intertwined (truncated)
/// set, Weak folds the SAT into DM.
inline SemiDiscreteSystem assemble_1d(const OperatorSet1D& set, const MediumSpec& medium, BcMode bc, double dx,
                                      Column1D column = Column1D::StressOnN, double x_left = 0.0) {
    if (medium.dimension != 1 || medium.is_elastic() || !medium.rho || !medium.beta)
        throw AssemblyError("assemble_1d needs a 1D acoustic-type medium (rho, beta)");
    if (!(dx > 0.0)) throw AssemblyError("dx must be positive");
    if (set.reset_left || set.reset_right)
        if (bc == BcMode::Weak) throw AssemblyError("weak assembly needs an unreset operator set");

    OperatorSet1D eff;
    if (column == Column1D::StressOnN) {
        if (bc == BcMode::Weak) {
            if (set.variant != Variant::Extrapolating)
                throw AssemblyError("weak 1D assembly uses the extrapolating operator set");
            eff = weak_effective_set(set, column);
        } else {
            eff = apply_strong_reset(set, true, true);
        }
    } else {
        if (bc == BcMode::Strong) {
            if (set.variant != Variant::Intertwined)
                throw AssemblyError("strong M-column assembly uses the intertwined operator set");
            eff = set;
        } else {
            if (set.variant != Variant::Extrapolating)
                throw AssemblyError("weak 1D assembly uses the extrapolating operator set");
            eff = weak_effective_set(set, column);
        }
    }

    SemiDiscreteSystem sys;
    sys.equation = Equation::Wave1D;
    sys.bc_mode = bc;
    sys.column = column;
    sys.dimension = 1;
    sys.x = AxisGrid{set.n_count, dx, x_left};
    sys.y = AxisGrid{1, 1.0, 0.0};

    const GridKind vel_grid = column == Column1D::StressOnN ? GridKind::M : GridKind::N;
    const GridKind str_grid = column == Column1D::StressOnN ? GridKind::N : GridKind::M;
    const RationalVector& vel_norm = column == Column1D::StressOnN ? eff.AM : eff.AN;
    const RationalVector& str_norm = column == Column1D::StressOnN ? eff.AN : eff.AM;

    sys.vars.push_back(detail::make_variable("V", VarKind::Velocity, vel_grid, GridKind::N, sys.x, sys.y, 1,
                                             vel_norm, nullptr));
    sys.vars.push_back(detail::make_variable("S", VarKind::Stress, str_grid, GridKind::N, sys.x, sys.y, 1,
                                             str_norm, nullptr));
    auto& V = sys.vars[0];
    auto& S = sys.vars[1];

    auto pv = detail::points(sys.x, vel_grid, sys.y, GridKind::N, 1);
    auto ps = detail::points(sys.x, str_grid, sys.y, GridKind::N, 1);
    auto rho = detail::sample(pv, medium.rho);
    auto beta = detail::sample(ps, medium.beta);
    detail::require_positive(rho, "rho");
    detail::require_positive(beta, "beta");

    std::vector<double> inv_rho(rho.size()), inv_beta(beta.size());
    for (size_t i = 0; i < rho.size(); ++i) inv_rho[i] = 1.0 / rho[i];
    for (size_t i = 0; i < beta.size(); ++i) inv_beta[i] = 1.0 / beta[i];

    const double inv_dx = 1.0 / dx;
    const RationalMatrix& to_vel = column == Column1D::StressOnN ? eff.DN : eff.DM;
    const RationalMatrix& to_str = column == Column1D::StressOnN ? eff.DM : eff.DN;
    sys.terms.push_back(Term{0, 1, 0, SparseOp::from_rational(to_vel, inv_dx), inv_rho});
    sys.terms.push_back(Term{1, 0, 0, SparseOp::from_rational(to_str, inv_dx), inv_beta});

    sys.energy.push_back(EnergyPair{0, 0, rho});
    sys.energy.push_back(EnergyPair{1, 1, beta});

    V.source_map.push_back({0, inv_rho});
    S.source_map.push_back({1, inv_beta});

    if (bc == BcMode::Strong && column == Column1D::StressOnN) {
        S.constrained.front() = 1;
        S.constrained.back() = 1;
    }

    // Pointwise speeds: rho on one grid, beta on the other; sample both on
    // the stress grid for the bound.
    auto rho_s = detail::sample(ps, medium.rho);
    auto beta_v = detail::sample(pv, medium.beta);
    for (size_t i = 0; i < ps.size(); ++i)
        sys.max_speed = std::max(sys.max_speed, 1.0 / std::sqrt(rho_s[i] * beta[i]));
    for (size_t i = 0; i < pv.size(); ++i)
        sys.max_speed = std::max(sys.max_speed, 1.0 / std::sqrt(rho[i] * beta_v[i]));
    return sys;
}

// ---------------------------------------------------------------------------
// 2D acoustic

/// Sigma on (Nx, Ny), Vx on (Mx, Ny), Vy on (Nx, My); free surface on all
/// four sides. Strong zeroes the boundary DM rows, DN columns and the end
/// entries of the N-grid identity factors; Weak adds the four penalty terms.
inline SemiDiscreteSystem assemble_2d_acoustic(const OperatorSet1D& setx, const OperatorSet1D& sety,
                                               const MediumSpec& medium, BcMode bc, double dx, double dy) {
    if (medium.dimension != 2 || medium.is_elastic() || !medium.rho || !medium.beta)
        throw AssemblyError("assemble_2d_acoustic needs a 2D acoustic medium (rho, beta)");
    if (!(dx > 0.0) || !(dy > 0.0)) throw AssemblyError("grid spacing must be positive");

    OperatorSet1D ex, ey;
    if (bc == BcMode::Strong) {
        ex = apply_strong_reset(setx, true, true);
        ey = apply_strong_reset(sety, true, true);
    } else {
        if (setx.variant != Variant::Extrapolating || sety.variant != Variant::Extrapolating ||
            setx.reset_left || setx.reset_right || sety.reset_left || sety.reset_right)
            throw AssemblyError("weak 2D acoustic assembly uses unreset extrapolating sets");
        ex = weak_effective_set(setx, Column1D::StressOnN);
        ey = weak_effective_set(sety, Column1D::StressOnN);
    }

    SemiDiscreteSystem sys;
    sys.equation = Equation::Acoustic2D;
    sys.bc_mode = bc;
    sys.dimension = 2;
    sys.x = AxisGrid{setx.n_count, dx, 0.0};
    sys.y = AxisGrid{sety.n_count, dy, 0.0};

    using G = GridKind;
    sys.vars.push_back(detail::make_variable("S", VarKind::Stress, G::N, G::N, sys.x, sys.y, 2, ex.AN, &ey.AN));
    sys.vars.push_back(detail::make_variable("Vx", VarKind::Velocity, G::M, G::N, sys.x, sys.y, 2, ex.AM, &ey.AN));
    sys.vars.push_back(detail::make_variable("Vy", VarKind::Velocity, G::N, G::M, sys.x, sys.y, 2, ex.AN, &ey.AM));
    enum { S = 0, VX = 1, VY = 2 };

    auto ps = detail::points(sys.x, G::N, sys.y, G::N, 2);
    auto pvx = detail::points(sys.x, G::M, sys.y, G::N, 2);
    auto pvy = detail::points(sys.x, G::N, sys.y, G::M, 2);
    auto beta = detail::sample(ps, medium.beta);
    auto rho_vx = detail::sample(pvx, medium.rho);
    auto rho_vy = detail::sample(pvy, medium.rho);
    detail::require_positive(beta, "beta");
    detail::require_positive(rho_vx, "rho");
    detail::require_positive(rho_vy, "rho");

    auto inv = [](std::vector<double> v) {
        for (auto& a : v) a = 1.0 / a;
        return v;
    };
    const bool strong = bc == BcMode::Strong;
    auto mask_nx = detail::boundary_mask(sys.x.count(G::N), strong);
    auto mask_ny = detail::boundary_mask(sys.y.count(G::N), strong);

    const double idx = 1.0 / dx, idy = 1.0 / dy;
    sys.terms.push_back(Term{VX, S, 0, SparseOp::from_rational(ex.DN, idx),
                             detail::masked(inv(rho_vx), sys.vars[VX], 0, mask_ny)});
    sys.terms.push_back(Term{VY, S, 1, SparseOp::from_rational(ey.DN, idy),
                             detail::masked(inv(rho_vy), sys.vars[VY], 1, mask_nx)});
    sys.terms.push_back(Term{S, VX, 0, SparseOp::from_rational(ex.DM, idx),
                             detail::masked(inv(beta), sys.vars[S], 0, mask_ny)});
    sys.terms.push_back(Term{S, VY, 1, SparseOp::from_rational(ey.DM, idy),
                             detail::masked(inv(beta), sys.vars[S], 1, mask_nx)});

    sys.energy.push_back(EnergyPair{S, S, beta});
    sys.energy.push_back(EnergyPair{VX, VX, rho_vx});
    sys.energy.push_back(EnergyPair{VY, VY, rho_vy});

    sys.vars[S].source_map.push_back({S, inv(beta)});
    sys.vars[VX].source_map.push_back({VX, inv(rho_vx)});
    sys.vars[VY].source_map.push_back({VY, inv(rho_vy)});

    if (strong) {
        Variable& s = sys.vars[S];
        for (int i = 0; i < s.nx; ++i)
            for (int j = 0; j < s.ny; ++j)
                if (i == 0 || j == 0 || i == s.nx - 1 || j == s.ny - 1) s.constrained[s.flat(i, j)] = 1;
    }

    auto rho_s = detail::sample(ps, medium.rho);
    for (size_t i = 0; i < ps.size(); ++i)
        sys.max_speed = std::max(sys.max_speed, 1.0 / std::sqrt(rho_s[i] * beta[i]));
    return sys;
}

// ---------------------------------------------------------------------------
// 2D elastic

/// Vx on (Nx, My), Vy on (Mx, Ny), Sxx and Syy on (Mx, My), Sxy on (Nx, Ny);
/// free surface on all four sides. The N-column sets serve the shear stress
/// and the M-column sets the normal stresses.
///
/// Strong: N-column sets are reset on both sides (rows of DM, columns of DN,
/// end entries of the N-grid identity factors); M-column sets must be the
/// intertwined sets, whose truncated rows carry the normal-stress condition.
/// Weak: all four sets are unreset extrapolating sets. Each traction
/// component gets a penalty built from its axis' projection vectors: shear
/// on all sides through DN of the N-column set, normal stress through DM of
/// the M-column set.
inline SemiDiscreteSystem assemble_2d_elastic(const OperatorSet1D& x_n, const OperatorSet1D& x_m,
                                              const OperatorSet1D& y_n, const OperatorSet1D& y_m,
                                              const MediumSpec& medium, BcMode bc, double dx, double dy) {
    if (medium.dimension != 2 || !medium.is_elastic() || !medium.rho || !medium.mu)
        throw AssemblyError("assemble_2d_elastic needs a 2D elastic medium (rho, lambda, mu)");
    if (!(dx > 0.0) || !(dy > 0.0)) throw AssemblyError("grid spacing must be positive");
    if (x_n.n_count != x_m.n_count || y_n.n_count != y_m.n_count)
        throw AssemblyError("N- and M-column sets must have the same size on each axis");

    OperatorSet1D exn, exm, eyn, eym;
    if (bc == BcMode::Strong) {
        if (x_m.variant != Variant::Intertwined || y_m.variant != Variant::Intertwined)
            throw AssemblyError("strong elastic assembly needs intertwined M-column sets");
        exn = apply_strong_reset(x_n, true, true);
        eyn = apply_strong_reset(y_n, true, true);
        exm = x_m;
        eym = y_m;
        RequirementReport shared = check_elastic_requirements(x_n, x_m, y_n, y_m);
        for (const auto& c : shared.checks)
            if (!c.pass && c.name.rfind("shared", 0) == 0)
                throw AssemblyError("elastic requirement failed: " + c.name);
        RequirementReport rep = check_elastic_requirements(exn, exm, eyn, eym);
        for (const auto& c : rep.checks)
            if (!c.pass && c.name.rfind("skew", 0) == 0)
                throw AssemblyError("elastic requirement failed: " + c.name + " " + c.detail);
    } else {
        for (const auto* s : {&x_n, &x_m, &y_n, &y_m})
            if (s->variant != Variant::Extrapolating || s->reset_left || s->reset_right)
                throw AssemblyError("weak elastic assembly uses unreset extrapolating sets");
        RequirementReport shared = check_elastic_requirements(x_n, x_m, y_n, y_m);
        for (const auto& c : shared.checks)
            if (!c.pass && c.name.rfind("shared", 0) == 0)
                throw AssemblyError("elastic requirement failed: " + c.name);
        exn = weak_effective_set(x_n, Column1D::StressOnN);
        eyn = weak_effective_set(y_n, Column1D::StressOnN);
        exm = weak_effective_set(x_m, Column1D::StressOnM);
        eym = weak_effective_set(y_m, Column1D::StressOnM);
        RequirementReport rep = check_elastic_requirements(exn, exm, eyn, eym);
        for (const auto& c : rep.checks)
            if (!c.pass && c.name.rfind("skew", 0) == 0)
                throw AssemblyError("elastic requirement failed: " + c.name + " " + c.detail);
    }

    SemiDiscreteSystem sys;
    sys.equation = Equation::Elastic2D;
    sys.bc_mode = bc;
    sys.dimension = 2;
    sys.x = AxisGrid{x_n.n_count, dx, 0.0};
    sys.y = AxisGrid{y_n.n_count, dy, 0.0};

    using G = GridKind;
    enum { VX = 0, VY = 1, SXX = 2, SYY = 3, SXY = 4 };
    sys.vars.push_back(detail::make_variable("Vx", VarKind::Velocity, G::N, G::M, sys.x, sys.y, 2, exm.AN, &eyn.AM));
    sys.vars.push_back(detail::make_variable("Vy", VarKind::Velocity, G::M, G::N, sys.x, sys.y, 2, exn.AM, &eym.AN));
    sys.vars.push_back(detail::make_variable("Sxx", VarKind::Stress, G::M, G::M, sys.x, sys.y, 2, exm.AM, &eyn.AM));
    sys.vars.push_back(detail::make_variable("Syy", VarKind::Stress, G::M, G::M, sys.x, sys.y, 2, exm.AM, &eyn.AM));
    sys.vars.push_back(detail::make_variable("Sxy", VarKind::Stress, G::N, G::N, sys.x, sys.y, 2, exn.AN, &eyn.AN));

    auto pvx = detail::points(sys.x, G::N, sys.y, G::M, 2);
    auto pvy = detail::points(sys.x, G::M, sys.y, G::N, 2);
    auto pnn = detail::points(sys.x, G::M, sys.y, G::M, 2);
    auto pxy = detail::points(sys.x, G::N, sys.y, G::N, 2);

    auto rho_vx = detail::sample(pvx, medium.rho);
    auto rho_vy = detail::sample(pvy, medium.rho);
    auto lam = detail::sample(pnn, medium.lambda);
    auto mu_nn = detail::sample(pnn, medium.mu);
    auto mu_xy = detail::sample(pxy, medium.mu);
    detail::require_positive(rho_vx, "rho");
    detail::require_positive(rho_vy, "rho");
    detail::require_positive(mu_nn, "mu");
    detail::require_positive(mu_xy, "mu");

    const size_t nn = pnn.size();
    std::vector<double> c11(nn), c12(nn), s11(nn), s12(nn);
    for (size_t i = 0; i < nn; ++i) {
        c11[i] = lam[i] + 2.0 * mu_nn[i];
        c12[i] = lam[i];
        if (!(c11[i] > 0.0) || !(lam[i] + mu_nn[i] > 0.0))
            throw AssemblyError("medium: need lambda + 2 mu > 0 and lambda + mu > 0");
        const double det = c11[i] * c11[i] - c12[i] * c12[i];
        s11[i] = c11[i] / det;
        s12[i] = -c12[i] / det;
    }
    auto inv = [](std::vector<double> v) {
        for (auto& a : v) a = 1.0 / a;
        return v;
    };

    const bool strong = bc == BcMode::Strong;
    auto ones_mx = detail::boundary_mask(sys.x.count(G::M), false);
    auto ones_my = detail::boundary_mask(sys.y.count(G::M), false);
    auto mask_nx = detail::boundary_mask(sys.x.count(G::N), strong);
    auto mask_ny = detail::boundary_mask(sys.y.count(G::N), strong);

    const double idx = 1.0 / dx, idy = 1.0 / dy;
    auto op = [](const RationalMatrix& a, double s) { return SparseOp::from_rational(a, s); };
    auto& V = sys.vars;

    // velocities
    sys.terms.push_back(Term{VX, SXX, 0, op(exm.DM, idx), detail::masked(inv(rho_vx), V[VX], 0, ones_my)});
    sys.terms.push_back(Term{VX, SXY, 1, op(eyn.DN, idy), detail::masked(inv(rho_vx), V[VX], 1, mask_nx)});
    sys.terms.push_back(Term{VY, SXY, 0, op(exn.DN, idx), detail::masked(inv(rho_vy), V[VY], 0, mask_ny)});
    sys.terms.push_back(Term{VY, SYY, 1, op(eym.DM, idy), detail::masked(inv(rho_vy), V[VY], 1, ones_mx)});
    // normal stresses, stiffness form
    sys.terms.push_back(Term{SXX, VX, 0, op(exm.DN, idx), c11});
    sys.terms.push_back(Term{SXX, VY, 1, op(eym.DN, idy), c12});
    sys.terms.push_back(Term{SYY, VX, 0, op(exm.DN, idx), c12});
    sys.terms.push_back(Term{SYY, VY, 1, op(eym.DN, idy), c11});
    // shear stress
    sys.terms.push_back(Term{SXY, VY, 0, op(exn.DM, idx), detail::masked(mu_xy, V[SXY], 0, mask_ny)});
    sys.terms.push_back(Term{SXY, VX, 1, op(eyn.DM, idy), detail::masked(mu_xy, V[SXY], 1, mask_nx)});

    sys.energy.push_back(EnergyPair{VX, VX, rho_vx});
    sys.energy.push_back(EnergyPair{VY, VY, rho_vy});
    sys.energy.push_back(EnergyPair{SXX, SXX, s11});
    sys.energy.push_back(EnergyPair{SXX, SYY, s12});
    sys.energy.push_back(EnergyPair{SYY, SXX, s12});
    sys.energy.push_back(EnergyPair{SYY, SYY, s11});
    sys.energy.push_back(EnergyPair{SXY, SXY, inv(mu_xy)});

    V[VX].source_map.push_back({VX, inv(rho_vx)});
    V[VY].source_map.push_back({VY, inv(rho_vy)});
    V[SXX].source_map.push_back({SXX, c11});
    V[SXX].source_map.push_back({SYY, c12});
    V[SYY].source_map.push_back({SXX, c12});
    V[SYY].source_map.push_back({SYY, c11});
    V[SXY].source_map.push_back({SXY, mu_xy});

    if (strong) {
        Variable& s = V[SXY];
        for (int i = 0; i < s.nx; ++i)
            for (int j = 0; j < s.ny; ++j)
                if (i == 0 || j == 0 || i == s.nx - 1 || j == s.ny - 1) s.constrained[s.flat(i, j)] = 1;
    }

    auto rho_nn = detail::sample(pnn, medium.rho);
    for (size_t i = 0; i < nn; ++i)
        sys.max_speed = std::max(sys.max_speed, std::sqrt(c11[i] / rho_nn[i]));
    return sys;
}

}  // namespace sbpwave
