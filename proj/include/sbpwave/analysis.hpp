#pragma once

// Stability analysis, empirical CFL probes and manufactured-solution runs.

#include <cmath>
#include <complex>
#include <future>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sbpwave/assembly.hpp"
#include "sbpwave/rational.hpp"
#include "sbpwave/wavesim.hpp"

namespace sbpwave {

// ---------------------------------------------------------------------------
// Interior von Neumann analysis of the 4th-order staggered stencil

/// beta(cos(k dx)) for the two-step leapfrog amplification polynomial.
inline double beta_of(double c) {
    return c * c * c / 72.0 - 3.0 * c * c / 8.0 + 65.0 * c / 24.0 - 169.0 / 72.0;
}

inline Rational beta_of(const Rational& c) {
    return c * c * c / Rational(72) - Rational(3, 8) * c * c + Rational(65, 24) * c - Rational(169, 72);
}

/// Exact square root of a rational that is a perfect square; throws otherwise.
inline Rational exact_sqrt(const Rational& r) {
    if (r < Rational(0)) throw std::domain_error("exact_sqrt of a negative number");
    auto isqrt = [](Rational::Int v) {
        auto s = static_cast<Rational::Int>(std::sqrt(static_cast<long double>(v)));
        while (s * s > v) --s;
        while ((s + 1) * (s + 1) <= v) ++s;
        if (s * s != v) throw std::domain_error("not a perfect square");
        return s;
    };
    return Rational(isqrt(r.num()), isqrt(r.den()));
}

/// Minimum of beta over c in [-1, 1]: endpoints and the real roots of
/// beta'(c) = c^2/24 - 3c/4 + 65/24 (i.e. c^2 - 18c + 65 = 0, c = 5, 13).
inline Rational beta_minimum() {
    std::vector<Rational> candidates{Rational(-1), Rational(1)};
    // integer roots of c^2 - 18 c + 65 = (c - 5)(c - 13)
    for (long long c : {5LL, 13LL})
        if (Rational(c) * Rational(c) - Rational(18) * Rational(c) + Rational(65) == Rational(0) &&
            Rational(c) >= Rational(-1) && Rational(c) <= Rational(1))
            candidates.push_back(Rational(c));
    Rational best = beta_of(candidates.front());
    for (const auto& c : candidates) best = std::min(best, beta_of(c));
    return best;
}

/// Largest C with (1 + beta C^2 / 2)^2 <= 1 for every admissible beta, i.e.
/// -1 <= 1 + beta C^2 / 2, so C^2 <= 4 / |min beta|.
inline Rational interior_cfl_limit() {
    Rational bmin = beta_minimum();
    return exact_sqrt(Rational(4) / abs(bmin));
}

struct GrowthFactors {
    std::complex<double> g1;
    std::complex<double> g2;
};

/// Roots of G^2 - 2(1 + beta C^2/2) G + 1 = 0.
inline GrowthFactors growth_factors(double beta, double courant) {
    const double b = 1.0 + beta * courant * courant / 2.0;
    const std::complex<double> disc = std::sqrt(std::complex<double>(b * b - 1.0, 0.0));
    return {b + disc, b - disc};
}

// ---------------------------------------------------------------------------
// Spectral radius

struct SpectralReport {
    std::string description;
    double spectral_radius = 0.0;
    double lambda_max = 0.0;
    double lambda_min = 0.0;
    double residual = 0.0;
    int dimension = 0;
};

class SpectralError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline Eigen::MatrixXd dense_block(const SemiDiscreteSystem& sys, const std::vector<int>& rows_vars,
                                   const std::vector<int>& cols_vars, const std::vector<size_t>& offset) {
    size_t nr = 0, nc = 0;
    for (int v : rows_vars) nr += sys.vars[v].size();
    for (int v : cols_vars) nc += sys.vars[v].size();
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nr), static_cast<Eigen::Index>(nc));
    for (const auto& t : sys.terms) {
        if (sys.vars[t.target].kind != sys.vars[rows_vars.front()].kind) continue;
        const Variable& tv = sys.vars[t.target];
        const Variable& sv = sys.vars[t.source];
        const size_t ro = offset[t.target], co = offset[t.source];
        for (int i = 0; i < tv.nx; ++i)
            for (int j = 0; j < tv.ny; ++j) {
                const size_t r = tv.flat(i, j);
                const double c = t.coef[r];
                if (c == 0.0) continue;
                const int line = t.axis == 0 ? i : j;
                for (int p = t.op.row_ptr[line]; p < t.op.row_ptr[line + 1]; ++p) {
                    const int kk = t.op.col[p];
                    const size_t s = t.axis == 0 ? sv.flat(kk, j) : sv.flat(i, kk);
                    k(static_cast<Eigen::Index>(ro + r), static_cast<Eigen::Index>(co + s)) += c * t.op.val[p];
                }
            }
    }
    return k;
}

}  // namespace detail

/// sqrt(lambda_max) of W = H_V^{-1/2} K^T H_S K H_V^{-1/2}, where K maps
/// velocities to stress rates and H_V, H_S are the diagonal energy weights.
/// Needs a diagonal energy (1D and acoustic systems).
inline SpectralReport spectral_radius(const SemiDiscreteSystem& sys) {
    for (const auto& p : sys.energy)
        if (p.a != p.b) throw SpectralError("spectral_radius needs a diagonal energy (not elastic)");
    std::vector<int> vel, str;
    std::vector<size_t> offset(sys.vars.size(), 0);
    size_t nv = 0, ns = 0;
    for (size_t v = 0; v < sys.vars.size(); ++v) {
        if (sys.vars[v].kind == VarKind::Velocity) {
            vel.push_back(static_cast<int>(v));
            offset[v] = nv;
            nv += sys.vars[v].size();
        } else {
            str.push_back(static_cast<int>(v));
            offset[v] = ns;
            ns += sys.vars[v].size();
        }
    }
    Eigen::MatrixXd k = detail::dense_block(sys, str, vel, offset);
    Eigen::VectorXd hv(static_cast<Eigen::Index>(nv)), hs(static_cast<Eigen::Index>(ns));
    for (const auto& p : sys.energy) {
        const Variable& var = sys.vars[p.a];
        Eigen::VectorXd& h = var.kind == VarKind::Velocity ? hv : hs;
        for (size_t i = 0; i < var.size(); ++i)
            h(static_cast<Eigen::Index>(offset[p.a] + i)) = var.weight[i] * p.coef[i];
    }
    Eigen::VectorXd hv_isqrt = hv.cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd b = k * hv_isqrt.asDiagonal();
    Eigen::MatrixXd w = b.transpose() * hs.asDiagonal() * b;
    w = 0.5 * (w + w.transpose());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w);
    if (es.info() != Eigen::Success) throw SpectralError("eigensolver did not converge");
    const Eigen::Index top = es.eigenvalues().size() - 1;
    SpectralReport rep;
    rep.dimension = static_cast<int>(nv);
    rep.lambda_max = es.eigenvalues()(top);
    rep.lambda_min = es.eigenvalues()(0);
    Eigen::VectorXd v = es.eigenvectors().col(top);
    rep.residual = (w * v - rep.lambda_max * v).norm() / rep.lambda_max;
    rep.spectral_radius = std::sqrt(rep.lambda_max);
    rep.description = std::string(to_string(sys.equation)) + " " + to_string(sys.bc_mode);
    return rep;
}

/// Interior stencil on a periodic grid of `cells` cells.
inline SpectralReport periodic_spectral_radius(int cells, double dx) {
    if (cells < 4) throw std::invalid_argument("periodic grid needs at least 4 cells");
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(cells, cells);
    const double st[4] = {1.0 / 24.0, -9.0 / 8.0, 9.0 / 8.0, -1.0 / 24.0};
    for (int i = 0; i < cells; ++i)
        for (int k = 0; k < 4; ++k) d(i, ((i + k - 1) % cells + cells) % cells) += st[k] / dx;
    Eigen::MatrixXd w = d.transpose() * d;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w);
    if (es.info() != Eigen::Success) throw SpectralError("eigensolver did not converge");
    SpectralReport rep;
    rep.dimension = cells;
    rep.lambda_max = es.eigenvalues()(cells - 1);
    rep.lambda_min = es.eigenvalues()(0);
    Eigen::VectorXd v = es.eigenvectors().col(cells - 1);
    rep.residual = (w * v - rep.lambda_max * v).norm() / rep.lambda_max;
    rep.spectral_radius = std::sqrt(rep.lambda_max);
    rep.description = "periodic";
    return rep;
}

/// Leapfrog is stable iff this is <= 2.
inline double scaled_radius(const SpectralReport& r, double courant, double dx) {
    return r.spectral_radius * courant * dx;
}

// ---------------------------------------------------------------------------
// CFL probe

struct ProbeOptions {
    long steps = 20000;
    double lo = 0.0;
    double hi = 1.2;
    double tolerance = 1e-3;
    double growth_limit = 1e3;
    unsigned seed = 20240917;
};

struct ProbeResult {
    double courant = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    int trials = 0;
};

/// Broadband start: uniform random values, constrained points zeroed.
inline Fields random_state(const SemiDiscreteSystem& sys, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Fields f = sys.zero_fields();
    for (size_t v = 0; v < f.size(); ++v)
        for (size_t i = 0; i < f[v].size(); ++i) f[v][i] = sys.vars[v].constrained[i] ? 0.0 : u(rng);
    return f;
}

/// True if the amplitude sqrt(E(t)/E(0)) stays below the growth limit.
inline bool is_stable(const SemiDiscreteSystem& sys, double courant, const ProbeOptions& opt) {
    LeapfrogStepper stepper(sys, sys.dt_for_courant(courant));
    WaveState s = stepper.initial_state();
    s.fields = random_state(sys, opt.seed);
    const double e0 = discrete_energy(sys, s.fields);
    const double limit = opt.growth_limit * opt.growth_limit * e0;
    for (long n = 0; n < opt.steps; ++n) {
        try {
            stepper.step(s);
        } catch (const BlowUpError&) {
            return false;
        }
        if (s.step % LeapfrogStepper::kGuardStride == 0) {
            const double e = discrete_energy(sys, s.fields);
            if (!std::isfinite(e) || e > limit) return false;
        }
    }
    return true;
}

/// Bisection for the largest stable Courant number; returns the midpoint of
/// the final bracket.
inline ProbeResult cfl_probe(const SemiDiscreteSystem& sys, const ProbeOptions& opt = {}) {
    ProbeResult r;
    double lo = opt.lo, hi = opt.hi;
    if (is_stable(sys, hi, opt)) {
        r.courant = r.lo = r.hi = hi;
        r.trials = 1;
        return r;
    }
    r.trials = 1;
    while (hi - lo > opt.tolerance) {
        const double mid = 0.5 * (lo + hi);
        (is_stable(sys, mid, opt) ? lo : hi) = mid;
        ++r.trials;
    }
    r.lo = lo;
    r.hi = hi;
    r.courant = 0.5 * (lo + hi);
    return r;
}

// ---------------------------------------------------------------------------
// Manufactured solutions

enum class MmsCase { Wave1D, Elastic2D };

inline const char* to_string(MmsCase c) { return c == MmsCase::Wave1D ? "wave1d" : "elastic2d"; }

class MmsError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// p = sin(8 pi x) sin(8 pi t), v = -cos(8 pi x) cos(8 pi t) on [0, 1].
/// Elastic: k = 2 pi, w = sqrt(2) k on the unit square, rho = mu = 1.
inline double mms_exact(MmsCase c, const std::string& var, double x, double y, double t) {
    using std::cos;
    using std::sin;
    constexpr double pi = std::numbers::pi;
    if (c == MmsCase::Wave1D) {
        if (var == "V") return -cos(8 * pi * x) * cos(8 * pi * t);
        if (var == "S") return sin(8 * pi * x) * sin(8 * pi * t);
    } else {
        const double k = 2 * pi;
        const double w = std::numbers::sqrt2 * k;
        if (var == "Sxx") return 2 * k * sin(w * t) * sin(k * x) * sin(k * y);
        if (var == "Syy") return -2 * k * sin(w * t) * sin(k * x) * sin(k * y);
        if (var == "Sxy") return 0.0;
        if (var == "Vx") return -w * cos(w * t) * sin(k * y) * cos(k * x);
        if (var == "Vy") return w * cos(w * t) * cos(k * y) * sin(k * x);
    }
    throw MmsError("no manufactured field for variable " + var);
}

inline void check_mms_system(const SemiDiscreteSystem& sys, MmsCase c) {
    const bool ok = c == MmsCase::Wave1D ? sys.equation == Equation::Wave1D : sys.equation == Equation::Elastic2D;
    if (!ok) throw MmsError("system does not match the manufactured case");
    const double tol = 1e-12;
    if (std::abs(sys.x.length() - 1.0) > tol || (sys.dimension == 2 && std::abs(sys.y.length() - 1.0) > tol))
        throw MmsError("manufactured solutions live on the unit interval/square");
    // Unit speed and unit density/shear modulus are implied by the energy
    // coefficients: rho on velocity pairs, beta or 1/mu on the others.
    for (const auto& p : sys.energy) {
        const Variable& v = sys.vars[p.a];
        for (double a : p.coef) {
            double expect = 1.0;
            if (c == MmsCase::Elastic2D && v.kind == VarKind::Stress && v.name != "Sxy") continue;
            if (std::abs(a - expect) > tol) throw MmsError("manufactured solution needs rho = 1 and unit stiffness");
        }
    }
}

/// Stress fields at t, velocity fields at t - dt/2.
inline Fields mms_fields(const SemiDiscreteSystem& sys, MmsCase c, double t, double dt) {
    Fields f = sys.zero_fields();
    for (size_t v = 0; v < sys.vars.size(); ++v) {
        const Variable& var = sys.vars[v];
        const double tv = var.kind == VarKind::Velocity ? t - 0.5 * dt : t;
        for (int i = 0; i < var.nx; ++i)
            for (int j = 0; j < var.ny; ++j) {
                const size_t idx = var.flat(i, j);
                if (var.constrained[idx]) continue;
                f[v][idx] = mms_exact(c, var.name, sys.x.coord(var.gx, i),
                                      sys.dimension == 2 ? sys.y.coord(var.gy, j) : 0.0, tv);
            }
    }
    return f;
}

inline WaveState mms_initial_state(const SemiDiscreteSystem& sys, MmsCase c, double dt) {
    check_mms_system(sys, c);
    return WaveState{mms_fields(sys, c, 0.0, dt), 0, dt};
}

/// Energy-norm error sqrt(2 E(U - U_exact)) against the staggered samples.
inline double mms_error(const SemiDiscreteSystem& sys, const WaveState& state, MmsCase c) {
    Fields exact = mms_fields(sys, c, state.time(), state.dt);
    Fields e = state.fields;
    for (size_t v = 0; v < e.size(); ++v)
        for (size_t i = 0; i < e[v].size(); ++i) e[v][i] -= exact[v][i];
    return std::sqrt(2.0 * discrete_energy(sys, e));
}

struct ConvergenceRow {
    int ppw = 0;
    int n_count = 0;
    double error = 0.0;
    std::optional<double> rate;
    std::string failure;
};

struct ConvergenceReport {
    MmsCase which = MmsCase::Wave1D;
    BcMode bc_mode = BcMode::Strong;
    Column1D column = Column1D::StressOnN;
    double dt = 0.0;
    long steps = 0;
    double final_time = 0.0;
    std::vector<ConvergenceRow> rows;
};

/// Unit-medium system for a manufactured case at the given points per
/// wavelength (the 1D wavelength is 1/4, the elastic one 1).
inline SemiDiscreteSystem mms_system(MmsCase c, BcMode bc, int ppw, Column1D column = Column1D::StressOnN) {
    if (c == MmsCase::Wave1D) {
        const int cells = 4 * ppw;
        const double dx = 1.0 / cells;
        Variant var = (column == Column1D::StressOnM && bc == BcMode::Strong) ? Variant::Intertwined
                                                                               : Variant::Extrapolating;
        return assemble_1d(build_operator_set(var, cells + 1), MediumSpec::homogeneous_acoustic(1, 1.0, 1.0), bc, dx,
                           column);
    }
    const int cells = ppw;
    const double h = 1.0 / cells;
    OperatorSet1D ext = build_operator_set(Variant::Extrapolating, cells + 1);
    OperatorSet1D m = bc == BcMode::Strong ? build_operator_set(Variant::Intertwined, cells + 1) : ext;
    return assemble_2d_elastic(ext, m, ext, m, MediumSpec::homogeneous_elastic(1.0, 1.0, 1.0), bc, h, h);
}

inline ConvergenceRow mms_run(MmsCase c, BcMode bc, int ppw, double dt, long steps,
                              Column1D column = Column1D::StressOnN) {
    ConvergenceRow row;
    row.ppw = ppw;
    try {
        SemiDiscreteSystem sys = mms_system(c, bc, ppw, column);
        row.n_count = sys.x.n_count;
        LeapfrogStepper stepper(sys, dt);
        WaveState s = mms_initial_state(sys, c, dt);
        for (long n = 0; n < steps; ++n) stepper.step(s);
        stepper.guard(s);
        row.error = mms_error(sys, s, c);
    } catch (const BlowUpError& e) {
        row.error = NAN;
        row.failure = e.what();
    }
    return row;
}

/// Runs every resolution (concurrently when threads > 1) and fills in
/// rates log2(e_{k-1}/e_k) for successive doublings.
inline ConvergenceReport convergence_suite(MmsCase c, BcMode bc, const std::vector<int>& ppws, double dt, long steps,
                                           Column1D column = Column1D::StressOnN, unsigned threads = 1) {
    ConvergenceReport rep;
    rep.which = c;
    rep.bc_mode = bc;
    rep.column = column;
    rep.dt = dt;
    rep.steps = steps;
    rep.final_time = dt * static_cast<double>(steps);
    rep.rows.resize(ppws.size());
    if (threads <= 1) {
        for (size_t i = 0; i < ppws.size(); ++i) rep.rows[i] = mms_run(c, bc, ppws[i], dt, steps, column);
    } else {
        std::vector<std::future<ConvergenceRow>> jobs;
        for (size_t i = 0; i < ppws.size(); ++i)
            jobs.push_back(std::async(std::launch::async, mms_run, c, bc, ppws[i], dt, steps, column));
        for (size_t i = 0; i < ppws.size(); ++i) rep.rows[i] = jobs[i].get();
    }
    for (size_t i = 1; i < rep.rows.size(); ++i) {
        const auto& a = rep.rows[i - 1];
        const auto& b = rep.rows[i];
        if (a.failure.empty() && b.failure.empty() && b.error > 0.0)
            rep.rows[i].rate = std::log(a.error / b.error) / std::log(static_cast<double>(b.ppw) / a.ppw);
    }
    return rep;
}

}  // namespace sbpwave
