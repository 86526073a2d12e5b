#pragma once

// Staggered leapfrog time stepping, point sources, receivers and energy.
//
// A state at step n holds velocities at t = (n - 1/2) dt and stresses at
// t = n dt. One step advances velocities with the current stresses, then
// stresses with the new velocities.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sbpwave/assembly.hpp"

namespace sbpwave {

inline double ricker(double t, double f0, double t0, double amplitude) {
    const double a = std::numbers::pi * std::numbers::pi * f0 * f0 * (t - t0) * (t - t0);
    return amplitude * (1.0 - 2.0 * a) * std::exp(-a);
}

struct SourceSpec {
    std::string target;
    int ix = 0;
    int iy = 0;
    double f0 = 5.0;
    double t0 = 0.25;
    double amplitude = 1.0;
};

struct ReceiverSpec {
    std::string variable;
    int ix = 0;
    int iy = 0;
    std::string label;
};

struct WaveState {
    Fields fields;
    long step = 0;
    double dt = 0.0;

    double time() const { return static_cast<double>(step) * dt; }
};

class SourceError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class BlowUpError : public std::runtime_error {
public:
    BlowUpError(long step, double max_abs)
        : std::runtime_error("solution blew up at step " + std::to_string(step) +
                             " (max |field| = " + std::to_string(max_abs) + ")"),
          step_(step),
          max_abs_(max_abs) {}
    long step() const { return step_; }
    double max_abs() const { return max_abs_; }

private:
    long step_;
    double max_abs_;
};

/// A source with its rate contributions precomputed.
struct ResolvedSource {
    SourceSpec spec;
    VarKind kind = VarKind::Stress;
    struct Hit {
        int var;
        size_t idx;
        double factor;
    };
    std::vector<Hit> hits;
};

inline const Variable& checked_point(const SemiDiscreteSystem& sys, const std::string& name, int ix, int iy,
                                     size_t& idx) {
    int v;
    try {
        v = sys.index_of(name);
    } catch (const std::out_of_range&) {
        throw SourceError("unknown variable '" + name + "'");
    }
    const Variable& var = sys.vars[v];
    if (ix < 0 || ix >= var.nx || iy < 0 || iy >= var.ny)
        throw SourceError("index (" + std::to_string(ix) + ", " + std::to_string(iy) + ") outside the grid of " +
                          name);
    idx = var.flat(ix, iy);
    return var;
}

/// Discrete delta: the wavelet enters the rate as s / (m a dx^d), with m the
/// material factor and a dx^d the quadrature weight of the point.
inline ResolvedSource resolve_source(const SemiDiscreteSystem& sys, const SourceSpec& spec) {
    if (!(spec.f0 > 0.0)) throw SourceError("source f0 must be positive");
    size_t idx;
    const Variable& var = checked_point(sys, spec.target, spec.ix, spec.iy, idx);
    if (sys.bc_mode == BcMode::Strong && var.constrained[idx])
        throw SourceError("source on constrained surface point of " + spec.target + " under strong imposition");
    ResolvedSource r;
    r.spec = spec;
    r.kind = var.kind;
    for (const auto& [target, coef] : var.source_map) r.hits.push_back({target, idx, coef[idx] / var.weight[idx]});
    return r;
}

inline void inject_source(Fields& rates, const ResolvedSource& src, double t) {
    const double s = ricker(t, src.spec.f0, src.spec.t0, src.spec.amplitude);
    for (const auto& h : src.hits) rates[h.var][h.idx] += s * h.factor;
}

inline double discrete_energy(const SemiDiscreteSystem& sys, const Fields& f) {
    double e = 0.0;
    for (const auto& p : sys.energy) {
        const auto& w = sys.vars[p.a].weight;
        const auto& a = f[p.a];
        const auto& b = f[p.b];
        for (size_t i = 0; i < a.size(); ++i) e += w[i] * a[i] * p.coef[i] * b[i];
    }
    return 0.5 * e;
}

/// Energy conserved by the staggered scheme. `before` holds (V at n - 1/2,
/// S at n), `after` the state one step later; velocity terms use the product
/// of the two half levels.
inline double leapfrog_energy(const SemiDiscreteSystem& sys, const Fields& before, const Fields& after) {
    double e = 0.0;
    for (const auto& p : sys.energy) {
        const auto& w = sys.vars[p.a].weight;
        if (sys.vars[p.a].kind == VarKind::Velocity) {
            for (size_t i = 0; i < w.size(); ++i)
                e += 0.5 * w[i] * p.coef[i] * (before[p.a][i] * after[p.b][i] + after[p.a][i] * before[p.b][i]);
        } else {
            for (size_t i = 0; i < w.size(); ++i) e += w[i] * before[p.a][i] * p.coef[i] * before[p.b][i];
        }
    }
    return 0.5 * e;
}

inline double max_abs(const Fields& f) {
    double m = 0.0;
    for (const auto& v : f)
        for (double a : v) m = std::max(m, std::isfinite(a) ? std::abs(a) : INFINITY);
    return m;
}

class LeapfrogStepper {
public:
    static constexpr long kGuardStride = 100;

    LeapfrogStepper(const SemiDiscreteSystem& sys, double dt, std::vector<ResolvedSource> sources = {})
        : sys_(sys), dt_(dt), sources_(std::move(sources)), rates_(sys.zero_fields()) {
        if (!(dt > 0.0) && !(dt < 0.0)) throw std::invalid_argument("time step must be nonzero");
    }

    WaveState initial_state() const { return WaveState{sys_.zero_fields(), 0, dt_}; }

    void step(WaveState& s) {
        const double tn = static_cast<double>(s.step) * dt_;
        advance(s.fields, VarKind::Velocity, tn, dt_);
        advance(s.fields, VarKind::Stress, tn + 0.5 * dt_, dt_);
        ++s.step;
        if (s.step % kGuardStride == 0) guard(s);
    }

    /// Exact inverse of step() in exact arithmetic.
    void step_back(WaveState& s) {
        const double tn = static_cast<double>(s.step - 1) * dt_;
        advance(s.fields, VarKind::Stress, tn + 0.5 * dt_, -dt_);
        advance(s.fields, VarKind::Velocity, tn, -dt_);
        --s.step;
    }

    void guard(const WaveState& s) const {
        for (const auto& v : s.fields)
            for (double a : v)
                if (!std::isfinite(a)) throw BlowUpError(s.step, max_abs(s.fields));
    }

    double dt() const { return dt_; }
    const SemiDiscreteSystem& system() const { return sys_; }

private:
    void advance(Fields& f, VarKind kind, double t, double h) {
        sys_.compute_rates(kind, f, rates_);
        for (const auto& src : sources_)
            if (src.kind == kind) inject_source(rates_, src, t);
        for (size_t v = 0; v < sys_.vars.size(); ++v) {
            if (sys_.vars[v].kind != kind) continue;
            auto& u = f[v];
            const auto& r = rates_[v];
            for (size_t i = 0; i < u.size(); ++i) u[i] += h * r[i];
        }
    }

    const SemiDiscreteSystem& sys_;
    double dt_;
    std::vector<ResolvedSource> sources_;
    Fields rates_;
};

inline void step_leapfrog(const SemiDiscreteSystem& sys, WaveState& state, const std::vector<ResolvedSource>& sources) {
    LeapfrogStepper(sys, state.dt, sources).step(state);
}

// ---------------------------------------------------------------------------
// Runs

struct RunSpec {
    double dt = 0.0;
    long steps = 0;
    std::vector<SourceSpec> sources;
    std::vector<ReceiverSpec> receivers;
    long energy_stride = 10;
};

struct Trace {
    std::string label;
    std::string variable;
    VarKind kind = VarKind::Stress;
    std::vector<double> values;
};

struct SimResult {
    /// Stress receivers are sampled at t = n dt (n = 0..steps), velocity
    /// receivers at t = (n + 1/2) dt (n = 0..steps-1).
    std::vector<double> stress_times;
    std::vector<double> velocity_times;
    std::vector<Trace> traces;
    /// Leapfrog-conserved energy at t = n dt for every energy_stride-th n < steps.
    std::vector<double> energy_times;
    std::vector<double> energy;
    double wall_seconds = 0.0;
};

inline SimResult run(const SemiDiscreteSystem& sys, const RunSpec& spec) {
    if (!(spec.dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (spec.steps <= 0) throw std::invalid_argument("steps must be positive");
    auto t_start = std::chrono::steady_clock::now();

    std::vector<ResolvedSource> sources;
    for (const auto& s : spec.sources) sources.push_back(resolve_source(sys, s));

    struct Probe {
        int var;
        size_t idx;
    };
    std::vector<Probe> probes;
    SimResult res;
    for (const auto& r : spec.receivers) {
        size_t idx;
        const Variable& var = checked_point(sys, r.variable, r.ix, r.iy, idx);
        probes.push_back({sys.index_of(r.variable), idx});
        res.traces.push_back(Trace{r.label, r.variable, var.kind, {}});
    }

    LeapfrogStepper stepper(sys, spec.dt, std::move(sources));
    WaveState state = stepper.initial_state();
    auto sample = [&](VarKind kind) {
        for (size_t k = 0; k < probes.size(); ++k)
            if (res.traces[k].kind == kind) res.traces[k].values.push_back(state.fields[probes[k].var][probes[k].idx]);
    };
    // Energy at level n needs the velocity of the following half step.
    std::optional<Fields> pending;
    auto finish_energy = [&]() {
        if (!pending) return;
        res.energy_times.push_back(state.time() - spec.dt);
        res.energy.push_back(leapfrog_energy(sys, *pending, state.fields));
        pending.reset();
    };

    res.stress_times.push_back(0.0);
    sample(VarKind::Stress);
    if (spec.energy_stride > 0) pending = state.fields;
    for (long n = 0; n < spec.steps; ++n) {
        stepper.step(state);
        finish_energy();
        res.velocity_times.push_back((static_cast<double>(n) + 0.5) * spec.dt);
        sample(VarKind::Velocity);
        res.stress_times.push_back(state.time());
        sample(VarKind::Stress);
        if (spec.energy_stride > 0 && state.step % spec.energy_stride == 0 && n + 1 < spec.steps)
            pending = state.fields;
    }
    stepper.guard(state);
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return res;
}

// ---------------------------------------------------------------------------
// CSV

/// Shortest decimal that round-trips to the same double.
inline std::string format_double(double v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

/// One CSV per time level: writes the traces of the given kind.
inline void write_traces_csv(std::ostream& os, const SimResult& r, VarKind kind) {
    const auto& times = kind == VarKind::Stress ? r.stress_times : r.velocity_times;
    os << "t";
    for (const auto& tr : r.traces)
        if (tr.kind == kind) os << ',' << tr.label;
    os << '\n';
    for (size_t i = 0; i < times.size(); ++i) {
        os << format_double(times[i]);
        for (const auto& tr : r.traces)
            if (tr.kind == kind) os << ',' << format_double(tr.values[i]);
        os << '\n';
    }
}

inline void write_energy_csv(std::ostream& os, const SimResult& r) {
    os << "t,E\n";
    for (size_t i = 0; i < r.energy.size(); ++i)
        os << format_double(r.energy_times[i]) << ',' << format_double(r.energy[i]) << '\n';
}

}  // namespace sbpwave
