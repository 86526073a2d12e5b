// sbpwave command-line front end.
//
// Exit codes: 0 success, 2 config error, 3 numerical blow-up, 4 invariant
// failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sbpwave/analysis.hpp"
#include "sbpwave/assembly.hpp"
#include "sbpwave/config.hpp"
#include "sbpwave/operators.hpp"
#include "sbpwave/wavesim.hpp"

#ifndef SBPWAVE_PRESET_DIR
#define SBPWAVE_PRESET_DIR "presets"
#endif

namespace fs = std::filesystem;
using namespace sbpwave;

namespace {

enum Exit { kOk = 0, kConfig = 2, kBlowUp = 3, kInvariant = 4 };

struct InvariantFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

fs::path preset_dir() {
    if (const char* env = std::getenv("SBPWAVE_PRESETS")) return env;
    return SBPWAVE_PRESET_DIR;
}

struct Source {
    std::string config;
    std::string preset;
};

SimConfig load(const Source& src, std::string* name = nullptr) {
    fs::path path;
    if (!src.preset.empty()) {
        path = preset_dir() / (src.preset + ".ini");
        if (!fs::exists(path)) throw ConfigError("no preset named '" + src.preset + "' in " + preset_dir().string());
        if (name) *name = src.preset;
    } else if (!src.config.empty()) {
        path = src.config;
        if (name) *name = path.stem().string();
    } else {
        throw ConfigError("need --config or --preset");
    }
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path.string());
    return parse_config(in);
}

void add_source_options(CLI::App* cmd, Source& src) {
    auto* c = cmd->add_option("--config", src.config, "INI experiment config");
    auto* p = cmd->add_option("--preset", src.preset, "name of a config in the presets directory");
    c->excludes(p);
}

// A directory argument gets a default file name inside it.
fs::path file_target(const std::string& out, const std::string& fallback) {
    fs::path p(out);
    if (fs::is_directory(p) || out.back() == '/') p /= fallback;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return p;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream os(p);
    if (!os) throw ConfigError("cannot write " + p.string());
    return os;
}

// ---------------------------------------------------------------------------

int cmd_operators(const std::string& variant, int n, const std::string& reset, const std::string& out) {
    Variant v;
    if (variant == "extrapolating")
        v = Variant::Extrapolating;
    else if (variant == "intertwined")
        v = Variant::Intertwined;
    else
        throw ConfigError("unknown variant '" + variant + "'");
    OperatorSet1D set;
    try {
        set = build_operator_set(v, n);
    } catch (const OperatorSizeError& e) {
        throw ConfigError(e.what());
    }
    if (reset == "left" || reset == "both") set = apply_strong_reset(set, true, false);
    if (reset == "right" || reset == "both") set = apply_strong_reset(set, false, true);
    if (reset != "none" && reset != "left" && reset != "right" && reset != "both")
        throw ConfigError("unknown reset '" + reset + "'");

    if (out.empty()) {
        dump_operators(std::cout, set);
    } else {
        auto os = open_out(out);
        dump_operators(os, set);
    }
    bool ok = true;
    for (const auto& c : check_invariants(set)) {
        std::cerr << (c.pass ? "ok   " : "FAIL ") << c.name;
        if (!c.detail.empty()) std::cerr << "  " << c.detail;
        std::cerr << '\n';
        ok = ok && c.pass;
    }
    if (!ok) throw InvariantFailure("operator invariants failed");
    return kOk;
}

// ---------------------------------------------------------------------------

struct Overrides {
    std::vector<int> ppw;
    double dt = 0.0;
    long steps = 0;
};

void apply(SimConfig& c, const Overrides& o) {
    if (!o.ppw.empty()) {
        c.ppw = o.ppw;
        c.dx.reset();
    }
    if (o.dt > 0.0) c.dt = o.dt;
    if (o.steps > 0) c.steps = o.steps;
    validate(c);
}

int cmd_simulate(const Source& src, const Overrides& ov, std::string out) {
    std::string name;
    SimConfig cfg = load(src, &name);
    apply(cfg, ov);
    if (out.empty()) out = cfg.output_dir.empty() ? "out/" + name : cfg.output_dir;
    fs::create_directories(out);

    std::ostringstream manifest;
    manifest << "# resolved configuration\n";
    write_config(manifest, cfg);
    manifest << "\n# runs\n";

    for (const auto& res : resolutions(cfg)) {
        SemiDiscreteSystem sys = build_system(cfg, res.dx);
        RunSpec spec = build_run_spec(cfg, sys);
        manifest << "[run." << res.label << "]\n";
        manifest << "dx = " << format_double(res.dx) << '\n';
        manifest << "n_x = " << sys.x.n_count << '\n';
        if (sys.dimension == 2) manifest << "n_y = " << sys.y.n_count << '\n';
        manifest << "courant = " << format_double(sys.courant(cfg.dt)) << '\n';
        for (const auto& s : spec.sources) {
            const Variable& v = sys.vars[sys.index_of(s.target)];
            manifest << "source " << s.target << " index = " << s.ix << ' ' << s.iy << " at "
                     << format_double(sys.x.coord(v.gx, s.ix)) << ' '
                     << format_double(sys.dimension == 2 ? sys.y.coord(v.gy, s.iy) : 0.0) << '\n';
        }
        for (const auto& r : spec.receivers) {
            const Variable& v = sys.vars[sys.index_of(r.variable)];
            manifest << "receiver " << r.label << ' ' << r.variable << " index = " << r.ix << ' ' << r.iy << " at "
                     << format_double(sys.x.coord(v.gx, r.ix)) << ' '
                     << format_double(sys.dimension == 2 ? sys.y.coord(v.gy, r.iy) : 0.0) << '\n';
        }

        std::cerr << name << " " << res.label << ": " << cfg.steps << " steps, C = " << sys.courant(cfg.dt) << '\n';
        SimResult result;
        try {
            result = run(sys, spec);
        } catch (const BlowUpError& e) {
            manifest << "status = blow-up at step " << e.step() << '\n';
            auto os = open_out(fs::path(out) / "manifest.txt");
            os << manifest.str();
            throw;
        }
        manifest << "wall_seconds = " << format_double(result.wall_seconds) << "\n\n";

        bool any_velocity = false, any_stress = false;
        for (const auto& t : result.traces) (t.kind == VarKind::Velocity ? any_velocity : any_stress) = true;
        if (any_stress || !any_velocity) {
            auto os = open_out(fs::path(out) / ("traces_" + res.label + ".csv"));
            write_traces_csv(os, result, VarKind::Stress);
        }
        if (any_velocity) {
            auto os = open_out(fs::path(out) / ("traces_velocity_" + res.label + ".csv"));
            write_traces_csv(os, result, VarKind::Velocity);
        }
        auto es = open_out(fs::path(out) / ("energy_" + res.label + ".csv"));
        write_energy_csv(es, result);
    }
    auto os = open_out(fs::path(out) / "manifest.txt");
    os << manifest.str();
    std::cout << "wrote " << out << '\n';
    return kOk;
}

// ---------------------------------------------------------------------------

int cmd_spectrum(const Source& src, const Overrides& ov, double courant, const std::string& out) {
    SimConfig cfg = load(src);
    apply(cfg, ov);
    if (cfg.equation == Equation::Elastic2D) throw ConfigError("spectrum supports wave1d and acoustic2d systems");
    if (!(courant > 0.0)) courant = interior_cfl_limit().to_double();

    std::ostringstream csv;
    csv << "label,dx,spectral_radius,residual,courant,scaled_radius,max_courant,periodic_radius,periodic_scaled\n";
    std::cout << std::left << std::setw(10) << "run" << std::setw(14) << "dx" << std::setw(22) << "radius"
              << std::setw(18) << "scaled" << std::setw(22) << "periodic" << "periodic scaled\n";
    bool ok = true;
    for (const auto& res : resolutions(cfg)) {
        SemiDiscreteSystem sys = build_system(cfg, res.dx);
        SpectralReport r = spectral_radius(sys);
        SpectralReport p = periodic_spectral_radius(sys.x.n_count - 1, res.dx);
        // spectral radii are per unit wave speed when the medium is unit
        const double scale = res.dx * (cfg.dimension() == 2 ? 1.0 / std::sqrt(2.0) : 1.0);
        const double scaled = r.spectral_radius * courant * scale;
        const double pscaled = p.spectral_radius * courant * res.dx;
        csv << res.label << ',' << format_double(res.dx) << ',' << format_double(r.spectral_radius) << ','
            << format_double(r.residual) << ',' << format_double(courant) << ',' << format_double(scaled) << ','
            << format_double(2.0 / (r.spectral_radius * scale)) << ',' << format_double(p.spectral_radius) << ','
            << format_double(pscaled) << '\n';
        std::cout << std::setprecision(15) << std::setw(10) << res.label << std::setw(14) << res.dx << std::setw(22)
                  << r.spectral_radius << std::setw(18) << std::setprecision(12) << scaled << std::setw(22)
                  << std::setprecision(15) << p.spectral_radius << std::setprecision(12) << pscaled << '\n';
        if (r.residual > 1e-12 || r.lambda_min < -1e-9 * r.lambda_max) ok = false;
    }
    if (!out.empty()) {
        auto os = open_out(file_target(out, "spectrum.csv"));
        os << csv.str();
    }
    if (!ok) throw InvariantFailure("eigensolver residual above 1e-12 or negative eigenvalue");
    return kOk;
}

// ---------------------------------------------------------------------------

int cmd_cfl(const Source& src, const Overrides& ov, double tolerance) {
    SimConfig cfg = load(src);
    apply(cfg, ov);
    auto res = resolutions(cfg).front();
    SemiDiscreteSystem sys = build_system(cfg, res.dx);
    ProbeOptions opt;
    opt.steps = cfg.steps;
    opt.tolerance = tolerance;
    ProbeResult r = cfl_probe(sys, opt);
    std::cout << "system,n_x,steps,max_courant,lo,hi,trials\n";
    std::cout << to_string(cfg.equation) << '-' << to_string(cfg.bc_mode) << ',' << sys.x.n_count << ',' << opt.steps
              << ',' << format_double(r.courant) << ',' << format_double(r.lo) << ',' << format_double(r.hi) << ','
              << r.trials << '\n';
    return kOk;
}

// ---------------------------------------------------------------------------

void print_table(std::ostream& os, const ConvergenceReport& rep) {
    os << to_string(rep.which) << ' ' << to_string(rep.bc_mode)
       << (rep.which == MmsCase::Wave1D ? (rep.column == Column1D::StressOnN ? " (stress on N)" : " (stress on M)") : "")
       << ", dt = " << rep.dt << ", steps = " << rep.steps << ", T = " << rep.final_time << '\n';
    os << std::left << std::setw(8) << "ppw" << std::setw(14) << "error" << "rate\n";
    for (const auto& r : rep.rows) {
        std::ostringstream e;
        e << std::scientific << std::setprecision(4) << r.error;
        os << std::setw(8) << r.ppw << std::setw(14) << e.str();
        if (r.rate) os << std::fixed << std::setprecision(4) << *r.rate << std::defaultfloat;
        if (!r.failure.empty()) os << r.failure;
        os << '\n';
    }
}

int cmd_converge(const std::string& which, const std::string& bc, const std::string& column, std::vector<int> ppw,
                 double dt, long steps, bool full, unsigned threads, const std::string& out) {
    MmsCase c;
    if (which == "wave1d")
        c = MmsCase::Wave1D;
    else if (which == "elastic2d")
        c = MmsCase::Elastic2D;
    else
        throw ConfigError("unknown case '" + which + "'");
    BcMode mode = detail::parse_bc(bc);
    Column1D col = detail::parse_column(column);
    if (c == MmsCase::Elastic2D && col != Column1D::StressOnN) throw ConfigError("column applies to wave1d only");

    const bool desk = c == MmsCase::Elastic2D && !full;
    if (ppw.empty()) ppw = desk ? std::vector<int>{10, 20, 40, 80} : std::vector<int>{10, 20, 40, 80, 160};
    if (dt <= 0.0) dt = desk ? 1e-5 : 1e-6;
    if (steps <= 0) steps = desk ? 66667 : 666667;

    ConvergenceReport rep = convergence_suite(c, mode, ppw, dt, steps, col, threads);
    print_table(std::cout, rep);
    if (!out.empty()) {
        auto os = open_out(file_target(out, "converge_" + which + "_" + bc + ".csv"));
        os << "ppw,error,rate\n";
        for (const auto& r : rep.rows)
            os << r.ppw << ',' << format_double(r.error) << ',' << (r.rate ? format_double(*r.rate) : "") << '\n';
    }
    for (const auto& r : rep.rows)
        if (!r.failure.empty()) return kBlowUp;
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Staggered SBP wave solver: operators, simulation and stability analysis"};
    app.require_subcommand(1);

    std::string variant = "extrapolating", reset = "none", ops_out;
    int n_count = 20;
    auto* ops = app.add_subcommand("operators", "dump an operator set as exact rationals and check its invariants");
    ops->add_option("--variant", variant, "extrapolating | intertwined")->capture_default_str();
    ops->add_option("-n,--n-count", n_count, "N-grid points")->capture_default_str();
    ops->add_option("--reset", reset, "none | left | right | both")->capture_default_str();
    ops->add_option("--out", ops_out, "output file (default stdout)");

    Source src;
    Overrides ov;
    std::string out;
    auto add_common = [&](CLI::App* cmd) {
        add_source_options(cmd, src);
        cmd->add_option("--out", out, "output path");
        cmd->add_option("--ppw", ov.ppw, "override the ppw list");
        cmd->add_option("--dt", ov.dt, "override the time step");
        cmd->add_option("--steps", ov.steps, "override the step count");
    };

    auto* sim = app.add_subcommand("simulate", "run an experiment and write traces, energy and a manifest");
    add_common(sim);

    double courant = 0.0;
    auto* spec = app.add_subcommand("spectrum", "spectral radius of the semi-discrete system");
    add_common(spec);
    spec->add_option("--courant", courant, "Courant number for the scaled radius (default 6/7)");

    double tolerance = 1e-3;
    auto* cfl = app.add_subcommand("cfl", "bisect for the largest stable Courant number");
    add_common(cfl);
    cfl->add_option("--tolerance", tolerance, "bracket width")->capture_default_str();

    std::string which = "wave1d", bc = "strong", column = "n";
    std::vector<int> conv_ppw;
    double conv_dt = 0.0;
    long conv_steps = 0;
    bool full = false;
    unsigned threads = 1;
    auto* conv = app.add_subcommand("converge", "manufactured-solution convergence table");
    conv->add_option("--case", which, "wave1d | elastic2d")->capture_default_str();
    conv->add_option("--bc", bc, "strong | weak")->capture_default_str();
    conv->add_option("--column", column, "wave1d stress grid: n | m")->capture_default_str();
    conv->add_option("--ppw", conv_ppw, "resolutions");
    conv->add_option("--dt", conv_dt, "time step");
    conv->add_option("--steps", conv_steps, "step count");
    conv->add_flag("--full-fidelity", full, "dt = 1e-6 with 666667 steps and ppw up to 160 for elastic2d");
    conv->add_option("--threads", threads, "resolutions run concurrently")->capture_default_str();
    conv->add_option("--out", out, "CSV output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ops) return cmd_operators(variant, n_count, reset, ops_out);
        if (*sim) return cmd_simulate(src, ov, out);
        if (*spec) return cmd_spectrum(src, ov, courant, out);
        if (*cfl) return cmd_cfl(src, ov, tolerance);
        if (*conv) return cmd_converge(which, bc, column, conv_ppw, conv_dt, conv_steps, full, threads, out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const BlowUpError& e) {
        std::cerr << "blow-up: " << e.what() << '\n';
        return kBlowUp;
    } catch (const InvariantFailure& e) {
        std::cerr << "invariant failure: " << e.what() << '\n';
        return kInvariant;
    } catch (const MmsError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    }
    return kOk;
}
