#pragma once

// INI experiment configuration.
//
//   [simulation] equation = wave1d | acoustic2d | elastic2d
//                bc = strong | weak
//                column = n | m              (wave1d only)
//   [grid]       length_x, length_y, min_wavelength, ppw = 10 20 ...  or  dx
//   [time]       dt, steps, energy_stride
//   [medium]     rho, c                      (acoustic)
//                rho, lambda, mu             (elastic)
//   [source.K]   target, x, y, f0, t0, amplitude
//   [receiver.K] variable, x, y, label
//   [output]     dir
//
// Locations are physical (y is depth, the top surface is y = 0) and snap to
// the nearest point of the variable's grid once the resolution is known.

#include <algorithm>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "sbpwave/assembly.hpp"
#include "sbpwave/operators.hpp"
#include "sbpwave/wavesim.hpp"

namespace sbpwave {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct LocatedSource {
    std::string target;
    double x = 0.0;
    double y = 0.0;
    double f0 = 5.0;
    double t0 = 0.25;
    double amplitude = 1.0;
    bool operator==(const LocatedSource&) const = default;
};

struct LocatedReceiver {
    std::string variable;
    double x = 0.0;
    double y = 0.0;
    std::string label;
    bool operator==(const LocatedReceiver&) const = default;
};

struct SimConfig {
    Equation equation = Equation::Wave1D;
    BcMode bc_mode = BcMode::Strong;
    Column1D column = Column1D::StressOnN;

    double length_x = 1.0;
    double length_y = 0.0;
    double min_wavelength = 1.0;
    std::vector<int> ppw;
    std::optional<double> dx;

    double dt = 0.0;
    long steps = 0;
    long energy_stride = 10;

    double rho = 1.0;
    double c = 1.0;
    double lambda = 1.0;
    double mu = 1.0;

    std::vector<LocatedSource> sources;
    std::vector<LocatedReceiver> receivers;
    std::string output_dir;

    bool operator==(const SimConfig&) const = default;

    int dimension() const { return equation == Equation::Wave1D ? 1 : 2; }
};

namespace detail {

inline Equation parse_equation(const std::string& s) {
    if (s == "wave1d") return Equation::Wave1D;
    if (s == "acoustic2d") return Equation::Acoustic2D;
    if (s == "elastic2d") return Equation::Elastic2D;
    throw ConfigError("unknown equation '" + s + "'");
}

inline BcMode parse_bc(const std::string& s) {
    if (s == "strong") return BcMode::Strong;
    if (s == "weak") return BcMode::Weak;
    throw ConfigError("unknown bc '" + s + "'");
}

inline Column1D parse_column(const std::string& s) {
    if (s == "n") return Column1D::StressOnN;
    if (s == "m") return Column1D::StressOnM;
    throw ConfigError("unknown column '" + s + "' (expected n or m)");
}

template <class T>
T get(const boost::property_tree::ptree& pt, const std::string& path) {
    auto v = pt.get_optional<std::string>(path);
    if (!v) throw ConfigError("missing key " + path);
    try {
        return boost::lexical_cast<T>(*v);
    } catch (const boost::bad_lexical_cast&) {
        throw ConfigError("bad value for " + path + ": '" + *v + "'");
    }
}

template <class T>
T get(const boost::property_tree::ptree& pt, const std::string& path, T fallback) {
    return pt.get_optional<std::string>(path) ? get<T>(pt, path) : fallback;
}

inline std::vector<int> parse_int_list(const std::string& s, const std::string& what) {
    std::vector<int> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) {
        try {
            size_t pos;
            int v = std::stoi(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument(tok);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ConfigError("bad integer '" + tok + "' in " + what);
        }
    }
    return out;
}

/// Sections named prefix.K sorted by K.
inline std::vector<std::pair<int, const boost::property_tree::ptree*>> numbered(
    const boost::property_tree::ptree& pt, const std::string& prefix) {
    std::vector<std::pair<int, const boost::property_tree::ptree*>> out;
    for (const auto& [key, sub] : pt) {
        if (key.rfind(prefix + ".", 0) != 0) continue;
        auto ids = parse_int_list(key.substr(prefix.size() + 1), "section " + key);
        if (ids.size() != 1) throw ConfigError("bad section name " + key);
        out.emplace_back(ids[0], &sub);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (size_t i = 1; i < out.size(); ++i)
        if (out[i].first == out[i - 1].first) throw ConfigError("duplicate section " + prefix);
    return out;
}

}  // namespace detail

inline void validate(const SimConfig& c) {
    if (c.ppw.empty() && !c.dx) throw ConfigError("grid needs ppw or dx");
    for (int p : c.ppw)
        if (p <= 0) throw ConfigError("ppw must be positive");
    if (c.dx && !(*c.dx > 0.0)) throw ConfigError("dx must be positive");
    if (!(c.length_x > 0.0)) throw ConfigError("length_x must be positive");
    if (c.dimension() == 2 && !(c.length_y > 0.0)) throw ConfigError("length_y must be positive");
    if (!(c.min_wavelength > 0.0)) throw ConfigError("min_wavelength must be positive");
    if (!(c.dt > 0.0)) throw ConfigError("dt must be positive");
    if (c.steps <= 0) throw ConfigError("steps must be positive");
    if (c.energy_stride < 0) throw ConfigError("energy_stride must be >= 0");
    if (!(c.rho > 0.0)) throw ConfigError("rho must be positive");
    if (c.equation == Equation::Elastic2D) {
        if (!(c.mu > 0.0) || !(c.lambda + 2.0 * c.mu > 0.0) || !(c.lambda + c.mu > 0.0))
            throw ConfigError("elastic medium needs mu > 0, lambda + mu > 0");
    } else if (!(c.c > 0.0)) {
        throw ConfigError("c must be positive");
    }
    for (const auto& s : c.sources)
        if (!(s.f0 > 0.0)) throw ConfigError("source f0 must be positive");
}

inline SimConfig parse_config(std::istream& is) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("ini: ") + e.what());
    }
    using detail::get;
    SimConfig c;
    c.equation = detail::parse_equation(get<std::string>(tree, "simulation.equation"));
    c.bc_mode = detail::parse_bc(get<std::string>(tree, "simulation.bc"));
    c.column = detail::parse_column(get<std::string>(tree, "simulation.column", std::string("n")));
    if (c.column == Column1D::StressOnM && c.equation != Equation::Wave1D)
        throw ConfigError("column = m is a wave1d option");

    c.length_x = get<double>(tree, "grid.length_x");
    if (c.equation != Equation::Wave1D) c.length_y = get<double>(tree, "grid.length_y");
    c.min_wavelength = get<double>(tree, "grid.min_wavelength", 1.0);
    if (auto p = tree.get_optional<std::string>("grid.ppw")) c.ppw = detail::parse_int_list(*p, "grid.ppw");
    if (tree.get_optional<std::string>("grid.dx")) c.dx = get<double>(tree, "grid.dx");

    c.dt = get<double>(tree, "time.dt");
    c.steps = get<long>(tree, "time.steps");
    c.energy_stride = get<long>(tree, "time.energy_stride", 10L);

    c.rho = get<double>(tree, "medium.rho", 1.0);
    if (c.equation == Equation::Elastic2D) {
        c.lambda = get<double>(tree, "medium.lambda");
        c.mu = get<double>(tree, "medium.mu");
    } else {
        c.c = get<double>(tree, "medium.c", 1.0);
    }

    for (const auto& [id, sec] : detail::numbered(tree, "source")) {
        LocatedSource s;
        s.target = get<std::string>(*sec, "target");
        s.x = get<double>(*sec, "x");
        s.y = get<double>(*sec, "y", 0.0);
        s.f0 = get<double>(*sec, "f0", 5.0);
        s.t0 = get<double>(*sec, "t0", 0.25);
        s.amplitude = get<double>(*sec, "amplitude", 1.0);
        c.sources.push_back(s);
    }
    for (const auto& [id, sec] : detail::numbered(tree, "receiver")) {
        LocatedReceiver r;
        r.variable = get<std::string>(*sec, "variable");
        r.x = get<double>(*sec, "x");
        r.y = get<double>(*sec, "y", 0.0);
        r.label = get<std::string>(*sec, "label", "R" + std::to_string(c.receivers.size()));
        c.receivers.push_back(r);
    }
    c.output_dir = get<std::string>(tree, "output.dir", std::string());
    validate(c);
    return c;
}

inline SimConfig parse_config_string(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is);
}

/// Canonical form: every key written, numbers in shortest round-trip form.
inline void write_config(std::ostream& os, const SimConfig& c) {
    auto num = [](double v) { return format_double(v); };
    os << "[simulation]\n";
    os << "equation = " << to_string(c.equation) << '\n';
    os << "bc = " << to_string(c.bc_mode) << '\n';
    if (c.equation == Equation::Wave1D) os << "column = " << (c.column == Column1D::StressOnN ? "n" : "m") << '\n';
    os << "\n[grid]\n";
    os << "length_x = " << num(c.length_x) << '\n';
    if (c.dimension() == 2) os << "length_y = " << num(c.length_y) << '\n';
    os << "min_wavelength = " << num(c.min_wavelength) << '\n';
    if (!c.ppw.empty()) {
        os << "ppw =";
        for (int p : c.ppw) os << ' ' << p;
        os << '\n';
    }
    if (c.dx) os << "dx = " << num(*c.dx) << '\n';
    os << "\n[time]\n";
    os << "dt = " << num(c.dt) << '\n';
    os << "steps = " << c.steps << '\n';
    os << "energy_stride = " << c.energy_stride << '\n';
    os << "\n[medium]\n";
    os << "rho = " << num(c.rho) << '\n';
    if (c.equation == Equation::Elastic2D) {
        os << "lambda = " << num(c.lambda) << '\n';
        os << "mu = " << num(c.mu) << '\n';
    } else {
        os << "c = " << num(c.c) << '\n';
    }
    for (size_t i = 0; i < c.sources.size(); ++i) {
        const auto& s = c.sources[i];
        os << "\n[source." << i + 1 << "]\n";
        os << "target = " << s.target << '\n';
        os << "x = " << num(s.x) << '\n';
        os << "y = " << num(s.y) << '\n';
        os << "f0 = " << num(s.f0) << '\n';
        os << "t0 = " << num(s.t0) << '\n';
        os << "amplitude = " << num(s.amplitude) << '\n';
    }
    for (size_t i = 0; i < c.receivers.size(); ++i) {
        const auto& r = c.receivers[i];
        os << "\n[receiver." << i + 1 << "]\n";
        os << "variable = " << r.variable << '\n';
        os << "x = " << num(r.x) << '\n';
        os << "y = " << num(r.y) << '\n';
        os << "label = " << r.label << '\n';
    }
    if (!c.output_dir.empty()) os << "\n[output]\ndir = " << c.output_dir << '\n';
}

// ---------------------------------------------------------------------------
// Resolution

struct Resolution {
    std::string label;  // "ppw10" or "dx0.01"
    int ppw = 0;
    double dx = 0.0;
};

inline std::vector<Resolution> resolutions(const SimConfig& c) {
    std::vector<Resolution> out;
    for (int p : c.ppw) out.push_back({"ppw" + std::to_string(p), p, c.min_wavelength / p});
    if (c.dx) out.push_back({"dx" + format_double(*c.dx), 0, *c.dx});
    return out;
}

inline int cell_count(double length, double dx, const char* axis) {
    const double cells = length / dx;
    const long r = std::lround(cells);
    if (std::abs(cells - static_cast<double>(r)) > 1e-6 * std::max(1.0, cells))
        throw ConfigError(std::string("length_") + axis + " is not a whole number of grid spacings");
    if (r + 1 < kMinNCount) throw ConfigError(std::string("too few grid points along ") + axis);
    return static_cast<int>(r);
}

/// Builds the system for one grid spacing.
inline SemiDiscreteSystem build_system(const SimConfig& c, double dx) {
    const int nx = cell_count(c.length_x, dx, "x") + 1;
    try {
        if (c.equation == Equation::Wave1D) {
            const Variant v = c.column == Column1D::StressOnM && c.bc_mode == BcMode::Strong ? Variant::Intertwined
                                                                                              : Variant::Extrapolating;
            return assemble_1d(build_operator_set(v, nx), MediumSpec::homogeneous_acoustic(1, c.rho, c.c), c.bc_mode,
                               dx, c.column);
        }
        const int ny = cell_count(c.length_y, dx, "y") + 1;
        const OperatorSet1D ex = build_operator_set(Variant::Extrapolating, nx);
        const OperatorSet1D ey = build_operator_set(Variant::Extrapolating, ny);
        if (c.equation == Equation::Acoustic2D)
            return assemble_2d_acoustic(ex, ey, MediumSpec::homogeneous_acoustic(2, c.rho, c.c), c.bc_mode, dx, dx);
        const bool strong = c.bc_mode == BcMode::Strong;
        const OperatorSet1D mx = strong ? build_operator_set(Variant::Intertwined, nx) : ex;
        const OperatorSet1D my = strong ? build_operator_set(Variant::Intertwined, ny) : ey;
        return assemble_2d_elastic(ex, mx, ey, my, MediumSpec::homogeneous_elastic(c.rho, c.lambda, c.mu), c.bc_mode,
                                   dx, dx);
    } catch (const AssemblyError& e) {
        throw ConfigError(e.what());
    }
}

/// Nearest grid index along one axis; ties go to the lower index.
inline int snap(const AxisGrid& ax, GridKind g, double x, const std::string& what) {
    const double v = (x - ax.origin) / ax.spacing - (g == GridKind::M ? 0.5 : 0.0);
    const int i = static_cast<int>(std::ceil(v - 0.5 - 1e-9));
    if (i < 0 || i >= ax.count(g)) throw ConfigError(what + " lies outside the grid");
    return i;
}

struct GridLocation {
    int ix = 0;
    int iy = 0;
    double x = 0.0;
    double y = 0.0;
};

inline GridLocation locate(const SemiDiscreteSystem& sys, const std::string& var, double x, double y,
                           const std::string& what) {
    int v;
    try {
        v = sys.index_of(var);
    } catch (const std::out_of_range&) {
        throw ConfigError(what + ": unknown variable '" + var + "'");
    }
    const Variable& vv = sys.vars[v];
    GridLocation loc;
    loc.ix = snap(sys.x, vv.gx, x, what);
    loc.x = sys.x.coord(vv.gx, loc.ix);
    if (sys.dimension == 2) {
        loc.iy = snap(sys.y, vv.gy, y, what);
        loc.y = sys.y.coord(vv.gy, loc.iy);
    }
    return loc;
}

inline RunSpec build_run_spec(const SimConfig& c, const SemiDiscreteSystem& sys) {
    RunSpec r;
    r.dt = c.dt;
    r.steps = c.steps;
    r.energy_stride = c.energy_stride;
    for (size_t i = 0; i < c.sources.size(); ++i) {
        const auto& s = c.sources[i];
        auto loc = locate(sys, s.target, s.x, s.y, "source " + std::to_string(i + 1));
        r.sources.push_back(SourceSpec{s.target, loc.ix, loc.iy, s.f0, s.t0, s.amplitude});
        try {
            resolve_source(sys, r.sources.back());
        } catch (const SourceError& e) {
            throw ConfigError(e.what());
        }
    }
    for (size_t i = 0; i < c.receivers.size(); ++i) {
        const auto& q = c.receivers[i];
        auto loc = locate(sys, q.variable, q.x, q.y, "receiver " + q.label);
        r.receivers.push_back(ReceiverSpec{q.variable, loc.ix, loc.iy, q.label});
    }
    return r;
}

}  // namespace sbpwave
