#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sbpwave/analysis.hpp"
#include "sbpwave/assembly.hpp"

using namespace sbpwave;

namespace {

OperatorSet1D ext(int n) { return build_operator_set(Variant::Extrapolating, n); }
OperatorSet1D intw(int n) { return build_operator_set(Variant::Intertwined, n); }

MediumSpec layered_acoustic(int dim) {
    MediumSpec m;
    m.dimension = dim;
    m.rho = [](double x, double y) { return 1.0 + 0.3 * std::sin(3.0 * x + y); };
    m.beta = [](double x, double y) { return 0.5 + 0.2 * std::cos(2.0 * x - y); };
    return m;
}

MediumSpec layered_elastic() {
    MediumSpec m;
    m.dimension = 2;
    m.rho = [](double x, double y) { return 2.0 + std::sin(x * y); };
    m.lambda = [](double x, double) { return 1.5 + 0.5 * x; };
    m.mu = [](double, double y) { return 0.7 + 0.2 * y; };
    return m;
}

struct Named {
    std::string name;
    SemiDiscreteSystem sys;
};

std::vector<Named> all_systems() {
    std::vector<Named> out;
    const auto unit1 = MediumSpec::homogeneous_acoustic(1, 1.0, 1.0);
    for (auto bc : {BcMode::Strong, BcMode::Weak}) {
        const std::string b = to_string(bc);
        out.push_back({"1d-n-" + b, assemble_1d(ext(17), unit1, bc, 0.1)});
        out.push_back({"1d-n-layered-" + b, assemble_1d(ext(23), layered_acoustic(1), bc, 0.05)});
        out.push_back({"1d-m-" + b, assemble_1d(bc == BcMode::Strong ? intw(17) : ext(17), unit1, bc, 0.1,
                                                Column1D::StressOnM)});
        out.push_back({"acoustic-" + b, assemble_2d_acoustic(ext(12), ext(15), MediumSpec::homogeneous_acoustic(2, 1, 1),
                                                             bc, 0.1, 0.07)});
        out.push_back({"acoustic-layered-" + b, assemble_2d_acoustic(ext(14), ext(11), layered_acoustic(2), bc, 0.1, 0.1)});
        const bool s = bc == BcMode::Strong;
        out.push_back({"elastic-" + b, assemble_2d_elastic(ext(12), s ? intw(12) : ext(12), ext(14),
                                                           s ? intw(14) : ext(14),
                                                           MediumSpec::homogeneous_elastic(1, 1, 1), bc, 0.1, 0.08)});
        out.push_back({"elastic-layered-" + b,
                       assemble_2d_elastic(ext(13), s ? intw(13) : ext(13), ext(10), s ? intw(10) : ext(10),
                                           layered_elastic(), bc, 0.09, 0.11)});
    }
    return out;
}

}  // namespace

TEST(Assembly, WeakSatIsSkewInRationals) {
    for (int n : {9, 20}) {
        auto s = ext(n);
        EXPECT_TRUE(compute_q(weak_effective_set(s, Column1D::StressOnN)).is_zero());
        EXPECT_TRUE(compute_q(weak_effective_set(s, Column1D::StressOnM)).is_zero());
    }
}

TEST(Assembly, PenalizedDMEqualsTruncatedDM) {
    EXPECT_EQ(sat_modified_dm(ext(20)), intw(20).DM);
}

TEST(Assembly, StrongOneDimensionalRowsAreZero) {
    auto sys = assemble_1d(ext(20), MediumSpec::homogeneous_acoustic(1, 1, 1), BcMode::Strong, 0.05);
    const Term& to_s = sys.terms[1];
    EXPECT_EQ(to_s.target, sys.index_of("S"));
    EXPECT_EQ(to_s.op.row_ptr[1] - to_s.op.row_ptr[0], 0);
    EXPECT_EQ(to_s.op.row_ptr[20] - to_s.op.row_ptr[19], 0);
    EXPECT_TRUE(sys.vars[1].constrained.front());
    EXPECT_TRUE(sys.vars[1].constrained.back());
}

TEST(Assembly, WeakOneDimensionalScaling) {
    const double dx = 0.025;
    auto sys = assemble_1d(ext(41), MediumSpec::homogeneous_acoustic(1, 1, 1), BcMode::Weak, dx);
    auto dn = sat_modified_dn(ext(41));
    const Term& to_v = sys.terms[0];
    for (int i = 0; i < 40; ++i)
        for (int j = 0; j < 41; ++j) EXPECT_DOUBLE_EQ(to_v.op.at(i, j), dn(i, j).to_double() / dx);
}

TEST(Assembly, EnergyIdentityOnRandomStates) {
    std::mt19937_64 rng(7);
    for (const auto& [name, sys] : all_systems()) {
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            Fields f = random_state(sys, static_cast<unsigned>(rng()));
            EnergyRate r = energy_rate(sys, f);
            worst = std::max(worst, std::abs(r.value) / r.scale);
        }
        EXPECT_LE(worst, 1e-12) << name;
    }
}

TEST(Assembly, StrongSurfaceRowsVanish) {
    for (const auto& [name, sys] : all_systems()) {
        if (sys.bc_mode != BcMode::Strong) continue;
        Fields f = random_state(sys, 3);
        for (auto& v : f)
            for (auto& a : v) a += 0.5;  // nonzero everywhere, including constrained points
        Fields r = sys.zero_fields();
        sys.compute_rates(VarKind::Stress, f, r);
        int constrained = 0;
        for (size_t v = 0; v < sys.vars.size(); ++v)
            for (size_t i = 0; i < sys.vars[v].size(); ++i)
                if (sys.vars[v].constrained[i]) {
                    ++constrained;
                    EXPECT_EQ(r[v][i], 0.0) << name << " " << sys.vars[v].name << " " << i;
                }
        if (sys.column == Column1D::StressOnN) {
            EXPECT_GT(constrained, 0) << name;
        }
    }
}

TEST(Assembly, TensorProductMatchesLines) {
    const double h = 0.05;
    auto sys2 = assemble_2d_acoustic(ext(15), ext(12), MediumSpec::homogeneous_acoustic(2, 1, 1), BcMode::Weak, h, h);
    auto sys1 = assemble_1d(ext(15), MediumSpec::homogeneous_acoustic(1, 1, 1), BcMode::Weak, h);
    std::vector<double> g(15);
    for (int i = 0; i < 15; ++i) g[i] = std::cos(0.7 * i) + 0.1 * i;

    Fields f2 = sys2.zero_fields();
    const Variable& s = sys2.vars[sys2.index_of("S")];
    for (int i = 0; i < s.nx; ++i)
        for (int j = 0; j < s.ny; ++j) f2[sys2.index_of("S")][s.flat(i, j)] = g[i];
    Fields r2 = sys2.zero_fields();
    sys2.compute_rates(VarKind::Velocity, f2, r2);

    Fields f1 = sys1.zero_fields();
    f1[sys1.index_of("S")] = g;
    Fields r1 = sys1.zero_fields();
    sys1.compute_rates(VarKind::Velocity, f1, r1);

    const Variable& vx = sys2.vars[sys2.index_of("Vx")];
    for (int i = 0; i < vx.nx; ++i)
        for (int j = 0; j < vx.ny; ++j)
            EXPECT_DOUBLE_EQ(r2[sys2.index_of("Vx")][vx.flat(i, j)], r1[sys1.index_of("V")][i]);

    // along y the field is constant, which the penalized operator only sees at the ends
    auto sys1y = assemble_1d(ext(12), MediumSpec::homogeneous_acoustic(1, 1, 1), BcMode::Weak, h);
    Fields f1y = sys1y.zero_fields();
    std::fill(f1y[sys1y.index_of("S")].begin(), f1y[sys1y.index_of("S")].end(), 1.0);
    Fields r1y = sys1y.zero_fields();
    sys1y.compute_rates(VarKind::Velocity, f1y, r1y);
    const Variable& vy = sys2.vars[sys2.index_of("Vy")];
    for (int i = 0; i < vy.nx; ++i)
        for (int j = 0; j < vy.ny; ++j) {
            const double want = g[i] * r1y[sys1y.index_of("V")][j];
            EXPECT_NEAR(r2[sys2.index_of("Vy")][vy.flat(i, j)], want, 1e-12 * (1 + std::abs(want)));
        }
}

TEST(Assembly, ElasticRequirementsPassForUsedSets) {
    auto n = apply_strong_reset(ext(20), true, true);
    auto rep = check_elastic_requirements(n, intw(20), n, intw(20));
    for (const auto& c : rep.checks)
        if (c.name.rfind("skew", 0) == 0) {
            EXPECT_TRUE(c.pass) << c.name;
        }
    auto minimal = check_elastic_requirements(ext(9), intw(9), ext(9), intw(9));
    for (const auto& c : minimal.checks)
        if (c.name.rfind("shared", 0) == 0) {
            EXPECT_TRUE(c.pass) << c.name;
        }
}

TEST(Assembly, ElasticRequirementsNameFailure) {
    auto n = apply_strong_reset(ext(20), true, true);
    auto rep = check_elastic_requirements(ext(20), intw(20), n, intw(20));
    bool found = false;
    for (const auto& c : rep.checks)
        if (c.name == "skew-symmetric x/N-column") {
            found = true;
            EXPECT_FALSE(c.pass);
            EXPECT_NE(c.detail.find("row 0: -15/8 5/4 -3/8"), std::string::npos) << c.detail;
        } else if (c.name.rfind("skew", 0) == 0) {
            EXPECT_TRUE(c.pass) << c.name;
        }
    EXPECT_TRUE(found);
}

TEST(Assembly, RejectsBadInputs) {
    const auto unit1 = MediumSpec::homogeneous_acoustic(1, 1, 1);
    EXPECT_THROW(assemble_1d(ext(20), MediumSpec::homogeneous_acoustic(2, 1, 1), BcMode::Weak, 0.1), AssemblyError);
    EXPECT_THROW(assemble_1d(intw(20), unit1, BcMode::Weak, 0.1), AssemblyError);
    EXPECT_THROW(assemble_1d(ext(20), unit1, BcMode::Strong, 0.1, Column1D::StressOnM), AssemblyError);
    EXPECT_THROW(assemble_1d(ext(20), MediumSpec::homogeneous_acoustic(1, -1, 1), BcMode::Weak, 0.1), AssemblyError);
    EXPECT_THROW(assemble_2d_elastic(ext(12), ext(12), ext(12), ext(12), MediumSpec::homogeneous_elastic(1, 1, 1),
                                     BcMode::Strong, 0.1, 0.1),
                 AssemblyError);
    auto broken = intw(12);
    broken.AN[1] = Rational(1);
    EXPECT_THROW(assemble_2d_elastic(ext(12), broken, ext(12), intw(12), MediumSpec::homogeneous_elastic(1, 1, 1),
                                     BcMode::Strong, 0.1, 0.1),
                 AssemblyError);
    EXPECT_THROW(assemble_2d_elastic(ext(12), intw(12), ext(12), intw(12), MediumSpec::homogeneous_elastic(1, -1, 1),
                                     BcMode::Strong, 0.1, 0.1),
                 AssemblyError);
}

TEST(Assembly, ElasticLayout) {
    auto sys = assemble_2d_elastic(ext(12), intw(12), ext(10), intw(10), MediumSpec::homogeneous_elastic(1, 1, 1),
                                   BcMode::Strong, 0.1, 0.1);
    auto grid = [&](const char* n) {
        const auto& v = sys.vars[sys.index_of(n)];
        return std::pair{v.gx, v.gy};
    };
    using G = GridKind;
    EXPECT_EQ(grid("Sxy"), std::pair(G::N, G::N));
    EXPECT_EQ(grid("Vx"), std::pair(G::N, G::M));
    EXPECT_EQ(grid("Vy"), std::pair(G::M, G::N));
    EXPECT_EQ(grid("Sxx"), std::pair(G::M, G::M));
    EXPECT_EQ(grid("Syy"), std::pair(G::M, G::M));
    EXPECT_DOUBLE_EQ(sys.max_speed, std::sqrt(3.0));
}

TEST(Assembly, CourantDefinition) {
    auto sys = assemble_2d_acoustic(ext(11), ext(11), MediumSpec::homogeneous_acoustic(2, 1, 2), BcMode::Weak, 0.1, 0.1);
    EXPECT_NEAR(sys.courant(0.01), 2.0 * 0.01 * std::sqrt(200.0), 1e-14);
    EXPECT_NEAR(sys.dt_for_courant(sys.courant(0.01)), 0.01, 1e-16);
}
