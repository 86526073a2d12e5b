#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sbpwave/config.hpp"

using namespace sbpwave;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"(
[simulation]
equation = wave1d
bc = weak

[grid]
length_x = 1.6
min_wavelength = 0.08
ppw = 10 20

[time]
dt = 2.5e-4
steps = 100

[source.2]
target = S
x = 0.8

[source.1]
target = S
x = 0.008
amplitude = 2

[receiver.1]
variable = S
x = 0
)";

SimConfig load_preset(const fs::path& p) {
    std::ifstream in(p);
    return parse_config(in);
}

}  // namespace

TEST(Config, ParsesDefaultsAndOrdering) {
    SimConfig c = parse_config_string(kMinimal);
    EXPECT_EQ(c.equation, Equation::Wave1D);
    EXPECT_EQ(c.bc_mode, BcMode::Weak);
    EXPECT_EQ(c.ppw, (std::vector<int>{10, 20}));
    ASSERT_EQ(c.sources.size(), 2u);
    EXPECT_EQ(c.sources[0].x, 0.008);
    EXPECT_EQ(c.sources[0].amplitude, 2.0);
    EXPECT_EQ(c.sources[1].x, 0.8);
    EXPECT_EQ(c.sources[1].f0, 5.0);
    EXPECT_EQ(c.receivers[0].label, "R0");
    EXPECT_EQ(c.rho, 1.0);
}

TEST(Config, RoundTrip) {
    SimConfig c = parse_config_string(kMinimal);
    std::ostringstream os;
    write_config(os, c);
    SimConfig d = parse_config_string(os.str());
    EXPECT_EQ(c, d);
    std::ostringstream again;
    write_config(again, d);
    EXPECT_EQ(os.str(), again.str());
}

TEST(Config, PresetsRoundTripAndResolve) {
    int count = 0;
    for (const auto& entry : fs::directory_iterator(SBPWAVE_PRESET_DIR)) {
        if (entry.path().extension() != ".ini") continue;
        ++count;
        SCOPED_TRACE(entry.path().filename().string());
        SimConfig c = load_preset(entry.path());
        std::ostringstream os;
        write_config(os, c);
        EXPECT_EQ(parse_config_string(os.str()), c);
        auto res = resolutions(c);
        ASSERT_FALSE(res.empty());
        if (c.dimension() == 2 && res.front().dx < 0.002) continue;
        SemiDiscreteSystem sys = build_system(c, res.front().dx);
        RunSpec spec = build_run_spec(c, sys);
        EXPECT_EQ(spec.sources.size(), c.sources.size());
        EXPECT_EQ(spec.receivers.size(), c.receivers.size());
    }
    EXPECT_GE(count, 10);
}

TEST(Config, SnapsPhysicalLocations) {
    std::ifstream in(fs::path(SBPWAVE_PRESET_DIR) / "fig3.ini");
    SimConfig c = parse_config(in);
    for (int k = 0; k < 4; ++k) {
        auto res = resolutions(c)[k];
        SemiDiscreteSystem sys = build_system(c, res.dx);
        RunSpec spec = build_run_spec(c, sys);
        EXPECT_EQ(spec.sources[0].ix, 1 << k) << res.label;  // 1, 2, 4, 8 points from the boundary
        EXPECT_EQ(spec.receivers[0].ix, 0);
        EXPECT_EQ(spec.receivers[1].ix, 3 << k);
    }
}

TEST(Config, ElasticTieGoesToLowerIndex) {
    std::ifstream in(fs::path(SBPWAVE_PRESET_DIR) / "fig10.ini");
    SimConfig c = parse_config(in);
    SemiDiscreteSystem sys = build_system(c, resolutions(c)[0].dx);
    auto loc = locate(sys, "Sxx", 0.16, 0.002, "src");
    EXPECT_EQ(loc.iy, 0);
    EXPECT_NEAR(loc.x, 0.158, 1e-12);
}

TEST(Config, Errors) {
    auto bad = [](std::string from, std::string to) {
        std::string t = kMinimal;
        t.replace(t.find(from), from.size(), to);
        return t;
    };
    EXPECT_THROW(parse_config_string(bad("wave1d", "wave3d")), ConfigError);
    EXPECT_THROW(parse_config_string(bad("bc = weak", "bc = soft")), ConfigError);
    EXPECT_THROW(parse_config_string(bad("dt = 2.5e-4", "dt = -1")), ConfigError);
    EXPECT_THROW(parse_config_string(bad("steps = 100", "steps = many")), ConfigError);
    EXPECT_THROW(parse_config_string(bad("ppw = 10 20", "ppw = 10 x")), ConfigError);
    EXPECT_THROW(parse_config_string(bad("[time]", "[clock]")), ConfigError);
    EXPECT_THROW(parse_config_string("[simulation\n"), ConfigError);

    SimConfig c = parse_config_string(bad("x = 0.8", "x = 2.5"));
    EXPECT_THROW(build_run_spec(c, build_system(c, 0.008)), ConfigError);
    SimConfig odd = parse_config_string(bad("ppw = 10 20", "dx = 0.003"));
    EXPECT_THROW(build_system(odd, resolutions(odd)[0].dx), ConfigError);
    SimConfig strong = parse_config_string(bad("bc = weak", "bc = strong"));
    strong.sources[0].x = 0.0;
    EXPECT_THROW(build_run_spec(strong, build_system(strong, 0.008)), ConfigError);
}
