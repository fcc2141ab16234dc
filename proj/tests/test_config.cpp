#include "lctune/config.hpp"
#include "lctune/error.hpp"
#include "lctune/pipeline.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace lctune;

TEST(Config, DefaultsRoundTrip) {
    const auto table = MaterialTable::builtin();
    const RunConfig c = default_config();
    EXPECT_EQ(c.material.name, "RDP-84909");
    const std::string text = serialize_config(c);
    const RunConfig back = parse_config(text, table);
    EXPECT_EQ(serialize_config(back), text);
    EXPECT_EQ(config_hash(back), config_hash(c));
    EXPECT_EQ(config_hash(c).size(), 64u);
}

TEST(Config, OverridesAreApplied) {
    const auto table = MaterialTable::builtin();
    const RunConfig c = parse_config(
        "[material]\nname = 5CB\n[cell]\ngrid_nz = 65\nelectrode = plate\n[sweep]\nstop_V = 2\ncount = 5\n"
        "[solver]\npermittivity_average = series\n",
        table);
    EXPECT_EQ(c.material.name, "5CB");
    EXPECT_EQ(c.cell.grid_nz, 65);
    EXPECT_EQ(c.cell.electrodes.kind, ElectrodeKind::plate);
    EXPECT_EQ(c.sweep.voltages().size(), 5u);
    EXPECT_DOUBLE_EQ(c.sweep.voltages().back(), 2.0);
    EXPECT_EQ(c.average, PermittivityAverage::series);
    EXPECT_NE(config_hash(c), config_hash(default_config()));
}

TEST(Config, RejectsBadInput) {
    const auto table = MaterialTable::builtin();
    EXPECT_THROW(parse_config("[cell]\nbogus = 1\n", table), ConfigError);
    EXPECT_THROW(parse_config("[cell]\ngrid_nz = abc\n", table), ConfigError);
    EXPECT_THROW(parse_config("[material]\nname = unknown\n", table), ConfigError);
    EXPECT_THROW(parse_config("[antenna]\neps_low = 50\n", table), ConfigError);
}

TEST(Pipeline, ExitCodes) {
    EXPECT_EQ(exit_code_for(ConfigError("x")), kExitConfig);
    EXPECT_EQ(exit_code_for(NonConvergenceError("x", 1.0)), kExitNonConvergence);
    EXPECT_EQ(exit_code_for(IoError("x")), kExitIo);
    EXPECT_EQ(exit_code_for(std::runtime_error("x")), kExitFailure);
}

namespace {

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("lctune_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

std::vector<std::string> data_lines(const std::filesystem::path& file) {
    std::ifstream in(file);
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);)
        if (!line.empty() && line[0] != '#') out.push_back(line);
    return out;
}

}  // namespace

TEST(Pipeline, PlateElectrodesGiveAFlatProfile) {
    CommandEnv env;
    env.config = parse_config("[cell]\nelectrode = plate\ngrid_nx = 8\ngrid_nz = 33\n[optics]\nspectrum_count = 3\n",
                              MaterialTable::builtin());
    env.out_dir = scratch("plate");
    cmd_optics(env);
    const auto lines = data_lines(env.out_dir / "transmittance.csv");
    ASSERT_EQ(lines.size(), 9u);
    std::vector<double> t;
    for (std::size_t k = 1; k < lines.size(); ++k) {
        const auto a = lines[k].find(',');
        const auto b = lines[k].find(',', a + 1);
        t.push_back(std::stod(lines[k].substr(a + 1, b - a - 1)));
    }
    const auto [lo, hi] = std::minmax_element(t.begin(), t.end());
    EXPECT_LT(*hi - *lo, 1e-6);
}

TEST(Pipeline, FailedSweepLeavesAMarker) {
    CommandEnv env;
    env.config = parse_config("[sweep]\nstop_V = 1\ncount = 3\n[solver]\nmax_steps = 1\n", MaterialTable::builtin());
    env.out_dir = scratch("fail");
    EXPECT_THROW(cmd_freedericksz(env), NonConvergenceError);
    std::ifstream in(env.out_dir / "freedericksz.csv");
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    EXPECT_NE(text.find("# FAILED: "), std::string::npos);
    EXPECT_EQ(text.rfind("# lctune ", 0), 0u);
}

TEST(Pipeline, MaterialsListing) {
    std::ostringstream out;
    cmd_materials(MaterialTable::builtin(), out);
    const std::string s = out.str();
    for (const char* name : {"5CB", "BLO48", "RDP-84909", "E7"}) EXPECT_NE(s.find(name), std::string::npos);
    EXPECT_NE(s.find("0.3621"), std::string::npos);
}
