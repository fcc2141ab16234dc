#include "lctune/cell.hpp"
#include "lctune/electrostatics.hpp"
#include "lctune/error.hpp"
#include "lctune/material.hpp"
#include "lctune/relax.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace lctune;

namespace {

LdgModel rdp_model() { return LdgModel(MaterialTable::builtin().get("RDP-84909")); }

CellStack small_grid() {
    CellStack s;
    s.grid_nx = 8;
    s.grid_nz = 17;
    return s;
}

void perturb(CellState& s, unsigned seed, double amp) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, amp);
    for (int j = 1; j < s.nz - 1; ++j)
        for (int i = 0; i < s.nx; ++i)
            for (auto& v : s.at(i, j).q) v += nd(rng);
}

}  // namespace

TEST(Series, TwoLayerDivider) {
    const std::vector<DielectricLayer> layers{{1e-6, 2.0}, {1e-6, 6.0}};
    const auto sol = solve_series(layers, 4.0);
    ASSERT_EQ(sol.interface_potential.size(), 3u);
    EXPECT_NEAR(sol.interface_potential[1], 3.0, 1e-12);
    EXPECT_NEAR(sol.field[0] * 2.0, sol.field[1] * 6.0, 1e-3);
}

TEST(Energy, GradientMatchesFiniteDifferences2d) {
    const auto model = rdp_model();
    const auto stack = small_grid();
    CellState s = initial_state(stack, model, 1.0, Dimensionality::two_d, 0.3);
    perturb(s, 1, 0.03);
    prepare_potential_grid(s, stack);
    poisson_solve(s, stack, model);
    const Eigen::VectorXd g = energy_gradient(s, stack, model);
    const double h = 1e-6;
    for (const int node : {9, 37, 70}) {
        for (int c = 0; c < 5; ++c) {
            CellState a = s, b = s;
            a.q[static_cast<std::size_t>(node)][c] += h;
            b.q[static_cast<std::size_t>(node)][c] -= h;
            const double fd = (total_energy(a, stack, model) - total_energy(b, stack, model)) / (2 * h);
            EXPECT_NEAR(g[5 * node + c], fd, 1e-5 * g.segment(5 * node, 5).norm());
        }
    }
}

TEST(Relax, ZeroVoltageStaysPlanar) {
    const auto model = rdp_model();
    const CellStack stack;
    const CellState s = relax(stack, model, 0.0);
    EXPECT_LT(s.residual, SolverOptions{}.tol_q);
    EXPECT_LT(midplane_tilt(s), 1e-3);
    EXPECT_NEAR(effective_permittivity(s, stack, model), 8.0, 1e-3);
}

TEST(Relax, AboveThresholdTiltsAndRaisesPermittivity) {
    const auto model = rdp_model();
    const CellStack stack;
    const CellState s = relax(stack, model, 1.0);
    EXPECT_GT(midplane_tilt(s), 1.0);
    const double vol = effective_permittivity(s, stack, model, PermittivityAverage::volume);
    const double ser = effective_permittivity(s, stack, model, PermittivityAverage::series);
    EXPECT_GT(vol, 30.0);
    EXPECT_LT(ser, vol);
    EXPECT_GT(ser, 8.0);
    for (std::size_t k = 1; k < s.energy_history.size(); ++k)
        EXPECT_LE(s.energy_history[k], s.energy_history[k - 1] + 1e-12 * std::abs(s.energy_history[k - 1]));
}

TEST(Relax, WarmStartReachesTheSameState) {
    const auto model = rdp_model();
    const CellStack stack;
    const CellState warm = relax(stack, model, 0.8);
    const CellState a = relax(stack, model, 1.0, {}, Dimensionality::one_d, &warm);
    const CellState b = relax(stack, model, 1.0);
    EXPECT_NEAR(effective_permittivity(a, stack, model), effective_permittivity(b, stack, model), 1e-4);
}

TEST(Relax, ExplicitStepsDescendTowardsTheImplicitSolution) {
    const auto model = rdp_model();
    CellStack stack;
    stack.grid_nz = 17;
    const CellState target = relax(stack, model, 0.7);
    CellState s = target;
    perturb(s, 4, 0.01);
    SolverOptions ex;
    ex.scheme = StepScheme::explicit_euler;
    double dt = 1e-7;
    double e = total_energy(s, stack, model);
    const double r0 = field_residual(s, stack, model);
    for (int k = 0; k < 200; ++k) {
        const StepResult r = gradient_flow_step(s, stack, model, dt, ex);
        EXPECT_LE(r.change, 0.0);
        EXPECT_LE(r.energy, e + 1e-12 * std::abs(e));
        e = r.energy;
        dt *= 1.5;
    }
    EXPECT_LT(field_residual(s, stack, model), 0.1 * r0);
    EXPECT_GT(e, target.energy - 1e-9 * std::abs(target.energy));
}

TEST(Relax, IterationCapRaisesNonConvergence) {
    const auto model = rdp_model();
    const CellStack stack;
    SolverOptions o;
    o.max_steps = 1;
    try {
        relax(stack, model, 1.0, o);
        FAIL() << "expected NonConvergenceError";
    } catch (const NonConvergenceError& e) {
        EXPECT_DOUBLE_EQ(e.voltage(), 1.0);
    }
}

TEST(Relax, TwoDimensionalGridRelaxes) {
    const auto model = rdp_model();
    CellStack stack;
    stack.grid_nx = 16;
    stack.grid_nz = 17;
    const CellState s = relax(stack, model, 1.0, {}, Dimensionality::two_d);
    EXPECT_LT(s.residual, SolverOptions{}.tol_q);
    const double eps = effective_permittivity(s, stack, model);
    EXPECT_GT(eps, 8.0);
    EXPECT_LT(eps, 47.1);
}

TEST(Poisson, SorAgreesWithDirect) {
    const auto model = rdp_model();
    const auto stack = small_grid();
    CellState a = initial_state(stack, model, 1.0, Dimensionality::two_d, 0.5);
    perturb(a, 2, 0.02);
    prepare_potential_grid(a, stack);
    CellState b = a;
    poisson_solve(a, stack, model);
    PoissonOptions sor;
    sor.method = PoissonMethod::sor;
    sor.tol = 1e-10;
    poisson_solve(b, stack, model, sor);
    for (std::size_t k = 0; k < a.potential.size(); ++k) EXPECT_NEAR(a.potential[k], b.potential[k], 1e-6);
}

TEST(Sweep, ThresholdEstimateAndOrdering) {
    const auto model = rdp_model();
    const CellStack stack;
    std::vector<double> v;
    for (int k = 0; k <= 20; ++k) v.push_back(0.05 * k);
    std::vector<double> seen;
    const auto rows = freedericksz_curve(stack, model, v, {}, {},
                                         [&](const CurveRow& r, const CellState&) { seen.push_back(r.voltage); });
    EXPECT_EQ(seen, v);
    EXPECT_NEAR(estimate_threshold(rows), 0.362, 0.02);
    for (std::size_t k = 1; k < rows.size(); ++k) EXPECT_GE(rows[k].eps_eff, rows[k - 1].eps_eff - 1e-6);
    SweepOptions cold;
    cold.warm_start = false;
    cold.jobs = 2;
    const auto cold_rows = freedericksz_curve(stack, model, v, {}, cold);
    for (std::size_t k = 0; k < rows.size(); ++k) EXPECT_NEAR(cold_rows[k].eps_eff, rows[k].eps_eff, 1e-3);
}
