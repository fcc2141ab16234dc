#pragma once

#include "lctune/cell.hpp"
#include "lctune/electrostatics.hpp"
#include "lctune/landau.hpp"

#include <Eigen/Core>

#include <functional>
#include <vector>

namespace lctune {

// explicit_euler:     q <- q + dt H
// linearly_implicit:  (M / dt + Hessian) dq = -grad E, the backward Euler step
//                     linearised about the current state
enum class StepScheme { explicit_euler, linearly_implicit };

// volume: thickness average of eps_zz over the LC layer
// series: d_LC / integral dz / eps_zz (capacitive; charge-based in 2D)
enum class PermittivityAverage { volume, series };

struct SolverOptions {
    double tol_q = 1e-4;            // max |H| in units of L / d_LC^2
    double energy_rtol = 1e-10;     // relative energy change at convergence
    long max_steps = 500000;
    int poisson_every = 5;          // Q steps between potential solves (2D)
    double tilt_perturbation = 1e-3;
    StepScheme scheme = StepScheme::linearly_implicit;
    PoissonOptions poisson{};
    double dt_initial = 0.0;        // m^3/J; 0 picks 0.1 / (bulk stiffness)
    double dt_growth = 4.0;         // applied after each accepted step
    double dt_max = 1e30;
};

// Total free energy. 1D: per unit area, with the potential eliminated in closed
// form so the value is the constant-voltage energy of the Q field alone.
// 2D: per unit length along y and per electrode period, at the stored potential.
double total_energy(const CellState& state, const CellStack& stack, const LdgModel& model);

// Gradient of total_energy with respect to the packed Q components of every
// node (5 entries per node, node-major), held nodes included.
Eigen::VectorXd energy_gradient(const CellState& state, const CellStack& stack,
                                const LdgModel& model);

// Molecular field -dF/dQ at every node, consistent with total_energy. Held
// boundary nodes carry zero.
std::vector<QTensor> discrete_molecular_field(const CellState& state, const CellStack& stack,
                                              const LdgModel& model);

// Max |H|_F over free nodes, in units of L / d_LC^2.
double field_residual(const CellState& state, const CellStack& stack, const LdgModel& model);

struct StepResult {
    double energy = 0.0;   // energy after the accepted step
    double change = 0.0;   // energy difference of the step, without cancellation
    double dt = 0.0;       // step size actually used
    int rejections = 0;
};

// One backtracking gradient-flow step at the stored potential (2D) or the exact
// potential (1D). Rejected trials halve dt; dt below 1e-18 of dt_initial raises
// StagnationError. Held nodes are untouched; dt is updated to the accepted step.
StepResult gradient_flow_step(CellState& state, const CellStack& stack, const LdgModel& model,
                              double& dt, const SolverOptions& opts = {});

// Equilibrium at fixed voltage. `warm` (optional) seeds Q; a warm state with a
// tilt below the perturbation amplitude is replaced by the perturbed planar start.
CellState relax(const CellStack& stack, const LdgModel& model, double voltage,
                const SolverOptions& opts = {}, Dimensionality dims = Dimensionality::one_d,
                const CellState* warm = nullptr);

double effective_permittivity(const CellState& state, const CellStack& stack,
                              const LdgModel& model,
                              PermittivityAverage average = PermittivityAverage::volume);

struct CurveRow {
    double voltage = 0.0;
    double eps_eff = 0.0;
    double midplane_tilt = 0.0;
    double energy = 0.0;
};

struct SweepOptions {
    bool warm_start = true;
    int jobs = 1;  // used only when warm_start is false
    PermittivityAverage average = PermittivityAverage::volume;
    Dimensionality dims = Dimensionality::one_d;
};

// One relax per voltage in ascending order. on_row is called in voltage order
// for each finished row (also for the rows finished before a failure).
// Errors are rethrown as NonConvergenceError carrying the offending voltage.
std::vector<CurveRow> freedericksz_curve(
    const CellStack& stack, const LdgModel& model, const std::vector<double>& voltages,
    const SolverOptions& opts = {}, const SweepOptions& sweep = {},
    const std::function<void(const CurveRow&, const CellState&)>& on_row = {});

// Threshold voltage read off a Freedericksz table: the first rise of eps_eff
// above its zero-field baseline, extrapolated linearly back to the baseline.
double estimate_threshold(const std::vector<CurveRow>& rows);

// Voltage of the steepest eps_eff rise (midpoint of the steepest interval).
double steepest_rise_voltage(const std::vector<CurveRow>& rows);

}  // namespace lctune
