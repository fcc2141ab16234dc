#pragma once

#include "lctune/cell.hpp"
#include "lctune/landau.hpp"

#include <Eigen/SparseCore>

#include <span>
#include <vector>

namespace lctune {

// Potential across a series stack of uniform layers listed bottom to top,
// bottom plane at 0 V and top plane at `voltage`.
struct SeriesSolution {
    std::vector<double> interface_potential;  // layers.size() + 1 values
    std::vector<double> field;                // E_z in each layer, V/m
    double resistance = 0.0;                  // sum of thickness / eps, m
};

SeriesSolution solve_series(std::span<const DielectricLayer> layers, double voltage);

enum class PoissonMethod { direct, sor };

struct PoissonOptions {
    PoissonMethod method = PoissonMethod::direct;
    double tol = 1e-8;       // relative residual of the 2D solve
    int max_iter = 200000;   // SOR sweeps
    double omega = 0.0;      // SOR factor; 0 selects one from the grid size
};

// Sum over LC intervals of h / eps_zz plus both sets of inner layers (1D).
double series_resistance_1d(const CellState& state, const CellStack& stack, const LdgModel& model);

// Rebuilds state.potential from the Q field with electrodes at 0 and V.
// 1D: exact series solution. 2D: anisotropic 9-point stencil, periodic in x,
// Dirichlet on electrode nodes, zero flux at the outer cover surfaces, solved
// by sparse LDLT or red-black SOR. Returns the final relative residual (0 in
// 1D). Throws SolverError when the 2D residual exceeds opts.tol.
double poisson_solve(CellState& state, const CellStack& stack, const LdgModel& model,
                     const PoissonOptions& opts = {});

// Linearisation of the 2D potential equations about a state: K restricted to
// the free (non-electrode) nodes, and the derivative of the free-node residual
// K U with respect to the packed Q of every LC node (column 5 * node + j).
// The electrostatic energy is (eps0 / 2) U^T K U.
struct PoissonLinearization {
    std::vector<int> free_index;  // grid node -> free index, -1 on electrodes
    int free_count = 0;
    Eigen::SparseMatrix<double> stiffness;
    Eigen::SparseMatrix<double> coupling;
};
PoissonLinearization linearize_poisson_2d(const CellState& state, const CellStack& stack,
                                          const LdgModel& model);

// Row layout of the 2D electrostatic grid; prepares state.potential_z,
// state.lc_row0 and a zero potential of the right size.
void prepare_potential_grid(CellState& state, const CellStack& stack);

// (eps0 / 2) integral of eps grad U . grad U over the whole 2D domain, per unit
// length along y and per electrode period. Sign: positive.
double stored_energy_2d(const CellState& state, const CellStack& stack, const LdgModel& model);

// d(stored_energy_2d) / dQ at every LC node, as symmetric matrix gradients.
std::vector<Eigen::Matrix3d> stored_energy_q_gradient_2d(const CellState& state,
                                                         const CellStack& stack,
                                                         const LdgModel& model);

// Electrode masks of the 2D grid: true where a node of row `bottom` / `top` is held.
struct ElectrodeRows {
    int bottom_row = 0;
    int top_row = 0;
    std::vector<bool> bottom;  // size nx
    std::vector<bool> top;
};
ElectrodeRows electrode_rows(const CellState& state, const CellStack& stack);

// x coordinate of column i of a 2D grid.
inline double column_x(const CellStack& stack, int i) {
    return stack.electrodes.period() * i / stack.grid_nx;
}

}  // namespace lctune
