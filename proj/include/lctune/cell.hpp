#pragma once

#include "lctune/landau.hpp"
#include "lctune/qtensor.hpp"

#include <Eigen/Core>

#include <vector>

namespace lctune {

struct DielectricLayer {
    double thickness = 0.0;  // m
    double eps = 1.0;        // relative permittivity
};

enum class ElectrodeKind { plate, grid };

struct ElectrodePattern {
    ElectrodeKind kind = ElectrodeKind::grid;
    double width = 1e-6;   // finger width, m
    double gap = 49e-6;    // gap between fingers, m
    double offset = 0.0;   // shift of the top fingers relative to the bottom ones, m

    double period() const { return width + gap; }
};

enum class Anchoring { strong, free };

// Layered device geometry. Layers are listed from the LC outwards and are
// mirrored on the top and bottom sides of the cell.
struct CellStack {
    double lc_thickness = 80e-6;
    // Outside the electrode planes (protective polyimide).
    std::vector<DielectricLayer> cover_layers{{50e-6, 3.5}};
    // Between an electrode plane and the LC, in series with the LC.
    std::vector<DielectricLayer> inner_layers{};
    ElectrodePattern electrodes{};
    Eigen::Vector3d easy_axis{1.0, 0.0, 0.0};
    Anchoring anchoring = Anchoring::strong;
    int grid_nz = 129;
    int grid_nx = 128;

    // Throws InputError when a thickness, grid size or electrode size is invalid.
    void validate() const;

    double lc_spacing() const { return lc_thickness / (grid_nz - 1); }
    // Sum of thickness / eps over the inner layers of one side.
    double inner_resistance() const;
};

enum class Dimensionality { one_d, two_d };

// Solver state on the LC grid. Q is stored row-major in z: q[j * nx + i]
// with j across the cell and i along x (nx == 1 in 1D).
struct CellState {
    Dimensionality dims = Dimensionality::one_d;
    int nx = 1;
    int nz = 0;
    std::vector<QTensor> q;
    // 1D: potential at the nz LC nodes.
    // 2D: potential on the full electrostatic grid (see potential_z), row-major.
    std::vector<double> potential;
    std::vector<double> potential_z;  // 2D row coordinates, LC bottom at z = 0
    int lc_row0 = 0;                  // 2D row index of the LC bottom plane
    double applied_voltage = 0.0;
    double residual = 0.0;            // max |H| over free nodes, units of L / d^2
    double energy = 0.0;              // J/m^2 (1D) or J/m (2D)
    long steps = 0;
    std::vector<double> energy_history;  // accepted-step energies

    QTensor& at(int i, int j) { return q[static_cast<std::size_t>(j) * nx + i]; }
    const QTensor& at(int i, int j) const { return q[static_cast<std::size_t>(j) * nx + i]; }
};

// Uniform uniaxial state along the easy axis at S_eq, with a tilt of
// amplitude `tilt` (rad) shaped as sin(pi z / d) towards +z.
CellState initial_state(const CellStack& stack, const LdgModel& model, double voltage,
                        Dimensionality dims, double tilt);

// Uniform homeotropic state along z at S_eq.
CellState homeotropic_state(const CellStack& stack, const LdgModel& model, double voltage,
                            Dimensionality dims);

// Midplane tilt (rad); the mean over x in 2D.
double midplane_tilt(const CellState& state);

}  // namespace lctune
