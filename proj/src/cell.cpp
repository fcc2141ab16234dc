#include "lctune/cell.hpp"

#include "lctune/error.hpp"

#include <algorithm>
#include <cmath>

namespace lctune {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void CellStack::validate() const {
    if (!(lc_thickness > 0.0)) throw InputError("cell: lc_thickness must be positive");
    for (const auto& l : cover_layers)
        if (!(l.thickness > 0.0) || !(l.eps > 0.0))
            throw InputError("cell: cover layers need positive thickness and permittivity");
    for (const auto& l : inner_layers)
        if (!(l.thickness > 0.0) || !(l.eps > 0.0))
            throw InputError("cell: inner layers need positive thickness and permittivity");
    if (grid_nz < 17) throw InputError("cell: grid_nz must be at least 17");
    if (grid_nx < 1) throw InputError("cell: grid_nx must be positive");
    if (std::abs(easy_axis.norm() - 1.0) > 1e-12)
        throw InputError("cell: easy axis must be a unit vector");
    if (electrodes.kind == ElectrodeKind::grid) {
        if (!(electrodes.width > 0.0) || !(electrodes.gap > 0.0))
            throw InputError("cell: grid electrodes need positive width and gap");
    }
}

double CellStack::inner_resistance() const {
    double r = 0.0;
    for (const auto& l : inner_layers) r += l.thickness / l.eps;
    return r;
}

CellState initial_state(const CellStack& stack, const LdgModel& model, double voltage,
                        Dimensionality dims, double tilt) {
    stack.validate();
    CellState s;
    s.dims = dims;
    s.nx = dims == Dimensionality::one_d ? 1 : stack.grid_nx;
    s.nz = stack.grid_nz;
    s.applied_voltage = voltage;
    s.q.resize(static_cast<std::size_t>(s.nx) * s.nz);

    // Rotate the easy axis towards +z about the in-plane normal.
    const Eigen::Vector3d e = stack.easy_axis;
    Eigen::Vector3d in_plane(e.x(), e.y(), 0.0);
    const bool planar = in_plane.norm() > 1e-12;
    if (planar) in_plane.normalize();
    for (int j = 0; j < s.nz; ++j) {
        const double zeta = static_cast<double>(j) / (s.nz - 1);
        const double theta = tilt * std::sin(kPi * zeta);
        Eigen::Vector3d n = e;
        if (planar && theta != 0.0) {
            const double base = std::asin(std::clamp(e.z(), -1.0, 1.0));
            n = std::cos(base + theta) * in_plane + std::sin(base + theta) * Eigen::Vector3d::UnitZ();
        }
        const QTensor q = uniaxial_q(n.normalized(), model.s_eq());
        for (int i = 0; i < s.nx; ++i) s.at(i, j) = q;
    }
    return s;
}

CellState homeotropic_state(const CellStack& stack, const LdgModel& model, double voltage,
                            Dimensionality dims) {
    CellState s = initial_state(stack, model, voltage, dims, 0.0);
    const QTensor q = uniaxial_q(Eigen::Vector3d::UnitZ(), model.s_eq());
    for (auto& v : s.q) v = q;
    return s;
}

double midplane_tilt(const CellState& state) {
    const int j = (state.nz - 1) / 2;
    double sum = 0.0;
    if ((state.nz - 1) % 2 == 0) {
        for (int i = 0; i < state.nx; ++i) sum += tilt_angle(state.at(i, j));
    } else {
        for (int i = 0; i < state.nx; ++i)
            sum += tilt_angle(0.5 * (state.at(i, j) + state.at(i, j + 1)));
    }
    return sum / state.nx;
}

}  // namespace lctune
