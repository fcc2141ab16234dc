#pragma once

#include "lctune/berreman.hpp"
#include "lctune/cell.hpp"
#include "lctune/landau.hpp"

#include <optional>
#include <vector>

namespace lctune {

struct ItoCoating {
    double thickness = 150e-9;       // m
    cdouble index{1.9, 0.02};        // complex refractive index at the wavelength
};

enum class Polarisation { unpolarised, x, y, crossed_45 };

struct OpticsOptions {
    PlaneWaveSpec wave{};                 // ambient: the cell substrates
    std::optional<ItoCoating> ito = ItoCoating{};  // placed where electrodes are
    double outer_index = 1.0;             // medium beyond the substrates; <= 0 drops the outer faces
    Polarisation polarisation = Polarisation::unpolarised;
};

struct ColumnOptics {
    double t = 0.0;
    double r = 0.0;
};

// Transmittance of one LC column (Q at the nodes, bottom to top), with ITO on
// the bottom and/or top side. Outer substrate faces are added incoherently.
ColumnOptics column_transmittance(const std::vector<QTensor>& column, double node_spacing,
                                  bool ito_bottom, bool ito_top, const LdgModel& model,
                                  const OpticsOptions& opts);

struct ProfileRow {
    double x = 0.0;  // m
    double t = 0.0;
    double r = 0.0;
};

// Column-wise (local-mode) transmittance across one electrode period of a 2D
// state. A 1D state yields a single row at x = 0 with electrodes on both sides.
std::vector<ProfileRow> transmittance_profile_2d(const CellState& state, const CellStack& stack,
                                                 const LdgModel& model, const OpticsOptions& opts = {});

double mean_transmittance(const std::vector<ProfileRow>& rows);

}  // namespace lctune
