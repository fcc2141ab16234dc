#include "lctune/profile.hpp"

#include "lctune/electrostatics.hpp"
#include "lctune/error.hpp"

#include <cmath>

namespace lctune {

namespace {

ColumnOptics polarised(const std::vector<OpticalLayer>& layers, const PlaneWaveSpec& wave,
                       const Eigen::Vector2cd& in, const Eigen::Vector2cd* analyser) {
    const OpticalResult res = transmittance(layers, wave, in);
    return {analyser ? analysed_transmittance(res, *analyser) : res.t, res.r};
}

}  // namespace

ColumnOptics column_transmittance(const std::vector<QTensor>& column, double node_spacing,
                                  bool ito_bottom, bool ito_top, const LdgModel& model,
                                  const OpticsOptions& opts) {
    std::vector<OpticalLayer> layers;
    if (opts.ito && ito_bottom) layers.push_back(isotropic_layer(opts.ito->thickness, opts.ito->index));
    const auto lc = lc_column_to_stack(column, node_spacing, model);
    layers.insert(layers.end(), lc.begin(), lc.end());
    if (opts.ito && ito_top) layers.push_back(isotropic_layer(opts.ito->thickness, opts.ito->index));

    const double h = std::sqrt(0.5);
    std::vector<ColumnOptics> parts;
    switch (opts.polarisation) {
    case Polarisation::unpolarised:
        parts.push_back(polarised(layers, opts.wave, {1.0, 0.0}, nullptr));
        parts.push_back(polarised(layers, opts.wave, {0.0, 1.0}, nullptr));
        break;
    case Polarisation::x:
        parts.push_back(polarised(layers, opts.wave, {1.0, 0.0}, nullptr));
        break;
    case Polarisation::y:
        parts.push_back(polarised(layers, opts.wave, {0.0, 1.0}, nullptr));
        break;
    case Polarisation::crossed_45: {
        const Eigen::Vector2cd analyser(h, -h);
        parts.push_back(polarised(layers, opts.wave, {h, h}, &analyser));
        break;
    }
    }

    ColumnOptics out;
    for (const auto& p : parts) {
        IncoherentPair total{p.t, p.r};
        if (opts.outer_index > 0.0) {
            const IncoherentPair in_face = fresnel_face(opts.outer_index, opts.wave.n_in);
            const IncoherentPair out_face = fresnel_face(opts.wave.n_out, opts.outer_index);
            total = incoherent_cascade(incoherent_cascade(in_face, total), out_face);
        }
        out.t += total.t / static_cast<double>(parts.size());
        out.r += total.r / static_cast<double>(parts.size());
    }
    return out;
}

std::vector<ProfileRow> transmittance_profile_2d(const CellState& state, const CellStack& stack,
                                                 const LdgModel& model, const OpticsOptions& opts) {
    const double h = stack.lc_spacing();
    std::vector<ProfileRow> rows;
    std::vector<QTensor> column(static_cast<std::size_t>(state.nz));
    if (state.dims == Dimensionality::one_d) {
        const ColumnOptics c = column_transmittance(state.q, h, true, true, model, opts);
        rows.push_back({0.0, c.t, c.r});
        return rows;
    }
    CellState probe = state;
    prepare_potential_grid(probe, stack);
    const ElectrodeRows er = electrode_rows(probe, stack);
    for (int i = 0; i < state.nx; ++i) {
        for (int j = 0; j < state.nz; ++j) column[static_cast<std::size_t>(j)] = state.at(i, j);
        const ColumnOptics c = column_transmittance(column, h, er.bottom[static_cast<std::size_t>(i)],
                                                    er.top[static_cast<std::size_t>(i)], model, opts);
        rows.push_back({column_x(stack, i), c.t, c.r});
    }
    return rows;
}

double mean_transmittance(const std::vector<ProfileRow>& rows) {
    if (rows.empty()) throw InputError("mean_transmittance: empty profile");
    double sum = 0.0;
    for (const auto& r : rows) sum += r.t;
    return sum / static_cast<double>(rows.size());
}

}  // namespace lctune
