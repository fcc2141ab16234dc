#include "lctune/electrostatics.hpp"

#include "lctune/error.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>

namespace lctune {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Layout {
    std::vector<double> z;         // row coordinates
    std::vector<double> cell_eps;  // per cell row; negative marks an LC row
    int lc_row0 = 0;
    int bottom_row = 0;
    int top_row = 0;
};

Layout make_layout(const CellStack& stack) {
    Layout l;
    const double h = stack.lc_spacing();
    double z = 0.0;
    l.z.push_back(0.0);
    auto append = [&](double thickness, double eps) {
        const int n = std::max(2, static_cast<int>(std::lround(thickness / h)));
        const double dz = thickness / n;
        for (int k = 0; k < n; ++k) {
            z += dz;
            l.z.push_back(z);
            l.cell_eps.push_back(eps);
        }
    };
    for (auto it = stack.cover_layers.rbegin(); it != stack.cover_layers.rend(); ++it)
        append(it->thickness, it->eps);
    l.bottom_row = static_cast<int>(l.z.size()) - 1;
    for (auto it = stack.inner_layers.rbegin(); it != stack.inner_layers.rend(); ++it)
        append(it->thickness, it->eps);
    l.lc_row0 = static_cast<int>(l.z.size()) - 1;
    for (int j = 0; j + 1 < stack.grid_nz; ++j) {
        z += h;
        l.z.push_back(z);
        l.cell_eps.push_back(-1.0);
    }
    for (const auto& layer : stack.inner_layers) append(layer.thickness, layer.eps);
    l.top_row = static_cast<int>(l.z.size()) - 1;
    for (const auto& layer : stack.cover_layers) append(layer.thickness, layer.eps);
    const double z0 = l.z[static_cast<std::size_t>(l.lc_row0)];
    for (auto& v : l.z) v -= z0;
    return l;
}

std::vector<bool> finger_mask(const CellStack& stack, double center) {
    const int nx = stack.grid_nx;
    std::vector<bool> mask(static_cast<std::size_t>(nx), false);
    if (stack.electrodes.kind == ElectrodeKind::plate) {
        std::fill(mask.begin(), mask.end(), true);
        return mask;
    }
    const double period = stack.electrodes.period();
    const double half = 0.5 * stack.electrodes.width;
    int nearest = 0;
    double best = period;
    bool any = false;
    for (int i = 0; i < nx; ++i) {
        double d = std::fmod(std::abs(column_x(stack, i) - center), period);
        d = std::min(d, period - d);
        if (d <= half * (1.0 + 1e-12)) {
            mask[static_cast<std::size_t>(i)] = true;
            any = true;
        }
        if (d < best) {
            best = d;
            nearest = i;
        }
    }
    if (!any) mask[static_cast<std::size_t>(nearest)] = true;
    return mask;
}

struct CellGeom {
    double hx;
    double hz;
};

// In-plane (x, z) components of the permittivity of an LC cell.
struct PlaneEps {
    double xx;
    double xz;
    double zz;
};

PlaneEps lc_cell_eps(const CellState& s, const LdgModel& model, int i, int j) {
    const int i1 = (i + 1) % s.nx;
    const QTensor avg = 0.25 * (s.at(i, j) + s.at(i1, j) + s.at(i, j + 1) + s.at(i1, j + 1));
    const Eigen::Matrix3d e = model.dielectric(avg);
    return {e(0, 0), e(0, 2), e(2, 2)};
}

// Local 4x4 stiffness of one cell; node order (i,r), (i+1,r), (i,r+1), (i+1,r+1).
Eigen::Matrix4d cell_stiffness(const PlaneEps& e, CellGeom g) {
    Eigen::Vector4d a1(-1, 1, 0, 0), a2(0, 0, -1, 1), b1(-1, 0, 1, 0), b2(0, -1, 0, 1);
    a1 /= g.hx;
    a2 /= g.hx;
    b1 /= g.hz;
    b2 /= g.hz;
    const Eigen::Vector4d abar = 0.5 * (a1 + a2);
    const Eigen::Vector4d bbar = 0.5 * (b1 + b2);
    const Eigen::Matrix4d k = 0.5 * e.xx * (a1 * a1.transpose() + a2 * a2.transpose()) +
                              0.5 * e.zz * (b1 * b1.transpose() + b2 * b2.transpose()) +
                              e.xz * (abar * bbar.transpose() + bbar * abar.transpose());
    return g.hx * g.hz * k;
}

using RowSparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Visits every cell of the 2D grid with its permittivity and geometry.
template <typename Fn>
void for_each_cell(const CellState& s, const CellStack& stack, const LdgModel& model,
                   const Layout& layout, Fn&& fn) {
    const int nx = s.nx;
    const double hx = stack.electrodes.period() / nx;
    const int rows = static_cast<int>(layout.z.size());
    for (int r = 0; r + 1 < rows; ++r) {
        const double hz = layout.z[static_cast<std::size_t>(r + 1)] - layout.z[static_cast<std::size_t>(r)];
        const double fixed = layout.cell_eps[static_cast<std::size_t>(r)];
        for (int i = 0; i < nx; ++i) {
            PlaneEps e{fixed, 0.0, fixed};
            if (fixed < 0.0) e = lc_cell_eps(s, model, i, r - layout.lc_row0);
            const int i1 = (i + 1) % nx;
            const std::array<int, 4> nodes{r * nx + i, r * nx + i1, (r + 1) * nx + i,
                                           (r + 1) * nx + i1};
            fn(i, r, nodes, e, CellGeom{hx, hz});
        }
    }
}

RowSparse assemble_stiffness(const CellState& s, const CellStack& stack, const LdgModel& model,
                             const Layout& layout) {
    const int n = static_cast<int>(layout.z.size()) * s.nx;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n) * 16);
    for_each_cell(s, stack, model, layout,
                  [&](int, int, const std::array<int, 4>& nodes, const PlaneEps& e, CellGeom g) {
                      const Eigen::Matrix4d k = cell_stiffness(e, g);
                      for (int a = 0; a < 4; ++a)
                          for (int b = 0; b < 4; ++b)
                              trip.emplace_back(nodes[static_cast<std::size_t>(a)],
                                                nodes[static_cast<std::size_t>(b)], k(a, b));
                  });
    RowSparse k(n, n);
    k.setFromTriplets(trip.begin(), trip.end());
    return k;
}

double poisson_1d(CellState& s, const CellStack& stack, const LdgModel& model) {
    const double h = stack.lc_spacing();
    const double r = series_resistance_1d(s, stack, model);
    const double v = s.applied_voltage;
    const double d_over_eps0 = r > 0.0 ? v / r : 0.0;  // D / eps0
    s.potential.assign(static_cast<std::size_t>(s.nz), 0.0);
    double u = d_over_eps0 * stack.inner_resistance();
    s.potential[0] = u;
    for (int k = 0; k + 1 < s.nz; ++k) {
        const double eps = 0.5 * (model.dielectric_zz(s.q[static_cast<std::size_t>(k)]) +
                                  model.dielectric_zz(s.q[static_cast<std::size_t>(k + 1)]));
        u += d_over_eps0 * h / eps;
        s.potential[static_cast<std::size_t>(k + 1)] = u;
    }
    return 0.0;
}

}  // namespace

SeriesSolution solve_series(std::span<const DielectricLayer> layers, double voltage) {
    SeriesSolution out;
    for (const auto& l : layers) {
        if (!(l.thickness >= 0.0) || !(l.eps > 0.0))
            throw InputError("solve_series: layers need non-negative thickness and positive eps");
        out.resistance += l.thickness / l.eps;
    }
    if (!(out.resistance > 0.0)) throw InputError("solve_series: stack has zero thickness");
    const double d = voltage / out.resistance;
    double u = 0.0;
    out.interface_potential.push_back(0.0);
    for (const auto& l : layers) {
        out.field.push_back(d / l.eps);
        u += d * l.thickness / l.eps;
        out.interface_potential.push_back(u);
    }
    return out;
}

double series_resistance_1d(const CellState& s, const CellStack& stack, const LdgModel& model) {
    const double h = stack.lc_spacing();
    double r = 2.0 * stack.inner_resistance();
    for (int k = 0; k + 1 < s.nz; ++k) {
        const double eps = 0.5 * (model.dielectric_zz(s.q[static_cast<std::size_t>(k)]) +
                                  model.dielectric_zz(s.q[static_cast<std::size_t>(k + 1)]));
        r += h / eps;
    }
    return r;
}

void prepare_potential_grid(CellState& s, const CellStack& stack) {
    const Layout layout = make_layout(stack);
    s.potential_z = layout.z;
    s.lc_row0 = layout.lc_row0;
    const std::size_t n = layout.z.size() * static_cast<std::size_t>(s.nx);
    if (s.potential.size() != n) s.potential.assign(n, 0.0);
}

ElectrodeRows electrode_rows(const CellState& s, const CellStack& stack) {
    const Layout layout = make_layout(stack);
    ElectrodeRows e;
    e.bottom_row = layout.bottom_row;
    e.top_row = layout.top_row;
    e.bottom = finger_mask(stack, 0.0);
    e.top = finger_mask(stack, stack.electrodes.offset);
    if (static_cast<int>(e.bottom.size()) != s.nx)
        throw InputError("electrode_rows: state and stack disagree on grid_nx");
    return e;
}

namespace {

// 1 where a grid node is held at an electrode potential; sets those potentials.
std::vector<char> hold_electrodes(CellState& s, const CellStack& stack, const Layout& layout) {
    const ElectrodeRows er = electrode_rows(s, stack);
    const int nx = s.nx;
    std::vector<char> fixed(layout.z.size() * static_cast<std::size_t>(nx), 0);
    for (int i = 0; i < nx; ++i) {
        if (er.bottom[static_cast<std::size_t>(i)]) {
            const auto idx = static_cast<std::size_t>(er.bottom_row * nx + i);
            fixed[idx] = 1;
            s.potential[idx] = 0.0;
        }
        if (er.top[static_cast<std::size_t>(i)]) {
            const auto idx = static_cast<std::size_t>(er.top_row * nx + i);
            fixed[idx] = 1;
            s.potential[idx] = s.applied_voltage;
        }
    }
    return fixed;
}

std::vector<int> free_numbering(const std::vector<char>& fixed, int& count) {
    std::vector<int> index(fixed.size(), -1);
    count = 0;
    for (std::size_t n = 0; n < fixed.size(); ++n)
        if (!fixed[n]) index[n] = count++;
    return index;
}

double relative_residual(const RowSparse& k, const std::vector<char>& fixed,
                         const std::vector<double>& u) {
    double sum = 0.0;
    double forcing = 0.0;
    for (int row = 0; row < k.rows(); ++row) {
        if (fixed[static_cast<std::size_t>(row)]) continue;
        double r = 0.0;
        double b = 0.0;
        for (RowSparse::InnerIterator it(k, row); it; ++it) {
            const double term = it.value() * u[static_cast<std::size_t>(it.col())];
            r += term;
            if (fixed[static_cast<std::size_t>(it.col())]) b -= term;
        }
        sum += r * r;
        forcing += b * b;
    }
    return forcing > 0.0 ? std::sqrt(sum / forcing) : std::sqrt(sum);
}

double solve_direct(CellState& s, const RowSparse& k, const std::vector<char>& fixed) {
    int nfree = 0;
    const std::vector<int> index = free_numbering(fixed, nfree);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(k.nonZeros()));
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nfree);
    for (int row = 0; row < k.rows(); ++row) {
        const int fr = index[static_cast<std::size_t>(row)];
        if (fr < 0) continue;
        for (RowSparse::InnerIterator it(k, row); it; ++it) {
            const int fc = index[static_cast<std::size_t>(it.col())];
            if (fc >= 0) trip.emplace_back(fr, fc, it.value());
            else rhs[fr] -= it.value() * s.potential[static_cast<std::size_t>(it.col())];
        }
    }
    Eigen::SparseMatrix<double> a(nfree, nfree);
    a.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(a);
    if (ldlt.info() != Eigen::Success) throw SolverError("poisson_solve: factorisation failed", 0.0);
    const Eigen::VectorXd u = ldlt.solve(rhs);
    for (std::size_t n = 0; n < index.size(); ++n)
        if (index[n] >= 0) s.potential[n] = u[index[n]];
    return relative_residual(k, fixed, s.potential);
}

double solve_sor(CellState& s, const RowSparse& k, const std::vector<char>& fixed, int rows,
                 const PoissonOptions& opts) {
    const int nx = s.nx;
    std::array<std::vector<int>, 2> colour;
    for (int r = 0; r < rows; ++r)
        for (int i = 0; i < nx; ++i)
            if (!fixed[static_cast<std::size_t>(r * nx + i)])
                colour[static_cast<std::size_t>((i + r) % 2)].push_back(r * nx + i);
    const double omega = opts.omega > 0.0
                             ? opts.omega
                             : 2.0 / (1.0 + std::sin(kPi / std::max(nx, rows)));
    double res = relative_residual(k, fixed, s.potential);
    int iter = 0;
    while (res > opts.tol && iter < opts.max_iter) {
        for (int c = 0; c < 2; ++c)
            for (int row : colour[static_cast<std::size_t>(c)]) {
                double off = 0.0;
                double diag = 0.0;
                for (RowSparse::InnerIterator it(k, row); it; ++it) {
                    if (it.col() == row) diag += it.value();
                    else off += it.value() * s.potential[static_cast<std::size_t>(it.col())];
                }
                auto& u = s.potential[static_cast<std::size_t>(row)];
                u = (1.0 - omega) * u - omega * off / diag;
            }
        ++iter;
        if (iter % 10 == 0) res = relative_residual(k, fixed, s.potential);
    }
    return relative_residual(k, fixed, s.potential);
}

}  // namespace

double poisson_solve(CellState& s, const CellStack& stack, const LdgModel& model,
                     const PoissonOptions& opts) {
    if (s.dims == Dimensionality::one_d) return poisson_1d(s, stack, model);

    prepare_potential_grid(s, stack);
    const Layout layout = make_layout(stack);
    const std::vector<char> fixed = hold_electrodes(s, stack, layout);
    const RowSparse k = assemble_stiffness(s, stack, model, layout);
    const double res = opts.method == PoissonMethod::direct
                           ? solve_direct(s, k, fixed)
                           : solve_sor(s, k, fixed, static_cast<int>(layout.z.size()), opts);
    if (!(res <= opts.tol)) throw SolverError("poisson_solve: residual above tolerance", res);
    return res;
}

PoissonLinearization linearize_poisson_2d(const CellState& state, const CellStack& stack,
                                          const LdgModel& model) {
    if (state.dims != Dimensionality::two_d)
        throw InputError("linearize_poisson_2d: state must be two-dimensional");
    CellState s = state;
    prepare_potential_grid(s, stack);
    const Layout layout = make_layout(stack);
    const std::vector<char> fixed = hold_electrodes(s, stack, layout);
    PoissonLinearization out;
    out.free_index = free_numbering(fixed, out.free_count);
    const RowSparse k = assemble_stiffness(s, stack, model, layout);

    std::vector<Eigen::Triplet<double>> trip;
    for (int row = 0; row < k.rows(); ++row) {
        const int fr = out.free_index[static_cast<std::size_t>(row)];
        if (fr < 0) continue;
        for (RowSparse::InnerIterator it(k, row); it; ++it) {
            const int fc = out.free_index[static_cast<std::size_t>(it.col())];
            if (fc >= 0) trip.emplace_back(fr, fc, it.value());
        }
    }
    out.stiffness.resize(out.free_count, out.free_count);
    out.stiffness.setFromTriplets(trip.begin(), trip.end());

    // d(K U)/dq through the cell permittivities; each LC cell averages its 4 nodes.
    std::array<Eigen::Matrix4d, 5> kb;
    std::vector<Eigen::Triplet<double>> ctrip;
    const double slope = model.eps_slope();
    for_each_cell(s, stack, model, layout,
                  [&](int i, int r, const std::array<int, 4>& nodes, const PlaneEps&, CellGeom g) {
                      if (layout.cell_eps[static_cast<std::size_t>(r)] >= 0.0) return;
                      Eigen::Vector4d u;
                      for (int a = 0; a < 4; ++a)
                          u[a] = s.potential[static_cast<std::size_t>(nodes[static_cast<std::size_t>(a)])];
                      const int j = r - layout.lc_row0;
                      const int i1 = (i + 1) % s.nx;
                      const std::array<int, 4> qn{j * s.nx + i, j * s.nx + i1, (j + 1) * s.nx + i,
                                                  (j + 1) * s.nx + i1};
                      for (int c = 0; c < 5; ++c) {
                          const Eigen::Matrix3d& e = basis_matrix(c);
                          const Eigen::Vector4d ku =
                              0.25 * slope * (cell_stiffness({e(0, 0), e(0, 2), e(2, 2)}, g) * u);
                          for (int a = 0; a < 4; ++a) {
                              const int fr = out.free_index[static_cast<std::size_t>(nodes[static_cast<std::size_t>(a)])];
                              if (fr < 0 || ku[a] == 0.0) continue;
                              for (const int n : qn) ctrip.emplace_back(fr, 5 * n + c, ku[a]);
                          }
                      }
                  });
    out.coupling.resize(out.free_count, 5 * static_cast<Eigen::Index>(s.q.size()));
    out.coupling.setFromTriplets(ctrip.begin(), ctrip.end());
    return out;
}

double stored_energy_2d(const CellState& s, const CellStack& stack, const LdgModel& model) {
    const Layout layout = make_layout(stack);
    double w = 0.0;
    for_each_cell(s, stack, model, layout,
                  [&](int, int, const std::array<int, 4>& nodes, const PlaneEps& e, CellGeom g) {
                      Eigen::Vector4d u;
                      for (int a = 0; a < 4; ++a)
                          u[a] = s.potential[static_cast<std::size_t>(nodes[static_cast<std::size_t>(a)])];
                      w += u.dot(cell_stiffness(e, g) * u);
                  });
    return 0.5 * kEpsilon0 * w;
}

std::vector<Eigen::Matrix3d> stored_energy_q_gradient_2d(const CellState& s,
                                                         const CellStack& stack,
                                                         const LdgModel& model) {
    const Layout layout = make_layout(stack);
    std::vector<Eigen::Matrix3d> grad(s.q.size(), Eigen::Matrix3d::Zero());
    const double slope = model.eps_slope();
    for_each_cell(s, stack, model, layout,
                  [&](int i, int r, const std::array<int, 4>& nodes, const PlaneEps&, CellGeom g) {
                      if (layout.cell_eps[static_cast<std::size_t>(r)] >= 0.0) return;
                      auto u = [&](int a) {
                          return s.potential[static_cast<std::size_t>(nodes[static_cast<std::size_t>(a)])];
                      };
                      const double a1 = (u(1) - u(0)) / g.hx;
                      const double a2 = (u(3) - u(2)) / g.hx;
                      const double b1 = (u(2) - u(0)) / g.hz;
                      const double b2 = (u(3) - u(1)) / g.hz;
                      Eigen::Matrix3d t = Eigen::Matrix3d::Zero();
                      t(0, 0) = 0.5 * (a1 * a1 + a2 * a2);
                      t(2, 2) = 0.5 * (b1 * b1 + b2 * b2);
                      t(0, 2) = t(2, 0) = 0.25 * (a1 + a2) * (b1 + b2);
                      const Eigen::Matrix3d contrib = 0.5 * kEpsilon0 * g.hx * g.hz * slope * 0.25 * t;
                      const int j = r - layout.lc_row0;
                      const int i1 = (i + 1) % s.nx;
                      for (const auto& [ii, jj] : {std::pair{i, j}, std::pair{i1, j},
                                                  std::pair{i, j + 1}, std::pair{i1, j + 1}})
                          grad[static_cast<std::size_t>(jj) * s.nx + ii] += contrib;
                  });
    return grad;
}

}  // namespace lctune
