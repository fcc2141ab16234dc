#include "lctune/relax.hpp"

#include "lctune/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

namespace lctune {

namespace {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

const Vec5& zz_direction() {
    static const Vec5 s = (Vec5() << -1.0, 0.0, 0.0, -1.0, 0.0).finished();
    return s;
}

struct Geometry {
    int nx = 1;
    int nz = 0;
    double hx = 1.0;  // 1 in 1D so that weights are per unit area
    double hz = 0.0;
    bool two_d = false;
    bool strong = true;

    double weight(int j) const {
        const double c = (j == 0 || j == nz - 1) ? 0.5 : 1.0;
        return hx * hz * c;
    }
    bool is_free(int j) const { return !strong || (j > 0 && j < nz - 1); }
    std::size_t node(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
};

Geometry geometry(const CellState& s, const CellStack& stack) {
    Geometry g;
    g.nx = s.nx;
    g.nz = s.nz;
    g.two_d = s.dims == Dimensionality::two_d;
    g.hx = g.two_d ? stack.electrodes.period() / s.nx : 1.0;
    g.hz = stack.lc_spacing();
    g.strong = stack.anchoring == Anchoring::strong;
    if (s.nz != stack.grid_nz) throw InputError("state and stack disagree on grid_nz");
    return g;
}

// Elastic bonds (a, b, kappa) with energy kappa/2 |Q_a - Q_b|^2.
template <typename Fn>
void for_each_bond(const Geometry& g, const double l, Fn&& fn) {
    const double kz = l * g.hx / g.hz;
    for (int j = 0; j + 1 < g.nz; ++j)
        for (int i = 0; i < g.nx; ++i) fn(g.node(i, j), g.node(i, j + 1), kz);
    if (!g.two_d || g.nx < 2) return;
    for (int j = 0; j < g.nz; ++j) {
        const double c = (j == 0 || j == g.nz - 1) ? 0.5 : 1.0;
        const double kx = l * g.hz * c / g.hx;
        for (int i = 0; i < g.nx; ++i) {
            const int i1 = (i + 1) % g.nx;
            if (g.nx == 2 && i == 1) break;  // a single bond between the two columns
            fn(g.node(i, j), g.node(i1, j), kx);
        }
    }
}

// Per-interval data of the 1D closed-form potential.
struct Series1d {
    std::vector<double> eps;    // eps_zz per interval
    std::vector<double> field;  // E_z per interval
    double resistance = 0.0;
};

Series1d series_1d(const CellState& s, const CellStack& stack, const LdgModel& model) {
    Series1d out;
    const double h = stack.lc_spacing();
    out.resistance = 2.0 * stack.inner_resistance();
    out.eps.resize(static_cast<std::size_t>(s.nz - 1));
    for (int k = 0; k + 1 < s.nz; ++k) {
        const double e = 0.5 * (model.dielectric_zz(s.q[static_cast<std::size_t>(k)]) +
                                model.dielectric_zz(s.q[static_cast<std::size_t>(k + 1)]));
        if (!(e > 0.0)) throw SolverError("non-positive eps_zz in the LC layer", 0.0);
        out.eps[static_cast<std::size_t>(k)] = e;
        out.resistance += h / e;
    }
    out.field.resize(out.eps.size());
    for (std::size_t k = 0; k < out.eps.size(); ++k)
        out.field[k] = s.applied_voltage / (out.resistance * out.eps[k]);
    return out;
}

// Energy relative to the uniform equilibrium bulk; differences match total_energy.
double excess_energy(const CellState& s, const CellStack& stack, const LdgModel& model) {
    const Geometry g = geometry(s, stack);
    double elastic = 0.0;
    for_each_bond(g, model.elastic_l(), [&](std::size_t a, std::size_t b, double k) {
        elastic += 0.5 * k * frobenius_norm_sq(s.q[a] - s.q[b]);
    });
    double bulk = 0.0;
    const double fmin = model.thermotropic_minimum();
    for (int j = 0; j < g.nz; ++j)
        for (int i = 0; i < g.nx; ++i)
            bulk += g.weight(j) * (model.thermotropic(s.q[g.node(i, j)]) - fmin);
    double electro = 0.0;
    if (g.two_d) {
        electro = -stored_energy_2d(s, stack, model);
    } else {
        const double r = series_1d(s, stack, model).resistance;
        electro = -0.5 * kEpsilon0 * s.applied_voltage * s.applied_voltage / r;
    }
    return elastic + bulk + electro;
}

double energy_offset(const CellState& s, const CellStack& stack, const LdgModel& model) {
    const double width = s.dims == Dimensionality::two_d ? stack.electrodes.period() : 1.0;
    return width * stack.lc_thickness * model.thermotropic_minimum();
}

Eigen::VectorXd gradient_impl(const CellState& s, const CellStack& stack, const LdgModel& model) {
    const Geometry g = geometry(s, stack);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(5 * static_cast<Eigen::Index>(s.q.size()));
    const Mat5& m = frobenius_metric();
    auto seg = [&](std::size_t n) { return grad.segment<5>(5 * static_cast<Eigen::Index>(n)); };

    for_each_bond(g, model.elastic_l(), [&](std::size_t a, std::size_t b, double k) {
        const Vec5 d = m * (s.q[a] - s.q[b]).vector();
        seg(a) += k * d;
        seg(b) -= k * d;
    });
    for (int j = 0; j < g.nz; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t n = g.node(i, j);
            seg(n) += g.weight(j) * coordinate_gradient(model.thermotropic_gradient(s.q[n]));
        }
    if (g.two_d) {
        const auto dw = stored_energy_q_gradient_2d(s, stack, model);
        for (std::size_t n = 0; n < s.q.size(); ++n) seg(n) -= coordinate_gradient(dw[n]);
    } else {
        const Series1d ser = series_1d(s, stack, model);
        const double c = model.eps_slope();
        const double h = g.hz;
        for (std::size_t k = 0; k < ser.eps.size(); ++k) {
            const double de = -0.5 * kEpsilon0 * h * ser.field[k] * ser.field[k];  // dE/deps_k
            seg(k) += 0.5 * c * de * zz_direction();
            seg(k + 1) += 0.5 * c * de * zz_direction();
        }
    }
    return grad;
}

// Applies a packed update as a rotation of the eigenframe plus a change of the
// eigenvalues; agrees with q + dq to first order but follows the director
// rotation for large steps. Off-diagonal parts between nearly equal
// eigenvalues stay linear.
QTensor retract(const QTensor& q, const QTensor& dq) {
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(q.matrix());
    const Eigen::Vector3d lam = es.eigenvalues();
    const Eigen::Matrix3d v = es.eigenvectors();
    Eigen::Matrix3d d = v.transpose() * dq.matrix() * v;
    const double spread = lam[2] - lam[0];
    Eigen::Matrix3d omega = Eigen::Matrix3d::Zero();
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            const double gap = lam[j] - lam[i];
            if (spread <= 0.0 || gap < 0.2 * spread) continue;
            omega(i, j) = d(i, j) / gap;
            omega(j, i) = -omega(i, j);
            d(i, j) = d(j, i) = 0.0;
        }
    const Eigen::Vector3d axis(omega(2, 1), omega(0, 2), omega(1, 0));
    const double angle = axis.norm();
    const Eigen::Matrix3d r =
        angle > 0.0 ? Eigen::AngleAxisd(angle, axis / angle).toRotationMatrix()
                    : Eigen::Matrix3d::Identity();
    const Eigen::Matrix3d inner = Eigen::Matrix3d(lam.asDiagonal()) + d;
    return QTensor::from_matrix(v * r * inner * r.transpose() * v.transpose());
}

Vec5 field_from_gradient(const Eigen::Ref<const Vec5>& g, double weight) {
    static const Mat5 minv = frobenius_metric().inverse();
    return -(minv * g) / weight;
}

class FlowWorkspace {
public:
    FlowWorkspace(const CellState& s, const CellStack& stack, const LdgModel& model,
                  const SolverOptions& opts)
        : stack_(stack), model_(model), opts_(opts), geom_(geometry(s, stack)) {
        free_index_.assign(s.q.size(), -1);
        for (int j = 0; j < geom_.nz; ++j)
            for (int i = 0; i < geom_.nx; ++i)
                if (geom_.is_free(j)) free_index_[geom_.node(i, j)] = nfree_++;
        dt_floor_ = 1e-18 * initial_dt();
    }

    double initial_dt() const {
        if (opts_.dt_initial > 0.0) return opts_.dt_initial;
        const auto& mat = model_.material();
        const double s = model_.s_eq();
        const double stiff = std::abs(mat.a_coef) + std::abs(mat.b_coef) * s + mat.c_coef * s * s;
        return 0.1 / stiff;
    }

    StepResult step(CellState& s, double& dt) {
        const Eigen::VectorXd grad = gradient_impl(s, stack_, model_);
        std::vector<QTensor> dq(s.q.size());
        const bool coupled = geom_.two_d && opts_.scheme == StepScheme::linearly_implicit;
        if (coupled) prepare_coupling(s);
        StepResult result;
        while (true) {
            if (!(dt >= dt_floor_))
                throw StagnationError("gradient_flow_step: step size underflow",
                                      field_residual(s, stack_, model_));
            bool ok = true;
            if (opts_.scheme == StepScheme::explicit_euler) {
                for (int j = 0; j < geom_.nz; ++j) {
                    if (!geom_.is_free(j)) continue;
                    for (int i = 0; i < geom_.nx; ++i) {
                        const std::size_t n = geom_.node(i, j);
                        const Vec5 h = field_from_gradient(grad.segment<5>(5 * static_cast<Eigen::Index>(n)),
                                                           geom_.weight(j));
                        dq[n] = QTensor::from_vector(dt * h);
                    }
                }
            } else {
                Eigen::VectorXd delta;
                ok = solve_implicit(s, grad, dt, delta);
                if (ok) {
                    for (std::size_t n = 0; n < s.q.size(); ++n) {
                        const int f = free_index_[n];
                        if (f < 0) continue;
                        const QTensor lin = QTensor::from_vector(delta.segment<5>(5 * f));
                        dq[n] = retract(s.q[n], lin) - s.q[n];
                    }
                }
            }
            if (ok && coupled) {
                // Reduced-energy change: frozen-potential part plus the potential relaxation.
                CellState trial = s;
                for (std::size_t n = 0; n < s.q.size(); ++n) trial.q[n] += dq[n];
                double change = energy_change(s, dq);
                if (std::isfinite(change)) {
                    change += stored_energy_2d(trial, stack_, model_);
                    poisson_solve(trial, stack_, model_, opts_.poisson);
                    change -= stored_energy_2d(trial, stack_, model_);
                }
                if (change <= 0.0) {
                    s.q = std::move(trial.q);
                    s.potential = std::move(trial.potential);
                    result.change = change;
                    result.energy = total_energy(s, stack_, model_);
                    result.dt = dt;
                    return result;
                }
            } else if (ok) {
                const double change = energy_change(s, dq);
                if (change <= 0.0) {
                    for (std::size_t n = 0; n < s.q.size(); ++n) s.q[n] += dq[n];
                    result.change = change;
                    result.energy = total_energy(s, stack_, model_);
                    result.dt = dt;
                    return result;
                }
            }
            ++result.rejections;
            dt *= 0.5;
        }
    }

    // E(q + dq) - E(q) at the stored potential (2D) or the exact potential (1D),
    // accumulated from local differences so that small changes survive rounding.
    double energy_change(const CellState& s, const std::vector<QTensor>& dq) const {
        double change = 0.0;
        for_each_bond(geom_, model_.elastic_l(), [&](std::size_t a, std::size_t b, double k) {
            const QTensor d0 = s.q[a] - s.q[b];
            const QTensor dd = dq[a] - dq[b];
            change += 0.5 * k * frobenius_dot(dd, 2.0 * d0 + dd);
        });
        for (int j = 0; j < geom_.nz; ++j)
            for (int i = 0; i < geom_.nx; ++i) {
                const std::size_t n = geom_.node(i, j);
                change += geom_.weight(j) * model_.thermotropic_change(s.q[n], dq[n]);
            }
        if (geom_.two_d) {
            // The stored energy is linear in Q at a fixed potential.
            const auto dw = stored_energy_q_gradient_2d(s, stack_, model_);
            for (std::size_t n = 0; n < s.q.size(); ++n)
                change -= coordinate_gradient(dw[n]).dot(dq[n].vector());
        } else if (s.applied_voltage != 0.0) {
            const Series1d ser = series_1d(s, stack_, model_);
            const double c = model_.eps_slope();
            double r1 = ser.resistance;
            double dr = 0.0;
            for (std::size_t k = 0; k < ser.eps.size(); ++k) {
                const double de = 0.5 * c * (dq[k].zz() + dq[k + 1].zz());
                const double e0 = ser.eps[k];
                if (!(e0 + de > 0.0)) return std::numeric_limits<double>::infinity();
                dr -= geom_.hz * de / (e0 * (e0 + de));
            }
            r1 += dr;
            change += 0.5 * kEpsilon0 * s.applied_voltage * s.applied_voltage * dr /
                      (ser.resistance * r1);
        }
        return change;
    }

private:
    bool solve_implicit(const CellState& s, const Eigen::VectorXd& grad, double dt,
                        Eigen::VectorXd& delta) {
        const Mat5& m = frobenius_metric();
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(nfree_) * 25 * 5);
        auto add_block = [&](int a, int b, const Mat5& blk) {
            for (int r = 0; r < 5; ++r)
                for (int c = 0; c < 5; ++c) trip.emplace_back(5 * a + r, 5 * b + c, blk(r, c));
        };
        for (int j = 0; j < geom_.nz; ++j)
            for (int i = 0; i < geom_.nx; ++i) {
                const std::size_t n = geom_.node(i, j);
                const int f = free_index_[n];
                if (f < 0) continue;
                const double w = geom_.weight(j);
                add_block(f, f, (w / dt) * m + w * model_.thermotropic_hessian(s.q[n]));
            }
        for_each_bond(geom_, model_.elastic_l(), [&](std::size_t a, std::size_t b, double k) {
            const int fa = free_index_[a];
            const int fb = free_index_[b];
            if (fa >= 0) add_block(fa, fa, k * m);
            if (fb >= 0) add_block(fb, fb, k * m);
            if (fa >= 0 && fb >= 0) {
                add_block(fa, fb, -k * m);
                add_block(fb, fa, -k * m);
            }
        });

        // 1D electrostatics: band part plus a negative rank-one term.
        Eigen::VectorXd u;
        double rank_one = 0.0;
        if (!geom_.two_d && s.applied_voltage != 0.0) {
            const Series1d ser = series_1d(s, stack_, model_);
            const double c = model_.eps_slope();
            const double v2 = s.applied_voltage * s.applied_voltage;
            const double r = ser.resistance;
            const Mat5 ss = zz_direction() * zz_direction().transpose();
            u = Eigen::VectorXd::Zero(5 * nfree_);
            for (std::size_t k = 0; k < ser.eps.size(); ++k) {
                const double e = ser.eps[k];
                const double d = kEpsilon0 * v2 * geom_.hz / (e * e * e * r * r) * 0.25 * c * c;
                const double rk = -geom_.hz / (e * e);
                for (const std::size_t a : {k, k + 1}) {
                    const int fa = free_index_[a];
                    if (fa < 0) continue;
                    u.segment<5>(5 * fa) += 0.5 * c * rk * zz_direction();
                    for (const std::size_t b : {k, k + 1}) {
                        const int fb = free_index_[b];
                        if (fb >= 0) add_block(fa, fb, d * ss);
                    }
                }
            }
            rank_one = kEpsilon0 * v2 / (r * r * r);
        }

        Eigen::SparseMatrix<double> a(5 * nfree_, 5 * nfree_);
        a.setFromTriplets(trip.begin(), trip.end());
        if (!analyzed_) {
            ldlt_.analyzePattern(a);
            analyzed_ = true;
        }
        ldlt_.factorize(a);
        if (ldlt_.info() != Eigen::Success || ldlt_.vectorD().minCoeff() <= 0.0) return false;

        Eigen::VectorXd rhs(5 * nfree_);
        for (std::size_t n = 0; n < free_index_.size(); ++n) {
            const int f = free_index_[n];
            if (f >= 0) rhs.segment<5>(5 * f) = -grad.segment<5>(5 * static_cast<Eigen::Index>(n));
        }
        if (coupling_) {
            delta = reduced_newton(a, rhs);
            return delta.allFinite();
        }
        delta = ldlt_.solve(rhs);
        if (rank_one != 0.0) {
            const Eigen::VectorXd y = ldlt_.solve(u);
            const double denom = 1.0 - rank_one * u.dot(y);
            if (!(denom > 0.0)) return false;
            delta += y * (rank_one * u.dot(delta) / denom);
        }
        return delta.allFinite();
    }

    void prepare_coupling(const CellState& s) {
        const PoissonLinearization lin = linearize_poisson_2d(s, stack_, model_);
        if (select_.rows() == 0) {
            std::vector<Eigen::Triplet<double>> trip;
            for (std::size_t n = 0; n < free_index_.size(); ++n)
                if (free_index_[n] >= 0)
                    for (int c = 0; c < 5; ++c)
                        trip.emplace_back(5 * static_cast<int>(n) + c, 5 * free_index_[n] + c, 1.0);
            select_.resize(5 * static_cast<Eigen::Index>(free_index_.size()), 5 * nfree_);
            select_.setFromTriplets(trip.begin(), trip.end());
        }
        coupling_ = std::make_unique<Eigen::SparseMatrix<double>>(lin.coupling * select_);
        if (!poisson_analyzed_) {
            poisson_ldlt_.analyzePattern(lin.stiffness);
            poisson_analyzed_ = true;
        }
        poisson_ldlt_.factorize(lin.stiffness);
        if (poisson_ldlt_.info() != Eigen::Success)
            throw SolverError("relax: potential factorisation failed", 0.0);
    }

    // Newton direction of the constant-voltage energy: the frozen-potential
    // matrix `a` plus eps0 C^T K^-1 C, solved by CG preconditioned with `a`.
    Eigen::VectorXd reduced_newton(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b) {
        const Eigen::SparseMatrix<double>& c = *coupling_;
        auto apply = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
            const Eigen::VectorXd cx = c * x;
            return a * x + kEpsilon0 * (c.transpose() * poisson_ldlt_.solve(cx));
        };
        Eigen::VectorXd x = ldlt_.solve(b);
        Eigen::VectorXd r = b - apply(x);
        Eigen::VectorXd z = ldlt_.solve(r);
        Eigen::VectorXd p = z;
        double rz = r.dot(z);
        const double target = 1e-10 * b.norm();
        for (int it = 0; it < 500 && r.norm() > target; ++it) {
            const Eigen::VectorXd ap = apply(p);
            const double alpha = rz / p.dot(ap);
            x += alpha * p;
            r -= alpha * ap;
            z = ldlt_.solve(r);
            const double rz_new = r.dot(z);
            p = z + (rz_new / rz) * p;
            rz = rz_new;
        }
        return x;
    }

    const CellStack& stack_;
    const LdgModel& model_;
    SolverOptions opts_;
    Geometry geom_;
    std::vector<int> free_index_;
    int nfree_ = 0;
    double dt_floor_ = 0.0;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
    bool analyzed_ = false;
    Eigen::SparseMatrix<double> select_;
    std::unique_ptr<Eigen::SparseMatrix<double>> coupling_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> poisson_ldlt_;
    bool poisson_analyzed_ = false;
};

std::string voltage_context(const std::string& what, double v) {
    std::ostringstream os;
    os << what << " (V = " << v << " V)";
    return os.str();
}

CellState relax_1d(const CellStack& stack, const LdgModel& model, CellState s,
                   const SolverOptions& opts) {
    FlowWorkspace flow(s, stack, model, opts);
    double dt = flow.initial_dt();
    double energy = total_energy(s, stack, model);
    s.energy_history.assign(1, energy);
    double change = std::numeric_limits<double>::infinity();
    s.steps = 0;
    while (true) {
        s.residual = field_residual(s, stack, model);
        if (s.residual < opts.tol_q && (s.steps == 0 || change < opts.energy_rtol)) break;
        if (s.steps >= opts.max_steps)
            throw NonConvergenceError(voltage_context("relax: iteration cap reached", s.applied_voltage),
                                      s.residual, s.applied_voltage);
        const StepResult r = flow.step(s, dt);
        change = std::abs(r.change) / std::max(std::abs(r.energy), 1e-300);
        energy = r.energy;
        s.energy_history.push_back(energy);
        ++s.steps;
        dt = std::min(dt * opts.dt_growth, opts.dt_max);
    }
    poisson_solve(s, stack, model);
    s.energy = energy;
    return s;
}

CellState relax_2d(const CellStack& stack, const LdgModel& model, CellState s,
                   const SolverOptions& opts) {
    prepare_potential_grid(s, stack);
    poisson_solve(s, stack, model, opts.poisson);
    FlowWorkspace flow(s, stack, model, opts);
    double dt = flow.initial_dt();
    double cap = opts.dt_max;
    double energy = total_energy(s, stack, model);
    s.energy_history.assign(1, energy);
    double change = std::numeric_limits<double>::infinity();
    s.steps = 0;
    const int block = std::max(1, opts.poisson_every);
    const bool coupled = opts.scheme == StepScheme::linearly_implicit;
    while (true) {
        s.residual = field_residual(s, stack, model);
        if (s.residual < opts.tol_q && (s.steps == 0 || change < opts.energy_rtol)) break;
        if (s.steps >= opts.max_steps)
            throw NonConvergenceError(voltage_context("relax: iteration cap reached", s.applied_voltage),
                                      s.residual, s.applied_voltage);
        if (coupled) {
            const StepResult r = flow.step(s, dt);
            change = std::abs(r.change) / std::max(std::abs(r.energy), 1e-300);
            energy = r.energy;
            s.energy_history.push_back(energy);
            ++s.steps;
            dt = std::min(dt * opts.dt_growth, opts.dt_max);
            continue;
        }
        const std::vector<QTensor> saved_q = s.q;
        const std::vector<double> saved_u = s.potential;
        double block_dt = dt;
        double frozen = 0.0;
        int taken = 0;
        for (int k = 0; k < block; ++k) {
            try {
                frozen += flow.step(s, block_dt).change;
            } catch (const StagnationError&) {
                break;
            }
            ++taken;
            block_dt = std::min(block_dt * opts.dt_growth, cap);
        }
        s.steps += std::max(taken, 1);
        // Reduced-energy change: frozen-potential part plus the potential relaxation.
        const double w_frozen = stored_energy_2d(s, stack, model);
        poisson_solve(s, stack, model, opts.poisson);
        const double delta = frozen + (w_frozen - stored_energy_2d(s, stack, model));
        if (taken == 0 || delta > 0.0) {
            // The frozen-potential steps overshot the constant-voltage energy.
            s.q = saved_q;
            s.potential = saved_u;
            cap = std::max(dt, 1e-300) * 0.5;
            dt = cap;
            if (dt < 1e-18 * flow.initial_dt())
                throw StagnationError(voltage_context("relax: block step size underflow", s.applied_voltage),
                                      s.residual);
            continue;
        }
        const double e = total_energy(s, stack, model);
        change = std::abs(delta) / std::max(std::abs(e), 1e-300);
        energy = e;
        s.energy_history.push_back(energy);
        dt = block_dt;
        cap = std::min(cap * 4.0, opts.dt_max);
    }
    s.energy = energy;
    return s;
}

}  // namespace

double total_energy(const CellState& state, const CellStack& stack, const LdgModel& model) {
    return excess_energy(state, stack, model) + energy_offset(state, stack, model);
}

Eigen::VectorXd energy_gradient(const CellState& state, const CellStack& stack,
                                const LdgModel& model) {
    return gradient_impl(state, stack, model);
}

std::vector<QTensor> discrete_molecular_field(const CellState& state, const CellStack& stack,
                                              const LdgModel& model) {
    const Geometry g = geometry(state, stack);
    const Eigen::VectorXd grad = gradient_impl(state, stack, model);
    std::vector<QTensor> h(state.q.size());
    for (int j = 0; j < g.nz; ++j) {
        if (!g.is_free(j)) continue;
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t n = g.node(i, j);
            h[n] = QTensor::from_vector(
                field_from_gradient(grad.segment<5>(5 * static_cast<Eigen::Index>(n)), g.weight(j)));
        }
    }
    return h;
}

double field_residual(const CellState& state, const CellStack& stack, const LdgModel& model) {
    const auto h = discrete_molecular_field(state, stack, model);
    double worst = 0.0;
    for (const auto& v : h) worst = std::max(worst, std::sqrt(frobenius_norm_sq(v)));
    return worst / model.torque_scale(stack.lc_thickness);
}

StepResult gradient_flow_step(CellState& state, const CellStack& stack, const LdgModel& model,
                              double& dt, const SolverOptions& opts) {
    if (!(dt > 0.0)) throw InputError("gradient_flow_step: dt must be positive");
    FlowWorkspace flow(state, stack, model, opts);
    return flow.step(state, dt);
}

CellState relax(const CellStack& stack, const LdgModel& model, double voltage,
                const SolverOptions& opts, Dimensionality dims, const CellState* warm) {
    if (!(voltage >= 0.0)) throw InputError("relax: voltage must be non-negative");
    stack.validate();
    CellState s;
    if (warm && warm->dims == dims && warm->nz == stack.grid_nz &&
        midplane_tilt(*warm) >= opts.tilt_perturbation) {
        s = *warm;
        s.applied_voltage = voltage;
    } else {
        s = initial_state(stack, model, voltage, dims, opts.tilt_perturbation);
    }
    return dims == Dimensionality::one_d ? relax_1d(stack, model, std::move(s), opts)
                                         : relax_2d(stack, model, std::move(s), opts);
}

double effective_permittivity(const CellState& state, const CellStack& stack,
                              const LdgModel& model, PermittivityAverage average) {
    const Geometry g = geometry(state, stack);
    if (average == PermittivityAverage::volume) {
        double sum = 0.0;
        double wsum = 0.0;
        for (int j = 0; j < g.nz; ++j)
            for (int i = 0; i < g.nx; ++i) {
                sum += g.weight(j) * model.dielectric_zz(state.q[g.node(i, j)]);
                wsum += g.weight(j);
            }
        return sum / wsum;
    }
    if (!g.two_d) {
        double r = 0.0;
        for (int k = 0; k + 1 < g.nz; ++k)
            r += g.hz / (0.5 * (model.dielectric_zz(state.q[static_cast<std::size_t>(k)]) +
                                model.dielectric_zz(state.q[static_cast<std::size_t>(k + 1)])));
        return stack.lc_thickness / r;
    }
    // Capacitance per period from the stored energy at a unit-voltage solve.
    CellState probe = state;
    probe.applied_voltage = 1.0;
    poisson_solve(probe, stack, model);
    const double c = 2.0 * stored_energy_2d(probe, stack, model);
    const double r_total = kEpsilon0 * stack.electrodes.period() / c;
    const double r_lc = r_total - 2.0 * stack.inner_resistance();
    return stack.lc_thickness / r_lc;
}

std::vector<CurveRow> freedericksz_curve(
    const CellStack& stack, const LdgModel& model, const std::vector<double>& voltages,
    const SolverOptions& opts, const SweepOptions& sweep,
    const std::function<void(const CurveRow&, const CellState&)>& on_row) {
    if (!std::is_sorted(voltages.begin(), voltages.end()))
        throw InputError("freedericksz_curve: voltages must be sorted ascending");

    auto make_row = [&](double v, const CellState& s) {
        return CurveRow{v, effective_permittivity(s, stack, model, sweep.average), midplane_tilt(s),
                        s.energy};
    };
    auto wrap = [](const std::exception& e, double v) {
        double res = 0.0;
        if (const auto* se = dynamic_cast<const SolverError*>(&e)) res = se->residual();
        return NonConvergenceError(voltage_context(e.what(), v), res, v);
    };

    std::vector<CurveRow> rows;
    if (sweep.warm_start || sweep.jobs <= 1) {
        std::optional<CellState> prev;
        for (const double v : voltages) {
            CellState s;
            try {
                s = relax(stack, model, v, opts, sweep.dims,
                          sweep.warm_start && prev ? &*prev : nullptr);
            } catch (const NonConvergenceError&) {
                throw;
            } catch (const SolverError& e) {
                throw wrap(e, v);
            }
            rows.push_back(make_row(v, s));
            if (on_row) on_row(rows.back(), s);
            prev = std::move(s);
        }
        return rows;
    }

    // Cold starts are independent; run them on a pool and emit in order.
    const std::size_t n = voltages.size();
    std::vector<std::optional<CellState>> states(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < n; k = next++) {
            try {
                states[k] = relax(stack, model, voltages[k], opts, sweep.dims, nullptr);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const int jobs = std::min<int>(sweep.jobs, static_cast<int>(n));
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (std::size_t k = 0; k < n; ++k) {
        if (errors[k]) {
            try {
                std::rethrow_exception(errors[k]);
            } catch (const NonConvergenceError&) {
                throw;
            } catch (const SolverError& e) {
                throw wrap(e, voltages[k]);
            }
        }
        rows.push_back(make_row(voltages[k], *states[k]));
        if (on_row) on_row(rows.back(), *states[k]);
    }
    return rows;
}

double estimate_threshold(const std::vector<CurveRow>& rows) {
    if (rows.size() < 3) throw InputError("estimate_threshold: need at least three rows");
    const double base = rows.front().eps_eff;
    const double top = std::max_element(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
                           return a.eps_eff < b.eps_eff;
                       })->eps_eff;
    const double rise = 1e-3 * std::max(top - base, 1e-12);
    for (std::size_t k = 1; k + 1 < rows.size(); ++k) {
        if (rows[k].eps_eff - base <= rise) continue;
        const auto& a = rows[k];
        const auto& b = rows[k + 1];
        const double slope = (b.eps_eff - a.eps_eff) / (b.voltage - a.voltage);
        if (!(slope > 0.0)) return a.voltage;
        const double v = a.voltage - (a.eps_eff - base) / slope;
        return std::clamp(v, rows[k - 1].voltage, a.voltage);
    }
    throw DomainError("estimate_threshold: eps_eff never rises above its baseline");
}

double steepest_rise_voltage(const std::vector<CurveRow>& rows) {
    if (rows.size() < 2) throw InputError("steepest_rise_voltage: need at least two rows");
    double best = -std::numeric_limits<double>::infinity();
    double where = rows.front().voltage;
    for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
        const double slope =
            (rows[k + 1].eps_eff - rows[k].eps_eff) / (rows[k + 1].voltage - rows[k].voltage);
        if (slope > best) {
            best = slope;
            where = 0.5 * (rows[k].voltage + rows[k + 1].voltage);
        }
    }
    return where;
}

}  // namespace lctune
