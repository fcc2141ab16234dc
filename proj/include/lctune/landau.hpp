#pragma once

#include "lctune/material.hpp"
#include "lctune/qtensor.hpp"

#include <Eigen/Core>

#include <array>
#include <optional>

namespace lctune {

inline constexpr double kEpsilon0 = 8.8541878128e-12;  // F/m

// Normalisation of the quartic Landau term.
//   tr_q2_sq: (C/2)(tr Q^2)^2
//   tr_q4:    (C/2) tr Q^4 = (C/4)(tr Q^2)^2 for traceless Q
enum class QuarticConvention { tr_q2_sq, tr_q4 };

// One-constant elastic coefficient L.
//   k11:     L = K11 / (2 S_eq^2), reproduces the splay threshold
//   average: L = (K11 + K22 + K33) / (6 S_eq^2)
enum class ElasticRule { k11, average };

struct ModelOptions {
    QuarticConvention quartic = QuarticConvention::tr_q2_sq;
    ElasticRule elastic = ElasticRule::k11;
    std::optional<double> s_ref;  // order at which delta_eps was measured; default S_eq
};

// Nonzero minimiser of the uniaxial thermotropic energy. Throws DomainError
// when the discriminant is negative (no nematic minimum).
double equilibrium_order(const LCMaterial& m,
                         QuarticConvention convention = QuarticConvention::tr_q2_sq);

// Thermotropic energy of a uniaxial state with order s.
double uniaxial_thermotropic(const LCMaterial& m, double s, QuarticConvention convention);

// eps = (delta_eps / s_ref) Q + eps_mean I. Throws InputError for s_ref <= 0.
Eigen::Matrix3d dielectric_tensor(const QTensor& q, const LCMaterial& m, double s_ref);

// Splay Freedericksz threshold pi sqrt(K11 / (eps0 delta_eps)). DomainError for delta_eps <= 0.
double freedericksz_threshold(const LCMaterial& m);

struct EnergyDensities {
    double elastic = 0.0;        // J/m^3
    double thermotropic = 0.0;   // J/m^3
    double electrostatic = 0.0;  // J/m^3

    double total() const { return elastic + thermotropic + electrostatic; }
};

// Resolved constants (S_eq, s_ref, L) of one material under one set of options,
// plus the local energy density and its derivatives.
class LdgModel {
public:
    explicit LdgModel(LCMaterial material, ModelOptions options = {});

    const LCMaterial& material() const { return material_; }
    const ModelOptions& options() const { return options_; }
    double s_eq() const { return s_eq_; }
    double s_ref() const { return s_ref_; }
    double elastic_l() const { return elastic_l_; }
    // Scale of Q-tensor torques used to nondimensionalise residuals, L / d^2.
    double torque_scale(double length) const { return elastic_l_ / (length * length); }

    double thermotropic(const QTensor& q) const;
    // thermotropic(q + dq) - thermotropic(q), expanded in dq to avoid cancellation.
    double thermotropic_change(const QTensor& q, const QTensor& dq) const;
    // Unprojected symmetric matrix gradient of the thermotropic density.
    Eigen::Matrix3d thermotropic_gradient(const QTensor& q) const;
    // Hessian of the thermotropic density in packed coordinates.
    Eigen::Matrix<double, 5, 5> thermotropic_hessian(const QTensor& q) const;
    // Thermotropic density of the uniform equilibrium state.
    double thermotropic_minimum() const { return f_min_; }

    Eigen::Matrix3d dielectric(const QTensor& q) const;
    double dielectric_zz(const QTensor& q) const {
        return material_.eps_mean() + eps_slope() * q.zz();
    }
    // d eps / d Q, the factor delta_eps / s_ref.
    double eps_slope() const { return material_.delta_eps / s_ref_; }

    // Optical permittivity built from n_o and n_e in place of eps_perp and eps_par.
    Eigen::Matrix3d optical(const QTensor& q) const;

    // grad_q[d] holds the derivative of the five components along axis d.
    EnergyDensities energy_densities(const QTensor& q, const std::array<QTensor, 3>& grad_q,
                                     const Eigen::Vector3d& grad_u) const;

private:
    LCMaterial material_;
    ModelOptions options_;
    double s_eq_;
    double s_ref_;
    double elastic_l_;
    double quartic_weight_;  // multiplies (C/2)(tr Q^2)^2
    double f_min_;
};

// Neighbourhood of one grid point. Absent directions (has_x == false) do not
// contribute to the Laplacian.
struct QStencil {
    QTensor center;
    std::array<QTensor, 2> x{};  // (x - dx, x + dx)
    std::array<QTensor, 2> z{};  // (z - dz, z + dz)
    bool has_x = false;
    bool has_z = true;
};

struct GridSpacing {
    double dx = 1.0;
    double dz = 1.0;
};

// Molecular field H = -dF/dQ projected onto symmetric traceless tensors:
// L lap Q - dF_th/dQ + (eps0 delta_eps / 2 s_ref) grad U grad U^T.
QTensor molecular_field(const QStencil& stencil, const Eigen::Vector3d& grad_u,
                        const LdgModel& model, GridSpacing spacing);

// Projected traceless part of the bulk (thermotropic + field) force only.
QTensor bulk_molecular_field(const QTensor& q, const Eigen::Matrix3d& field_product,
                             const LdgModel& model);

// Packed-coordinate gradient of an energy whose molecular field is h and whose
// quadrature weight at the node is w: dE/dq = -w (H11 - H33, 2 H12, 2 H13, H22 - H33, 2 H23).
Eigen::Matrix<double, 5, 1> energy_gradient_from_field(const QTensor& h, double weight);

// tr(Q^4) - (tr Q^2)^2 / 2, zero for every traceless symmetric Q.
double quartic_identity_defect(const QTensor& q);

}  // namespace lctune
