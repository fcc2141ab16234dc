#include "lctune/landau.hpp"

#include "lctune/error.hpp"

#include <cmath>

namespace lctune {

namespace {

double quartic_weight(QuarticConvention c) {
    return c == QuarticConvention::tr_q2_sq ? 1.0 : 0.5;
}

// d/dS of the uniaxial thermotropic energy.
double uniaxial_slope(const LCMaterial& m, double s, QuarticConvention c) {
    const double w = quartic_weight(c);
    return (4.0 / 3.0) * m.a_coef * s + (4.0 / 9.0) * m.b_coef * s * s +
           (8.0 / 9.0) * w * m.c_coef * s * s * s;
}

}  // namespace

double uniaxial_thermotropic(const LCMaterial& m, double s, QuarticConvention convention) {
    const double w = quartic_weight(convention);
    const double s2 = s * s;
    return (2.0 / 3.0) * m.a_coef * s2 + (4.0 / 27.0) * m.b_coef * s2 * s +
           (2.0 / 9.0) * w * m.c_coef * s2 * s2;
}

double equilibrium_order(const LCMaterial& m, QuarticConvention convention) {
    if (!(m.c_coef > 0.0)) throw DomainError("equilibrium_order: C must be positive");
    // Roots of 2 w C S^2 + B S + 3 A = 0.
    const double w = quartic_weight(convention);
    const double disc = m.b_coef * m.b_coef - 24.0 * w * m.a_coef * m.c_coef;
    if (disc < 0.0) throw DomainError("equilibrium_order: no nematic minimum (negative discriminant)");
    const double s = (-m.b_coef + std::sqrt(disc)) / (4.0 * w * m.c_coef);

    const double scale = std::abs(m.a_coef * s) + std::abs(m.b_coef * s * s) +
                         std::abs(m.c_coef * s * s * s);
    if (scale > 0.0 && std::abs(uniaxial_slope(m, s, convention)) > 1e-9 * scale)
        throw DomainError("equilibrium_order: stationarity check failed");
    return s;
}

Eigen::Matrix3d dielectric_tensor(const QTensor& q, const LCMaterial& m, double s_ref) {
    if (!(s_ref > 0.0)) throw InputError("dielectric_tensor: s_ref must be positive");
    return (m.delta_eps / s_ref) * q.matrix() + m.eps_mean() * Eigen::Matrix3d::Identity();
}

double freedericksz_threshold(const LCMaterial& m) {
    if (!(m.delta_eps > 0.0))
        throw DomainError("freedericksz_threshold: requires positive dielectric anisotropy");
    constexpr double pi = 3.14159265358979323846;
    return pi * std::sqrt(m.k11 / (kEpsilon0 * m.delta_eps));
}

LdgModel::LdgModel(LCMaterial material, ModelOptions options)
    : material_(std::move(material)), options_(options) {
    material_.validate();
    s_eq_ = equilibrium_order(material_, options_.quartic);
    s_ref_ = options_.s_ref.value_or(s_eq_);
    if (!(s_ref_ > 0.0)) throw InputError("LdgModel: s_ref must be positive");
    const double k = options_.elastic == ElasticRule::k11
                         ? material_.k11
                         : (material_.k11 + material_.k22 + material_.k33) / 3.0;
    elastic_l_ = k / (2.0 * s_eq_ * s_eq_);
    quartic_weight_ = quartic_weight(options_.quartic);
    f_min_ = uniaxial_thermotropic(material_, s_eq_, options_.quartic);
}

double LdgModel::thermotropic(const QTensor& q) const {
    const Eigen::Matrix3d m = q.matrix();
    const Eigen::Matrix3d m2 = m * m;
    const double tr2 = m2.trace();
    const double tr3 = (m2 * m).trace();
    return material_.a_coef * tr2 + (2.0 / 3.0) * material_.b_coef * tr3 +
           0.5 * quartic_weight_ * material_.c_coef * tr2 * tr2;
}

double LdgModel::thermotropic_change(const QTensor& q, const QTensor& dq) const {
    const Eigen::Matrix3d m = q.matrix();
    const Eigen::Matrix3d d = dq.matrix();
    const Eigen::Matrix3d md = m * d;
    const Eigen::Matrix3d dd = d * d;
    const double tr2 = (m * m).trace();
    const double dtr2 = 2.0 * md.trace() + dd.trace();
    const double dtr3 = 3.0 * (m * md).trace() + 3.0 * (m * dd).trace() + (dd * d).trace();
    return material_.a_coef * dtr2 + (2.0 / 3.0) * material_.b_coef * dtr3 +
           0.5 * quartic_weight_ * material_.c_coef * dtr2 * (2.0 * tr2 + dtr2);
}

Eigen::Matrix3d LdgModel::thermotropic_gradient(const QTensor& q) const {
    const Eigen::Matrix3d m = q.matrix();
    const Eigen::Matrix3d m2 = m * m;
    const double tr2 = m2.trace();
    return 2.0 * material_.a_coef * m + 2.0 * material_.b_coef * m2 +
           2.0 * quartic_weight_ * material_.c_coef * tr2 * m;
}

Eigen::Matrix<double, 5, 5> LdgModel::thermotropic_hessian(const QTensor& q) const {
    const Eigen::Matrix3d m = q.matrix();
    const double tr2 = (m * m).trace();
    const double a = material_.a_coef;
    const double b = material_.b_coef;
    const double cw = quartic_weight_ * material_.c_coef;
    Eigen::Matrix<double, 5, 5> h;
    for (int k = 0; k < 5; ++k) {
        const Eigen::Matrix3d& e = basis_matrix(k);
        const Eigen::Matrix3d dg = 2.0 * a * e + 2.0 * b * (e * m + m * e) +
                                   2.0 * cw * (2.0 * (m.cwiseProduct(e)).sum() * m + tr2 * e);
        for (int j = 0; j < 5; ++j) h(j, k) = (basis_matrix(j).cwiseProduct(dg)).sum();
    }
    return 0.5 * (h + h.transpose());
}

Eigen::Matrix3d LdgModel::dielectric(const QTensor& q) const {
    return dielectric_tensor(q, material_, s_ref_);
}

Eigen::Matrix3d LdgModel::optical(const QTensor& q) const {
    const double eps_o = material_.n_o * material_.n_o;
    const double eps_e = material_.n_e() * material_.n_e();
    const double mean = (2.0 * eps_o + eps_e) / 3.0;
    return ((eps_e - eps_o) / s_ref_) * q.matrix() + mean * Eigen::Matrix3d::Identity();
}

EnergyDensities LdgModel::energy_densities(const QTensor& q, const std::array<QTensor, 3>& grad_q,
                                           const Eigen::Vector3d& grad_u) const {
    EnergyDensities e;
    double grad_sq = 0.0;
    for (const auto& g : grad_q) grad_sq += frobenius_norm_sq(g);
    e.elastic = 0.5 * elastic_l_ * grad_sq;
    e.thermotropic = thermotropic(q);
    e.electrostatic = -0.5 * kEpsilon0 * grad_u.dot(dielectric(q) * grad_u);
    return e;
}

QTensor bulk_molecular_field(const QTensor& q, const Eigen::Matrix3d& field_product,
                             const LdgModel& model) {
    const Eigen::Matrix3d force = -model.thermotropic_gradient(q) +
                                  0.5 * kEpsilon0 * model.eps_slope() * field_product;
    return QTensor::from_matrix(force);
}

QTensor molecular_field(const QStencil& stencil, const Eigen::Vector3d& grad_u,
                        const LdgModel& model, GridSpacing spacing) {
    QTensor lap;
    if (stencil.has_z)
        lap += (stencil.z[0] + stencil.z[1] - 2.0 * stencil.center) *
               (1.0 / (spacing.dz * spacing.dz));
    if (stencil.has_x)
        lap += (stencil.x[0] + stencil.x[1] - 2.0 * stencil.center) *
               (1.0 / (spacing.dx * spacing.dx));
    return model.elastic_l() * lap +
           bulk_molecular_field(stencil.center, grad_u * grad_u.transpose(), model);
}

Eigen::Matrix<double, 5, 1> energy_gradient_from_field(const QTensor& h, double weight) {
    return -weight * coordinate_gradient(h.matrix());
}

double quartic_identity_defect(const QTensor& q) {
    const Eigen::Matrix3d m = q.matrix();
    const Eigen::Matrix3d m2 = m * m;
    const double tr2 = m2.trace();
    return (m2 * m2).trace() - 0.5 * tr2 * tr2;
}

}  // namespace lctune
