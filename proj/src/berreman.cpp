#include "lctune/berreman.hpp"

#include "lctune/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace lctune {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Columns: forward p, forward s, backward p, backward s, each carrying unit
// z-flux magnitude (times 1/2).
Eigen::Matrix4cd ambient_modes(double n, double eta) {
    const double q2 = n * n - eta * eta;
    if (!(q2 > 0.0)) throw DomainError("transmittance: evanescent wave in an ambient medium");
    const double q = std::sqrt(q2);
    const double k = 1.0 / std::sqrt(q);
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    m.col(0) << q / n * k, n * k, 0.0, 0.0;
    m.col(1) << 0.0, 0.0, k, q * k;
    m.col(2) << -q / n * k, n * k, 0.0, 0.0;
    m.col(3) << 0.0, 0.0, k, -q * k;
    return m;
}

}  // namespace

Eigen::Matrix4cd berreman_matrix(const Eigen::Matrix3cd& e, double eta) {
    const cdouble e33 = e(2, 2);
    if (e33 == 0.0) throw OpticsError("berreman_matrix: eps33 is zero");
    Eigen::Matrix4cd d = Eigen::Matrix4cd::Zero();
    d(0, 0) = -eta * e(2, 0) / e33;
    d(0, 1) = 1.0 - eta * eta / e33;
    d(0, 2) = -eta * e(2, 1) / e33;
    d(1, 0) = e(0, 0) - e(0, 2) * e(2, 0) / e33;
    d(1, 1) = -eta * e(0, 2) / e33;
    d(1, 2) = e(0, 1) - e(0, 2) * e(2, 1) / e33;
    d(2, 3) = 1.0;
    d(3, 0) = e(1, 0) - e(1, 2) * e(2, 0) / e33;
    d(3, 1) = -eta * e(1, 2) / e33;
    d(3, 2) = e(1, 1) - e(1, 2) * e(2, 1) / e33 - eta * eta;
    return d;
}

Eigen::Matrix4cd layer_propagator(const Eigen::Matrix4cd& d, double thickness, double wavelength) {
    if (thickness == 0.0) return Eigen::Matrix4cd::Identity();
    const cdouble phase(0.0, 2.0 * kPi / wavelength * thickness);
    const Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(d);
    if (es.info() == Eigen::Success) {
        const Eigen::Matrix4cd& v = es.eigenvectors();
        const Eigen::JacobiSVD<Eigen::Matrix4cd> svd(v);
        const auto& sv = svd.singularValues();
        if (sv(3) > 0.0 && sv(0) / sv(3) <= 1e8) {
            Eigen::Vector4cd ex;
            for (int k = 0; k < 4; ++k) ex(k) = std::exp(phase * es.eigenvalues()(k));
            return v * ex.asDiagonal() * v.inverse();
        }
    }
    const Eigen::Matrix4cd a = phase * d;
    return a.exp();
}

OpticalResult transmittance(const std::vector<OpticalLayer>& stack, const PlaneWaveSpec& wave,
                            const Eigen::Vector2cd& jones_in) {
    if (!(wave.wavelength > 0.0)) throw InputError("transmittance: wavelength must be positive");
    const double power_in = jones_in.squaredNorm();
    if (!(power_in > 0.0)) throw InputError("transmittance: zero input polarisation");
    const Eigen::Matrix4cd m_in = ambient_modes(wave.n_in, wave.eta);
    const Eigen::Matrix4cd m_out = ambient_modes(wave.n_out, wave.eta);

    Eigen::Matrix4cd p = Eigen::Matrix4cd::Identity();
    for (const auto& layer : stack) {
        if (!(layer.thickness >= 0.0)) throw InputError("transmittance: negative layer thickness");
        p = layer_propagator(berreman_matrix(layer.permittivity, wave.eta), layer.thickness,
                             wave.wavelength) *
            p;
    }

    // m_out [t; 0] = p m_in [a; r]  ->  unknowns (r_p, r_s, t_p, t_s)
    Eigen::Matrix4cd a;
    a.leftCols<2>() = p * m_in.rightCols<2>();
    a.rightCols<2>() = -m_out.leftCols<2>();
    const Eigen::Vector4cd rhs = -(p * m_in.leftCols<2>()) * jones_in;
    const Eigen::Vector4cd x = a.fullPivLu().solve(rhs);

    OpticalResult out;
    out.r_jones = x.head<2>();
    out.t_jones = x.tail<2>();
    out.t = out.t_jones.squaredNorm() / power_in;
    out.r = out.r_jones.squaredNorm() / power_in;
    return out;
}

double analysed_transmittance(const OpticalResult& result, const Eigen::Vector2cd& analyser) {
    const double norm = analyser.squaredNorm();
    if (!(norm > 0.0)) throw InputError("analysed_transmittance: zero analyser vector");
    return std::norm(analyser.dot(result.t_jones)) / norm;
}

double unpolarised_transmittance(const std::vector<OpticalLayer>& stack, const PlaneWaveSpec& wave) {
    const double tp = transmittance(stack, wave, Eigen::Vector2cd(1.0, 0.0)).t;
    const double ts = transmittance(stack, wave, Eigen::Vector2cd(0.0, 1.0)).t;
    return 0.5 * (tp + ts);
}

IncoherentPair incoherent_cascade(IncoherentPair a, IncoherentPair b) {
    const double denom = 1.0 - a.r * b.r;
    return {a.t * b.t / denom, a.r + a.t * a.t * b.r / denom};
}

IncoherentPair fresnel_face(double n1, double n2) {
    const double r = (n1 - n2) / (n1 + n2);
    return {1.0 - r * r, r * r};
}

std::vector<OpticalLayer> lc_column_to_stack(const std::vector<DirectorSample>& column,
                                             double layer_thickness, const LdgModel& model) {
    std::vector<OpticalLayer> out;
    out.reserve(column.size());
    for (const auto& c : column) {
        const Eigen::Matrix3d e = model.optical(uniaxial_q(c.director, c.order));
        out.push_back({layer_thickness, e.cast<cdouble>()});
    }
    return out;
}

std::vector<OpticalLayer> lc_column_to_stack(const std::vector<QTensor>& nodes,
                                             double node_spacing, const LdgModel& model) {
    std::vector<OpticalLayer> out;
    if (nodes.size() < 2) return out;
    out.reserve(nodes.size() - 1);
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
        const Eigen::Matrix3d e = model.optical(0.5 * (nodes[k] + nodes[k + 1]));
        out.push_back({node_spacing, e.cast<cdouble>()});
    }
    return out;
}

OpticalLayer isotropic_layer(double thickness, cdouble index) {
    return {thickness, (index * index) * Eigen::Matrix3cd::Identity()};
}

}  // namespace lctune
