#pragma once

#include "lctune/landau.hpp"

#include <Eigen/Core>

#include <complex>
#include <vector>

namespace lctune {

using cdouble = std::complex<double>;

struct OpticalLayer {
    double thickness = 0.0;  // m
    Eigen::Matrix3cd permittivity = Eigen::Matrix3cd::Identity();
};

struct PlaneWaveSpec {
    double wavelength = 532e-9;  // m
    double eta = 0.0;            // n_in sin(theta_in)
    double n_in = 1.5;
    double n_out = 1.5;
};

// Berreman matrix for the field vector (Ex, Hy, Ey, -Hx), with
// d psi / dz = i k0 D psi. Throws OpticsError when eps33 == 0.
Eigen::Matrix4cd berreman_matrix(const Eigen::Matrix3cd& eps, double eta);

// exp(i k0 h D), by eigendecomposition; falls back to a Pade exponential when
// the eigenvector matrix has condition number above 1e8.
Eigen::Matrix4cd layer_propagator(const Eigen::Matrix4cd& d, double thickness, double wavelength);

// Jones vectors are expressed in the (p, s) basis of the ambient plane waves,
// which at normal incidence is (x, y).
struct OpticalResult {
    double t = 0.0;            // power transmittance
    double r = 0.0;            // power reflectance
    Eigen::Vector2cd t_jones;  // transmitted amplitudes, unit-flux normalised
    Eigen::Vector2cd r_jones;
};

// Coherent transmission through the stack (listed in the direction of travel)
// between two isotropic half spaces. Throws DomainError for evanescent
// ambient waves and InputError for a zero input vector.
OpticalResult transmittance(const std::vector<OpticalLayer>& stack, const PlaneWaveSpec& wave,
                            const Eigen::Vector2cd& jones_in);

// Power through an ideal analyser (unit Jones vector) placed after the stack.
double analysed_transmittance(const OpticalResult& result, const Eigen::Vector2cd& analyser);

// Transmittance for unpolarised light, the mean over the two basis inputs.
double unpolarised_transmittance(const std::vector<OpticalLayer>& stack, const PlaneWaveSpec& wave);

// Combination of two lossless-or-absorbing elements without phase coherence
// (thick substrates): returns (T, R) of the cascade a then b.
struct IncoherentPair {
    double t = 0.0;
    double r = 0.0;
};
IncoherentPair incoherent_cascade(IncoherentPair a, IncoherentPair b);

// Normal-incidence Fresnel interface between real indices.
IncoherentPair fresnel_face(double n1, double n2);

struct DirectorSample {
    Eigen::Vector3d director;
    double order = 0.0;
};

// One optical layer per sample, permittivity n_o^2 I + (n_e^2 - n_o^2) / s_ref Q
// shifted to the optical mean (2 n_o^2 + n_e^2) / 3.
std::vector<OpticalLayer> lc_column_to_stack(const std::vector<DirectorSample>& column,
                                             double layer_thickness, const LdgModel& model);

// Layers between consecutive Q nodes of a column, permittivity from the
// interval mean of Q.
std::vector<OpticalLayer> lc_column_to_stack(const std::vector<QTensor>& nodes,
                                             double node_spacing, const LdgModel& model);

// Isotropic layer of complex refractive index n.
OpticalLayer isotropic_layer(double thickness, cdouble index);

}  // namespace lctune
