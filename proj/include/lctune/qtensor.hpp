#pragma once

#include <Eigen/Core>

#include <array>

namespace lctune {

// Symmetric traceless 3x3 order tensor stored by its five independent entries:
// (Q11, Q12, Q13, Q22, Q23); Q33 = -Q11 - Q22.
struct QTensor {
    std::array<double, 5> q{};

    double& operator[](std::size_t i) { return q[i]; }
    double operator[](std::size_t i) const { return q[i]; }

    double xx() const { return q[0]; }
    double xy() const { return q[1]; }
    double xz() const { return q[2]; }
    double yy() const { return q[3]; }
    double yz() const { return q[4]; }
    double zz() const { return -q[0] - q[3]; }

    Eigen::Matrix3d matrix() const;
    // Traceless symmetric part of m, packed.
    static QTensor from_matrix(const Eigen::Matrix3d& m);

    static QTensor from_vector(const Eigen::Matrix<double, 5, 1>& v);
    Eigen::Matrix<double, 5, 1> vector() const;

    QTensor& operator+=(const QTensor& o);
    QTensor& operator-=(const QTensor& o);
    QTensor& operator*=(double s);

    friend QTensor operator+(QTensor a, const QTensor& b) { return a += b; }
    friend QTensor operator-(QTensor a, const QTensor& b) { return a -= b; }
    friend QTensor operator*(QTensor a, double s) { return a *= s; }
    friend QTensor operator*(double s, QTensor a) { return a *= s; }
};

// Frobenius inner product of the reconstructed matrices, q^T M p.
double frobenius_dot(const QTensor& a, const QTensor& b);
inline double frobenius_norm_sq(const QTensor& a) { return frobenius_dot(a, a); }

// Gram matrix of the five basis matrices under the Frobenius product.
const Eigen::Matrix<double, 5, 5>& frobenius_metric();
// Basis matrix E_j with Q = sum_j q_j E_j.
const Eigen::Matrix3d& basis_matrix(int j);

// Gradient of a function with respect to the packed coordinates, given its
// symmetric matrix gradient G: d f / d q_j = tr(G E_j).
Eigen::Matrix<double, 5, 1> coordinate_gradient(const Eigen::Matrix3d& g);

// S(n n^T - I/3). Throws InputError unless |n| = 1 within 1e-12.
QTensor uniaxial_q(const Eigen::Vector3d& director, double order);

struct DirectorOrder {
    Eigen::Vector3d director;  // first component with |n_i| > 1e-12 is positive
    double order = 0.0;        // 3/2 of the largest eigenvalue
};

DirectorOrder director_and_order(const QTensor& q);

// Angle between the director and the x-y plane, in [0, pi/2].
double tilt_angle(const QTensor& q);

// Eigenvalues of the reconstructed matrix lie within [-1/3 - tol, 2/3 + tol].
bool is_physical(const QTensor& q, double tol = 1e-9);

}  // namespace lctune
