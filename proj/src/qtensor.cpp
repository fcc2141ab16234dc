#include "lctune/qtensor.hpp"

#include "lctune/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace lctune {

Eigen::Matrix3d QTensor::matrix() const {
    Eigen::Matrix3d m;
    m << q[0], q[1], q[2],
         q[1], q[3], q[4],
         q[2], q[4], -q[0] - q[3];
    return m;
}

QTensor QTensor::from_matrix(const Eigen::Matrix3d& m) {
    const Eigen::Matrix3d s = 0.5 * (m + m.transpose());
    const double third = s.trace() / 3.0;
    return QTensor{{s(0, 0) - third, s(0, 1), s(0, 2), s(1, 1) - third, s(1, 2)}};
}

QTensor QTensor::from_vector(const Eigen::Matrix<double, 5, 1>& v) {
    return QTensor{{v[0], v[1], v[2], v[3], v[4]}};
}

Eigen::Matrix<double, 5, 1> QTensor::vector() const {
    Eigen::Matrix<double, 5, 1> v;
    v << q[0], q[1], q[2], q[3], q[4];
    return v;
}

QTensor& QTensor::operator+=(const QTensor& o) {
    for (std::size_t i = 0; i < 5; ++i) q[i] += o.q[i];
    return *this;
}

QTensor& QTensor::operator-=(const QTensor& o) {
    for (std::size_t i = 0; i < 5; ++i) q[i] -= o.q[i];
    return *this;
}

QTensor& QTensor::operator*=(double s) {
    for (auto& v : q) v *= s;
    return *this;
}

const Eigen::Matrix<double, 5, 5>& frobenius_metric() {
    static const Eigen::Matrix<double, 5, 5> m = [] {
        Eigen::Matrix<double, 5, 5> g;
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j)
                g(i, j) = (basis_matrix(i).cwiseProduct(basis_matrix(j))).sum();
        return g;
    }();
    return m;
}

const Eigen::Matrix3d& basis_matrix(int j) {
    static const std::array<Eigen::Matrix3d, 5> basis = [] {
        std::array<Eigen::Matrix3d, 5> b;
        for (auto& m : b) m.setZero();
        b[0](0, 0) = 1.0; b[0](2, 2) = -1.0;
        b[1](0, 1) = b[1](1, 0) = 1.0;
        b[2](0, 2) = b[2](2, 0) = 1.0;
        b[3](1, 1) = 1.0; b[3](2, 2) = -1.0;
        b[4](1, 2) = b[4](2, 1) = 1.0;
        return b;
    }();
    return basis[static_cast<std::size_t>(j)];
}

double frobenius_dot(const QTensor& a, const QTensor& b) {
    return 2.0 * (a[0] * b[0] + a[3] * b[3] + a[1] * b[1] + a[2] * b[2] + a[4] * b[4]) +
           a[0] * b[3] + a[3] * b[0];
}

Eigen::Matrix<double, 5, 1> coordinate_gradient(const Eigen::Matrix3d& g) {
    Eigen::Matrix<double, 5, 1> out;
    out << g(0, 0) - g(2, 2), g(0, 1) + g(1, 0), g(0, 2) + g(2, 0), g(1, 1) - g(2, 2),
        g(1, 2) + g(2, 1);
    return out;
}

QTensor uniaxial_q(const Eigen::Vector3d& director, double order) {
    if (std::abs(director.norm() - 1.0) > 1e-12)
        throw InputError("uniaxial_q: director must be a unit vector");
    const Eigen::Matrix3d m = order * (director * director.transpose() -
                                       Eigen::Matrix3d::Identity() / 3.0);
    return QTensor{{m(0, 0), m(0, 1), m(0, 2), m(1, 1), m(1, 2)}};
}

DirectorOrder director_and_order(const QTensor& q) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(q.matrix());
    DirectorOrder out;
    out.order = 1.5 * eig.eigenvalues()[2];
    out.director = eig.eigenvectors().col(2).normalized();
    for (int i = 0; i < 3; ++i) {
        if (std::abs(out.director[i]) > 1e-12) {
            if (out.director[i] < 0.0) out.director = -out.director;
            break;
        }
    }
    return out;
}

double tilt_angle(const QTensor& q) {
    const auto d = director_and_order(q);
    return std::asin(std::min(1.0, std::abs(d.director.z())));
}

bool is_physical(const QTensor& q, double tol) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(q.matrix(), Eigen::EigenvaluesOnly);
    return eig.eigenvalues()[2] <= 2.0 / 3.0 + tol && eig.eigenvalues()[0] >= -1.0 / 3.0 - tol;
}

}  // namespace lctune
