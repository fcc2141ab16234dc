#include "lctune/berreman.hpp"
#include "lctune/cell.hpp"
#include "lctune/error.hpp"
#include "lctune/material.hpp"
#include "lctune/profile.hpp"

#include <gtest/gtest.h>

#include <complex>

using namespace lctune;

namespace {

using C = std::complex<double>;

// Normal-incidence amplitude transmission of an isotropic slab in a uniform medium.
C slab_amplitude(double n_amb, double n, double d, double lambda) {
    const C r = (n_amb - n) / (n_amb + n);
    const C t12 = 2.0 * n_amb / (n_amb + n), t21 = 2.0 * n / (n_amb + n);
    const C ph = std::exp(C(0, 2.0 * M_PI * n * d / lambda));
    return t12 * t21 * ph / (1.0 - r * r * ph * ph);
}

}  // namespace

TEST(Berreman, EmptyStackTransmitsEverything) {
    const auto res = transmittance({}, PlaneWaveSpec{}, Eigen::Vector2cd(1, 0));
    EXPECT_NEAR(res.t, 1.0, 1e-14);
    EXPECT_NEAR(res.r, 0.0, 1e-14);
}

TEST(Berreman, ZeroEps33Throws) {
    Eigen::Matrix3cd eps = Eigen::Matrix3cd::Identity();
    eps(2, 2) = 0.0;
    EXPECT_THROW(berreman_matrix(eps, 0.0), OpticsError);
}

TEST(Berreman, SymmetryRelationsForSymmetricPermittivity) {
    Eigen::Matrix3cd eps;
    eps << 2.3, 0.1, 0.2, 0.1, 2.5, -0.15, 0.2, -0.15, 2.8;
    const Eigen::Matrix4cd d = berreman_matrix(eps, 0.4);
    EXPECT_NEAR(std::abs(d(0, 2) - d(3, 1)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(d(0, 0) - d(1, 1)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(d(3, 0) - d(1, 2)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(d(1, 3)), 0.0, 0.0);
}

TEST(Berreman, RetarderBetweenCrossedPolarisers) {
    const double no = 1.5, ne = 1.7, d = 2.3e-6, lambda = 532e-9, amb = 1.5;
    Eigen::Matrix3cd eps = Eigen::Matrix3cd::Zero();
    eps(0, 0) = ne * ne;
    eps(1, 1) = no * no;
    eps(2, 2) = no * no;
    const PlaneWaveSpec w{lambda, 0.0, amb, amb};
    const Eigen::Vector2cd in = Eigen::Vector2cd(1, 1) / std::sqrt(2.0);
    const Eigen::Vector2cd out = Eigen::Vector2cd(1, -1) / std::sqrt(2.0);
    const auto res = transmittance({{d, eps}}, w, in);
    const C tx = slab_amplitude(amb, ne, d, lambda), ty = slab_amplitude(amb, no, d, lambda);
    EXPECT_NEAR(analysed_transmittance(res, out), std::norm(tx - ty) / 4.0, 1e-10);
    EXPECT_NEAR(res.t + res.r, 1.0, 1e-12);
}

TEST(Berreman, AbsorbingLayerLosesPower) {
    const auto res = transmittance({isotropic_layer(150e-9, {1.9, 0.02})}, PlaneWaveSpec{}, Eigen::Vector2cd(1, 0));
    EXPECT_LT(res.t + res.r, 1.0 - 1e-3);
}

TEST(Berreman, IncoherentCascadeOfTwoFaces) {
    const auto f = fresnel_face(1.0, 1.5);
    EXPECT_NEAR(f.r, 0.04, 1e-12);
    const auto both = incoherent_cascade(f, f);
    EXPECT_NEAR(both.t, f.t * f.t / (1.0 - f.r * f.r), 1e-14);
    EXPECT_NEAR(both.t + both.r, 1.0, 1e-14);
}

TEST(Berreman, EvanescentAmbientThrows) {
    EXPECT_THROW(transmittance({}, PlaneWaveSpec{532e-9, 1.6, 1.5, 1.5}, Eigen::Vector2cd(1, 0)), DomainError);
}

TEST(Profile, PlanarColumnWithoutItoMatchesUniformLayer) {
    const LdgModel model(MaterialTable::builtin().get("RDP-84909"));
    const std::vector<QTensor> column(9, uniaxial_q({1, 0, 0}, model.s_eq()));
    OpticsOptions o;
    o.ito.reset();
    o.outer_index = 0.0;
    o.polarisation = Polarisation::x;
    const auto col = column_transmittance(column, 1e-6, false, false, model, o);
    const double ne = model.material().n_e();
    EXPECT_NEAR(col.t, std::norm(slab_amplitude(1.5, ne, 8e-6, 532e-9)), 1e-10);
}

TEST(Profile, OneDimensionalStateGivesOneRow) {
    const LdgModel model(MaterialTable::builtin().get("RDP-84909"));
    const CellStack stack;
    const CellState s = initial_state(stack, model, 0.0, Dimensionality::one_d, 0.0);
    const auto rows = transmittance_profile_2d(s, stack, model);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_GT(rows[0].t, 0.5);
    EXPECT_LT(rows[0].t, 1.0);
    EXPECT_DOUBLE_EQ(mean_transmittance(rows), rows[0].t);
}
