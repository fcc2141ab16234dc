#include "lctune/error.hpp"
#include "lctune/landau.hpp"
#include "lctune/material.hpp"
#include "lctune/qtensor.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace lctune;

namespace {

LCMaterial rdp() { return MaterialTable::builtin().get("RDP-84909"); }

QTensor random_q(std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> nd(0.0, scale);
    QTensor q;
    for (auto& v : q.q) v = nd(rng);
    return q;
}

}  // namespace

TEST(Material, BuiltinTableHasTheFourMixtures) {
    const auto table = MaterialTable::builtin();
    for (const char* name : {"5CB", "BLO48", "RDP-84909", "E7"}) EXPECT_TRUE(table.contains(name)) << name;
    const auto m = table.get("RDP-84909");
    EXPECT_DOUBLE_EQ(m.eps_perp, 8.0);
    EXPECT_DOUBLE_EQ(m.eps_par(), 47.1);
    EXPECT_THROW(table.get("nonexistent"), InputError);
}

TEST(Material, ParseRejectsBadRows) {
    EXPECT_THROW(MaterialTable::parse("name,eps_perp\nX,abc\n"), InputError);
    const auto t = MaterialTable::parse(
        "name,eps_perp,delta_eps,n_o,delta_n,k11_pN,k22_pN,k33_pN,clearing_temp_c\nX,5,10,1.5,0.2,10,5,15,60\n");
    EXPECT_DOUBLE_EQ(t.get("X").c_coef, kDefaultC);
    EXPECT_DOUBLE_EQ(t.get("X").k11, 10e-12);
}

TEST(Landau, EquilibriumOrderMinimisesTheUniaxialEnergy) {
    const auto m = rdp();
    const double s = equilibrium_order(m);
    EXPECT_NEAR(s, 0.613, 5e-4);
    const double f = uniaxial_thermotropic(m, s, QuarticConvention::tr_q2_sq);
    EXPECT_LT(f, uniaxial_thermotropic(m, s * 1.01, QuarticConvention::tr_q2_sq));
    EXPECT_LT(f, uniaxial_thermotropic(m, s * 0.99, QuarticConvention::tr_q2_sq));
    // The tr Q^4 normalisation halves the quartic weight and raises S_eq.
    EXPECT_GT(equilibrium_order(m, QuarticConvention::tr_q4), s);
}

TEST(Landau, NoNematicMinimumRaisesDomainError) {
    auto m = rdp();
    m.a_coef = 1e7;
    EXPECT_THROW(equilibrium_order(m), DomainError);
}

TEST(Landau, FreederickszThresholds) {
    EXPECT_NEAR(freedericksz_threshold(rdp()), 0.3621, 1e-4);
    EXPECT_NEAR(freedericksz_threshold(MaterialTable::builtin().get("5CB")), 0.8053, 1e-4);
    auto m = rdp();
    m.delta_eps = -1.0;
    EXPECT_THROW(freedericksz_threshold(m), DomainError);
}

TEST(Landau, DielectricTensorLimits) {
    const LdgModel model(rdp());
    const auto planar = uniaxial_q({1, 0, 0}, model.s_eq());
    const auto homeo = uniaxial_q({0, 0, 1}, model.s_eq());
    EXPECT_NEAR(model.dielectric_zz(planar), 8.0, 1e-12);
    EXPECT_NEAR(model.dielectric_zz(homeo), 47.1, 1e-12);
    EXPECT_NEAR(model.dielectric(homeo)(0, 0), 8.0, 1e-12);
    EXPECT_THROW(dielectric_tensor(planar, rdp(), 0.0), InputError);
}

TEST(Landau, ElasticConstantMatchesTheSplayRule) {
    const LdgModel model(rdp());
    EXPECT_NEAR(model.elastic_l(), 4.6e-12 / (2 * model.s_eq() * model.s_eq()), 1e-25);
    const LdgModel avg(rdp(), {QuarticConvention::tr_q2_sq, ElasticRule::average, {}});
    EXPECT_NEAR(avg.elastic_l(), (4.6e-12 + 1.2e-12 + 13.8e-12) / (6 * model.s_eq() * model.s_eq()), 1e-25);
}

TEST(Landau, ThermotropicChangeMatchesDirectDifference) {
    const LdgModel model(rdp());
    std::mt19937_64 rng(3);
    for (int k = 0; k < 50; ++k) {
        const QTensor q = random_q(rng, 0.3);
        const QTensor dq = random_q(rng, 0.05);
        const double direct = model.thermotropic(q + dq) - model.thermotropic(q);
        EXPECT_NEAR(model.thermotropic_change(q, dq), direct, 1e-9 * std::abs(model.thermotropic(q)) + 1e-6);
    }
}

TEST(Landau, ThermotropicGradientAndHessianMatchFiniteDifferences) {
    const LdgModel model(rdp());
    std::mt19937_64 rng(5);
    const QTensor q = random_q(rng, 0.3);
    const auto grad = coordinate_gradient(model.thermotropic_gradient(q));
    const auto hess = model.thermotropic_hessian(q);
    const double h = 1e-6;
    for (int j = 0; j < 5; ++j) {
        QTensor a = q, b = q;
        a[j] += h;
        b[j] -= h;
        EXPECT_NEAR(grad[j], (model.thermotropic(a) - model.thermotropic(b)) / (2 * h), 1e-5 * grad.norm());
        const auto ga = coordinate_gradient(model.thermotropic_gradient(a));
        const auto gb = coordinate_gradient(model.thermotropic_gradient(b));
        for (int i = 0; i < 5; ++i)
            EXPECT_NEAR(hess(i, j), (ga[i] - gb[i]) / (2 * h), 1e-5 * hess.norm());
    }
}

TEST(QTensorTest, UniaxialRoundTrip) {
    const Eigen::Vector3d n = Eigen::Vector3d(0.3, -0.4, 0.5).normalized();
    const auto d = director_and_order(uniaxial_q(n, 0.6));
    EXPECT_NEAR(d.order, 0.6, 1e-12);
    EXPECT_NEAR(std::abs(d.director.dot(n)), 1.0, 1e-12);
    EXPECT_GT(d.director.x(), 0.0);
    EXPECT_THROW(uniaxial_q({1, 1, 0}, 0.6), InputError);
}

TEST(QTensorTest, TracelessSymmetricInvariants) {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 20; ++k) {
        const QTensor q = random_q(rng, 0.4);
        const Eigen::Matrix3d m = q.matrix();
        EXPECT_NEAR(m.trace(), 0.0, 1e-15);
        EXPECT_NEAR((m - m.transpose()).norm(), 0.0, 0.0);
        EXPECT_NEAR(quartic_identity_defect(q), 0.0, 1e-14);
        const auto v = q.vector();
        EXPECT_NEAR(frobenius_norm_sq(q), v.dot(frobenius_metric() * v), 1e-14);
        EXPECT_NEAR(frobenius_norm_sq(q), (m * m).trace(), 1e-14);
    }
}

TEST(QTensorTest, TiltAndPhysicality) {
    EXPECT_NEAR(tilt_angle(uniaxial_q({1, 0, 0}, 0.6)), 0.0, 1e-12);
    EXPECT_NEAR(tilt_angle(uniaxial_q({0, 0, 1}, 0.6)), M_PI / 2, 1e-12);
    const double a = 0.4;
    EXPECT_NEAR(tilt_angle(uniaxial_q({std::cos(a), 0, std::sin(a)}, 0.6)), a, 1e-12);
    EXPECT_TRUE(is_physical(uniaxial_q({0, 1, 0}, 0.6)));
    EXPECT_FALSE(is_physical(uniaxial_q({0, 1, 0}, 1.2)));
}
