#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mkrf/background.hpp"
#include "mkrf/metric.hpp"
#include "mkrf/potentials.hpp"
#include "oracles.hpp"

using namespace mkrf;

namespace {
Field zeros(const BackgroundPtr& bg) { return Field::Zero(static_cast<Eigen::Index>(bg->size())); }
}  // namespace

TEST_CASE("CP1 background is Fubini-Study") {
    const auto bg = background_cp1(129);
    CHECK(bg->volume == doctest::Approx(oracle::cp1_volume));
    CHECK((bg->curvature.array() - 1.0).abs().maxCoeff() < 1e-8);
    CHECK(std::abs(bg->measure.sum() - 2.0 * std::numbers::pi) < 1e-12);
    CHECK(bg->ricci_potential.cwiseAbs().maxCoeff() < 1e-12);
    for (Eigen::Index i = 0; i < bg->tau.size(); ++i)
        CHECK(bg->profile(i) == doctest::Approx(oracle::fs_profile(bg->tau(i))).epsilon(1e-14));
    CHECK(bg->slope_a == doctest::Approx(1.0));
    CHECK(bg->slope_b == doctest::Approx(-1.0));
}

TEST_CASE("F1 background: total scalar curvature and the generator divergence") {
    const auto bg = background_f1(129);
    CHECK(bg->volume == doctest::Approx(8.0 * std::numbers::pi * std::numbers::pi));
    CHECK(std::abs(bg->measure.sum() - bg->volume) < 1e-10);
    CHECK(std::abs(bg->integrate((bg->curvature.array() - 2.0).matrix())) < 1e-7);
    const MetricState s(bg, zeros(bg));
    const VectorFieldSpec W{1.0};
    const auto p = modified_potential(s, W);
    CHECK((laplacian(s, p.theta) - divergence_X_christoffel(s, W)).cwiseAbs().maxCoeff() < 1e-7);
    // F1 is not Kaehler-Einstein
    CHECK(bg->ricci_potential.cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("background lookup by name") {
    CHECK(parse_background("cp1") == BackgroundId::CP1);
    CHECK(parse_background("F1") == BackgroundId::F1);
    CHECK_THROWS_AS(parse_background("cp2"), std::invalid_argument);
    CHECK(make_background(BackgroundId::F1, 33)->size() == 33);
}

TEST_CASE("metric state rejects potentials outside the Kaehler cone") {
    const auto bg = background_cp1(65);
    CHECK_THROWS_AS(MetricState(bg, Field(-3.0 * bg->tau.array().square())), DegenerateMetric);
    CHECK_THROWS_AS(MetricState(bg, Field::Zero(10)), std::invalid_argument);
}

TEST_CASE("constant potential leaves the metric unchanged") {
    const auto bg = background_f1(65);
    const MetricState a(bg, zeros(bg)), b(bg, Field::Constant(65, 0.7));
    CHECK((a.scalar_curvature() - b.scalar_curvature()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((a.volume_ratio().array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("Laplacian integrates to zero and matches the Dirichlet form") {
    const auto bg = background_cp1(65);
    const Field psi = 0.1 * (bg->tau.array() - 1.0).square().matrix();
    const MetricState s(bg, psi);
    const Field eta = bg->tau.array().cube().matrix();
    CHECK(std::abs(integrate(s, laplacian(s, eta))) < 1e-11);
    // -int eta Lap eta = int |grad eta|^2
    CHECK(-integrate(s, eta.cwiseProduct(laplacian(s, eta))) ==
          doctest::Approx(integrate(s, grad_norm_sq(s, eta))).epsilon(1e-11));
}

TEST_CASE("Hamiltonian routes agree and normalize") {
    const auto bg = background_f1(65);
    const Field psi = 0.05 * (bg->tau.array() - 2.0).square().matrix();
    const MetricState s(bg, psi);
    const VectorFieldSpec X{0.5};
    double kappa = 0.0;
    const Field th = hamiltonian_theta(s, X, &kappa);
    CHECK((th - hamiltonian_theta_direct(s, X)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(integrate(s, th.array().exp().matrix()) == doctest::Approx(bg->volume).epsilon(1e-12));
    CHECK((laplacian(s, th) - divergence_X_christoffel(s, X)).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((divergence_X(s, X) - divergence_X_christoffel(s, X)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("FS closed forms for theta and the Ricci potential") {
    const auto bg = background_cp1(65);
    const MetricState s(bg, zeros(bg));
    const double c = 0.5;
    const auto p = modified_potential(s, VectorFieldSpec{c});
    const double k = oracle::fs_theta_shift(c);
    for (Eigen::Index i = 0; i < bg->tau.size(); ++i) CHECK(p.theta(i) == doctest::Approx(c * (bg->tau(i) - k)).epsilon(1e-12));
    CHECK(p.f.cwiseAbs().maxCoeff() < 1e-12);
    // f vanishes, so b is the mean of theta; the moment measure is uniform with mean 1
    CHECK(p.b == doctest::Approx(c * (1.0 - k)).epsilon(1e-12));
}

TEST_CASE("Ricci potential normalization and the theta Newton solver") {
    const auto bg = background_f1(65);
    const MetricState s(bg, zeros(bg));
    const Field f = ricci_potential(s);
    CHECK(integrate(s, Field((-f).array().exp())) == doctest::Approx(bg->volume).epsilon(1e-12));
    const Field raw = 0.4 * s.moment();
    const double kappa = theta_normalization_newton(s, raw);
    CHECK(integrate(s, Field((raw.array() + kappa).exp())) == doctest::Approx(bg->volume).epsilon(1e-11));
}

TEST_CASE("modified potential vanishes at a Kaehler-Einstein metric with X = 0") {
    const auto bg = background_cp1(65);
    const auto p = modified_potential(MetricState(bg, zeros(bg)), VectorFieldSpec{0.0});
    CHECK(p.u.cwiseAbs().maxCoeff() < 1e-12);
}
