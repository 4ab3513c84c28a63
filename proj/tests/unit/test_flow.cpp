#include <doctest.h>

#include <cmath>

#include "mkrf/errors.hpp"
#include "mkrf/flow.hpp"
#include "mkrf/functionals.hpp"

using namespace mkrf;

namespace {
FlowConfig short_cp1(double T = 3.0) {
    FlowConfig cfg;
    cfg.T = T;
    cfg.grid = 65;
    cfg.perturbation = "mixed";
    cfg.amplitude = 0.1;
    return cfg;
}
}  // namespace

TEST_CASE("config validation") {
    FlowConfig cfg;
    CHECK_NOTHROW(validate(cfg));
    auto bad = cfg;
    bad.T = 0.0;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad = cfg;
    bad.grid = 8;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad = cfg;
    bad.dt_min = 1.0;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad = cfg;
    bad.perturbation = "square";
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    CHECK(parse_scheme("rosenbrock") == Scheme::Rosenbrock);
    CHECK_THROWS_AS(parse_scheme("euler"), std::invalid_argument);
}

TEST_CASE("perturbation shapes are centered, unit size and seeded") {
    const auto bg = background_f1(65);
    for (const char* fam : {"p2", "p3", "mixed", "cos", "random"}) {
        const Field s = perturbation_shape(*bg, fam, 7);
        CHECK(s.cwiseAbs().maxCoeff() == doctest::Approx(1.0));
        CHECK(std::abs(bg->mean(s)) < 1e-13);
    }
    CHECK((perturbation_shape(*bg, "random", 7) - perturbation_shape(*bg, "random", 7)).norm() == 0.0);
    CHECK((perturbation_shape(*bg, "random", 7) - perturbation_shape(*bg, "random", 8)).norm() > 0.1);
    CHECK(perturbation_shape(*bg, "none", 7).norm() == 0.0);
}

TEST_CASE("fixed points of the potential flow") {
    const auto bg = background_cp1(65);
    const MetricState fs(bg, Field::Zero(65));
    CHECK(centered_rhs(fs, VectorFieldSpec{0.0}).cwiseAbs().maxCoeff() < 1e-12);
    const auto next = step(fs, VectorFieldSpec{0.0}, 0.01);
    CHECK(next.psi().cwiseAbs().maxCoeff() < 1e-13);
    CHECK(next.time() == doctest::Approx(0.01));
}

TEST_CASE("rhs Jacobian matches finite differences") {
    const auto bg = background_f1(33);
    const MetricState s(bg, Field(0.05 * perturbation_shape(*bg, "mixed", 1)));
    const VectorFieldSpec X{0.4};
    const Matrix J = rhs_jacobian(s, X);
    const Field dir = perturbation_shape(*bg, "cos", 3);
    const double e = 1e-6;
    const Field fd = (centered_rhs(s.with_psi(s.psi() + e * dir, 0.0), X) -
                      centered_rhs(s.with_psi(s.psi() - e * dir, 0.0), X)) / (2.0 * e);
    CHECK((J * dir - fd).cwiseAbs().maxCoeff() < 1e-5 * (1.0 + fd.cwiseAbs().maxCoeff()));
    CHECK(stiffness_estimate(s, X) > 0.0);
}

TEST_CASE("RK4 and Rosenbrock steps agree") {
    const auto bg = background_cp1(33);
    const MetricState s(bg, Field(0.1 * perturbation_shape(*bg, "mixed", 1)));
    const VectorFieldSpec X{0.2};
    const auto a = step(s, X, 1e-3, Scheme::RK4);
    Field err;
    const auto b = step_with_error(s, X, 1e-3, err);
    CHECK((a.psi() - b.psi()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(err.cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("short convergent run: monotone energy, positive metric") {
    const auto tr = run(short_cp1());
    REQUIRE(tr.termination == Termination::ReachedHorizon);
    CHECK(tr.records.size() == 61);
    CHECK(tr.snapshots.size() == 4);
    for (std::size_t i = 1; i < tr.records.size(); ++i) {
        CHECK(tr.records[i].mu_X <= tr.records[i - 1].mu_X + 1e-14);
        CHECK(tr.records[i].Y_X < tr.records[i - 1].Y_X);
        CHECK(tr.records[i].h_min > 0.0);
        CHECK(-tr.records[i].F_pi <= tr.records[i].Y_X * (1.0 + 1e-9) + 1e-14);
    }
    // dual computation of the modified Mabuchi energy
    const VectorFieldSpec X{tr.c};
    const auto mu = mabuchi_energy_flow(tr);
    for (const auto& s : tr.snapshots) {
        const auto i = static_cast<std::size_t>(std::lround(s.time() / 0.05));
        CHECK(std::abs(mu[i] - mabuchi_energy_path(s, X)) < 1e-4);
    }
}

TEST_CASE("evolution identities hold along the flow") {
    const auto bg = background_cp1(65);
    const MetricState s(bg, Field(0.1 * perturbation_shape(*bg, "mixed", 1)));
    const auto r = evolution_identity_residuals(s, VectorFieldSpec{0.3}, 1e-3);
    CHECK(r.first < 1e-4);
    CHECK(r.gradient < 1e-4);
    CHECK(r.laplacian < 1e-3);
    CHECK(r.h_evolution < 1e-4);
}

TEST_CASE("constant channel and c0") {
    auto cfg = short_cp1(8.0);
    const auto tr = run(cfg);
    const auto c0 = compute_c0(tr);
    CHECK(std::isfinite(c0.c0));
    CHECK(c0.truncation_bound >= 0.0);
    CHECK(std::abs(c0.c0 - c0.c0_trapezoid) < 1e-3);
    const auto stable = constant_channel_stable(tr);
    const auto fwd = constant_channel_forward(tr, c0.c0_channel);
    CHECK(stable.size() == tr.records.size());
    CHECK(std::abs(fwd.front() - stable.front()) < 1e-12);
    for (double a : stable) CHECK(std::abs(a) < 1.0);
}

TEST_CASE("divergence guard stops a runaway run") {
    FlowConfig cfg;
    cfg.c = 0.3;
    cfg.perturbation = "none";
    cfg.T = 10.0;
    cfg.grid = 65;
    cfg.divergence_guard = 0.05;
    const auto tr = run(cfg);
    CHECK(tr.termination == Termination::DivergenceGuard);
    CHECK(exit_code(tr.termination) == 3);
    CHECK(tr.records.back().t < 10.0);
}

TEST_CASE("an inadmissible initial potential is reported as degenerate") {
    FlowConfig cfg = short_cp1();
    cfg.perturbation = "random";
    cfg.amplitude = 5.0;
    CHECK_THROWS_AS(run(cfg), DegenerateMetric);
    CHECK(exit_code(Termination::Degenerate) == 2);
}
