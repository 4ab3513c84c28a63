#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mkrf/analysis.hpp"

using namespace mkrf;

namespace {
struct Series {
    std::vector<double> t, v;
};
Series sample(double (*f)(double), double T = 20.0, double dt = 0.01) {
    Series s;
    for (int i = 0; i * dt <= T + 1e-12; ++i) {
        s.t.push_back(i * dt);
        s.v.push_back(f(i * dt));
    }
    return s;
}
DecayHypothesis unit_hypothesis() {
    DecayHypothesis h;
    h.lambda = 1.0;
    h.N = 1;
    h.nu = {make_rational(1, 1), make_rational(1, 1)};
    h.K1 = 2.0;
    return h;
}
}  // namespace

TEST_CASE("rationals") {
    CHECK(make_rational(2, 4) == make_rational(1, 2));
    CHECK(to_string(make_rational(6, -8)) == "-3/4");
    CHECK(parse_rational("2/9") == make_rational(2, 9));
    CHECK(parse_rational("3") == make_rational(3, 1));
    CHECK((make_rational(1, 2) / make_rational(5, 4)) == make_rational(2, 5));
    CHECK_THROWS_AS(parse_rational("1/0"), std::invalid_argument);
    CHECK_THROWS_AS(parse_rational("x"), std::invalid_argument);
}

TEST_CASE("decay hypothesis validation") {
    auto h = unit_hypothesis();
    CHECK_NOTHROW(validate(h));
    h.nu = {make_rational(1, 1), make_rational(2, 1)};
    CHECK_THROWS_AS(validate(h), std::invalid_argument);
    h = unit_hypothesis();
    h.lambda = 0.0;
    CHECK_THROWS_AS(validate(h), std::invalid_argument);
    h = unit_hypothesis();
    h.K1 = 1.0;
    CHECK_THROWS_AS(validate(h), std::invalid_argument);
}

TEST_CASE("decay lemma audit: synthetic cases") {
    const auto h = unit_hypothesis();
    const auto e = sample([](double t) { return std::exp(-t); });
    const auto a = decay_lemma_audit(e.t, e.v, h);
    CHECK(a.kind == DecayAudit::Kind::Certified);
    CHECK(a.kappa == doctest::Approx(1.0).epsilon(0.05));
    const auto p = sample([](double t) { return 1.0 / (1.0 + t); });
    const auto b = decay_lemma_audit(p.t, p.v, h);
    CHECK(b.kind == DecayAudit::Kind::HypothesisViolated);
    CHECK(b.violation_t >= h.K1);
    const auto z = sample([](double) { return 0.0; });
    CHECK(decay_lemma_audit(z.t, z.v, h).kind == DecayAudit::Kind::Certified);
}

TEST_CASE("decay audit is monotone under scaling down") {
    const auto h = unit_hypothesis();
    auto e = sample([](double t) { return std::exp(-t); });
    const auto a = decay_lemma_audit(e.t, e.v, h);
    for (auto& v : e.v) v *= 0.3;
    const auto b = decay_lemma_audit(e.t, e.v, h);
    CHECK(b.kind == DecayAudit::Kind::Certified);
    CHECK(b.kappa == doctest::Approx(a.kappa).epsilon(1e-6));
}

TEST_CASE("decay audit rejects non-uniform sampling") {
    auto e = sample([](double t) { return std::exp(-t); });
    e.t[5] += 0.003;
    CHECK_THROWS_AS(decay_lemma_audit(e.t, e.v, unit_hypothesis()), std::invalid_argument);
}

TEST_CASE("exponential and power fits") {
    const auto e = sample([](double t) { return 3.0 * std::exp(-2.5 * t); });
    const auto f = fit_exponential(e.t, e.v);
    CHECK(f.ok);
    CHECK(f.kappa == doctest::Approx(2.5).epsilon(1e-9));
    CHECK(f.r2 > 0.999999);
    const auto p = sample([](double t) { return std::pow(1.0 + t, -2.0); });
    const auto g = fit_power(p.t, p.v);
    CHECK(g.ok);
    CHECK(g.kappa == doctest::Approx(2.0).epsilon(1e-9));
    // everything under the floor: nothing to fit
    CHECK_FALSE(fit_exponential(e.t, e.v, 0.5, 10.0).ok);
}

TEST_CASE("integrability in time") {
    const auto e = sample([](double t) { return std::exp(-t); });
    const auto a = integrability_check(e.t, e.v, 1.0);
    CHECK(a.finite);
    CHECK(a.integral == doctest::Approx(1.0).epsilon(1e-4));
    const auto h = sample([](double t) { return 1.0 / (1.0 + t); });
    CHECK_FALSE(integrability_check(h.t, h.v, 1.0).finite);
    CHECK(integrability_check(h.t, h.v, 3.0).finite);
    const auto c = sample([](double) { return 0.3; });
    CHECK_FALSE(integrability_check(c.t, c.v, 1.0).finite);
}

TEST_CASE("quadrature and floors") {
    const auto s = sample([](double t) { return t * t; }, 2.0, 0.1);
    CHECK(simpson(s.t, s.v) == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
    CHECK(trapezoid(s.t, s.v) == doctest::Approx(8.0 / 3.0).epsilon(1e-2));
    CHECK(noise_floor({1.0, 0.5}, 1e-3, 1e-9) == doctest::Approx(1e-3));
    CHECK(noise_floor({1e-12}, 1e-3, 1e-9) == doctest::Approx(1e-9));
}
