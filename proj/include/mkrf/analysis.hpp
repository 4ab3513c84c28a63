#pragma once

#include <string>
#include <vector>

namespace mkrf {

struct Rational {
    long num = 0;
    long den = 1;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};
Rational make_rational(long num, long den);
Rational operator+(Rational a, Rational b);
Rational operator/(Rational a, Rational b);
bool operator==(Rational a, Rational b);
Rational parse_rational(const std::string& text);
std::string to_string(Rational r);

// W' <= -2 lambda W + lambda prod_{j=0}^N W(t - 2j)^{nu_j / 2}, t >= K1.
struct DecayHypothesis {
    double lambda = 1.0;
    int N = 1;
    std::vector<Rational> nu;
    double K0 = 0.0;  // sup W, 0 means take it from the samples
    double K1 = 2.0;
};
// Throws std::invalid_argument unless half the exponent sum is exactly 1.
void validate(const DecayHypothesis& hyp);

struct AuditBand {
    double absolute = 1e-8;
    double relative = 0.02;
};

struct DecayAudit {
    enum class Kind { Certified, HypothesisViolated, Inconclusive };
    Kind kind = Kind::Inconclusive;
    double C = 0.0;
    double kappa = 0.0;
    double violation_t = 0.0;
    std::size_t checked = 0;
    std::string reason;
};
std::string to_string(DecayAudit::Kind k);

// Samples at or below `floor` are treated as numerical zero when fitting.
DecayAudit decay_lemma_audit(const std::vector<double>& times, const std::vector<double>& values,
                             const DecayHypothesis& hyp, const AuditBand& band = {}, double floor = 0.0);

struct ExpFit {
    bool ok = false;
    double kappa = 0.0;
    double stderr_kappa = 0.0;
    double r2 = 0.0;
    double log_c = 0.0;  // intercept of log y = log_c - kappa t
    std::size_t used = 0;
    std::string reason;
};
// Least squares on log y over the trailing window of samples above `floor`.
ExpFit fit_exponential(const std::vector<double>& times, const std::vector<double>& values,
                       double window_fraction = 0.5, double floor = 0.0);
// Same, with log(1+t) as regressor: y ~ C (1+t)^{-q}; kappa holds q.
ExpFit fit_power(const std::vector<double>& times, const std::vector<double>& values,
                 double window_fraction = 0.5, double floor = 0.0);

struct Integrability {
    bool finite = false;
    double observed = 0.0;
    double integral = 0.0;  // observed + extrapolated tail
    std::string model;      // exponential | power | none
    double rate = 0.0;
    std::string reason;
};
Integrability integrability_check(const std::vector<double>& times, const std::vector<double>& values, double p,
                                  double floor = 0.0);

// Noise floor of a decaying series: relative * max, but never below absolute.
double noise_floor(const std::vector<double>& values, double relative, double absolute);

double trapezoid(const std::vector<double>& times, const std::vector<double>& values);
double simpson(const std::vector<double>& times, const std::vector<double>& values);

}  // namespace mkrf
