#include "mkrf/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mkrf {

Rational make_rational(long num, long den) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const long g = std::gcd(num, den);
    return g > 1 ? Rational{num / g, den / g} : Rational{num, den};
}

Rational operator+(Rational a, Rational b) { return make_rational(a.num * b.den + b.num * a.den, a.den * b.den); }

Rational operator/(Rational a, Rational b) {
    if (b.num == 0) throw std::invalid_argument("rational division by zero");
    return make_rational(a.num * b.den, a.den * b.num);
}

bool operator==(Rational a, Rational b) { return a.num * b.den == b.num * a.den; }

Rational parse_rational(const std::string& text) {
    const auto slash = text.find('/');
    std::size_t used = 0;
    try {
        if (slash == std::string::npos) {
            const long v = std::stol(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            return {v, 1};
        }
        const std::string a = text.substr(0, slash), b = text.substr(slash + 1);
        const long num = std::stol(a, &used);
        if (used != a.size()) throw std::invalid_argument(text);
        const long den = std::stol(b, &used);
        if (used != b.size()) throw std::invalid_argument(text);
        return make_rational(num, den);
    } catch (const std::logic_error&) {
        throw std::invalid_argument("not a rational number: '" + text + "'");
    }
}

std::string to_string(Rational r) {
    return r.den == 1 ? std::to_string(r.num) : std::to_string(r.num) + "/" + std::to_string(r.den);
}

std::string to_string(DecayAudit::Kind k) {
    switch (k) {
        case DecayAudit::Kind::Certified: return "Certified";
        case DecayAudit::Kind::HypothesisViolated: return "HypothesisViolated";
        case DecayAudit::Kind::Inconclusive: return "Inconclusive";
    }
    return "Inconclusive";
}

void validate(const DecayHypothesis& hyp) {
    if (!(hyp.lambda > 0.0)) throw std::invalid_argument("decay hypothesis needs lambda > 0");
    if (hyp.N < 1) throw std::invalid_argument("decay hypothesis needs N >= 1");
    if (hyp.nu.size() != static_cast<std::size_t>(hyp.N) + 1)
        throw std::invalid_argument("decay hypothesis needs N+1 exponents");
    Rational sum{0, 1};
    for (const auto& v : hyp.nu) {
        if (v.num < 0) throw std::invalid_argument("decay exponents must be non-negative");
        sum = sum + v;
    }
    if (!(sum == Rational{2, 1})) throw std::invalid_argument("half the exponent sum must equal 1, got " +
                                                            to_string(make_rational(sum.num, 2 * sum.den)));
    if (hyp.K1 < 2.0 * hyp.N) throw std::invalid_argument("decay hypothesis needs K1 >= 2N");
}

namespace {

double interp(const std::vector<double>& t, const std::vector<double>& y, double x) {
    if (x <= t.front()) return y.front();
    if (x >= t.back()) return y.back();
    const auto it = std::upper_bound(t.begin(), t.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - t.begin());
    const double w = (x - t[i - 1]) / (t[i] - t[i - 1]);
    return (1.0 - w) * y[i - 1] + w * y[i];
}

ExpFit regress(const std::vector<double>& x, const std::vector<double>& ly) {
    ExpFit fit;
    const std::size_t n = x.size();
    fit.used = n;
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) {
        fit.reason = "degenerate abscissae";
        return fit;
    }
    const double slope = sxy / sxx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ly[i] - (my + slope * (x[i] - mx));
        ssr += r * r;
    }
    fit.ok = true;
    fit.kappa = -slope;
    fit.log_c = my - slope * mx;
    fit.stderr_kappa = n > 2 ? std::sqrt(ssr / static_cast<double>(n - 2) / sxx) : 0.0;
    fit.r2 = syy > 0.0 ? 1.0 - ssr / syy : (ssr == 0.0 ? 1.0 : 0.0);
    return fit;
}

ExpFit windowed_fit(const std::vector<double>& times, const std::vector<double>& values, double window_fraction,
                    double floor, bool power) {
    if (times.size() != values.size()) throw std::invalid_argument("series length mismatch");
    if (!(window_fraction > 0.0 && window_fraction <= 1.0)) throw std::invalid_argument("window fraction in (0,1]");
    // usable samples: the leading stretch above the floor
    std::size_t last = 0;
    while (last < values.size() && values[last] > floor && std::isfinite(values[last])) ++last;
    ExpFit fit;
    if (last < 20) {
        fit.reason = "fewer than 20 positive samples above the floor";
        return fit;
    }
    const std::size_t first = last - std::max<std::size_t>(20, static_cast<std::size_t>(window_fraction * last));
    std::vector<double> x, ly;
    for (std::size_t i = first; i < last; ++i) {
        x.push_back(power ? std::log1p(times[i]) : times[i]);
        ly.push_back(std::log(values[i]));
    }
    fit = regress(x, ly);
    return fit;
}

}  // namespace

ExpFit fit_exponential(const std::vector<double>& times, const std::vector<double>& values, double window_fraction,
                       double floor) {
    return windowed_fit(times, values, window_fraction, floor, false);
}

ExpFit fit_power(const std::vector<double>& times, const std::vector<double>& values, double window_fraction,
                 double floor) {
    return windowed_fit(times, values, window_fraction, floor, true);
}

double noise_floor(const std::vector<double>& values, double relative, double absolute) {
    double top = 0.0;
    for (double v : values)
        if (std::isfinite(v)) top = std::max(top, std::abs(v));
    return std::max(absolute, relative * top);
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) s += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
    return s;
}

double simpson(const std::vector<double>& t, const std::vector<double>& y) {
    // composite Simpson on pairs of intervals, trapezoid on a leftover one
    double s = 0.0;
    std::size_t i = 0;
    for (; i + 2 < t.size(); i += 2) {
        const double h0 = t[i + 1] - t[i], h1 = t[i + 2] - t[i + 1];
        const double H = h0 + h1;
        s += H / 6.0 * ((2.0 - h1 / h0) * y[i] + H * H / (h0 * h1) * y[i + 1] + (2.0 - h0 / h1) * y[i + 2]);
    }
    if (i + 1 < t.size()) s += 0.5 * (t[i + 1] - t[i]) * (y[i] + y[i + 1]);
    return s;
}

Integrability integrability_check(const std::vector<double>& times, const std::vector<double>& values, double p,
                                  double floor) {
    if (!(p >= 1.0)) throw std::invalid_argument("integrability exponent must be >= 1");
    Integrability out;
    std::vector<double> s(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) s[i] = std::pow(std::abs(values[i]), p);
    const double fl = floor > 0.0 ? std::pow(floor, p) : 0.0;
    out.observed = trapezoid(times, s);
    const ExpFit e = fit_exponential(times, s, 0.5, fl);
    const ExpFit q = fit_power(times, s, 0.5, fl);
    if (!e.ok && !q.ok) {
        out.model = "none";
        out.reason = e.reason;
        out.integral = out.observed;
        return out;
    }
    const bool use_exp = e.ok && (!q.ok || e.r2 >= q.r2);
    const ExpFit& f = use_exp ? e : q;
    out.model = use_exp ? "exponential" : "power";
    out.rate = f.kappa;
    const double T = times.back();
    if (f.r2 < 0.9) {
        out.reason = "no decay model explains the tail (R^2 < 0.9)";
        out.integral = INFINITY;
        return out;
    }
    if (use_exp) {
        out.finite = f.kappa > 0.0 && f.stderr_kappa < f.kappa / 5.0;
        const double tail = std::exp(f.log_c - f.kappa * T) / f.kappa;
        out.integral = out.finite ? out.observed + tail : INFINITY;
    } else {
        out.finite = f.kappa > 1.0 && f.stderr_kappa < (f.kappa - 1.0) / 5.0;
        const double tail = std::exp(f.log_c) * std::pow(1.0 + T, 1.0 - f.kappa) / (f.kappa - 1.0);
        out.integral = out.finite ? out.observed + tail : INFINITY;
    }
    if (!out.finite) out.reason = "fitted tail is not integrable";
    return out;
}

DecayAudit decay_lemma_audit(const std::vector<double>& times, const std::vector<double>& values,
                             const DecayHypothesis& hyp, const AuditBand& band, double floor) {
    validate(hyp);
    if (times.size() != values.size() || times.size() < 3) throw std::invalid_argument("decay audit needs samples");
    const double dt = times[1] - times[0];
    for (std::size_t i = 1; i < times.size(); ++i)
        if (std::abs((times[i] - times[i - 1]) - dt) > 1e-6 * dt)
            throw std::invalid_argument("decay audit needs uniform cadence");
    DecayAudit out;
    if (times.back() <= hyp.K1 + 10.0) {
        out.reason = "horizon must exceed K1 + 10";
        return out;
    }
    for (double v : values)
        if (!(v >= 0.0) || !std::isfinite(v)) {
            out.reason = "W must be finite and non-negative";
            return out;
        }
    const double K0 = hyp.K0 > 0.0 ? hyp.K0 : *std::max_element(values.begin(), values.end());
    if (*std::max_element(values.begin(), values.end()) > K0 * (1.0 + 1e-12)) {
        out.kind = DecayAudit::Kind::HypothesisViolated;
        out.reason = "W exceeds K0";
        return out;
    }
    for (std::size_t i = 1; i + 1 < times.size(); ++i) {
        const double t = times[i];
        if (t < hyp.K1) continue;
        const double lhs = (values[i + 1] - values[i - 1]) / (times[i + 1] - times[i - 1]);
        double prod = 1.0;
        for (int j = 0; j <= hyp.N; ++j) prod *= std::pow(interp(times, values, t - 2.0 * j), 0.5 * hyp.nu[j].value());
        const double rhs = -2.0 * hyp.lambda * values[i] + hyp.lambda * prod;
        const double tol = band.absolute +
                           band.relative * (std::abs(lhs) + 2.0 * hyp.lambda * values[i] + hyp.lambda * prod);
        ++out.checked;
        if (lhs > rhs + tol) {
            out.kind = DecayAudit::Kind::HypothesisViolated;
            out.violation_t = t;
            out.reason = "difference-differential inequality fails";
            return out;
        }
    }
    // hypothesis holds; fit the envelope on the tail
    bool all_zero = true;
    for (double v : values) all_zero = all_zero && v <= floor;
    if (all_zero) {
        out.kind = DecayAudit::Kind::Certified;
        out.reason = "identically zero";
        return out;
    }
    std::vector<double> tt, vv;
    for (std::size_t i = 0; i < times.size(); ++i)
        if (times[i] >= hyp.K1) {
            tt.push_back(times[i]);
            vv.push_back(values[i]);
        }
    const ExpFit fit = fit_exponential(tt, vv, 1.0, floor);
    if (!fit.ok || !(fit.kappa > 0.0)) {
        out.reason = fit.ok ? "fitted rate is not positive" : fit.reason;
        return out;
    }
    double C = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i)
        if (values[i] > floor) C = std::max(C, values[i] * std::exp(fit.kappa * times[i]));
    out.kind = DecayAudit::Kind::Certified;
    out.C = C;
    out.kappa = fit.kappa;
    return out;
}

}  // namespace mkrf
