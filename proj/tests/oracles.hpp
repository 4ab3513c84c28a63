#pragma once

// Closed forms and quadratures that do not go through the library's grids.

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

// 64-panel composite Gauss-Legendre (5 points), plenty for smooth integrands.
inline double integrate(const std::function<double(double)>& f, double a, double b, int panels = 64) {
    static const double x[5] = {0.0, 0.5384693101056831, -0.5384693101056831, 0.9061798459386640,
                                -0.9061798459386640};
    static const double w[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
                                0.2369268850561891};
    const double hstep = (b - a) / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * hstep;
        for (int k = 0; k < 5; ++k) sum += w[k] * f(mid + 0.5 * hstep * x[k]);
    }
    return 0.5 * hstep * sum;
}

inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo);
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Koiso soliton on F1 from the first integral of the reduced soliton ODE:
// the boundary data force int_1^3 (tau - 2) tau e^{s tau} dtau = 0, and X = cW
// with W = -phi0 d/dtau gives c = -s. Antiderivatives in closed form.
inline double koiso_first_integral(double s) {
    auto F = [s](double t) {
        const double e = std::exp(s * t);
        const double t2 = e * (t * t / s - 2.0 * t / (s * s) + 2.0 / (s * s * s));
        const double t1 = e * (t / s - 1.0 / (s * s));
        return t2 - 2.0 * t1;
    };
    return F(3.0) - F(1.0);
}
inline double koiso_constant() { return -bisect(koiso_first_integral, -3.0, -0.05); }

// Fubini-Study CP1 in the momentum picture.
inline double fs_profile(double tau) { return 0.5 * tau * (2.0 - tau); }
constexpr double cp1_volume = 2.0 * std::numbers::pi;

// theta = c (tau - kappa) with int_0^2 e^theta pi dtau = 2 pi
inline double fs_theta_shift(double c) {
    if (c == 0.0) return 0.0;
    return std::log((std::exp(2.0 * c) - 1.0) / (2.0 * c)) / c;
}
// F_X(W) on FS: -pi int_0^2 c phi0 e^{c (tau - kappa)} dtau
inline double fs_futaki(double c) {
    const double k = fs_theta_shift(c);
    return -std::numbers::pi * integrate([&](double t) { return c * fs_profile(t) * std::exp(c * (t - k)); }, 0.0, 2.0);
}

// Rayleigh quotient of v = tau - 1 on FS: int |W|^2 |grad v|^2 / int |W|^2 v^2.
// |W|^2 = phi0 sigma_tau = phi0 and |grad v|^2 = phi0 v'^2 on FS.
inline double fs_rayleigh_linear() {
    const double num = integrate([](double t) { return fs_profile(t) * fs_profile(t); }, 0.0, 2.0);
    const double den = integrate([](double t) { return fs_profile(t) * (t - 1.0) * (t - 1.0); }, 0.0, 2.0);
    return num / den;
}

// Recursion for the product exponents: rho = 1/(n+1), delta_0 / 2 = 1/2,
// delta_j / 2 = (1 - rho)^{j-1} rho, N the least integer with 2 (1 - rho)^N < 1.
struct Exponents {
    int N = 0;
    double halves[8] = {};
};
inline Exponents exponent_recursion(int n) {
    const double rho = 1.0 / (n + 1);
    Exponents e;
    while (2.0 * std::pow(1.0 - rho, e.N) >= 1.0) ++e.N;
    e.halves[0] = 0.5;
    for (int j = 1; j <= e.N; ++j) e.halves[j] = std::pow(1.0 - rho, j - 1) * rho;
    return e;
}

}  // namespace oracle
