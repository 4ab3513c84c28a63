#include "mkrf/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mkrf/linalg.hpp"

namespace mkrf {

SectorEigen lambda_eig(const MetricState& s, const VectorFieldSpec& X, bool weighted) {
    const auto& grid = s.grid();
    const std::size_t N = grid.size();
    const std::size_t degree = (N - 3) / 2;
    const auto basis = legendre_basis(grid, degree);
    Field wden = s.density().cwiseProduct(s.generator_norm_sq());
    if (weighted) wden = wden.cwiseProduct(hamiltonian_theta(s, X).array().exp().matrix());
    const Field wnum = wden.cwiseProduct(
        (s.background().profile.array() / s.moment_slope().array()).matrix());
    const Matrix A = basis.derivatives.transpose() * wnum.asDiagonal() * basis.derivatives;
    const Matrix B = basis.values.transpose() * wden.asDiagonal() * basis.values;
    Matrix constraint = Matrix::Zero(A.rows(), 1);
    constraint(0, 0) = 1.0;
    const auto pair = solve_sturm_liouville(A, B, constraint);
    return {pair.eigenvalue, basis.values * pair.eigenvector};
}

void holomorphic_projection(const MetricState& s, const PotentialBundle& p, double& a_W, double& wnorm) {
    const Field Wu = apply_X(s, p.u, VectorFieldSpec{1.0});
    wnorm = integrate(s, s.generator_norm_sq(), p.exp_theta);
    if (!(wnorm > 0.0)) throw NumericalFailure("generator has zero theta-norm");
    a_W = integrate(s, Wu, p.exp_theta) / wnorm;
}

SpectralReport project_holomorphic(const MetricState& s, const VectorFieldSpec& X, const PotentialBundle& p) {
    SpectralReport r;
    holomorphic_projection(s, p, r.a_W, r.W_norm_theta_sq);
    r.F_pi = -r.a_W * r.a_W * r.W_norm_theta_sq;
    r.lambda = lambda_eig(s, X, false).eigenvalue;
    auto wx = lambda_eig(s, X, true);
    r.lambda_X = wx.eigenvalue;
    r.eigenvector = std::move(wx.field);
    return r;
}

Rational ExponentTable::half_sum() const {
    Rational s{0, 1};
    for (const auto& h : halves) s = s + h;
    return s;
}

ExponentTable exponent_table(int n) {
    if (n < 1) throw std::invalid_argument("dimension must be positive");
    ExponentTable t;
    t.n = n;
    t.rho = make_rational(1, n + 1);
    // smallest N with 2 (n/(n+1))^N < 1
    long num = 2, den = 1;
    while (num >= den) {
        num *= n;
        den *= n + 1;
        ++t.N;
    }
    t.halves.push_back(make_rational(1, 2));
    long p = 1, q = n + 1;  // (1-rho)^{j-1} rho = n^{j-1} / (n+1)^j
    for (int j = 1; j <= t.N; ++j) {
        t.halves.push_back(make_rational(p, q));
        p *= n;
        q *= n + 1;
    }
    return t;
}

DifferenceInequalityAudit theorem4_audit(const FlowTrace& trace, double floor) {
    DifferenceInequalityAudit audit;
    audit.table = exponent_table(trace.n);
    const auto& r = trace.records;
    const int N = audit.table.N;
    if (r.empty() || r.back().t <= 2.0 * N + 2.0) throw std::invalid_argument("difference-inequality audit: horizon too short");
    const auto times = trace.times();
    auto Y_at = [&](double t) {
        const auto it = std::lower_bound(times.begin(), times.end(), t - 1e-9);
        const std::size_t i = static_cast<std::size_t>(it - times.begin());
        if (i < times.size() && std::abs(times[i] - t) < 1e-6) return r[i].Y_X;
        if (i == 0 || i >= times.size()) return r[std::min(i, times.size() - 1)].Y_X;
        const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
        return (1.0 - w) * r[i - 1].Y_X + w * r[i].Y_X;
    };
    for (const auto& rec : r) {
        audit.bessel_worst = std::max(audit.bessel_worst, -rec.F_pi - rec.Y_X);
        if (-rec.F_pi > rec.Y_X * (1.0 + 1e-9) + 1e-14) audit.bessel_ok = false;
    }
    for (std::size_t i = 1; i + 1 < r.size(); ++i) {
        const double t = r[i].t;
        if (t < 2.0 * N) continue;
        double prod = 1.0;
        bool floored = r[i - 1].Y_X <= floor || r[i + 1].Y_X <= floor;
        for (int j = 0; j <= N; ++j) {
            const double y = Y_at(t - 2.0 * j);
            if (y <= floor) floored = true;
            prod *= std::pow(std::max(y, 0.0), audit.table.halves[j].value());
        }
        if (floored || !(prod > 0.0)) {
            ++audit.below_floor;
            continue;
        }
        DifferenceInequalityRow row;
        row.t = t;
        row.lhs = (r[i + 1].Y_X - r[i - 1].Y_X) / (r[i + 1].t - r[i - 1].t);
        row.rhs1 = -2.0 * r[i].lambda_X * r[i].Y_X - 2.0 * r[i].lambda_X * r[i].F_pi;
        row.product = prod;
        row.c_min = std::max(0.0, (row.lhs - row.rhs1) / prod);
        audit.c_min = std::max(audit.c_min, row.c_min);
        audit.rows.push_back(row);
    }
    return audit;
}

}  // namespace mkrf
