#include "mkrf/grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mkrf {

namespace {

constexpr double pi = std::numbers::pi;

// Clenshaw-Curtis weights on [-1, 1] for M+1 Chebyshev points.
Field clenshaw_curtis(std::size_t M) {
    Field w = Field::Zero(static_cast<Eigen::Index>(M + 1));
    const double Md = static_cast<double>(M);
    Field v = Field::Ones(static_cast<Eigen::Index>(M > 1 ? M - 1 : 0));
    if (M % 2 == 0) {
        w(0) = w(static_cast<Eigen::Index>(M)) = 1.0 / (Md * Md - 1.0);
        for (std::size_t k = 1; k < M / 2; ++k)
            for (std::size_t i = 1; i < M; ++i)
                v(static_cast<Eigen::Index>(i - 1)) -=
                    2.0 * std::cos(2.0 * k * pi * i / Md) / (4.0 * k * k - 1.0);
        for (std::size_t i = 1; i < M; ++i)
            v(static_cast<Eigen::Index>(i - 1)) -= std::cos(pi * i) / (Md * Md - 1.0);
    } else {
        w(0) = w(static_cast<Eigen::Index>(M)) = 1.0 / (Md * Md);
        for (std::size_t k = 1; k <= (M - 1) / 2; ++k)
            for (std::size_t i = 1; i < M; ++i)
                v(static_cast<Eigen::Index>(i - 1)) -=
                    2.0 * std::cos(2.0 * k * pi * i / Md) / (4.0 * k * k - 1.0);
    }
    for (std::size_t i = 1; i < M; ++i)
        w(static_cast<Eigen::Index>(i)) = 2.0 * v(static_cast<Eigen::Index>(i - 1)) / Md;
    return w;
}

}  // namespace

MomentumGrid::MomentumGrid(double tau_a, double tau_b, std::size_t nodes, GridMap map)
    : tau_a_(tau_a), tau_b_(tau_b), map_(map) {
    if (!(tau_a < tau_b) || !std::isfinite(tau_a) || !std::isfinite(tau_b))
        throw std::invalid_argument("grid interval must satisfy tau_a < tau_b");
    if (nodes < min_nodes)
        throw std::invalid_argument("grid needs at least " + std::to_string(min_nodes) +
                                    " nodes, got " + std::to_string(nodes));
    if (map_.active()) {
        if (!std::isfinite(map_.delta) || (map_.side != -1 && map_.side != 1))
            throw std::invalid_argument("grid map needs a finite delta and side -1 or +1");
        alpha_ = 0.5 * std::log1p((tau_b - tau_a) / map_.delta);
    }
    const auto N = static_cast<Eigen::Index>(nodes);
    const std::size_t M = nodes - 1;
    const double half = 0.5 * (tau_b - tau_a);

    // theta_j = pi (M - j) / M gives x_j = cos(theta_j) increasing.
    Field theta(N), x(N);
    nodes_.resize(N);
    for (Eigen::Index j = 0; j < N; ++j) {
        theta(j) = pi * static_cast<double>(M - static_cast<std::size_t>(j)) / static_cast<double>(M);
        // sin form keeps the nodes exactly symmetric
        x(j) = -std::sin(pi * (static_cast<double>(M) - 2.0 * static_cast<double>(j)) /
                         (2.0 * static_cast<double>(M)));
    }
    ref_ = x;
    jac_.resize(N);
    for (Eigen::Index j = 0; j < N; ++j) {
        nodes_(j) = from_reference(x(j));
        if (!map_.active())
            jac_(j) = half;
        else if (map_.side < 0)
            jac_(j) = alpha_ * (nodes_(j) - tau_a + map_.delta);
        else
            jac_(j) = alpha_ * (tau_b - nodes_(j) + map_.delta);
    }
    nodes_(0) = tau_a;
    nodes_(N - 1) = tau_b;

    bary_.resize(N);
    for (Eigen::Index j = 0; j < N; ++j) {
        bary_(j) = (j % 2 == 0) ? 1.0 : -1.0;
        if (j == 0 || j == N - 1) bary_(j) *= 0.5;
    }

    diff_ = Matrix::Zero(N, N);
    for (Eigen::Index i = 0; i < N; ++i) {
        double row = 0.0;
        for (Eigen::Index j = 0; j < N; ++j) {
            if (i == j) continue;
            diff_(i, j) = (bary_(j) / bary_(i)) / (x(i) - x(j));
            row += diff_(i, j);
        }
        diff_(i, i) = -row;
    }
    diff_ = jac_.cwiseInverse().asDiagonal() * diff_;

    weights_ = clenshaw_curtis(M).cwiseProduct(jac_);

    // Chebyshev coefficients a = C f, integrate term by term, evaluate back.
    Matrix C(N, N);
    for (Eigen::Index k = 0; k < N; ++k)
        for (Eigen::Index j = 0; j < N; ++j) {
            double c = std::cos(static_cast<double>(k) * theta(j)) * 2.0 / static_cast<double>(M);
            if (j == 0 || j == N - 1) c *= 0.5;
            if (k == 0 || k == N - 1) c *= 0.5;
            C(k, j) = c;
        }
    // antiderivative coefficients in T_0..T_N, with value zero at x=-1
    Matrix A = Matrix::Zero(N + 1, N);
    for (Eigen::Index k = 0; k < N; ++k) {
        const double kd = static_cast<double>(k);
        if (k == 0) {
            A(1, 0) += 1.0;
            A(0, 0) += 1.0;
        } else if (k == 1) {
            A(2, 1) += 0.25;
            A(0, 1) -= 0.25;
        } else {
            A(k + 1, k) += 1.0 / (2.0 * (kd + 1.0));
            A(k - 1, k) -= 1.0 / (2.0 * (kd - 1.0));
            const double sgn = (k % 2 == 0) ? -1.0 : 1.0;  // (-1)^(k+1)
            A(0, k) -= sgn / (2.0 * (kd + 1.0)) - sgn / (2.0 * (kd - 1.0));
        }
    }
    Matrix T(N, N + 1);
    for (Eigen::Index j = 0; j < N; ++j)
        for (Eigen::Index k = 0; k <= N; ++k) T(j, k) = std::cos(static_cast<double>(k) * theta(j));
    cumulative_ = (T * A * C) * jac_.asDiagonal();
    cumulative_.row(0).setZero();
}

Matrix MomentumGrid::interpolation_matrix(const Field& points) const {
    const Eigen::Index N = nodes_.size();
    Matrix P = Matrix::Zero(points.size(), N);
    for (Eigen::Index p = 0; p < points.size(); ++p) {
        const double t = points(p);
        Eigen::Index exact = -1;
        for (Eigen::Index j = 0; j < N; ++j)
            if (std::abs(t - nodes_(j)) < 1e-15 * (1.0 + std::abs(t))) exact = j;
        if (exact >= 0) {
            P(p, exact) = 1.0;
            continue;
        }
        const double xr = to_reference(t);
        double denom = 0.0;
        for (Eigen::Index j = 0; j < N; ++j) {
            const double q = bary_(j) / (xr - ref_(j));
            P(p, j) = q;
            denom += q;
        }
        P.row(p) /= denom;
    }
    return P;
}

Field MomentumGrid::interpolate(const Field& values, const Field& points) const {
    return interpolation_matrix(points) * values;
}

Field MomentumGrid::strip_highest_mode(const Field& f) const {
    const Eigen::Index N = f.size();
    const Eigen::Index M = N - 1;
    Field alt(N);
    for (Eigen::Index j = 0; j < N; ++j) alt(j) = ((M - j) % 2 == 0) ? 1.0 : -1.0;
    double a = alt.dot(f) - 0.5 * (alt(0) * f(0) + alt(M) * f(M));
    a /= static_cast<double>(M);
    return f - a * alt;
}

double MomentumGrid::to_reference(double tau) const {
    if (!map_.active()) return (2.0 * tau - tau_a_ - tau_b_) / length();
    if (map_.side < 0) return std::log1p((tau - tau_a_) / map_.delta) / alpha_ - 1.0;
    return 1.0 - std::log1p((tau_b_ - tau) / map_.delta) / alpha_;
}

double MomentumGrid::from_reference(double x) const {
    if (!map_.active()) return tau_a_ + 0.5 * length() * (x + 1.0);
    if (map_.side < 0) return tau_a_ + map_.delta * std::expm1(alpha_ * (x + 1.0));
    return tau_b_ - map_.delta * std::expm1(alpha_ * (1.0 - x));
}

GridPtr build_grid(double tau_a, double tau_b, std::size_t nodes, GridMap map) {
    return std::make_shared<const MomentumGrid>(tau_a, tau_b, nodes, map);
}

QuadratureRule gauss_legendre(std::size_t points, double a, double b) {
    if (points == 0) throw std::invalid_argument("gauss_legendre needs at least one point");
    QuadratureRule rule{Field(static_cast<Eigen::Index>(points)), Field(static_cast<Eigen::Index>(points))};
    const double n = static_cast<double>(points);
    for (std::size_t i = 0; i < points; ++i) {
        double x = std::cos(pi * (static_cast<double>(i) + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= points; ++k) {
                const double kd = static_cast<double>(k);
                const double p2 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const auto idx = static_cast<Eigen::Index>(points - 1 - i);
        rule.nodes(idx) = 0.5 * (a + b) + 0.5 * (b - a) * x;
        rule.weights(idx) = (b - a) / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

LegendreBasis legendre_basis(const MomentumGrid& grid, std::size_t degree) {
    const Eigen::Index N = static_cast<Eigen::Index>(grid.size());
    const Eigen::Index K = static_cast<Eigen::Index>(degree) + 1;
    LegendreBasis basis{Matrix(N, K), Matrix(N, K)};
    for (Eigen::Index j = 0; j < N; ++j) {
        const double s = grid.to_reference(grid.nodes()(j));
        basis.values(j, 0) = 1.0;
        basis.derivatives(j, 0) = 0.0;
        if (K > 1) {
            basis.values(j, 1) = s;
            basis.derivatives(j, 1) = 1.0;
        }
        for (Eigen::Index k = 1; k + 1 < K; ++k) {
            const double kd = static_cast<double>(k);
            basis.values(j, k + 1) =
                ((2.0 * kd + 1.0) * s * basis.values(j, k) - kd * basis.values(j, k - 1)) / (kd + 1.0);
            basis.derivatives(j, k + 1) =
                basis.derivatives(j, k - 1) + (2.0 * kd + 1.0) * basis.values(j, k);
        }
    }
    basis.derivatives = grid.jacobian().cwiseInverse().asDiagonal() * basis.derivatives;
    return basis;
}

}  // namespace mkrf
