#include "mkrf/background.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

#include "mkrf/errors.hpp"
#include "mkrf/metric.hpp"

namespace mkrf {

std::string to_string(BackgroundId id) { return id == BackgroundId::CP1 ? "cp1" : "f1"; }

BackgroundId parse_background(const std::string& name) {
    if (name == "cp1" || name == "CP1") return BackgroundId::CP1;
    if (name == "f1" || name == "F1") return BackgroundId::F1;
    throw std::invalid_argument("unknown background '" + name + "' (expected cp1 or f1)");
}

namespace {

struct Profile {
    std::function<double(double)> phi;
    std::function<double(double)> dphi;
};

BackgroundPtr assemble(BackgroundId id, int n, double a, double b, double sign, const Profile& p,
                       std::size_t nodes, GridMap map) {
    auto bg = std::make_shared<BackgroundGeometry>();
    bg->id = id;
    bg->name = to_string(id);
    bg->n = n;
    bg->tau_a = a;
    bg->tau_b = b;
    bg->generator_sign = sign;
    bg->grid = build_grid(a, b, nodes, map);
    const auto& grid = *bg->grid;
    const Eigen::Index N = static_cast<Eigen::Index>(grid.size());
    bg->tau = grid.nodes();
    bg->profile.resize(N);
    bg->profile_slope.resize(N);
    bg->weight.resize(N);
    const double pin = static_cast<double>(n) * std::pow(std::numbers::pi, n);
    for (Eigen::Index j = 0; j < N; ++j) {
        const double t = bg->tau(j);
        bg->profile(j) = p.phi(t);
        bg->profile_slope(j) = p.dphi(t);
        bg->weight(j) = pin * std::pow(t, n - 1);
    }
    bg->slope_a = p.dphi(a);
    bg->slope_b = p.dphi(b);
    bg->measure = grid.weights().cwiseProduct(bg->weight);
    bg->volume = bg->measure.sum();

    const Field ones = Field::Ones(N);
    bg->curvature = reduced_curvature(grid, n, bg->profile, bg->profile_slope, bg->tau, ones);

    // Delta_0 f0 = n - R0, i.e. (tau^{n-1} phi0 f0')' = tau^{n-1} (n - R0).
    const Field tn1 = bg->tau.array().pow(n - 1).matrix();
    const Field source = tn1.cwiseProduct((static_cast<double>(n) - bg->curvature.array()).matrix());
    const Field G = grid.antiderivative(source);
    Field df(N);
    for (Eigen::Index j = 0; j < N; ++j) {
        if (j == 0 || j == N - 1)
            df(j) = (static_cast<double>(n) - bg->curvature(j)) / bg->profile_slope(j);
        else
            df(j) = G(j) / (tn1(j) * bg->profile(j));
    }
    Field f0 = grid.antiderivative(df);
    const double z = bg->measure.dot((-f0).array().exp().matrix());
    if (!(z > 0.0) || !std::isfinite(z))
        throw NumericalFailure("background Ricci potential normalization failed");
    f0.array() += std::log(z / bg->volume);
    bg->ricci_potential = f0;
    return bg;
}

}  // namespace

BackgroundPtr background_cp1(std::size_t nodes, GridMap map) {
    Profile p{[](double t) { return 0.5 * t * (2.0 - t); }, [](double t) { return 1.0 - t; }};
    return assemble(BackgroundId::CP1, 1, 0.0, 2.0, 1.0, p, nodes, map);
}

BackgroundPtr background_f1(std::size_t nodes, GridMap map) {
    // W is oriented against the moment coordinate so the soliton coefficient is positive.
    Profile p{[](double t) { return 0.5 * (t - 1.0) * (3.0 - t); }, [](double t) { return 2.0 - t; }};
    return assemble(BackgroundId::F1, 2, 1.0, 3.0, -1.0, p, nodes, map);
}

BackgroundPtr make_background(BackgroundId id, std::size_t nodes, GridMap map) {
    return id == BackgroundId::CP1 ? background_cp1(nodes, map) : background_f1(nodes, map);
}

}  // namespace mkrf
