#include "mkrf/metric.hpp"

#include <cmath>
#include <sstream>

namespace mkrf {

Field reduced_curvature(const MomentumGrid& grid, int n, const Field& profile, const Field& profile_slope,
                        const Field& sigma, const Field& sigma_t, Field* flux_out) {
    const double nd = static_cast<double>(n);
    Field flux = profile_slope +
                 profile.cwiseProduct(grid.derivative(sigma_t.array().log().matrix()));
    if (n > 1) flux.array() += (nd - 1.0) * profile.array() * sigma_t.array() / sigma.array();
    Field R = -(grid.derivative(flux).array() / sigma_t.array()).matrix();
    if (n > 1) R.array() -= (nd - 1.0) * (flux.array() - nd) / sigma.array();
    if (flux_out) *flux_out = std::move(flux);
    return R;
}

MetricState::MetricState(BackgroundPtr background, Field psi, double t)
    : bg_(std::move(background)), psi_(std::move(psi)), t_(t) {
    const auto& bg = *bg_;
    if (psi_.size() != static_cast<Eigen::Index>(bg.size()))
        throw std::invalid_argument("psi does not match the background grid");
    if (!psi_.allFinite()) throw DegenerateMetric("psi has non-finite entries");
    const auto& D = bg.grid->diff();
    psi_t_ = D * psi_;
    sigma_ = bg.tau + bg.profile.cwiseProduct(psi_t_);
    sigma_t_ = D * sigma_;
    Eigen::Index where = 0;
    const double smin = sigma_t_.minCoeff(&where);
    if (!(smin > 0.0)) {
        std::ostringstream msg;
        msg << "volume ratio non-positive at tau=" << bg.tau(where) << " (sigma_tau=" << smin << ")";
        throw DegenerateMetric(msg.str());
    }
    h_ = sigma_t_;
    if (bg.n > 1) h_.array() *= (sigma_.array() / bg.tau.array()).pow(bg.n - 1);
    R_ = reduced_curvature(*bg.grid, bg.n, bg.profile, bg.profile_slope, sigma_, sigma_t_, &flux_);
    w2_ = bg.profile.cwiseProduct(sigma_t_);
    dens_ = bg.measure.cwiseProduct(h_);
}

const Field& volume_ratio(const MetricState& s) { return s.volume_ratio(); }
const Field& scalar_curvature(const MetricState& s) { return s.scalar_curvature(); }

Field laplacian(const MetricState& s, const Field& eta) {
    const auto& bg = s.background();
    const Field flux = bg.profile.cwiseProduct(s.grid().derivative(eta));
    Field out = (s.grid().derivative(flux).array() / s.moment_slope().array()).matrix();
    if (bg.n > 1) out.array() += (bg.n - 1.0) * flux.array() / s.moment().array();
    return out;
}

Field grad_pairing(const MetricState& s, const Field& eta, const Field& xi) {
    const auto& D = s.grid().diff();
    return (s.background().profile.array() * (D * eta).array() * (D * xi).array() / s.moment_slope().array())
        .matrix();
}

Field grad_norm_sq(const MetricState& s, const Field& eta) { return grad_pairing(s, eta, eta); }

Field apply_X(const MetricState& s, const Field& eta, const VectorFieldSpec& X) {
    return x_coefficient(s, X) * s.background().profile.cwiseProduct(s.grid().derivative(eta));
}

Field divergence_X(const MetricState& s, const VectorFieldSpec& X) {
    return laplacian(s, x_coefficient(s, X) * s.moment());
}

Field divergence_X_christoffel(const MetricState& s, const VectorFieldSpec& X) {
    return x_coefficient(s, X) * s.curvature_flux();
}

double integrate(const MetricState& s, const Field& eta) { return s.density().dot(eta); }

double integrate(const MetricState& s, const Field& eta, const Field& weight) {
    return s.density().dot(eta.cwiseProduct(weight));
}

Field hessian_radial(const MetricState& s, const Field& eta) {
    const Field flux = s.background().profile.cwiseProduct(s.grid().derivative(eta));
    return (s.grid().derivative(flux).array() / s.moment_slope().array()).matrix();
}

Field hessian_tangential(const MetricState& s, const Field& eta) {
    const Field flux = s.background().profile.cwiseProduct(s.grid().derivative(eta));
    return (flux.array() / s.moment().array()).matrix();
}

Field complex_hessian_sq(const MetricState& s, const Field& eta) {
    Field out = hessian_radial(s, eta).array().square().matrix();
    if (s.dim() > 1) out.array() += (s.dim() - 1.0) * hessian_tangential(s, eta).array().square();
    return out;
}

Field antiholomorphic_hessian_sq(const MetricState& s, const Field& eta) {
    const auto& D = s.grid().diff();
    const Field v = ((D * eta).array() / s.moment_slope().array()).matrix();
    return (s.background().profile.array() * (D * v).array()).square().matrix();
}

Field ricci_radial(const MetricState& s) {
    return -(s.grid().derivative(s.curvature_flux()).array() / s.moment_slope().array()).matrix();
}

}  // namespace mkrf
