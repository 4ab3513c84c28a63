#pragma once

#include "mkrf/background.hpp"
#include "mkrf/errors.hpp"

namespace mkrf {

// X = c W for the canonical invariant generator W of the background.
struct VectorFieldSpec {
    double c = 0.0;
};

// Current metric omega_0 + (i/2) ddbar psi, stored through psi on the
// background grid. Construction validates the Kaehler condition.
class MetricState {
public:
    MetricState(BackgroundPtr background, Field psi, double t = 0.0);

    const BackgroundGeometry& background() const { return *bg_; }
    const BackgroundPtr& background_ptr() const { return bg_; }
    const MomentumGrid& grid() const { return *bg_->grid; }
    std::size_t size() const { return bg_->size(); }
    double time() const { return t_; }
    int dim() const { return bg_->n; }

    const Field& psi() const { return psi_; }
    const Field& psi_slope() const { return psi_t_; }
    // current moment sigma = tau + phi0 psi_tau and its tau-derivative
    const Field& moment() const { return sigma_; }
    const Field& moment_slope() const { return sigma_t_; }
    const Field& volume_ratio() const { return h_; }
    const Field& scalar_curvature() const { return R_; }
    // phi0 d/dtau log det of the potential Hessian; generates R and div X
    const Field& curvature_flux() const { return flux_; }
    // |W|^2_g = phi0 sigma_tau
    const Field& generator_norm_sq() const { return w2_; }
    // quadrature weights for int (.) omega^n
    const Field& density() const { return dens_; }

    MetricState with_psi(Field psi, double t) const { return MetricState(bg_, std::move(psi), t); }

private:
    BackgroundPtr bg_;
    Field psi_;
    double t_;
    Field psi_t_, sigma_, sigma_t_, h_, R_, flux_, w2_, dens_;
};

// Effective coefficient of X on the moment coordinate.
inline double x_coefficient(const MetricState& s, const VectorFieldSpec& X) {
    return X.c * s.background().generator_sign;
}

const Field& volume_ratio(const MetricState& s);
const Field& scalar_curvature(const MetricState& s);
Field laplacian(const MetricState& s, const Field& eta);
Field grad_norm_sq(const MetricState& s, const Field& eta);
// g(grad eta, grad xi)
Field grad_pairing(const MetricState& s, const Field& eta, const Field& xi);
Field apply_X(const MetricState& s, const Field& eta, const VectorFieldSpec& X);
// div X as the Laplacian of the Hamiltonian
Field divergence_X(const MetricState& s, const VectorFieldSpec& X);
// div X from the Christoffel symbols: c times the curvature flux
Field divergence_X_christoffel(const MetricState& s, const VectorFieldSpec& X);

double integrate(const MetricState& s, const Field& eta);
double integrate(const MetricState& s, const Field& eta, const Field& weight);

// Invariant-sector Hessian pieces. Radial and tangential eigenvalues of
// ddbar eta relative to g, and |dbar dbar eta|^2 = |W|^2 |grad(eta_tau/sigma_tau)|^2.
Field hessian_radial(const MetricState& s, const Field& eta);
Field hessian_tangential(const MetricState& s, const Field& eta);
Field complex_hessian_sq(const MetricState& s, const Field& eta);
Field antiholomorphic_hessian_sq(const MetricState& s, const Field& eta);
// Ricci eigenvalue along the radial (grad of invariant function) direction.
Field ricci_radial(const MetricState& s);

// Shared curvature formula, also used to build the backgrounds.
Field reduced_curvature(const MomentumGrid& grid, int n, const Field& profile, const Field& profile_slope,
                        const Field& sigma, const Field& sigma_t, Field* flux = nullptr);

}  // namespace mkrf
