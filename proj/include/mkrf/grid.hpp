#pragma once

#include <cstddef>
#include <memory>

#include <Eigen/Dense>

namespace mkrf {

using Field = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Optional endpoint clustering. With delta > 0 the nodes follow
// tau = tau_a + delta (e^{alpha (x + 1)} - 1) for Chebyshev x (side -1), or the
// mirror image at tau_b (side +1); alpha makes the map onto. Functions with a
// log(tau - tau_a + delta) layer become linear in x.
struct GridMap {
    double delta = 0.0;
    int side = -1;
    bool active() const { return delta > 0.0; }
};

// Chebyshev-Gauss-Lobatto grid on [tau_a, tau_b], nodes increasing.
class MomentumGrid {
public:
    static constexpr std::size_t min_nodes = 16;

    MomentumGrid(double tau_a, double tau_b, std::size_t nodes, GridMap map = {});

    double tau_a() const { return tau_a_; }
    double tau_b() const { return tau_b_; }
    double length() const { return tau_b_ - tau_a_; }
    std::size_t size() const { return static_cast<std::size_t>(nodes_.size()); }

    const Field& nodes() const { return nodes_; }
    const Matrix& diff() const { return diff_; }
    const Field& weights() const { return weights_; }
    const GridMap& map() const { return map_; }
    // dtau/dx at the nodes
    const Field& jacobian() const { return jac_; }
    // Cumulative antiderivative from tau_a, exact on the interpolant.
    const Matrix& cumulative() const { return cumulative_; }

    Field derivative(const Field& f) const { return diff_ * f; }
    double integrate(const Field& f) const { return weights_.dot(f); }
    Field antiderivative(const Field& f) const { return cumulative_ * f; }

    // Barycentric interpolation of nodal values to arbitrary points.
    Field interpolate(const Field& values, const Field& points) const;
    Matrix interpolation_matrix(const Field& points) const;

    // Removes the T_{N-1} component. Its derivative vanishes at every interior
    // node, so operators of the form D(phi0 D) cannot see it.
    Field strip_highest_mode(const Field& f) const;

    // Map between tau and the reference coordinate x in [-1, 1].
    double to_reference(double tau) const;
    double from_reference(double x) const;

private:
    double tau_a_;
    double tau_b_;
    GridMap map_;
    double alpha_ = 0.0;
    Field nodes_;
    Field ref_;
    Field jac_;
    Field bary_;
    Matrix diff_;
    Field weights_;
    Matrix cumulative_;
};

using GridPtr = std::shared_ptr<const MomentumGrid>;

GridPtr build_grid(double tau_a, double tau_b, std::size_t nodes, GridMap map = {});

// Gauss-Legendre rule on [a, b].
struct QuadratureRule {
    Field nodes;
    Field weights;
};
QuadratureRule gauss_legendre(std::size_t points, double a = -1.0, double b = 1.0);

// Legendre polynomials P_0..P_degree in the reference coordinate and their
// tau-derivatives on the grid nodes.
struct LegendreBasis {
    Matrix values;       // nodes x (degree+1)
    Matrix derivatives;  // d/dtau
};
LegendreBasis legendre_basis(const MomentumGrid& grid, std::size_t degree);

}  // namespace mkrf
