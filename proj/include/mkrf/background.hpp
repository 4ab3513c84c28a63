#pragma once

#include <memory>
#include <string>

#include "mkrf/grid.hpp"

namespace mkrf {

enum class BackgroundId { CP1, F1 };

std::string to_string(BackgroundId id);
BackgroundId parse_background(const std::string& name);

// Symmetry-reduced Fano background in the momentum coordinate tau.
// Conventions: omega = (i/2) g dz^j ^ dzbar^k, V = int omega^n, and the
// pushforward of omega^n to the momentum interval is m(tau) dtau.
struct BackgroundGeometry {
    BackgroundId id = BackgroundId::CP1;
    std::string name;
    int n = 1;
    double volume = 0.0;
    double tau_a = 0.0;
    double tau_b = 0.0;
    double slope_a = 0.0;  // phi0'(tau_a)
    double slope_b = 0.0;  // phi0'(tau_b)
    // W acts on invariant functions as generator_sign * phi0 * d/dtau.
    double generator_sign = 1.0;
    GridPtr grid;
    Field tau;
    Field profile;        // phi0
    Field profile_slope;  // phi0'
    Field weight;         // m
    Field ricci_potential;  // f0
    Field curvature;        // R0
    Field measure;          // quadrature weights times m

    std::size_t size() const { return grid->size(); }
    double integrate(const Field& f) const { return measure.dot(f); }
    // m-weighted mean, the normalization used to re-center potentials
    double mean(const Field& f) const { return integrate(f) / volume; }
};

using BackgroundPtr = std::shared_ptr<const BackgroundGeometry>;

// Fubini-Study CP^1: tau in [0,2], phi0 = tau(2-tau)/2, m = pi, V = 2 pi.
BackgroundPtr background_cp1(std::size_t nodes = 129, GridMap map = {});
// CP^2 blown up at a point, U(2)-invariant, class pi c1: tau in [1,3],
// phi0 = (tau-1)(3-tau)/2, m = 2 pi^2 tau, V = 8 pi^2.
BackgroundPtr background_f1(std::size_t nodes = 129, GridMap map = {});
BackgroundPtr make_background(BackgroundId id, std::size_t nodes, GridMap map = {});

}  // namespace mkrf
