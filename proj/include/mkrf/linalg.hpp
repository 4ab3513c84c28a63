#pragma once

#include <functional>

#include "mkrf/grid.hpp"

namespace mkrf {

struct EigenPair {
    double eigenvalue = 0.0;
    Field eigenvector;  // B-normalized
};

// Smallest generalized eigenpair of A v = lambda B v on the B-orthogonal
// complement of span(constraint columns). A symmetric, B symmetric positive
// definite there. Throws NumericalFailure otherwise.
EigenPair solve_sturm_liouville(const Matrix& A, const Matrix& B, const Matrix& constraint);

// Brent's method on a sign-changing bracket.
double find_root(const std::function<double(double)>& f, double a, double b, double tol = 1e-12,
                 int max_iterations = 200);

}  // namespace mkrf
