#include "mkrf/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "mkrf/errors.hpp"

namespace mkrf {

EigenPair solve_sturm_liouville(const Matrix& A, const Matrix& B, const Matrix& constraint) {
    if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows())
        throw std::invalid_argument("solve_sturm_liouville: operator shapes differ");
    const Eigen::Index K = A.rows();
    Matrix Z;
    if (constraint.cols() == 0) {
        Z = Matrix::Identity(K, K);
    } else {
        if (constraint.rows() != K)
            throw std::invalid_argument("solve_sturm_liouville: constraint has wrong row count");
        // complement of B*C in the Euclidean sense is the B-orthogonal complement of C
        const Matrix BC = B * constraint;
        Eigen::HouseholderQR<Matrix> qr(BC);
        const Matrix Q = qr.householderQ() * Matrix::Identity(K, K);
        Z = Q.rightCols(K - constraint.cols());
    }
    Matrix Ar = Z.transpose() * A * Z;
    Matrix Br = Z.transpose() * B * Z;
    Ar = 0.5 * (Ar + Ar.transpose());
    Br = 0.5 * (Br + Br.transpose());

    Eigen::LLT<Matrix> llt(Br);
    if (llt.info() != Eigen::Success)
        throw NumericalFailure("B is not positive definite on the constrained subspace");
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(Ar, Br);
    if (solver.info() != Eigen::Success) throw NumericalFailure("generalized eigensolver did not converge");

    EigenPair out;
    out.eigenvalue = solver.eigenvalues()(0);
    Field v = Z * solver.eigenvectors().col(0);
    const double norm = std::sqrt(v.dot(B * v));
    if (!(norm > 0.0) || !std::isfinite(norm)) throw NumericalFailure("eigenvector has zero B-norm");
    out.eigenvector = v / norm;
    return out;
}

double find_root(const std::function<double(double)>& f, double a, double b, double tol, int max_iterations) {
    double fa = f(a), fb = f(b);
    if (!std::isfinite(fa) || !std::isfinite(fb)) throw NumericalFailure("find_root: non-finite bracket value");
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0)) throw std::domain_error("find_root: no sign change in bracket");

    double c = a, fc = fa, d = b - a, e = d;
    for (int it = 0; it < max_iterations; ++it) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * 1e-16 * std::abs(b) + 0.5 * tol;
        const double m = 0.5 * (c - b);
        if (std::abs(m) <= tol1 || fb == 0.0) return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * m * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = d;
            }
        } else {
            d = m;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol1) ? d : (m > 0.0 ? tol1 : -tol1);
        fb = f(b);
        if (!std::isfinite(fb)) throw NumericalFailure("find_root: non-finite function value");
    }
    throw NumericalFailure("find_root: maximum iterations exceeded");
}

}  // namespace mkrf
