#pragma once

// Finite-dimensional model of L^2[0,1]: a quadrature grid turns functions
// into coordinate vectors and integral operators into plain matrices.
//
// Everything is stored in orthonormalized coordinates
//     z_i = sqrt(w_i) * f(x_i),
// so that the L^2 inner product is the Euclidean dot product, adjoints are
// transposes, and symmetric eigenproblems are standard.

#include <memory>

#include <Eigen/Core>

#include "folp/errors.hpp"

namespace folp {

using Eigen::Index;

/// Discretization of [0,1]: strictly increasing abscissae with positive
/// quadrature weights summing to one.
struct GridSpec {
    Eigen::VectorXd points;
    Eigen::VectorXd weights;

    Index size() const { return points.size(); }
};

using GridPtr = std::shared_ptr<const GridSpec>;

/// Uniform grid on [0,1] with trapezoid weights (h/2 at the endpoints,
/// h inside, h = 1/(n_points-1)). Throws std::invalid_argument for
/// n_points < 2.
GridPtr make_grid(Index n_points);

/// True when two grids are usable interchangeably (same object or same
/// abscissae/weights).
bool same_grid(const GridPtr& a, const GridPtr& b);

/// One functional observation, stored as orthonormalized coordinates.
struct FunctionSample {
    GridPtr grid;
    Eigen::VectorXd coords;

    /// Build from raw values f(x_i) on the grid.
    static FunctionSample from_values(GridPtr grid, const Eigen::VectorXd& values);

    /// Raw values f(x_i) recovered from the coordinates.
    Eigen::VectorXd values() const;

    double norm() const { return coords.norm(); }
};

/// L^2 inner product; throws shape_error on grid mismatch.
double inner(const FunctionSample& f, const FunctionSample& g);

/// A linear operator on the discretized space, acting on orthonormalized
/// coordinates: apply(M, f) has coordinates M.entries * f.coords.
///
/// Tensor convention: x (x) y maps z to <x,z> y, so its matrix is
/// y * x^T. A cross-covariance E[X (x) Y] therefore stores E[y x^T] and
/// maps X-space into Y-space.
struct OperatorMatrix {
    GridPtr grid;
    Eigen::MatrixXd entries;

    static OperatorMatrix zero(GridPtr grid);
    static OperatorMatrix identity(GridPtr grid);

    /// Ingest an integral-kernel matrix K_ij = k(x_i, x_j): the operator
    /// (Tf)(s) = \int k(s,t) f(t) dt becomes diag(sqrt w) K diag(sqrt w).
    static OperatorMatrix from_kernel(GridPtr grid, const Eigen::MatrixXd& kernel);

    /// x (x) y in the convention above.
    static OperatorMatrix outer(const FunctionSample& x, const FunctionSample& y);

    Index dim() const { return entries.rows(); }

    FunctionSample apply(const FunctionSample& f) const;
};

/// Eigensystem of a symmetric operator, eigenvalues sorted descending,
/// eigenvectors orthonormal columns.
struct SpectralDecomposition {
    GridPtr grid;
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;

    Index dim() const { return eigenvalues.size(); }

    /// Number of eigenvalues below -rel_tol * |lambda_max| (diagnostic for
    /// inputs expected to be PSD).
    Index negative_count(double rel_tol = 0.0) const;

    /// Sum_j lambda_j v_j (x) v_j.
    OperatorMatrix reconstruct() const;
};

/// Full symmetric eigendecomposition. The input is symmetrized by
/// averaging with its transpose first; callers are expected to pass
/// matrices symmetric to ~1e-10. Throws shape_error for non-square input
/// and numeric_error when the solver fails.
SpectralDecomposition sym_eig(const OperatorMatrix& op);

/// Symmetric PSD square root through the spectrum. Eigenvalues in
/// [-rel_floor * lambda_max, 0) are clamped to zero; anything lower
/// throws not_psd_error.
OperatorMatrix sqrt_psd(const OperatorMatrix& op, double rel_floor = 1e-10);

/// Moore-Penrose inverse of a symmetric PSD operator: eigenvalues above
/// rel_tol * lambda_max are inverted, the rest zeroed. Throws rank_error
/// when no eigenvalue clears the threshold.
OperatorMatrix pinv_psd(const OperatorMatrix& op, double rel_tol = 1e-12);

enum class SchattenP { One, Two, Inf };

/// Schatten norm via singular values: S_1 sums them, S_2 is the Frobenius
/// norm, Inf is the largest. Valid for any square matrix.
double schatten_norm(const OperatorMatrix& op, SchattenP p);

/// Sum of diagonal entries (= S_1 norm for PSD operators).
double trace(const OperatorMatrix& op);

} // namespace folp
