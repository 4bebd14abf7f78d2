#pragma once

// Sample covariance estimation, spectral truncation, regularized
// inversion, projections, and the whitened cross-covariance factorization
// C_XY = C_YY^{1/2} R C_XX^{1/2}.

#include <vector>

#include "folp/hilbert.hpp"

namespace folp {

/// T functional observations sharing one grid, stored column-wise in
/// orthonormalized coordinates (column t = sample t).
struct Dataset {
    GridPtr grid;
    Eigen::MatrixXd coords;

    Index size() const { return coords.cols(); }
    Index dim() const { return coords.rows(); }

    FunctionSample sample(Index t) const;

    static Dataset from_samples(const std::vector<FunctionSample>& samples);
};

/// (1/T) Sum_t X_t (x) X_t. Symmetric PSD; trace equals the mean squared
/// norm of the samples. Throws std::invalid_argument on an empty dataset.
OperatorMatrix sample_cov(const Dataset& x);

/// (1/T) Sum_t X_t (x) Y_t, the map z -> (1/T) Sum <X_t, z> Y_t; its
/// matrix is (1/T) Sum y_t x_t^T. Throws shape_error on length or grid
/// mismatch.
OperatorMatrix sample_cross_cov(const Dataset& x, const Dataset& y);

/// Subtract the sample mean from every observation. Opt-in: nothing in
/// this library demeans automatically.
Dataset demean(const Dataset& x);

/// Sum_{j<=k} max(lambda_j, 0) v_j (x) v_j: the rank-<=k PSD truncation.
OperatorMatrix truncate_spectral(const SpectralDecomposition& decomp, Index k);

/// Rank-k inverse of a covariance through its spectrum, together with the
/// orthogonal projection onto the retained eigenspace.
struct TruncatedInverse {
    Index k = 0;
    OperatorMatrix inverse;    // Sum_{j<=k} lambda_j^{-1} v_j (x) v_j
    OperatorMatrix projection; // Sum_{j<=k} v_j (x) v_j
    SpectralDecomposition source_decomp;
};

/// Throws rank_error when lambda_k <= 0; the operator norm of the
/// inverse is lambda_k^{-1}.
TruncatedInverse regularized_inverse(const SpectralDecomposition& decomp, Index k);

/// Orthogonal projection onto the span of the top ell eigenvectors:
/// idempotent, symmetric, trace = ell.
OperatorMatrix projection_onto_top_eigs(const SpectralDecomposition& decomp, Index ell);

/// The factor R of C_XY = C_YY^{1/2} R C_XX^{1/2} (a whitened
/// cross-covariance; for triples arising from joint data its operator
/// norm is at most 1).
struct CorrelationFactor {
    OperatorMatrix factor;
    double residual = 0.0; // || C_YY^{1/2} R C_XX^{1/2} - C_XY ||_{S_2}
};

/// Computes R = pinv(C_YY^{1/2}) C_XY pinv(C_XX^{1/2}), the unique
/// solution vanishing on the null spaces of the marginals. Throws
/// inconsistent_error when the factorization residual exceeds
/// rel_tol * ||C_XY||_{S_2}, which signals a triple not generated jointly
/// (or rank loss at the tolerance).
CorrelationFactor correlation_operator(const OperatorMatrix& c_yy,
                                       const OperatorMatrix& c_xx,
                                       const OperatorMatrix& c_xy,
                                       double rel_tol = 1e-8);

} // namespace folp
