#pragma once

// Rank selection by the elbow-like rule, the post-dimension-reduction
// least-squares predictor, its doubly-reduced variant, a ridge baseline,
// prediction, and empirical MSPE.

#include <optional>

#include "folp/covariance.hpp"

namespace folp {

/// Scale constants and rate exponent for the elbow rule:
///   tau = c_tau * ||Chat_XX||_{S_1} * T^{-gamma},
///   cap = max(1, floor(c_cap * T^{gamma})).
struct ElbowParams {
    double c_tau = 0.01;
    double c_cap = 0.5;
    double gamma = 0.475; // must lie strictly in (0, 1/2)
};

struct ElbowThreshold {
    double tau = 0.0;
    Index cap = 1;
};

ElbowThreshold elbow_threshold(const OperatorMatrix& c_xx_hat, Index t_samples,
                               const ElbowParams& params);

/// Same thresholds from a precomputed S_1 norm of Chat_XX.
ElbowThreshold elbow_threshold_from_s1(double s1_norm, Index t_samples,
                                       const ElbowParams& params);

/// Returns min(J, cap) where J is the largest j with
/// lambda_j >= lambda_{j+1} + tau; eigenvalues beyond the stored spectrum
/// count as 0, and J = 1 when no j qualifies. Input must be sorted
/// descending; throws std::invalid_argument when empty.
Index select_k_elbow(const Eigen::VectorXd& eigenvalues, double tau, Index cap);

enum class FitMethod { FpcaLs, FpcaLsReduced, Ridge };

/// Which sample covariance supplies the eigenvectors for the output-side
/// projection of the doubly-reduced fit.
enum class ReductionBasis { YEigs, XEigs };

struct FitDiagnostics {
    Eigen::VectorXd eigenvalues; // spectrum of Chat_XX, descending
    Eigen::VectorXd gaps;        // lambda_j - lambda_{j+1}, trailing value vs 0
};

struct FittedPredictor {
    OperatorMatrix op; // estimated map from X-space to Y-space
    Index k = 0;       // selected X-side rank
    double tau = 0.0;
    Index cap = 0;
    FitMethod method = FitMethod::FpcaLs;
    std::optional<Index> ell; // Y-side rank, when reduced
    FitDiagnostics diagnostics;
};

/// Least squares on the top-k principal directions of Chat_XX:
/// op = Chat_XY * Chat_XX_k^{-1}, with k chosen by the elbow rule.
/// Throws rank_error when the selected eigenvalue is not positive
/// (degenerate sample).
FittedPredictor fit_fpca_ls(const Dataset& x, const Dataset& y,
                            const ElbowParams& params);

/// As fit_fpca_ls, then projected onto the top-ell eigenvectors of
/// Chat_YY (YEigs) or Chat_XX (XEigs).
FittedPredictor fit_fpca_ls_reduced(const Dataset& x, const Dataset& y,
                                    const ElbowParams& params, Index ell,
                                    ReductionBasis basis);

/// Ridge baseline over the full spectrum:
/// op = Chat_XY * Sum_j (lambda_j + ridge_tau)^{-1} v_j (x) v_j.
FittedPredictor fit_ridge(const Dataset& x, const Dataset& y, double ridge_tau);

FunctionSample predict(const FittedPredictor& p, const FunctionSample& x);

/// (1/T) Sum_t || Y_t - B X_t ||^2.
double empirical_mspe(const OperatorMatrix& b, const Dataset& x, const Dataset& y);
double empirical_mspe(const FittedPredictor& p, const Dataset& x, const Dataset& y);

/// (1/T) Sum_t (Y_t - B X_t) (x) (Y_t - B X_t); its trace equals the
/// empirical MSPE.
OperatorMatrix residual_cov(const OperatorMatrix& b, const Dataset& x,
                            const Dataset& y);

} // namespace folp
