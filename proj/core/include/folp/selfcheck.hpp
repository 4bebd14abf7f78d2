#pragma once

// Property and oracle battery behind the CLI `verify` subcommand. Every
// check is deterministic (fixed seeds), self-contained, and reports a
// measured detail string. Reference computations here are written
// independently of the library paths they validate.

#include <string>
#include <vector>

namespace folp::selfcheck {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

CheckResult check_grid_quadrature();
CheckResult check_fourier_orthonormality();
CheckResult check_eigendecomposition_reconstruction();
CheckResult check_psd_root_pseudoinverse();
CheckResult check_schatten_ordering();
CheckResult check_trace_norm_bounds();

/// Elbow rule vs an exhaustive-scan reference on 10,000 random spectra
/// (exact agreement), plus the inverse-norm bound lambda_k >= tau
/// whenever a gap genuinely qualified and lambda_{k+1} > 0.
CheckResult check_elbow_rule();

/// 1,000 random joint systems of dimension 2..30: the MSPE split
/// reproduces the direct MSPE to 1e-8 relative, the correlation factor
/// has operator norm <= 1 + 1e-8, and no operator beats the minimal MSPE
/// by more than 1e-9.
CheckResult check_factorization_identities();

/// Operators satisfying the normal equations reach the minimal MSPE
/// within 1e-8; on rank-deficient triples, two operators differing only
/// on the null space of C_XX attain equal MSPE within 1e-10.
CheckResult check_normal_equations_optimality();

/// Discretized Brownian-bridge covariance: leading five eigenvalues match
/// pi^{-2} j^{-2} within 1e-4 on a 200-point grid; empirical noise traces
/// for all three cases match 1/6 within 0.003 at 1e5 draws.
CheckResult check_noise_spectra();

/// No perturbation of the fitted operator within the rank-constrained
/// class lowers the in-sample MSPE by more than 1e-10.
CheckResult check_least_squares_optimality();

/// Identical (cell, replication, seed) reproduce identical records;
/// different replications differ.
CheckResult check_replication_determinism();

std::vector<CheckResult> run_all();

} // namespace folp::selfcheck
