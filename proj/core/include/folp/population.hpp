#pragma once

// Population-level prediction error for a covariance triple
// (C_YY, C_XX, C_XY): the MSPE of an arbitrary operator, its split into
// the minimal achievable part plus the squared Hilbert-Schmidt distance
// of the operator from the optimal class, and the normal-equations
// characterization of optimality.

#include "folp/covariance.hpp"

namespace folp {

/// E||Y - BX||^2 = trace(C_YY - C_XY B* - B C_XY* + B C_XX B*).
/// Throws inconsistent_error when the composed operator has an eigenvalue
/// below -1e-8 * scale (the triple and B cannot coexist).
double population_mspe(const OperatorMatrix& b,
                       const OperatorMatrix& c_yy,
                       const OperatorMatrix& c_xx,
                       const OperatorMatrix& c_xy);

struct MspePartition {
    double total = 0.0;   // population_mspe(B)
    double minimal = 0.0; // trace(C_YY - C_YY^{1/2} R R* C_YY^{1/2})
    double excess = 0.0;  // || B C_XX^{1/2} - C_YY^{1/2} R ||_{S_2}^2
};

/// Splits the MSPE of B as total = minimal + excess, with R the
/// correlation factor of the triple. For consistent triples the split
/// reproduces population_mspe exactly (to rounding) for every B.
MspePartition decompose_mspe(const OperatorMatrix& b,
                             const OperatorMatrix& c_yy,
                             const OperatorMatrix& c_xx,
                             const OperatorMatrix& c_xy,
                             double rel_tol = 1e-8);

/// The minimal MSPE achievable by any continuous linear predictor.
double minimal_mspe(const OperatorMatrix& c_yy,
                    const OperatorMatrix& c_xx,
                    const OperatorMatrix& c_xy,
                    double rel_tol = 1e-8);

struct NormalEquationsCheck {
    bool satisfied = false;
    double residual = 0.0; // || A C_XX - C_XY ||_{S_2}
};

/// A attains the minimal MSPE iff A C_XX = C_XY; passes when the residual
/// is at most tol * ||C_XY||_{S_2}.
NormalEquationsCheck check_normal_equations(const OperatorMatrix& a,
                                            const OperatorMatrix& c_xx,
                                            const OperatorMatrix& c_xy,
                                            double tol);

} // namespace folp
