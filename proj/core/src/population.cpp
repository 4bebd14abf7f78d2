#include "folp/population.hpp"

#include <Eigen/Dense>

namespace folp {

namespace {

void require_triple_shapes(const OperatorMatrix& b,
                           const OperatorMatrix& c_yy,
                           const OperatorMatrix& c_xx,
                           const OperatorMatrix& c_xy,
                           const char* where)
{
    const Index ny = c_yy.dim();
    const Index nx = c_xx.dim();
    if (c_xy.entries.rows() != ny || c_xy.entries.cols() != nx
        || b.entries.rows() != ny || b.entries.cols() != nx)
        throw shape_error(std::string(where) + ": incompatible dimensions");
}

} // namespace

double population_mspe(const OperatorMatrix& b,
                       const OperatorMatrix& c_yy,
                       const OperatorMatrix& c_xx,
                       const OperatorMatrix& c_xy)
{
    require_triple_shapes(b, c_yy, c_xx, c_xy, "population_mspe");

    const Eigen::MatrixXd bxx = b.entries * c_xx.entries;
    Eigen::MatrixXd composed = c_yy.entries - c_xy.entries * b.entries.transpose()
        - b.entries * c_xy.entries.transpose() + bxx * b.entries.transpose();

    // The residual covariance must be PSD up to rounding in the
    // composition; a materially negative eigenvalue means the inputs are
    // not a covariance triple compatible with B.
    OperatorMatrix res{c_yy.grid, std::move(composed)};
    SpectralDecomposition d = sym_eig(res);
    const double scale =
        d.dim() > 0 ? d.eigenvalues.cwiseAbs().maxCoeff() : 0.0;
    if (d.dim() > 0 && d.eigenvalues.minCoeff() < -1e-8 * scale)
        throw inconsistent_error("population_mspe: composed operator not PSD");

    return res.entries.trace();
}

MspePartition decompose_mspe(const OperatorMatrix& b,
                             const OperatorMatrix& c_yy,
                             const OperatorMatrix& c_xx,
                             const OperatorMatrix& c_xy,
                             double rel_tol)
{
    require_triple_shapes(b, c_yy, c_xx, c_xy, "decompose_mspe");

    const CorrelationFactor cf = correlation_operator(c_yy, c_xx, c_xy, rel_tol);
    const Eigen::MatrixXd root_yy = sqrt_psd(c_yy).entries;
    const Eigen::MatrixXd root_xx = sqrt_psd(c_xx).entries;

    const Eigen::MatrixXd optimal_part = root_yy * cf.factor.entries;

    MspePartition out;
    out.minimal = c_yy.entries.trace() - optimal_part.squaredNorm();
    out.excess = (b.entries * root_xx - optimal_part).squaredNorm();
    out.total = out.minimal + out.excess;
    return out;
}

double minimal_mspe(const OperatorMatrix& c_yy,
                    const OperatorMatrix& c_xx,
                    const OperatorMatrix& c_xy,
                    double rel_tol)
{
    OperatorMatrix zero{c_xy.grid,
                        Eigen::MatrixXd::Zero(c_xy.entries.rows(), c_xy.entries.cols())};
    return decompose_mspe(zero, c_yy, c_xx, c_xy, rel_tol).minimal;
}

NormalEquationsCheck check_normal_equations(const OperatorMatrix& a,
                                            const OperatorMatrix& c_xx,
                                            const OperatorMatrix& c_xy,
                                            double tol)
{
    if (a.entries.cols() != c_xx.dim() || c_xy.entries.cols() != c_xx.dim()
        || a.entries.rows() != c_xy.entries.rows())
        throw shape_error("check_normal_equations: incompatible dimensions");

    NormalEquationsCheck out;
    out.residual = (a.entries * c_xx.entries - c_xy.entries).norm();
    out.satisfied = out.residual <= tol * c_xy.entries.norm();
    return out;
}

} // namespace folp
