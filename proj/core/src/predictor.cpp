#include "folp/predictor.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace folp {

namespace {

void validate_elbow_params(const ElbowParams& p)
{
    if (!(p.c_tau > 0.0) || !(p.c_cap > 0.0))
        throw std::invalid_argument("ElbowParams: scale constants must be positive");
    if (!(p.gamma > 0.0) || !(p.gamma < 0.5))
        throw std::invalid_argument("ElbowParams: gamma must lie in (0, 1/2)");
}

void require_paired(const Dataset& x, const Dataset& y, const char* where)
{
    if (x.size() != y.size())
        throw shape_error(std::string(where) + ": datasets of different length");
    if (!same_grid(x.grid, y.grid))
        throw shape_error(std::string(where) + ": grid mismatch");
    if (x.size() < 2)
        throw std::invalid_argument(std::string(where) + ": need at least 2 samples");
}

FitDiagnostics make_diagnostics(const SpectralDecomposition& d)
{
    FitDiagnostics diag;
    diag.eigenvalues = d.eigenvalues;
    diag.gaps.resize(d.dim());
    for (Index j = 0; j + 1 < d.dim(); ++j)
        diag.gaps(j) = d.eigenvalues(j) - d.eigenvalues(j + 1);
    if (d.dim() > 0)
        diag.gaps(d.dim() - 1) = d.eigenvalues(d.dim() - 1);
    return diag;
}

} // namespace

ElbowThreshold elbow_threshold_from_s1(double s1_norm, Index t_samples,
                                       const ElbowParams& params)
{
    validate_elbow_params(params);
    if (t_samples < 2)
        throw std::invalid_argument("elbow_threshold: need T >= 2");

    const double t = static_cast<double>(t_samples);
    ElbowThreshold out;
    out.tau = params.c_tau * s1_norm * std::pow(t, -params.gamma);
    out.cap = static_cast<Index>(std::floor(params.c_cap * std::pow(t, params.gamma)));
    if (out.cap < 1)
        out.cap = 1;
    return out;
}

ElbowThreshold elbow_threshold(const OperatorMatrix& c_xx_hat, Index t_samples,
                               const ElbowParams& params)
{
    return elbow_threshold_from_s1(schatten_norm(c_xx_hat, SchattenP::One),
                                   t_samples, params);
}

Index select_k_elbow(const Eigen::VectorXd& eigenvalues, double tau, Index cap)
{
    if (eigenvalues.size() == 0)
        throw std::invalid_argument("select_k_elbow: empty eigenvalue vector");
    if (!(tau > 0.0) || cap < 1)
        throw std::invalid_argument("select_k_elbow: need tau > 0 and cap >= 1");

    // Largest j with lambda_j >= lambda_{j+1} + tau, scanned from the tail
    // (lambda beyond the stored spectrum counts as 0); 1 when nothing
    // qualifies.
    const Index n = eigenvalues.size();
    Index largest = 1;
    for (Index j = n; j >= 1; --j) {
        const double next = j < n ? eigenvalues(j) : 0.0;
        if (eigenvalues(j - 1) >= next + tau) {
            largest = j;
            break;
        }
    }
    return std::min(largest, cap);
}

namespace {

struct FitInputs {
    OperatorMatrix c_xx;
    SpectralDecomposition decomp;
    OperatorMatrix c_xy;
};

FitInputs prepare_fit(const Dataset& x, const Dataset& y)
{
    FitInputs in;
    in.c_xx = sample_cov(x);
    in.decomp = sym_eig(in.c_xx);
    in.c_xy = sample_cross_cov(x, y);
    return in;
}

} // namespace

FittedPredictor fit_fpca_ls(const Dataset& x, const Dataset& y,
                            const ElbowParams& params)
{
    require_paired(x, y, "fit_fpca_ls");
    FitInputs in = prepare_fit(x, y);

    // S_1 norm of the symmetric Chat_XX is the sum of |eigenvalues|.
    const double s1 = in.decomp.eigenvalues.cwiseAbs().sum();
    const ElbowThreshold th = elbow_threshold_from_s1(s1, x.size(), params);
    const Index k = select_k_elbow(in.decomp.eigenvalues, th.tau, th.cap);
    if (in.decomp.eigenvalues(k - 1) <= 0.0)
        throw rank_error("fit_fpca_ls: degenerate sample, selected eigenvalue <= 0");

    const auto vk = in.decomp.eigenvectors.leftCols(k);
    const Eigen::VectorXd inv = in.decomp.eigenvalues.head(k).cwiseInverse();

    FittedPredictor p;
    p.op = OperatorMatrix{
        x.grid, (in.c_xy.entries * vk) * inv.asDiagonal() * vk.transpose()};
    p.k = k;
    p.tau = th.tau;
    p.cap = th.cap;
    p.method = FitMethod::FpcaLs;
    p.diagnostics = make_diagnostics(in.decomp);
    return p;
}

FittedPredictor fit_fpca_ls_reduced(const Dataset& x, const Dataset& y,
                                    const ElbowParams& params, Index ell,
                                    ReductionBasis basis)
{
    require_paired(x, y, "fit_fpca_ls_reduced");
    if (ell < 1 || ell > x.dim())
        throw std::invalid_argument("fit_fpca_ls_reduced: ell out of range");

    FittedPredictor p = fit_fpca_ls(x, y, params);

    const SpectralDecomposition out_decomp =
        basis == ReductionBasis::YEigs ? sym_eig(sample_cov(y)) : sym_eig(sample_cov(x));
    const OperatorMatrix proj = projection_onto_top_eigs(out_decomp, ell);

    p.op = OperatorMatrix{p.op.grid, proj.entries * p.op.entries};
    p.method = FitMethod::FpcaLsReduced;
    p.ell = ell;
    return p;
}

FittedPredictor fit_ridge(const Dataset& x, const Dataset& y, double ridge_tau)
{
    require_paired(x, y, "fit_ridge");
    if (!(ridge_tau > 0.0))
        throw std::invalid_argument("fit_ridge: ridge_tau must be positive");

    FitInputs in = prepare_fit(x, y);
    const Eigen::VectorXd inv =
        (in.decomp.eigenvalues.array() + ridge_tau).inverse().matrix();

    FittedPredictor p;
    p.op = OperatorMatrix{x.grid,
                          (in.c_xy.entries * in.decomp.eigenvectors) * inv.asDiagonal()
                              * in.decomp.eigenvectors.transpose()};
    p.k = x.dim(); // full spectrum, no truncation
    p.tau = ridge_tau;
    p.cap = x.dim();
    p.method = FitMethod::Ridge;
    p.diagnostics = make_diagnostics(in.decomp);
    return p;
}

FunctionSample predict(const FittedPredictor& p, const FunctionSample& x)
{
    return p.op.apply(x);
}

double empirical_mspe(const OperatorMatrix& b, const Dataset& x, const Dataset& y)
{
    if (x.size() != y.size())
        throw shape_error("empirical_mspe: datasets of different length");
    const Eigen::MatrixXd resid = y.coords - b.entries * x.coords;
    return resid.squaredNorm() / static_cast<double>(x.size());
}

double empirical_mspe(const FittedPredictor& p, const Dataset& x, const Dataset& y)
{
    return empirical_mspe(p.op, x, y);
}

OperatorMatrix residual_cov(const OperatorMatrix& b, const Dataset& x,
                            const Dataset& y)
{
    if (x.size() != y.size())
        throw shape_error("residual_cov: datasets of different length");
    const Eigen::MatrixXd resid = y.coords - b.entries * x.coords;
    const double inv_t = 1.0 / static_cast<double>(x.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(resid.rows(), resid.rows());
    m.selfadjointView<Eigen::Lower>().rankUpdate(resid, inv_t);
    m.triangularView<Eigen::StrictlyUpper>() = m.transpose();
    return OperatorMatrix{y.grid, std::move(m)};
}

} // namespace folp
