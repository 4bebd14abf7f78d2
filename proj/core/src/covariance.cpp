#include "folp/covariance.hpp"

#include <Eigen/Dense>

namespace folp {

FunctionSample Dataset::sample(Index t) const
{
    if (t < 0 || t >= size())
        throw std::invalid_argument("Dataset::sample: index out of range");
    return FunctionSample{grid, coords.col(t)};
}

Dataset Dataset::from_samples(const std::vector<FunctionSample>& samples)
{
    if (samples.empty())
        throw std::invalid_argument("Dataset::from_samples: empty sample list");
    Dataset d;
    d.grid = samples.front().grid;
    d.coords.resize(d.grid->size(), static_cast<Index>(samples.size()));
    for (Index t = 0; t < d.coords.cols(); ++t) {
        if (!same_grid(samples[static_cast<size_t>(t)].grid, d.grid))
            throw shape_error("Dataset::from_samples: samples on different grids");
        d.coords.col(t) = samples[static_cast<size_t>(t)].coords;
    }
    return d;
}

OperatorMatrix sample_cov(const Dataset& x)
{
    if (x.size() < 1)
        throw std::invalid_argument("sample_cov: empty dataset");
    const double inv_t = 1.0 / static_cast<double>(x.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(x.dim(), x.dim());
    m.selfadjointView<Eigen::Lower>().rankUpdate(x.coords, inv_t);
    m.triangularView<Eigen::StrictlyUpper>() = m.transpose();
    return OperatorMatrix{x.grid, std::move(m)};
}

OperatorMatrix sample_cross_cov(const Dataset& x, const Dataset& y)
{
    if (x.size() != y.size())
        throw shape_error("sample_cross_cov: datasets of different length");
    if (!same_grid(x.grid, y.grid))
        throw shape_error("sample_cross_cov: grid mismatch");
    const double inv_t = 1.0 / static_cast<double>(x.size());
    // x (x) y maps z to <x,z> y, so the matrix accumulates y_t x_t^T.
    Eigen::MatrixXd m = inv_t * (y.coords * x.coords.transpose());
    return OperatorMatrix{x.grid, std::move(m)};
}

Dataset demean(const Dataset& x)
{
    if (x.size() < 1)
        throw std::invalid_argument("demean: empty dataset");
    Dataset out;
    out.grid = x.grid;
    out.coords = x.coords.colwise() - x.coords.rowwise().mean();
    return out;
}

OperatorMatrix truncate_spectral(const SpectralDecomposition& decomp, Index k)
{
    if (k < 1 || k > decomp.dim())
        throw std::invalid_argument("truncate_spectral: k out of range");
    const auto vk = decomp.eigenvectors.leftCols(k);
    const Eigen::VectorXd lk = decomp.eigenvalues.head(k).cwiseMax(0.0);
    Eigen::MatrixXd m = vk * lk.asDiagonal() * vk.transpose();
    return OperatorMatrix{decomp.grid, std::move(m)};
}

TruncatedInverse regularized_inverse(const SpectralDecomposition& decomp, Index k)
{
    if (k < 1 || k > decomp.dim())
        throw std::invalid_argument("regularized_inverse: k out of range");
    if (decomp.eigenvalues(k - 1) <= 0.0)
        throw rank_error("regularized_inverse: rank-deficient spectrum at the cut");

    const auto vk = decomp.eigenvectors.leftCols(k);
    const Eigen::VectorXd inv = decomp.eigenvalues.head(k).cwiseInverse();

    TruncatedInverse t;
    t.k = k;
    t.inverse = OperatorMatrix{decomp.grid, vk * inv.asDiagonal() * vk.transpose()};
    t.projection = OperatorMatrix{decomp.grid, vk * vk.transpose()};
    t.source_decomp = decomp;
    return t;
}

OperatorMatrix projection_onto_top_eigs(const SpectralDecomposition& decomp, Index ell)
{
    if (ell < 1 || ell > decomp.dim())
        throw std::invalid_argument("projection_onto_top_eigs: ell out of range");
    const auto v = decomp.eigenvectors.leftCols(ell);
    return OperatorMatrix{decomp.grid, v * v.transpose()};
}

namespace {

struct RootPair {
    Eigen::MatrixXd root;     // C^{1/2}
    Eigen::MatrixXd inv_root; // pinv(C^{1/2}), cut on the covariance spectrum
};

// The rank cut is applied to the covariance eigenvalues, not to their
// square roots: a direction with lambda <= rank_tol * lambda_max carries
// only rounding noise and must be dropped rather than amplified by
// lambda^{-1/2}.
RootPair psd_root_pair(const OperatorMatrix& c, double rank_tol, const char* name)
{
    SpectralDecomposition d = sym_eig(c);
    const double lmax = d.dim() > 0 ? std::max(d.eigenvalues(0), 0.0) : 0.0;
    if ((d.eigenvalues.array() < -1e-10 * lmax).any())
        throw not_psd_error(std::string(name) + ": marginal covariance not PSD");

    Eigen::VectorXd root = Eigen::VectorXd::Zero(d.dim());
    Eigen::VectorXd inv_root = Eigen::VectorXd::Zero(d.dim());
    for (Index j = 0; j < d.dim(); ++j) {
        const double lambda = d.eigenvalues(j);
        if (lambda > 0.0)
            root(j) = std::sqrt(lambda);
        if (lambda > rank_tol * lmax)
            inv_root(j) = 1.0 / std::sqrt(lambda);
    }
    RootPair out;
    out.root = d.eigenvectors * root.asDiagonal() * d.eigenvectors.transpose();
    out.inv_root = d.eigenvectors * inv_root.asDiagonal() * d.eigenvectors.transpose();
    return out;
}

} // namespace

CorrelationFactor correlation_operator(const OperatorMatrix& c_yy,
                                       const OperatorMatrix& c_xx,
                                       const OperatorMatrix& c_xy,
                                       double rel_tol)
{
    if (c_yy.dim() != c_xx.dim() || c_xy.entries.rows() != c_yy.dim()
        || c_xy.entries.cols() != c_xx.dim())
        throw shape_error("correlation_operator: incompatible dimensions");

    constexpr double kRankTol = 1e-12;
    const RootPair yy = psd_root_pair(c_yy, kRankTol, "correlation_operator");
    const RootPair xx = psd_root_pair(c_xx, kRankTol, "correlation_operator");

    CorrelationFactor out;
    out.factor =
        OperatorMatrix{c_xy.grid, yy.inv_root * c_xy.entries * xx.inv_root};
    out.residual = (yy.root * out.factor.entries * xx.root - c_xy.entries).norm();

    const double scale = c_xy.entries.norm();
    if (out.residual > rel_tol * scale)
        throw inconsistent_error(
            "correlation_operator: factorization residual above tolerance");
    return out;
}

} // namespace folp
