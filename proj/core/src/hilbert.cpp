#include "folp/hilbert.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace folp {

GridPtr make_grid(Index n_points)
{
    if (n_points < 2)
        throw std::invalid_argument("make_grid: need at least 2 points");

    const double h = 1.0 / static_cast<double>(n_points - 1);
    GridSpec g;
    g.points = Eigen::VectorXd::LinSpaced(n_points, 0.0, 1.0);
    g.weights = Eigen::VectorXd::Constant(n_points, h);
    g.weights(0) = 0.5 * h;
    g.weights(n_points - 1) = 0.5 * h;
    return std::make_shared<const GridSpec>(std::move(g));
}

bool same_grid(const GridPtr& a, const GridPtr& b)
{
    if (a == b)
        return true;
    if (!a || !b)
        return false;
    return a->points.size() == b->points.size() && a->points == b->points
        && a->weights == b->weights;
}

namespace {

void require_same_grid(const GridPtr& a, const GridPtr& b, const char* where)
{
    if (!same_grid(a, b))
        throw shape_error(std::string(where) + ": grid mismatch");
}

} // namespace

FunctionSample FunctionSample::from_values(GridPtr grid, const Eigen::VectorXd& values)
{
    if (!grid || values.size() != grid->size())
        throw shape_error("FunctionSample::from_values: size mismatch");
    FunctionSample f;
    f.grid = std::move(grid);
    f.coords = f.grid->weights.cwiseSqrt().cwiseProduct(values);
    return f;
}

Eigen::VectorXd FunctionSample::values() const
{
    return coords.cwiseQuotient(grid->weights.cwiseSqrt());
}

double inner(const FunctionSample& f, const FunctionSample& g)
{
    require_same_grid(f.grid, g.grid, "inner");
    return f.coords.dot(g.coords);
}

OperatorMatrix OperatorMatrix::zero(GridPtr grid)
{
    const Index n = grid->size();
    return OperatorMatrix{std::move(grid), Eigen::MatrixXd::Zero(n, n)};
}

OperatorMatrix OperatorMatrix::identity(GridPtr grid)
{
    const Index n = grid->size();
    return OperatorMatrix{std::move(grid), Eigen::MatrixXd::Identity(n, n)};
}

OperatorMatrix OperatorMatrix::from_kernel(GridPtr grid, const Eigen::MatrixXd& kernel)
{
    const Index n = grid->size();
    if (kernel.rows() != n || kernel.cols() != n)
        throw shape_error("OperatorMatrix::from_kernel: kernel size mismatch");
    const Eigen::VectorXd s = grid->weights.cwiseSqrt();
    Eigen::MatrixXd m = s.asDiagonal() * kernel * s.asDiagonal();
    return OperatorMatrix{std::move(grid), std::move(m)};
}

OperatorMatrix OperatorMatrix::outer(const FunctionSample& x, const FunctionSample& y)
{
    require_same_grid(x.grid, y.grid, "OperatorMatrix::outer");
    return OperatorMatrix{x.grid, y.coords * x.coords.transpose()};
}

FunctionSample OperatorMatrix::apply(const FunctionSample& f) const
{
    require_same_grid(grid, f.grid, "OperatorMatrix::apply");
    return FunctionSample{grid, entries * f.coords};
}

Index SpectralDecomposition::negative_count(double rel_tol) const
{
    if (eigenvalues.size() == 0)
        return 0;
    const double scale = eigenvalues.cwiseAbs().maxCoeff();
    return (eigenvalues.array() < -rel_tol * scale).count();
}

OperatorMatrix SpectralDecomposition::reconstruct() const
{
    Eigen::MatrixXd m =
        eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
    return OperatorMatrix{grid, std::move(m)};
}

SpectralDecomposition sym_eig(const OperatorMatrix& op)
{
    if (op.entries.rows() != op.entries.cols())
        throw shape_error("sym_eig: operator matrix must be square");

    const Eigen::MatrixXd sym = 0.5 * (op.entries + op.entries.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success)
        throw numeric_error("sym_eig: eigensolver did not converge");

    // Eigen sorts ascending; flip to descending.
    const Index n = sym.rows();
    SpectralDecomposition d;
    d.grid = op.grid;
    d.eigenvalues = solver.eigenvalues().reverse();
    d.eigenvectors.resize(n, n);
    for (Index j = 0; j < n; ++j)
        d.eigenvectors.col(j) = solver.eigenvectors().col(n - 1 - j);
    return d;
}

OperatorMatrix sqrt_psd(const OperatorMatrix& op, double rel_floor)
{
    SpectralDecomposition d = sym_eig(op);
    const double lmax = d.eigenvalues.size() > 0 ? std::max(d.eigenvalues(0), 0.0) : 0.0;
    if ((d.eigenvalues.array() < -rel_floor * lmax).any())
        throw not_psd_error("sqrt_psd: eigenvalue below the PSD floor");
    Eigen::VectorXd roots = d.eigenvalues.cwiseMax(0.0).cwiseSqrt();
    Eigen::MatrixXd m = d.eigenvectors * roots.asDiagonal() * d.eigenvectors.transpose();
    return OperatorMatrix{op.grid, std::move(m)};
}

OperatorMatrix pinv_psd(const OperatorMatrix& op, double rel_tol)
{
    SpectralDecomposition d = sym_eig(op);
    const double lmax = d.eigenvalues.size() > 0 ? d.eigenvalues(0) : 0.0;
    if ((d.eigenvalues.array() < -1e-10 * std::max(lmax, 0.0)).any())
        throw not_psd_error("pinv_psd: eigenvalue below the PSD floor");
    const double cut = rel_tol * std::max(lmax, 0.0);
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(d.dim());
    Index rank = 0;
    for (Index j = 0; j < d.dim(); ++j) {
        if (d.eigenvalues(j) > cut && d.eigenvalues(j) > 0.0) {
            inv(j) = 1.0 / d.eigenvalues(j);
            ++rank;
        }
    }
    if (rank == 0)
        throw rank_error("pinv_psd: no eigenvalue above the threshold");
    Eigen::MatrixXd m = d.eigenvectors * inv.asDiagonal() * d.eigenvectors.transpose();
    return OperatorMatrix{op.grid, std::move(m)};
}

double schatten_norm(const OperatorMatrix& op, SchattenP p)
{
    if (op.entries.rows() != op.entries.cols())
        throw shape_error("schatten_norm: operator matrix must be square");

    if (p == SchattenP::Two)
        return op.entries.norm(); // Frobenius = sqrt of sum of squared singular values

    Eigen::BDCSVD<Eigen::MatrixXd> svd(op.entries);
    const auto& sv = svd.singularValues();
    if (p == SchattenP::One)
        return sv.sum();
    return sv.size() > 0 ? sv(0) : 0.0;
}

double trace(const OperatorMatrix& op)
{
    if (op.entries.rows() != op.entries.cols())
        throw shape_error("trace: operator matrix must be square");
    return op.entries.trace();
}

} // namespace folp
