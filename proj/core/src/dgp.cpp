#include "folp/dgp.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>

#include <Eigen/Cholesky>

namespace folp::dgp {

std::string to_string(NoiseCase c)
{
    switch (c) {
    case NoiseCase::BB: return "BB";
    case NoiseCase::CBM: return "CBM";
    case NoiseCase::BM: return "BM";
    }
    throw std::invalid_argument("to_string: unknown noise case");
}

NoiseCase parse_noise_case(const std::string& s)
{
    if (s == "BB") return NoiseCase::BB;
    if (s == "CBM") return NoiseCase::CBM;
    if (s == "BM") return NoiseCase::BM;
    throw std::invalid_argument("parse_noise_case: expected BB, CBM or BM, got '" + s + "'");
}

FunctionSample fourier_basis(int j, const GridPtr& grid)
{
    if (j < 1)
        throw std::invalid_argument("fourier_basis: index must be >= 1");

    const Index n = grid->size();
    Eigen::VectorXd values(n);
    if (j == 1) {
        values.setOnes();
    } else {
        const double sqrt2 = std::numbers::sqrt2;
        const int freq = j / 2; // pairs (sin, cos) at frequency j/2
        const double omega = 2.0 * std::numbers::pi * freq;
        for (Index i = 0; i < n; ++i) {
            const double arg = omega * grid->points(i);
            values(i) = sqrt2 * (j % 2 == 0 ? std::sin(arg) : std::cos(arg));
        }
    }
    return FunctionSample::from_values(grid, values);
}

Eigen::MatrixXd fourier_matrix(const GridPtr& grid, int count)
{
    if (count < 1)
        throw std::invalid_argument("fourier_matrix: count must be >= 1");
    Eigen::MatrixXd basis(grid->size(), count);
    for (int j = 1; j <= count; ++j)
        basis.col(j - 1) = fourier_basis(j, grid).coords;
    return basis;
}

namespace {

void fill_standard_normal(Eigen::VectorXd& v, std::mt19937_64& rng)
{
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (Index i = 0; i < v.size(); ++i)
        v(i) = gauss(rng);
}

double draw_uniform(std::mt19937_64& rng, double lo, double hi)
{
    std::uniform_real_distribution<double> u(lo, hi);
    return u(rng);
}

} // namespace

NoiseSampler::NoiseSampler(NoiseCase noise_case, GridPtr grid)
    : case_(noise_case), grid_(std::move(grid))
{
    const Index n = grid_->size();
    if (n < 2)
        throw std::invalid_argument("NoiseSampler: grid too small");
    sqrt_steps_ = (grid_->points.tail(n - 1) - grid_->points.head(n - 1)).cwiseSqrt();
    sqrt_w_ = grid_->weights.cwiseSqrt();
}

Eigen::VectorXd NoiseSampler::draw_values(std::mt19937_64& rng) const
{
    const Index n = grid_->size();
    Eigen::VectorXd incr(n - 1);
    fill_standard_normal(incr, rng);

    // Standard Brownian path on the grid: variance of each increment is
    // the spacing, W(0) = 0.
    Eigen::VectorXd w(n);
    w(0) = 0.0;
    for (Index i = 1; i < n; ++i)
        w(i) = w(i - 1) + sqrt_steps_(i - 1) * incr(i - 1);

    switch (case_) {
    case NoiseCase::BB:
        return w - grid_->points * w(n - 1);
    case NoiseCase::CBM:
        return w.array() - grid_->weights.dot(w);
    case NoiseCase::BM:
        return std::sqrt(1.0 / 3.0) * w;
    }
    throw std::invalid_argument("NoiseSampler: unknown case");
}

Eigen::VectorXd NoiseSampler::draw_coords(std::mt19937_64& rng) const
{
    return sqrt_w_.cwiseProduct(draw_values(rng));
}

FunctionSample NoiseSampler::draw(std::mt19937_64& rng) const
{
    return FunctionSample{grid_, draw_coords(rng)};
}

FunctionSample sample_noise(NoiseCase noise_case, const GridPtr& grid,
                            std::mt19937_64& rng)
{
    return NoiseSampler(noise_case, grid).draw(rng);
}

DrawnParams draw_model_params(int model_id, std::mt19937_64& rng, int n_fourier)
{
    if (model_id < 1 || model_id > 4)
        throw std::invalid_argument("draw_model_params: model_id must be 1..4");
    if (n_fourier < 1)
        throw std::invalid_argument("draw_model_params: n_fourier must be >= 1");

    const double a_hi = (model_id == 1 || model_id == 2) ? 0.25 : 0.75;

    DrawnParams p;
    p.a.resize(n_fourier);
    for (Index j = 0; j < n_fourier; ++j)
        p.a(j) = draw_uniform(rng, -0.1, a_hi);

    if (model_id == 1 || model_id == 3) {
        p.b0 = draw_uniform(rng, -2.5, 2.5);
    } else {
        p.b.resize(100);
        for (Index j = 0; j < 100; ++j)
            p.b(j) = draw_uniform(rng, -2.5, 2.5);
    }
    return p;
}

ModelOperator::ModelOperator(const DrawnParams& params, int model_id, GridPtr grid)
    : model_id_(model_id), b0_(params.b0), grid_(std::move(grid))
{
    if (model_id_ < 1 || model_id_ > 4)
        throw std::invalid_argument("ModelOperator: model_id must be 1..4");
    if (model_id_ == 2 || model_id_ == 4) {
        if (params.b.size() != 100)
            throw std::invalid_argument("ModelOperator: models 2 and 4 need 100 b coefficients");
        basis_ = fourier_matrix(grid_, 100);
        b_minus_one_ = params.b.array() - 1.0;
    }
}

Eigen::MatrixXd ModelOperator::apply_cols(const Eigen::MatrixXd& coords) const
{
    if (model_id_ == 1 || model_id_ == 3)
        return b0_ * coords;
    // Identity plus a diagonal correction on the first 100 Fourier elements.
    return coords
        + basis_ * (b_minus_one_.asDiagonal() * (basis_.transpose() * coords));
}

FunctionSample ModelOperator::apply(const FunctionSample& x) const
{
    if (!same_grid(x.grid, grid_))
        throw shape_error("ModelOperator::apply: grid mismatch");
    return FunctionSample{grid_, apply_cols(x.coords)};
}

FunctionSample apply_A(const DrawnParams& params, int model_id,
                       const FunctionSample& x)
{
    return ModelOperator(params, model_id, x.grid).apply(x);
}

namespace {

void validate_spec(const ModelSpec& spec)
{
    if (!spec.grid)
        throw std::invalid_argument("ModelSpec: missing grid");
    if (spec.model_id < 1 || spec.model_id > 4)
        throw std::invalid_argument("ModelSpec: model_id must be 1..4");
    if (spec.t_samples < 2)
        throw std::invalid_argument("ModelSpec: need T >= 2");
    if (spec.n_fourier < 1)
        throw std::invalid_argument("ModelSpec: n_fourier must be >= 1");
    if (spec.burn_in < 0)
        throw std::invalid_argument("ModelSpec: burn_in must be >= 0");
}

} // namespace

Dataset simulate_far1(const DrawnParams& params, const ModelSpec& spec,
                      std::mt19937_64& rng)
{
    validate_spec(spec);
    if (params.a.size() != spec.n_fourier)
        throw std::invalid_argument("simulate_far1: AR coefficient count mismatch");
    if (params.a.cwiseAbs().maxCoeff() >= 1.0)
        throw std::invalid_argument("simulate_far1: |a_j| >= 1 violates stationarity");

    const NoiseSampler noise(spec.noise_case, spec.grid);
    const Eigen::MatrixXd basis = fourier_matrix(spec.grid, spec.n_fourier);

    Eigen::VectorXd state = noise.draw_coords(rng);
    Dataset out;
    out.grid = spec.grid;
    out.coords.resize(spec.grid->size(), spec.t_samples);

    const Index total = static_cast<Index>(spec.burn_in) + spec.t_samples;
    for (Index step = 0; step < total; ++step) {
        state = basis * params.a.cwiseProduct(basis.transpose() * state)
            + noise.draw_coords(rng);
        const Index t = step - static_cast<Index>(spec.burn_in);
        if (t >= 0)
            out.coords.col(t) = state;
    }
    return out;
}

GeneratedData generate_dataset(const ModelSpec& spec, std::uint64_t seed)
{
    validate_spec(spec);
    std::mt19937_64 rng(seed);

    GeneratedData g;
    g.params = draw_model_params(spec.model_id, rng, spec.n_fourier);
    g.x = simulate_far1(g.params, spec, rng);

    const ModelOperator a_op(g.params, spec.model_id, spec.grid);
    const NoiseSampler noise(spec.noise_case, spec.grid);

    g.y.grid = spec.grid;
    g.y.coords = a_op.apply_cols(g.x.coords);
    for (Index t = 0; t < spec.t_samples; ++t)
        g.y.coords.col(t) += noise.draw_coords(rng);

    g.sigma_min_true = 1.0 / 6.0;
    return g;
}

namespace {

// Nonzero cubic B-spline values at x for a clamped uniform knot vector
// with `dim` basis functions (degree 3, dim - 4 interior knots). Returns
// the span index k and fills the four values N_{k-3..k}.
Index bspline_nonzero(double x, int dim, Eigen::Vector4d& values)
{
    constexpr int p = 3;
    const int segments = dim - p; // interior intervals of the knot grid
    auto knot = [&](Index j) -> double {
        if (j <= p)
            return 0.0;
        if (j >= dim)
            return 1.0;
        return static_cast<double>(j - p) / segments;
    };

    Index span = static_cast<Index>(std::floor(x * segments)) + p;
    span = std::clamp<Index>(span, p, dim - 1);

    double left[p + 1], right[p + 1];
    values.setZero();
    values(0) = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = x - knot(span + 1 - j);
        right[j] = knot(span + j) - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double temp = values(r) / (right[r + 1] + left[j - r]);
            values(r) = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        values(j) = saved;
    }
    return span;
}

} // namespace

Eigen::MatrixXd bspline_basis(const GridPtr& grid, int dim)
{
    if (dim < 4)
        throw std::invalid_argument("bspline_basis: cubic basis needs dim >= 4");
    if (dim > grid->size())
        throw std::invalid_argument("bspline_basis: dim exceeds grid size");

    const Index n = grid->size();
    Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(n, dim);
    Eigen::Vector4d values;
    for (Index i = 0; i < n; ++i) {
        const Index span = bspline_nonzero(grid->points(i), dim, values);
        for (int r = 0; r <= 3; ++r)
            basis(i, span - 3 + r) = values(r);
    }
    return basis;
}

OperatorMatrix smoothing_projector(const GridPtr& grid, int dim)
{
    // Columns of (sqrt-weights . basis) span the subspace in
    // orthonormalized coordinates; project orthogonally onto it.
    const Eigen::MatrixXd m =
        grid->weights.cwiseSqrt().asDiagonal() * bspline_basis(grid, dim);
    const Eigen::MatrixXd gram = m.transpose() * m;
    const Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success)
        throw numeric_error("smoothing_projector: basis Gram not positive definite");
    return OperatorMatrix{grid, m * llt.solve(m.transpose())};
}

void write_dataset(std::ostream& os, const Dataset& data, int model_id,
                   NoiseCase noise_case, std::uint64_t seed)
{
    os.precision(std::numeric_limits<double>::max_digits10);
    os << data.dim() << ' ' << data.size() << ' ' << model_id << ' '
       << to_string(noise_case) << ' ' << seed << '\n';
    const Eigen::VectorXd inv_sqrt_w = data.grid->weights.cwiseSqrt().cwiseInverse();
    for (Index t = 0; t < data.size(); ++t) {
        const Eigen::VectorXd values = inv_sqrt_w.cwiseProduct(data.coords.col(t));
        for (Index i = 0; i < values.size(); ++i)
            os << values(i) << (i + 1 < values.size() ? ' ' : '\n');
    }
}

void write_dataset(const std::string& path, const Dataset& data, int model_id,
                   NoiseCase noise_case, std::uint64_t seed)
{
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("write_dataset: cannot open " + path);
    write_dataset(os, data, model_id, noise_case, seed);
}

} // namespace folp::dgp
