#pragma once

// Data generation for the Monte Carlo study: Fourier basis, Gaussian path
// noise (Brownian bridge, centered Brownian motion, scaled Brownian
// motion), a functional AR(1) predictor process, and per-replication
// model parameter draws.

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>

#include "folp/covariance.hpp"

namespace folp::dgp {

enum class NoiseCase { BB, CBM, BM };

std::string to_string(NoiseCase c);
NoiseCase parse_noise_case(const std::string& s);

/// One simulation cell: which model drives the data, which noise law,
/// how many observations, and on what grid.
struct ModelSpec {
    int model_id = 1; // 1..4
    NoiseCase noise_case = NoiseCase::BB;
    Index t_samples = 100;
    GridPtr grid;
    int n_fourier = 101;
    int burn_in = 200;
};

/// Per-replication parameter draws. Models 1 and 3 use the scalar b0;
/// models 2 and 4 use the 100-vector b.
struct DrawnParams {
    Eigen::VectorXd a; // AR coefficients, one per Fourier element
    double b0 = 0.0;
    Eigen::VectorXd b;
};

/// f_1 = 1, f_{2k} = sqrt(2) sin(2 pi k x), f_{2k+1} = sqrt(2) cos(2 pi k x),
/// returned in orthonormalized coordinates.
FunctionSample fourier_basis(int j, const GridPtr& grid);

/// Columns are the coordinates of f_1 .. f_count.
Eigen::MatrixXd fourier_matrix(const GridPtr& grid, int count);

/// Draws one noise path per call by cumulative Gaussian increments
/// (variance = grid spacing) plus the case transformation. Each case's
/// covariance has trace 1/6: the bridge and the centered motion by the
/// zeta identity sum of pi^{-2} j^{-2}, the scaled motion by construction
/// (trace of min(s,t) is 1/2, so the scale is sqrt(1/3)).
class NoiseSampler {
public:
    NoiseSampler(NoiseCase noise_case, GridPtr grid);

    /// Raw values at the grid points.
    Eigen::VectorXd draw_values(std::mt19937_64& rng) const;

    /// Orthonormalized coordinates.
    Eigen::VectorXd draw_coords(std::mt19937_64& rng) const;

    FunctionSample draw(std::mt19937_64& rng) const;

    const GridPtr& grid() const { return grid_; }

private:
    NoiseCase case_;
    GridPtr grid_;
    Eigen::VectorXd sqrt_steps_; // sqrt of grid spacings
    Eigen::VectorXd sqrt_w_;
};

FunctionSample sample_noise(NoiseCase noise_case, const GridPtr& grid,
                            std::mt19937_64& rng);

/// Fresh iid draws of the model's parameter laws: a_j ~ U(-0.1, 0.25)
/// (models 1, 2) or U(-0.1, 0.75) (models 3, 4); b0, b_j ~ U[-2.5, 2.5].
DrawnParams draw_model_params(int model_id, std::mt19937_64& rng,
                              int n_fourier = 101);

/// The map A of the chosen model. Models 1, 3: A = b0 * I. Models 2, 4:
/// A f_j = b_j f_j for j <= 100 and the identity beyond, realized as
/// x + Sum_{j<=100} (b_j - 1) <x, f_j> f_j without materializing a basis
/// of the whole space.
class ModelOperator {
public:
    ModelOperator(const DrawnParams& params, int model_id, GridPtr grid);

    FunctionSample apply(const FunctionSample& x) const;

    /// Column-wise application to a coordinate matrix.
    Eigen::MatrixXd apply_cols(const Eigen::MatrixXd& coords) const;

private:
    int model_id_;
    double b0_;
    GridPtr grid_;
    Eigen::MatrixXd basis_;        // first 100 Fourier elements (models 2, 4)
    Eigen::VectorXd b_minus_one_;
};

FunctionSample apply_A(const DrawnParams& params, int model_id,
                       const FunctionSample& x);

/// X_t = Sum_j a_j <X_{t-1}, f_j> f_j + e_t, started from a pure noise
/// draw, iterated burn_in + T steps; the last T states are returned.
/// Throws std::invalid_argument when some |a_j| >= 1.
Dataset simulate_far1(const DrawnParams& params, const ModelSpec& spec,
                      std::mt19937_64& rng);

struct GeneratedData {
    Dataset x;
    Dataset y;
    DrawnParams params;
    double sigma_min_true = 0.0; // trace of the noise covariance, 1/6
};

/// Draws parameters, simulates X, and sets Y_t = A X_t + eps_t with fresh
/// independent noise of the same case. Deterministic given (spec, seed).
GeneratedData generate_dataset(const ModelSpec& spec, std::uint64_t seed);

/// Values of the clamped uniform cubic B-spline basis of the given
/// dimension at the grid points (columns = basis functions, raw values).
/// Requires 4 <= dim <= grid size.
Eigen::MatrixXd bspline_basis(const GridPtr& grid, int dim);

/// Orthogonal projection (in the quadrature inner product) onto the span
/// of that basis: re-representing observations with `dim` cubic
/// B-splines, as a rank-dim symmetric idempotent operator.
OperatorMatrix smoothing_projector(const GridPtr& grid, int dim);

/// Plain-text dump: one-line header (grid size, T, model, case, seed),
/// then rows = time, columns = raw grid values.
void write_dataset(std::ostream& os, const Dataset& data, int model_id,
                   NoiseCase noise_case, std::uint64_t seed);
void write_dataset(const std::string& path, const Dataset& data, int model_id,
                   NoiseCase noise_case, std::uint64_t seed);

} // namespace folp::dgp
