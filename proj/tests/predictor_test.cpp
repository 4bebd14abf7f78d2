#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "folp/predictor.hpp"

using namespace folp;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_matrix(Index rows, Index cols, std::mt19937_64& rng)
{
    std::normal_distribution<double> gauss;
    MatrixXd m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i)
            m(i, j) = gauss(rng);
    return m;
}

// Independent exhaustive scan for the elbow rule.
Index reference_select_k(const VectorXd& ev, double tau, Index cap)
{
    Index best = 1;
    for (Index j = 1; j <= ev.size(); ++j) {
        const double next = j < ev.size() ? ev(j) : 0.0;
        if (ev(j - 1) >= next + tau)
            best = j;
    }
    return std::min(best, cap);
}

} // namespace

TEST_CASE("elbow_threshold arithmetic")
{
    const auto grid = make_grid(4);
    // Threshold scale: 0.01 * (1/6) * 100^{-0.475}.
    MatrixXd c = MatrixXd::Zero(4, 4);
    c(0, 0) = 1.0 / 6.0;
    const ElbowParams params{0.01, 0.5, 0.475};
    const auto th = elbow_threshold(OperatorMatrix{grid, c}, 100, params);

    const double expected_tau = 0.01 * (1.0 / 6.0) * std::pow(100.0, -0.475);
    CHECK(th.tau == doctest::Approx(expected_tau).epsilon(1e-12));
    CHECK(th.tau == doctest::Approx(1.87e-4).epsilon(5e-3));
    CHECK(th.cap == 4); // floor(0.5 * 100^{0.475})

    const auto tiny = elbow_threshold(OperatorMatrix{grid, c}, 2, params);
    CHECK(tiny.cap == 1); // floored

    CHECK_THROWS_AS(elbow_threshold(OperatorMatrix{grid, c}, 100,
                                    ElbowParams{0.01, 0.5, 0.6}),
                    std::invalid_argument);
}

TEST_CASE("select_k_elbow on the documented spectra")
{
    Eigen::Vector4d ev(1.0, 0.5, 0.4, 0.39);

    // Gaps: 0.5, 0.1, 0.01, and 0.39 against the implicit zero tail, so
    // the largest qualifying index is 4.
    CHECK(reference_select_k(ev, 0.05, 10) == 4);
    CHECK(select_k_elbow(ev, 0.05, 10) == 4);

    // The cap binds.
    CHECK(select_k_elbow(ev, 0.05, 2) == 2);
    CHECK(select_k_elbow(ev, 0.05, 2) == reference_select_k(ev, 0.05, 2));

    // No gap anywhere: fallback to 1.
    Eigen::Vector3d flat(0.3, 0.3, 0.3);
    CHECK(select_k_elbow(flat, 0.5, 10) == 1);

    CHECK_THROWS_AS(select_k_elbow(VectorXd(), 0.1, 3), std::invalid_argument);
}

TEST_CASE("select_k_elbow equals the exhaustive reference on random spectra")
{
    std::mt19937_64 rng(139);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<Index> len_dist(1, 10);
    std::uniform_int_distribution<Index> cap_dist(1, 6);
    for (int rep = 0; rep < 2000; ++rep) {
        const Index n = len_dist(rng);
        VectorXd ev(n);
        for (Index i = 0; i < n; ++i)
            ev(i) = unif(rng);
        if (rep % 4 == 0)
            ev(n - 1) = 0.0;
        std::sort(ev.data(), ev.data() + n, std::greater<double>());
        const double tau = 0.01 + unif(rng);
        const Index cap = cap_dist(rng);
        CHECK(select_k_elbow(ev, tau, cap) == reference_select_k(ev, tau, cap));
    }
}

TEST_CASE("fit_fpca_ls on a one-dimensional self-prediction problem")
{
    std::mt19937_64 rng(149);
    const auto grid = make_grid(12);
    VectorXd v = random_matrix(12, 1, rng);
    v.normalize();
    VectorXd scales = random_matrix(20, 1, rng);
    MatrixXd coords = v * scales.transpose();

    const Dataset x{grid, coords};
    const auto p = fit_fpca_ls(x, x, ElbowParams{0.01, 0.5, 0.45});
    CHECK(p.k == 1);
    const VectorXd image = p.op.entries * v;
    CHECK((image - v).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("noiseless linear response is recovered on the retained span")
{
    std::mt19937_64 rng(151);
    const Index n = 25, t = 60;
    const auto grid = make_grid(n);

    // X with a decaying coordinate spectrum, A diagonal in that frame.
    VectorXd scale(n);
    for (Index j = 0; j < n; ++j)
        scale(j) = std::pow(static_cast<double>(j + 1), -1.2);
    const MatrixXd xs = scale.asDiagonal() * random_matrix(n, t, rng);
    VectorXd diag = random_matrix(n, 1, rng);
    const MatrixXd a = MatrixXd(diag.asDiagonal());

    const Dataset x{grid, xs};
    const Dataset y{grid, a * xs};
    const auto p = fit_fpca_ls(x, y, ElbowParams{0.01, 0.5, 0.3});
    REQUIRE(p.k >= 1);

    const auto decomp = sym_eig(sample_cov(x));
    const MatrixXd vk = decomp.eigenvectors.leftCols(p.k);
    CHECK(((p.op.entries - a) * vk).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("reduced fit with full Y-side rank equals the plain fit")
{
    std::mt19937_64 rng(157);
    const Index n = 15, t = 40;
    const auto grid = make_grid(n);
    const Dataset x{grid, random_matrix(n, t, rng)};
    const Dataset y{grid, random_matrix(n, t, rng)};
    const ElbowParams params{0.01, 0.5, 0.45};

    const auto plain = fit_fpca_ls(x, y, params);
    for (const auto basis : {ReductionBasis::YEigs, ReductionBasis::XEigs}) {
        const auto reduced = fit_fpca_ls_reduced(x, y, params, n, basis);
        CHECK((reduced.op.entries - plain.op.entries).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(reduced.ell.value() == n);
    }

    CHECK_THROWS_AS(fit_fpca_ls_reduced(x, y, params, 0, ReductionBasis::YEigs),
                    std::invalid_argument);
}

TEST_CASE("reduced fit projects onto the requested eigenspace")
{
    std::mt19937_64 rng(163);
    const Index n = 15, t = 50;
    const auto grid = make_grid(n);
    const Dataset x{grid, random_matrix(n, t, rng)};
    const Dataset y{grid, random_matrix(n, t, rng)};
    const ElbowParams params{0.01, 0.5, 0.45};
    const Index ell = 4;

    const auto plain = fit_fpca_ls(x, y, params);
    const auto reduced = fit_fpca_ls_reduced(x, y, params, ell, ReductionBasis::YEigs);
    const auto proj = projection_onto_top_eigs(sym_eig(sample_cov(y)), ell);
    CHECK((reduced.op.entries - proj.entries * plain.op.entries)
              .cwiseAbs()
              .maxCoeff()
          < 1e-12);
}

TEST_CASE("ridge fit shrinks a diagonal system coefficient-wise")
{
    const Index n = 5;
    const auto grid = make_grid(n);
    VectorXd d(n);
    d << 2.0, 1.0, 0.5, 0.25, 0.1;

    // T = n samples placed so that the sample covariance is exactly diag(d).
    MatrixXd xs = MatrixXd::Zero(n, n);
    for (Index j = 0; j < n; ++j)
        xs(j, j) = std::sqrt(static_cast<double>(n) * d(j));
    const Dataset x{grid, xs};

    const double ridge_tau = 0.5;
    const auto p = fit_ridge(x, x, ridge_tau);
    for (Index j = 0; j < n; ++j)
        CHECK(p.op.entries(j, j) == doctest::Approx(d(j) / (d(j) + ridge_tau)));

    // Extreme shrinkage sends the operator to zero.
    const auto heavy = fit_ridge(x, x, 1e12);
    CHECK(schatten_norm(heavy.op, SchattenP::Inf) < 1e-10);

    CHECK_THROWS_AS(fit_ridge(x, x, 0.0), std::invalid_argument);
}

TEST_CASE("predict is linear and grid-checked")
{
    std::mt19937_64 rng(167);
    const Index n = 10, t = 30;
    const auto grid = make_grid(n);
    const Dataset x{grid, random_matrix(n, t, rng)};
    const Dataset y{grid, random_matrix(n, t, rng)};
    const auto p = fit_fpca_ls(x, y, ElbowParams{0.01, 0.5, 0.45});

    const FunctionSample zero{grid, VectorXd::Zero(n)};
    CHECK(predict(p, zero).coords.cwiseAbs().maxCoeff() == 0.0);

    const FunctionSample f{grid, random_matrix(n, 1, rng)};
    const VectorXd lhs = predict(p, FunctionSample{grid, 3.0 * f.coords}).coords;
    const VectorXd rhs = 3.0 * predict(p, f).coords;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);

    const auto other = make_grid(n + 1);
    const FunctionSample g{other, VectorXd::Zero(n + 1)};
    CHECK_THROWS_AS(predict(p, g), shape_error);
}

TEST_CASE("empirical_mspe and residual covariance")
{
    std::mt19937_64 rng(173);
    const Index n = 8, t = 25;
    const auto grid = make_grid(n);
    const MatrixXd xs = random_matrix(n, t, rng);
    const MatrixXd ys = random_matrix(n, t, rng);
    const Dataset x{grid, xs}, y{grid, ys};

    const OperatorMatrix zero = OperatorMatrix::zero(grid);
    CHECK(empirical_mspe(zero, x, y)
          == doctest::Approx(ys.squaredNorm() / t).epsilon(1e-12));

    const OperatorMatrix b{grid, random_matrix(n, n, rng)};
    const Dataset y_exact{grid, b.entries * xs};
    CHECK(empirical_mspe(b, x, y_exact) < 1e-20);

    CHECK(std::abs(trace(residual_cov(b, x, y)) - empirical_mspe(b, x, y)) < 1e-10);
}

TEST_CASE("fitted operator is least squares within its rank class")
{
    std::mt19937_64 rng(179);
    const Index n = 20, t = 45;
    const auto grid = make_grid(n);
    const Dataset x{grid, random_matrix(n, t, rng)};
    const MatrixXd a = random_matrix(n, n, rng);
    const Dataset y{grid, a * x.coords + 0.5 * random_matrix(n, t, rng)};

    const auto p = fit_fpca_ls(x, y, ElbowParams{0.01, 0.5, 0.4});
    const double base = empirical_mspe(p, x, y);
    const auto proj = projection_onto_top_eigs(sym_eig(sample_cov(x)), p.k);

    for (int rep = 0; rep < 50; ++rep) {
        const MatrixXd g = random_matrix(n, n, rng);
        const OperatorMatrix perturbed{
            grid, p.op.entries + 0.01 * g * proj.entries};
        CHECK(empirical_mspe(perturbed, x, y) >= base - 1e-10);
    }
}

TEST_CASE("elbow bound transfers to the truncated inverse norm")
{
    std::mt19937_64 rng(181);
    const Index n = 30, t = 80;
    const auto grid = make_grid(n);
    VectorXd scale(n);
    for (Index j = 0; j < n; ++j)
        scale(j) = std::pow(static_cast<double>(j + 1), -1.0);
    const Dataset x{grid, scale.asDiagonal() * random_matrix(n, t, rng)};

    const auto p = fit_fpca_ls(x, x, ElbowParams{0.01, 0.5, 0.45});
    const auto& ev = p.diagnostics.eigenvalues;
    const double next = p.k < ev.size() ? ev(p.k) : 0.0;
    bool qualified = false;
    for (Index j = 1; j <= ev.size(); ++j) {
        const double nx = j < ev.size() ? ev(j) : 0.0;
        if (ev(j - 1) >= nx + p.tau)
            qualified = true;
    }
    if (qualified && next > 0.0)
        CHECK(ev(p.k - 1) >= p.tau);
}
