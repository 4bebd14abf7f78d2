#include "folp/selfcheck.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "folp/experiment.hpp"
#include "folp/population.hpp"

namespace folp::selfcheck {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

CheckResult guard(const std::string& name, const std::function<CheckResult()>& body)
{
    try {
        return body();
    } catch (const std::exception& e) {
        return CheckResult{name, false, std::string("exception: ") + e.what()};
    }
}

MatrixXd random_gaussian(Index rows, Index cols, std::mt19937_64& rng)
{
    std::normal_distribution<double> gauss(0.0, 1.0);
    MatrixXd m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i)
            m(i, j) = gauss(rng);
    return m;
}

// A random joint covariance of a stacked pair (x, y), partitioned into
// the triple (C_YY, C_XX, C_XY) in the y*x^T matrix convention. Extra
// mixing columns keep the joint matrix well conditioned.
struct JointSystem {
    OperatorMatrix c_yy;
    OperatorMatrix c_xx;
    OperatorMatrix c_xy;
};

JointSystem random_joint_system(Index n, std::mt19937_64& rng)
{
    const GridPtr grid = make_grid(n);
    const MatrixXd g = random_gaussian(2 * n, 2 * n + 10, rng);
    const MatrixXd joint = g * g.transpose() / static_cast<double>(g.cols());
    JointSystem s;
    s.c_xx = OperatorMatrix{grid, joint.topLeftCorner(n, n)};
    s.c_yy = OperatorMatrix{grid, joint.bottomRightCorner(n, n)};
    s.c_xy = OperatorMatrix{grid, joint.bottomLeftCorner(n, n)};
    return s;
}

} // namespace

CheckResult check_grid_quadrature()
{
    return guard("grid-quadrature", [] {
        const auto g2 = make_grid(2);
        const auto g3 = make_grid(3);
        const auto g200 = make_grid(200);

        bool ok = g2->weights.isApprox(Eigen::Vector2d(0.5, 0.5))
            && g3->weights.isApprox(Eigen::Vector3d(0.25, 0.5, 0.25))
            && g200->size() == 200;
        const double sum_err = std::abs(g200->weights.sum() - 1.0);
        ok = ok && sum_err < 1e-12;

        // Unit constant integrates to one.
        const auto one = FunctionSample::from_values(g200, VectorXd::Ones(200));
        ok = ok && std::abs(inner(one, one) - 1.0) < 1e-12;

        return CheckResult{"grid-quadrature", ok,
                           "weight-sum error " + fmt(sum_err)};
    });
}

CheckResult check_fourier_orthonormality()
{
    return guard("fourier-orthonormality", [] {
        const auto grid = make_grid(200);
        const MatrixXd basis = dgp::fourier_matrix(grid, 101);
        const double gram_err =
            (basis.transpose() * basis - MatrixXd::Identity(101, 101))
                .cwiseAbs()
                .maxCoeff();
        return CheckResult{"fourier-orthonormality", gram_err < 1e-10,
                           "max Gram deviation " + fmt(gram_err)};
    });
}

CheckResult check_eigendecomposition_reconstruction()
{
    return guard("eigendecomposition-reconstruction", [] {
        std::mt19937_64 rng(11);
        const auto grid = make_grid(50);
        double worst_resid = 0.0;
        double worst_gram = 0.0;
        for (int rep = 0; rep < 20; ++rep) {
            MatrixXd m = random_gaussian(50, 50, rng);
            m = 0.5 * (m + m.transpose()).eval();
            const OperatorMatrix op{grid, m};
            const SpectralDecomposition d = sym_eig(op);
            worst_resid = std::max(
                worst_resid,
                schatten_norm(OperatorMatrix{grid, d.reconstruct().entries - m},
                              SchattenP::Inf));
            worst_gram = std::max(worst_gram,
                                  (d.eigenvectors.transpose() * d.eigenvectors
                                   - MatrixXd::Identity(50, 50))
                                      .cwiseAbs()
                                      .maxCoeff());
        }
        const bool ok = worst_resid < 1e-9 && worst_gram < 1e-10;
        return CheckResult{"eigendecomposition-reconstruction", ok,
                           "worst residual " + fmt(worst_resid) + ", worst Gram "
                               + fmt(worst_gram)};
    });
}

CheckResult check_psd_root_pseudoinverse()
{
    return guard("psd-root-pseudoinverse", [] {
        std::mt19937_64 rng(13);
        double worst = 0.0;
        for (int rep = 0; rep < 50; ++rep) {
            const Index n = 5;
            const auto grid = make_grid(n);
            const MatrixXd g = random_gaussian(n, n, rng);
            const OperatorMatrix psd{grid, g * g.transpose()};

            const OperatorMatrix root = sqrt_psd(psd);
            worst = std::max(worst,
                             (root.entries * root.entries - psd.entries)
                                 .cwiseAbs()
                                 .maxCoeff());

            const OperatorMatrix inv = pinv_psd(psd);
            worst = std::max(
                worst,
                (psd.entries * inv.entries * psd.entries - psd.entries)
                    .cwiseAbs()
                    .maxCoeff());
        }
        return CheckResult{"psd-root-pseudoinverse", worst < 1e-9,
                           "worst identity residual " + fmt(worst)};
    });
}

CheckResult check_schatten_ordering()
{
    return guard("schatten-ordering", [] {
        std::mt19937_64 rng(17);
        const auto grid = make_grid(6);
        bool ok = true;
        for (int rep = 0; rep < 200; ++rep) {
            const OperatorMatrix m{grid, random_gaussian(6, 6, rng)};
            const double s1 = schatten_norm(m, SchattenP::One);
            const double s2 = schatten_norm(m, SchattenP::Two);
            const double sinf = schatten_norm(m, SchattenP::Inf);
            ok = ok && sinf <= s2 + 1e-12 && s2 <= s1 + 1e-12;

            // Trace equals the S_1 norm for PSD inputs.
            const OperatorMatrix psd{grid, m.entries * m.entries.transpose()};
            ok = ok
                && std::abs(trace(psd) - schatten_norm(psd, SchattenP::One)) < 1e-10;
        }
        return CheckResult{"schatten-ordering", ok, "200 random matrices"};
    });
}

CheckResult check_trace_norm_bounds()
{
    return guard("trace-norm-bounds", [] {
        std::mt19937_64 rng(19);
        const Index n = 12;
        const auto grid = make_grid(n);
        bool ok = true;
        for (int rep = 0; rep < 100; ++rep) {
            MatrixXd g = random_gaussian(n, n, rng);
            MatrixXd gamma = g * g.transpose();
            gamma /= gamma.trace(); // S_1 normalized
            const OperatorMatrix gamma_op{grid, gamma};
            const OperatorMatrix d_op{grid, random_gaussian(n, n, rng)};

            const double d_norm = schatten_norm(d_op, SchattenP::Inf);
            const OperatorMatrix conj{grid,
                                      d_op.entries * gamma * d_op.entries.transpose()};
            ok = ok
                && schatten_norm(conj, SchattenP::One)
                    <= d_norm * d_norm * schatten_norm(gamma_op, SchattenP::One) + 1e-9;

            const OperatorMatrix half{grid, sqrt_psd(gamma_op).entries * d_op.entries};
            const double s2 = schatten_norm(half, SchattenP::Two);
            ok = ok && s2 * s2 <= d_norm * d_norm * trace(gamma_op) + 1e-9;
        }
        return CheckResult{"trace-norm-bounds", ok, "100 random pairs"};
    });
}

namespace {

// Independent reference for the elbow rule: forward scan over all j,
// eigenvalues past the end treated as zero, fallback 1, then the cap.
Index reference_select_k(const VectorXd& ev, double tau, Index cap)
{
    Index best = 1;
    for (Index j = 1; j <= ev.size(); ++j) {
        const double current = ev(j - 1);
        const double next = j < ev.size() ? ev(j) : 0.0;
        if (current >= next + tau)
            best = j;
    }
    return std::min(best, cap);
}

} // namespace

CheckResult check_elbow_rule()
{
    return guard("elbow-rule-reference", [] {
        std::mt19937_64 rng(23);
        std::uniform_int_distribution<Index> len_dist(1, 12);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::uniform_int_distribution<Index> cap_dist(1, 8);

        int mismatches = 0;
        int bound_violations = 0;
        int bound_checked = 0;
        for (int rep = 0; rep < 10000; ++rep) {
            const Index n = len_dist(rng);
            VectorXd ev(n);
            for (Index i = 0; i < n; ++i)
                ev(i) = unif(rng);
            // Occasional exact ties and trailing zeros.
            if (rep % 7 == 0 && n >= 2)
                ev(1) = ev(0);
            if (rep % 5 == 0)
                ev(n - 1) = 0.0;
            std::sort(ev.data(), ev.data() + n, std::greater<double>());

            const double tau = 0.001 + 0.5 * unif(rng);
            const Index cap = cap_dist(rng);

            const Index got = select_k_elbow(ev, tau, cap);
            const Index want = reference_select_k(ev, tau, cap);
            if (got != want)
                ++mismatches;

            // Inverse-norm bound: when a gap genuinely qualified and the
            // next eigenvalue is positive, lambda_k >= tau must hold.
            bool qualified = false;
            for (Index j = 1; j <= n; ++j) {
                const double next = j < n ? ev(j) : 0.0;
                if (ev(j - 1) >= next + tau)
                    qualified = true;
            }
            const double next_ev = got < n ? ev(got) : 0.0;
            if (qualified && next_ev > 0.0) {
                ++bound_checked;
                if (!(ev(got - 1) >= tau))
                    ++bound_violations;
                // Spot-check through the actual truncated inverse.
                if (bound_checked % 100 == 1) {
                    const auto grid = make_grid(std::max<Index>(n, 2));
                    VectorXd diag = VectorXd::Zero(grid->size());
                    diag.head(n) = ev;
                    const OperatorMatrix op{grid, MatrixXd(diag.asDiagonal())};
                    const auto ti = regularized_inverse(sym_eig(op), got);
                    if (schatten_norm(ti.inverse, SchattenP::Inf) > 1.0 / tau)
                        ++bound_violations;
                }
            }
        }
        const bool ok = mismatches == 0 && bound_violations == 0;
        return CheckResult{"elbow-rule-reference", ok,
                           "10000 spectra, " + std::to_string(mismatches)
                               + " mismatches, " + std::to_string(bound_violations)
                               + " bound violations (" + std::to_string(bound_checked)
                               + " bound cases)"};
    });
}

CheckResult check_factorization_identities()
{
    return guard("factorization-identities", [] {
        std::mt19937_64 rng(29);
        std::uniform_int_distribution<Index> dim_dist(2, 30);

        double worst_identity = 0.0;
        double worst_norm = 0.0;
        double worst_minimality = 0.0;
        for (int rep = 0; rep < 1000; ++rep) {
            const Index n = dim_dist(rng);
            const JointSystem s = random_joint_system(n, rng);
            const OperatorMatrix b{s.c_xx.grid, random_gaussian(n, n, rng)};

            const double direct = population_mspe(b, s.c_yy, s.c_xx, s.c_xy);
            const MspePartition part = decompose_mspe(b, s.c_yy, s.c_xx, s.c_xy);
            worst_identity = std::max(worst_identity,
                                      std::abs(direct - part.total)
                                          / std::max(std::abs(direct), 1e-12));

            const CorrelationFactor cf =
                correlation_operator(s.c_yy, s.c_xx, s.c_xy);
            worst_norm =
                std::max(worst_norm, schatten_norm(cf.factor, SchattenP::Inf));

            worst_minimality =
                std::max(worst_minimality, part.minimal - direct);
        }
        const bool ok = worst_identity <= 1e-8 && worst_norm <= 1.0 + 1e-8
            && worst_minimality <= 1e-9;
        return CheckResult{"factorization-identities", ok,
                           "worst identity " + fmt(worst_identity) + ", worst |R| "
                               + fmt(worst_norm) + ", worst minimality gap "
                               + fmt(worst_minimality)};
    });
}

CheckResult check_normal_equations_optimality()
{
    return guard("normal-equations-optimality", [] {
        std::mt19937_64 rng(31);
        std::uniform_int_distribution<Index> dim_dist(3, 20);

        double worst_gap = 0.0;
        double worst_witness = 0.0;
        bool ok = true;
        for (int rep = 0; rep < 200; ++rep) {
            const Index n = dim_dist(rng);
            const JointSystem s = random_joint_system(n, rng);

            // Solving the normal equations yields an optimal operator.
            const OperatorMatrix a{
                s.c_xx.grid, s.c_xy.entries * pinv_psd(s.c_xx).entries};
            ok = ok && check_normal_equations(a, s.c_xx, s.c_xy, 1e-8).satisfied;

            const double gap = population_mspe(a, s.c_yy, s.c_xx, s.c_xy)
                - minimal_mspe(s.c_yy, s.c_xx, s.c_xy);
            worst_gap = std::max(worst_gap,
                                 std::abs(gap)
                                     / std::max(trace(s.c_yy), 1e-12));

            // A scaled operator with nonzero cross-covariance must fail.
            if (s.c_xy.entries.norm() > 1e-8) {
                const OperatorMatrix a2{s.c_xx.grid, 2.0 * a.entries};
                ok = ok && !check_normal_equations(a2, s.c_xx, s.c_xy, 1e-8).satisfied;
            }

            // Rank-deficient witness: embed with the last x-coordinate
            // exactly zero, then perturb on that null direction.
            const auto grid_big = make_grid(n + 1);
            MatrixXd c_xx_d = MatrixXd::Zero(n + 1, n + 1);
            c_xx_d.topLeftCorner(n, n) = s.c_xx.entries;
            MatrixXd c_yy_d = MatrixXd::Zero(n + 1, n + 1);
            c_yy_d.topLeftCorner(n, n) = s.c_yy.entries;
            c_yy_d(n, n) = 1.0; // y may still vary on the extra coordinate
            MatrixXd c_xy_d = MatrixXd::Zero(n + 1, n + 1);
            c_xy_d.topLeftCorner(n, n) = s.c_xy.entries;

            const OperatorMatrix cxx{grid_big, c_xx_d};
            const OperatorMatrix cyy{grid_big, c_yy_d};
            const OperatorMatrix cxy{grid_big, c_xy_d};
            const OperatorMatrix a0{grid_big,
                                    c_xy_d * pinv_psd(cxx).entries};
            MatrixXd perturbed = a0.entries;
            perturbed.col(n) += random_gaussian(n + 1, 1, rng);
            const OperatorMatrix a1{grid_big, perturbed};

            ok = ok && check_normal_equations(a1, cxx, cxy, 1e-8).satisfied;
            const double witness = std::abs(population_mspe(a0, cyy, cxx, cxy)
                                            - population_mspe(a1, cyy, cxx, cxy));
            worst_witness = std::max(worst_witness, witness);
        }
        ok = ok && worst_gap <= 1e-8 && worst_witness <= 1e-10;
        return CheckResult{"normal-equations-optimality", ok,
                           "worst optimality gap " + fmt(worst_gap)
                               + ", worst null-space witness " + fmt(worst_witness)};
    });
}

CheckResult check_noise_spectra()
{
    return guard("noise-spectra", [] {
        const auto grid = make_grid(200);
        const Index n = grid->size();

        // Brownian-bridge kernel min(s,t) - st, discretized.
        MatrixXd kernel(n, n);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j) {
                const double s = grid->points(i), t = grid->points(j);
                kernel(i, j) = std::min(s, t) - s * t;
            }
        const SpectralDecomposition d =
            sym_eig(OperatorMatrix::from_kernel(grid, kernel));
        double worst_eig = 0.0;
        for (int j = 1; j <= 5; ++j) {
            const double expected =
                1.0 / (std::numbers::pi * std::numbers::pi * j * j);
            worst_eig = std::max(worst_eig, std::abs(d.eigenvalues(j - 1) - expected));
        }

        // Empirical traces at 1e5 draws per case.
        double worst_trace = 0.0;
        const dgp::NoiseCase cases[] = {dgp::NoiseCase::BB, dgp::NoiseCase::CBM,
                                        dgp::NoiseCase::BM};
        std::uint64_t seed = 1237;
        for (const auto c : cases) {
            std::mt19937_64 rng(seed++);
            const dgp::NoiseSampler sampler(c, grid);
            double acc = 0.0;
            const int draws = 100000;
            for (int i = 0; i < draws; ++i)
                acc += sampler.draw_coords(rng).squaredNorm();
            worst_trace = std::max(worst_trace, std::abs(acc / draws - 1.0 / 6.0));
        }

        const bool ok = worst_eig < 1e-4 && worst_trace < 0.003;
        return CheckResult{"noise-spectra", ok,
                           "worst eigenvalue error " + fmt(worst_eig)
                               + ", worst trace error " + fmt(worst_trace)};
    });
}

CheckResult check_least_squares_optimality()
{
    return guard("least-squares-optimality", [] {
        std::mt19937_64 rng(37);
        const auto grid = make_grid(20);
        const Index n = grid->size();
        const Index t = 40;

        Dataset x{grid, random_gaussian(n, t, rng)};
        const MatrixXd a = random_gaussian(n, n, rng);
        Dataset y{grid, a * x.coords + 0.3 * random_gaussian(n, t, rng)};

        const FittedPredictor p = fit_fpca_ls(x, y, ElbowParams{0.01, 0.5, 0.4});
        const double base = empirical_mspe(p, x, y);

        const OperatorMatrix proj =
            projection_onto_top_eigs(sym_eig(sample_cov(x)), p.k);
        double worst = 0.0;
        for (int rep = 0; rep < 100; ++rep) {
            const MatrixXd g = random_gaussian(n, n, rng);
            const double delta = 0.01 * p.op.entries.norm() / std::max(g.norm(), 1e-12);
            const OperatorMatrix perturbed{
                grid, p.op.entries + delta * g * proj.entries};
            worst = std::max(worst, base - empirical_mspe(perturbed, x, y));
        }
        return CheckResult{"least-squares-optimality", worst <= 1e-10,
                           "largest improvement from perturbation " + fmt(worst)};
    });
}

CheckResult check_replication_determinism()
{
    return guard("replication-determinism", [] {
        mc::ExperimentConfig cfg;
        cfg.sample_sizes = {30};
        cfg.replications = 2;
        cfg.base_seed = 904;

        const mc::Cell cell{1, dgp::NoiseCase::BB, 30, 0.475, mc::Estimator::FpcaLs};
        const auto r1 = mc::run_replication(cfg, cell, 0);
        const auto r2 = mc::run_replication(cfg, cell, 0);
        const auto r3 = mc::run_replication(cfg, cell, 1);

        const bool identical = !r1.failed && !r2.failed
            && r1.empirical_mspe == r2.empirical_mspe && r1.seed == r2.seed
            && r1.k_selected == r2.k_selected;
        const bool distinct = r3.seed != r1.seed
            && r3.empirical_mspe != r1.empirical_mspe;
        return CheckResult{"replication-determinism", identical && distinct,
                           identical ? "repeat identical, fresh replication distinct"
                                     : "repeat mismatch"};
    });
}

std::vector<CheckResult> run_all()
{
    return {
        check_grid_quadrature(),
        check_fourier_orthonormality(),
        check_eigendecomposition_reconstruction(),
        check_psd_root_pseudoinverse(),
        check_schatten_ordering(),
        check_trace_norm_bounds(),
        check_elbow_rule(),
        check_factorization_identities(),
        check_normal_equations_optimality(),
        check_noise_spectra(),
        check_least_squares_optimality(),
        check_replication_determinism(),
    };
}

} // namespace folp::selfcheck
