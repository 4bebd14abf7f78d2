#include <doctest.h>

#include <cmath>
#include <sstream>

#include "folp/experiment.hpp"

using namespace folp;
using namespace folp::mc;

namespace {

ExperimentConfig small_config()
{
    ExperimentConfig cfg;
    cfg.models = {1};
    cfg.cases = {dgp::NoiseCase::BB};
    cfg.sample_sizes = {30};
    cfg.gammas = {0.475};
    cfg.estimators = {Estimator::FpcaLs};
    cfg.replications = 4;
    cfg.base_seed = 7;
    cfg.grid_points = 60;
    cfg.smoothing_dim = 30;
    return cfg;
}

} // namespace

TEST_CASE("config parsing and validation")
{
    std::istringstream is(
        "# experiment design\n"
        "models = 1, 3\n"
        "cases = BB, BM\n"
        "sample_sizes = 50,100\n"
        "gammas = 0.45, 0.475\n"
        "estimators = fpca_ls, ridge\n"
        "replications = 12\n"
        "base_seed = 99\n"
        "grid_points = 80\n"
        "c_tau = 0.02\n"
        "c_cap = 0.4\n"
        "ell_rule = floor_sqrt_T\n"
        "smoothing_dim = 40\n");
    const auto cfg = parse_config(is);
    CHECK(cfg.models == std::vector<int>{1, 3});
    CHECK(cfg.cases.size() == 2);
    CHECK(cfg.sample_sizes == std::vector<Index>{50, 100});
    CHECK(cfg.gammas == std::vector<double>{0.45, 0.475});
    CHECK(cfg.estimators.size() == 2);
    CHECK(cfg.replications == 12);
    CHECK(cfg.base_seed == 99);
    CHECK(cfg.grid_points == 80);
    CHECK(cfg.c_tau == 0.02);
    CHECK(cfg.smoothing_dim == 40);
    cfg.validate();

    std::istringstream bad_key("unknown_key = 1\n");
    CHECK_THROWS_AS(parse_config(bad_key), std::invalid_argument);

    ExperimentConfig bad = small_config();
    bad.gammas = {0.5};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = small_config();
    bad.sample_sizes = {5};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = small_config();
    bad.replications = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = small_config();
    bad.ell_rule = "fixed";
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("seed derivation: stability, cell separation, estimator independence")
{
    const auto s1 = derive_seed(42, 1, dgp::NoiseCase::BB, 100, 0.475, 0);
    const auto s2 = derive_seed(42, 1, dgp::NoiseCase::BB, 100, 0.475, 0);
    CHECK(s1 == s2);

    CHECK(derive_seed(42, 1, dgp::NoiseCase::BB, 100, 0.475, 1) != s1);
    CHECK(derive_seed(42, 2, dgp::NoiseCase::BB, 100, 0.475, 0) != s1);
    CHECK(derive_seed(42, 1, dgp::NoiseCase::CBM, 100, 0.475, 0) != s1);
    CHECK(derive_seed(42, 1, dgp::NoiseCase::BB, 200, 0.475, 0) != s1);
    CHECK(derive_seed(42, 1, dgp::NoiseCase::BB, 100, 0.45, 0) != s1);
    CHECK(derive_seed(43, 1, dgp::NoiseCase::BB, 100, 0.475, 0) != s1);
}

TEST_CASE("run_replication determinism and dataset sharing across estimators")
{
    const auto cfg = small_config();
    const Cell fpca{1, dgp::NoiseCase::BB, 30, 0.475, Estimator::FpcaLs};
    const Cell ridge{1, dgp::NoiseCase::BB, 30, 0.475, Estimator::Ridge};

    const auto r1 = run_replication(cfg, fpca, 2);
    const auto r2 = run_replication(cfg, fpca, 2);
    REQUIRE(!r1.failed);
    CHECK(r1.seed == r2.seed);
    CHECK(r1.empirical_mspe == r2.empirical_mspe);
    CHECK(r1.k_selected == r2.k_selected);
    CHECK(r1.excess_mspe == doctest::Approx(r1.empirical_mspe - 1.0 / 6.0));

    // Same cell, different replication index: different data.
    const auto r3 = run_replication(cfg, fpca, 3);
    CHECK(r3.seed != r1.seed);
    CHECK(r3.empirical_mspe != r1.empirical_mspe);

    // The estimator does not enter the seed.
    const auto r4 = run_replication(cfg, ridge, 2);
    CHECK(r4.seed == r1.seed);
    CHECK(r4.k_selected == cfg.grid_points);
}

TEST_CASE("run_experiment aggregates deterministically across worker counts")
{
    ExperimentConfig cfg = small_config();
    cfg.models = {1, 2};
    cfg.estimators = {Estimator::FpcaLs, Estimator::ReducedY};
    cfg.replications = 3;

    const auto t1 = run_experiment(cfg, 1);
    const auto t4 = run_experiment(cfg, 4);

    std::ostringstream os1, os4;
    emit_csv(t1, os1);
    emit_csv(t4, os4);
    CHECK(os1.str() == os4.str());

    // 2 models x 1 case x 1 T x 1 gamma x 2 estimators.
    CHECK(t1.rows.size() == 4);
    for (const auto& row : t1.rows) {
        CHECK(row.replications == 3);
        CHECK(row.failures == 0);
    }
}

TEST_CASE("summary rows agree with per-replication records")
{
    ExperimentConfig cfg = small_config();
    cfg.replications = 3;
    const auto table = run_experiment(cfg, 2);
    REQUIRE(table.rows.size() == 1);

    const Cell cell{1, dgp::NoiseCase::BB, 30, 0.475, Estimator::FpcaLs};
    double acc = 0.0;
    for (int rep = 0; rep < 3; ++rep)
        acc += run_replication(cfg, cell, rep).excess_mspe;
    CHECK(table.rows[0].mean_excess_mspe == doctest::Approx(acc / 3.0).epsilon(1e-15));
}

TEST_CASE("csv round-trip is lossless")
{
    ExperimentConfig cfg = small_config();
    cfg.estimators = {Estimator::FpcaLs, Estimator::Ridge};
    const auto table = run_experiment(cfg, 2);

    std::ostringstream os;
    emit_csv(table, os);
    std::istringstream is(os.str());
    const auto parsed = parse_csv(is);

    REQUIRE(parsed.rows.size() == table.rows.size());
    for (size_t i = 0; i < table.rows.size(); ++i) {
        const auto& a = table.rows[i];
        const auto& b = parsed.rows[i];
        CHECK(a.model == b.model);
        CHECK(a.noise_case == b.noise_case);
        CHECK(a.t_samples == b.t_samples);
        CHECK(a.gamma == b.gamma);
        CHECK(a.estimator == b.estimator);
        CHECK(a.ell_rule == b.ell_rule);
        CHECK(a.replications == b.replications);
        CHECK(a.mean_excess_mspe == b.mean_excess_mspe);
        CHECK(a.stderr_excess_mspe == b.stderr_excess_mspe);
        CHECK(a.mean_k == b.mean_k);
        CHECK(a.failures == b.failures);
    }

    // Second emission from the parsed table is byte-identical.
    std::ostringstream os2;
    emit_csv(parsed, os2);
    CHECK(os.str() == os2.str());
}

TEST_CASE("empty table emits only the header")
{
    std::ostringstream os;
    emit_csv(SummaryTable{}, os);
    CHECK(os.str()
          == "model,case,T,gamma,estimator,ell_rule,replications,mean_excess_mspe,"
             "stderr_excess_mspe,mean_k,failures\n");

    std::istringstream is(os.str());
    CHECK(parse_csv(is).rows.empty());
}

TEST_CASE("one-cell run produces one data row with eleven columns")
{
    const auto table = run_experiment(small_config(), 1);
    std::ostringstream os;
    emit_csv(table, os);
    std::istringstream is(os.str());
    std::string header, row, extra;
    REQUIRE(std::getline(is, header));
    REQUIRE(std::getline(is, row));
    CHECK(!std::getline(is, extra));
    CHECK(std::count(row.begin(), row.end(), ',') == 10);
}

TEST_CASE("console table groups by case and gamma")
{
    ExperimentConfig cfg = small_config();
    cfg.cases = {dgp::NoiseCase::BB, dgp::NoiseCase::BM};
    cfg.gammas = {0.45, 0.475};
    cfg.replications = 1;
    const auto table = run_experiment(cfg, 2);

    std::ostringstream os;
    emit_console(table, os);
    const std::string text = os.str();
    CHECK(text.find("Case BB, gamma = 0.475") != std::string::npos);
    CHECK(text.find("Case BB, gamma = 0.45") != std::string::npos);
    CHECK(text.find("Case BM, gamma = 0.475") != std::string::npos);
    CHECK(text.find("Model 1") != std::string::npos);
}

TEST_CASE("failure accounting and the ten-percent threshold")
{
    SummaryTable table;
    SummaryRow row;
    row.replications = 100;
    row.failures = 10;
    table.rows.push_back(row);
    CHECK(!failure_threshold_exceeded(table));

    table.rows[0].failures = 11;
    CHECK(failure_threshold_exceeded(table));
    CHECK(rows_over_failure_threshold(table).size() == 1);
}

TEST_CASE("ell rule fills the Y-side rank for reduced estimators")
{
    ExperimentConfig cfg = small_config();
    cfg.estimators = {Estimator::ReducedY};
    const Cell cell{1, dgp::NoiseCase::BB, 30, 0.475, Estimator::ReducedY};
    const auto rec = run_replication(cfg, cell, 0);
    REQUIRE(!rec.failed);
    CHECK(rec.ell_used.value() == 5); // floor(sqrt(30))

    const auto table = run_experiment(cfg, 1);
    CHECK(table.rows[0].ell_rule == "floor_sqrt_T");
}
