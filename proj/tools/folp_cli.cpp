// Command-line front end: `run` executes a Monte Carlo experiment and
// emits summary tables, `verify` runs the library's property and oracle
// battery, `table` pretty-prints a results CSV.
//
// Exit codes: 0 success, 1 invalid configuration or I/O failure,
// 2 experiment-level failure threshold exceeded (or failed verify).

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "folp/experiment.hpp"
#include "folp/selfcheck.hpp"

namespace {

struct RunFlags {
    std::string config_path;
    std::vector<int> models;
    std::vector<std::string> cases;
    std::vector<long long> sample_sizes;
    std::vector<double> gammas;
    std::vector<std::string> estimators;
    int reps = -1;
    long long seed = -1;
    long long grid = -1;
    double c_tau = -1.0;
    double c_cap = -1.0;
    std::string ell_rule;
    long long smoothing = -1;
    int workers = 0;
    std::string out_path;
};

folp::mc::ExperimentConfig build_config(const RunFlags& f)
{
    folp::mc::ExperimentConfig cfg;
    if (!f.config_path.empty())
        cfg = folp::mc::load_config(f.config_path);

    if (!f.models.empty())
        cfg.models = f.models;
    if (!f.cases.empty()) {
        cfg.cases.clear();
        for (const auto& c : f.cases)
            cfg.cases.push_back(folp::dgp::parse_noise_case(c));
    }
    if (!f.sample_sizes.empty()) {
        cfg.sample_sizes.assign(f.sample_sizes.begin(), f.sample_sizes.end());
    }
    if (!f.gammas.empty())
        cfg.gammas = f.gammas;
    if (!f.estimators.empty()) {
        cfg.estimators.clear();
        for (const auto& e : f.estimators)
            cfg.estimators.push_back(folp::mc::parse_estimator(e));
    }
    if (f.reps >= 0)
        cfg.replications = f.reps;
    if (f.seed >= 0)
        cfg.base_seed = static_cast<std::uint64_t>(f.seed);
    if (f.grid >= 0)
        cfg.grid_points = f.grid;
    if (f.c_tau > 0.0)
        cfg.c_tau = f.c_tau;
    if (f.c_cap > 0.0)
        cfg.c_cap = f.c_cap;
    if (!f.ell_rule.empty())
        cfg.ell_rule = f.ell_rule;
    if (f.smoothing >= 0)
        cfg.smoothing_dim = f.smoothing;

    cfg.validate();
    return cfg;
}

int cmd_run(const RunFlags& flags)
{
    const folp::mc::ExperimentConfig cfg = build_config(flags);
    const folp::mc::SummaryTable table = folp::mc::run_experiment(cfg, flags.workers);

    folp::mc::emit_console(table, std::cout);
    if (!flags.out_path.empty()) {
        folp::mc::write_csv(table, flags.out_path);
        std::cout << "wrote " << flags.out_path << '\n';
    }

    const auto bad = folp::mc::rows_over_failure_threshold(table);
    for (const auto* row : bad)
        std::cerr << "warning: model " << row->model << " case "
                  << folp::dgp::to_string(row->noise_case) << " T=" << row->t_samples
                  << " gamma=" << row->gamma << " estimator "
                  << folp::mc::to_string(row->estimator) << ": " << row->failures
                  << "/" << row->replications << " replications failed\n";
    return bad.empty() ? 0 : 2;
}

int cmd_verify()
{
    const auto results = folp::selfcheck::run_all();
    bool all_pass = true;
    for (const auto& r : results) {
        std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name;
        if (!r.detail.empty())
            std::cout << " (" << r.detail << ")";
        std::cout << '\n';
        all_pass = all_pass && r.pass;
    }
    std::cout << (all_pass ? "all checks passed" : "some checks FAILED") << '\n';
    return all_pass ? 0 : 2;
}

int cmd_table(const std::string& in_path)
{
    const folp::mc::SummaryTable table = folp::mc::read_csv(in_path);
    folp::mc::emit_console(table, std::cout);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Optimal linear prediction for functional time series"};
    app.require_subcommand(1);

    RunFlags flags;
    auto* run = app.add_subcommand("run", "Run a Monte Carlo experiment");
    run->add_option("--config", flags.config_path, "Config file (key = value lines)");
    run->add_option("--model", flags.models, "Model ids (1..4)")->delimiter(',');
    run->add_option("--case", flags.cases, "Noise cases (BB, CBM, BM)")->delimiter(',');
    run->add_option("--T", flags.sample_sizes, "Sample sizes")->delimiter(',');
    run->add_option("--gamma", flags.gammas, "Rate exponents in (0, 1/2)")->delimiter(',');
    run->add_option("--estimator", flags.estimators,
                    "Estimators (fpca_ls, reduced_y, reduced_x, ridge)")
        ->delimiter(',');
    run->add_option("--reps", flags.reps, "Replications per cell");
    run->add_option("--seed", flags.seed, "Base seed");
    run->add_option("--grid", flags.grid, "Grid points (default 200)");
    run->add_option("--c-tau", flags.c_tau, "Threshold scale (default 0.01)");
    run->add_option("--c-cap", flags.c_cap, "Cap scale (default 0.5)");
    run->add_option("--ell-rule", flags.ell_rule, "Y-side rank rule (floor_sqrt_T)");
    run->add_option("--smoothing", flags.smoothing,
                    "Cubic B-spline representation dimension (default 100, 0 = off)");
    run->add_option("--workers", flags.workers,
                    "Worker threads (default: FOLP_WORKERS or processor count)");
    run->add_option("--out", flags.out_path, "Write the summary CSV here");

    auto* verify = app.add_subcommand("verify", "Run the property/oracle suite");

    std::string table_in;
    auto* table = app.add_subcommand("table", "Pretty-print a results CSV");
    table->add_option("--in", table_in, "Input CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1; // help/version exit cleanly, bad flags do not
    }

    try {
        if (run->parsed())
            return cmd_run(flags);
        if (verify->parsed())
            return cmd_verify();
        if (table->parsed())
            return cmd_table(table_in);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
