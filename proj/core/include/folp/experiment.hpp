#pragma once

// Monte Carlo harness: experiment configuration, seed-deterministic
// replication, parallel execution, excess-MSPE summaries, and CSV /
// console emission.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "folp/dgp.hpp"
#include "folp/predictor.hpp"

namespace folp::mc {

enum class Estimator { FpcaLs, ReducedY, ReducedX, Ridge };

std::string to_string(Estimator e);
Estimator parse_estimator(const std::string& s);

struct ExperimentConfig {
    std::vector<int> models{1};
    std::vector<dgp::NoiseCase> cases{dgp::NoiseCase::BB};
    std::vector<Index> sample_sizes{100};
    std::vector<double> gammas{0.475};
    std::vector<Estimator> estimators{Estimator::FpcaLs};
    int replications = 300;
    std::uint64_t base_seed = 1;
    Index grid_points = 200;
    double c_tau = 0.01;
    double c_cap = 0.5;
    std::string ell_rule = "floor_sqrt_T";
    // Re-represent each generated observation with this many cubic
    // B-splines before fitting (the simulation study's smoothing step);
    // 0 fits directly on the grid.
    Index smoothing_dim = 100;

    /// Throws std::invalid_argument on violated invariants (empty lists,
    /// gamma outside (0, 1/2), sample sizes below 10, ...).
    void validate() const;
};

/// Flat key=value text format, '#' starts a comment, lists are
/// comma-separated. Unknown keys are rejected.
ExperimentConfig parse_config(std::istream& is);
ExperimentConfig load_config(const std::string& path);

/// One design cell of the experiment grid.
struct Cell {
    int model = 1;
    dgp::NoiseCase noise_case = dgp::NoiseCase::BB;
    Index t_samples = 100;
    double gamma = 0.475;
    Estimator estimator = Estimator::FpcaLs;
};

struct ReplicationRecord {
    Cell cell;
    int rep_index = 0;
    std::uint64_t seed = 0;
    bool failed = false;
    std::string fail_reason;
    Index k_selected = 0;
    std::optional<Index> ell_used;
    double empirical_mspe = 0.0;
    double excess_mspe = 0.0; // empirical_mspe - 1/6
};

/// Stable per-replication seed. Depends on the design cell but not on the
/// estimator, so estimators within a cell share the same dataset and
/// adding or removing estimators never shifts other cells' randomness.
std::uint64_t derive_seed(std::uint64_t base_seed, int model,
                          dgp::NoiseCase noise_case, Index t_samples,
                          double gamma, int rep_index);

/// Generates the cell's dataset for one replication, fits the cell's
/// estimator, and scores the in-sample MSPE. Degenerate-sample errors are
/// recorded as a failed replication, never thrown.
ReplicationRecord run_replication(const ExperimentConfig& config, const Cell& cell,
                                  int rep_index);

struct SummaryRow {
    int model = 1;
    dgp::NoiseCase noise_case = dgp::NoiseCase::BB;
    Index t_samples = 0;
    double gamma = 0.0;
    Estimator estimator = Estimator::FpcaLs;
    std::string ell_rule; // "none" when the estimator has no Y-side rank
    int replications = 0;
    double mean_excess_mspe = 0.0;
    double stderr_excess_mspe = 0.0;
    double mean_k = 0.0;
    int failures = 0;
};

struct SummaryTable {
    std::vector<SummaryRow> rows;
};

/// Runs the full Cartesian product of cells x replications. Replications
/// execute on n_workers threads (0 resolves through the FOLP_WORKERS
/// environment variable, then the processor count); aggregation order is
/// fixed, so the output is identical for any worker count.
SummaryTable run_experiment(const ExperimentConfig& config, int n_workers = 0);

/// CSV columns: model, case, T, gamma, estimator, ell_rule, replications,
/// mean_excess_mspe, stderr_excess_mspe, mean_k, failures. Doubles are
/// written shortest-round-trip, so re-parsing reproduces values exactly.
void emit_csv(const SummaryTable& table, std::ostream& os);
void write_csv(const SummaryTable& table, const std::string& path);

SummaryTable parse_csv(std::istream& is);
SummaryTable read_csv(const std::string& path);

/// Console table grouped by case then gamma, models as rows and sample
/// sizes as columns.
void emit_console(const SummaryTable& table, std::ostream& os);

/// True when some row failed more than 10% of its replications.
bool failure_threshold_exceeded(const SummaryTable& table);

/// Rows exceeding the 10% failure threshold (for warning output).
std::vector<const SummaryRow*> rows_over_failure_threshold(const SummaryTable& table);

/// Worker count actually used: requested if > 0, else FOLP_WORKERS, else
/// the number of available processors.
int resolve_workers(int requested);

} // namespace folp::mc
