#include "folp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace folp::mc {

std::string to_string(Estimator e)
{
    switch (e) {
    case Estimator::FpcaLs: return "fpca_ls";
    case Estimator::ReducedY: return "reduced_y";
    case Estimator::ReducedX: return "reduced_x";
    case Estimator::Ridge: return "ridge";
    }
    throw std::invalid_argument("to_string: unknown estimator");
}

Estimator parse_estimator(const std::string& s)
{
    if (s == "fpca_ls") return Estimator::FpcaLs;
    if (s == "reduced_y") return Estimator::ReducedY;
    if (s == "reduced_x") return Estimator::ReducedX;
    if (s == "ridge") return Estimator::Ridge;
    throw std::invalid_argument("parse_estimator: unknown estimator '" + s + "'");
}

void ExperimentConfig::validate() const
{
    if (models.empty() || cases.empty() || sample_sizes.empty() || gammas.empty()
        || estimators.empty())
        throw std::invalid_argument("ExperimentConfig: empty design list");
    for (int m : models)
        if (m < 1 || m > 4)
            throw std::invalid_argument("ExperimentConfig: model id must be 1..4");
    for (Index t : sample_sizes)
        if (t < 10)
            throw std::invalid_argument("ExperimentConfig: sample sizes must be >= 10");
    for (double g : gammas)
        if (!(g > 0.0) || !(g < 0.5))
            throw std::invalid_argument("ExperimentConfig: gamma must lie in (0, 1/2)");
    if (replications < 1)
        throw std::invalid_argument("ExperimentConfig: replications must be >= 1");
    if (grid_points < 2)
        throw std::invalid_argument("ExperimentConfig: grid_points must be >= 2");
    if (!(c_tau > 0.0) || !(c_cap > 0.0))
        throw std::invalid_argument("ExperimentConfig: c_tau and c_cap must be positive");
    if (ell_rule != "floor_sqrt_T")
        throw std::invalid_argument("ExperimentConfig: unsupported ell_rule '" + ell_rule + "'");
    if (smoothing_dim != 0 && (smoothing_dim < 4 || smoothing_dim > grid_points))
        throw std::invalid_argument(
            "ExperimentConfig: smoothing_dim must be 0 or in [4, grid_points]");
}

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (!item.empty())
            out.push_back(item);
    }
    return out;
}

long long parse_int(const std::string& s, const char* key)
{
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::invalid_argument(std::string("config: bad integer for ") + key);
    return v;
}

double parse_double(const std::string& s, const char* key)
{
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::invalid_argument(std::string("config: bad number for ") + key);
    return v;
}

} // namespace

ExperimentConfig parse_config(std::istream& is)
{
    ExperimentConfig cfg;
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key = value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (key == "models") {
            cfg.models.clear();
            for (const auto& v : split_list(value))
                cfg.models.push_back(static_cast<int>(parse_int(v, "models")));
        } else if (key == "cases") {
            cfg.cases.clear();
            for (const auto& v : split_list(value))
                cfg.cases.push_back(dgp::parse_noise_case(v));
        } else if (key == "sample_sizes") {
            cfg.sample_sizes.clear();
            for (const auto& v : split_list(value))
                cfg.sample_sizes.push_back(parse_int(v, "sample_sizes"));
        } else if (key == "gammas") {
            cfg.gammas.clear();
            for (const auto& v : split_list(value))
                cfg.gammas.push_back(parse_double(v, "gammas"));
        } else if (key == "estimators") {
            cfg.estimators.clear();
            for (const auto& v : split_list(value))
                cfg.estimators.push_back(parse_estimator(v));
        } else if (key == "replications") {
            cfg.replications = static_cast<int>(parse_int(value, "replications"));
        } else if (key == "base_seed") {
            cfg.base_seed = static_cast<std::uint64_t>(parse_int(value, "base_seed"));
        } else if (key == "grid_points") {
            cfg.grid_points = parse_int(value, "grid_points");
        } else if (key == "c_tau") {
            cfg.c_tau = parse_double(value, "c_tau");
        } else if (key == "c_cap") {
            cfg.c_cap = parse_double(value, "c_cap");
        } else if (key == "ell_rule") {
            cfg.ell_rule = value;
        } else if (key == "smoothing_dim") {
            cfg.smoothing_dim = parse_int(value, "smoothing_dim");
        } else {
            throw std::invalid_argument("config: unknown key '" + key + "'");
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw std::invalid_argument("load_config: cannot open " + path);
    return parse_config(is);
}

namespace {

// splitmix64 finalizer; chained over the cell fields for a stable,
// platform-independent seed.
std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

std::uint64_t derive_seed(std::uint64_t base_seed, int model,
                          dgp::NoiseCase noise_case, Index t_samples,
                          double gamma, int rep_index)
{
    std::uint64_t h = mix64(base_seed);
    h = mix64(h ^ static_cast<std::uint64_t>(model));
    h = mix64(h ^ static_cast<std::uint64_t>(noise_case));
    h = mix64(h ^ static_cast<std::uint64_t>(t_samples));
    h = mix64(h ^ std::bit_cast<std::uint64_t>(gamma));
    h = mix64(h ^ static_cast<std::uint64_t>(rep_index));
    return h;
}

namespace {

Index ell_for(const ExperimentConfig& cfg, Index t_samples)
{
    // Currently the only supported rule: floor(sqrt(T)), clamped to the
    // grid dimension.
    Index ell = static_cast<Index>(std::floor(std::sqrt(static_cast<double>(t_samples))));
    return std::clamp<Index>(ell, 1, cfg.grid_points);
}

// Fit the cell's estimator on an already generated dataset and fill in
// the score fields.
void score_replication(const ExperimentConfig& cfg, const Cell& cell,
                       const dgp::GeneratedData& data, ReplicationRecord& rec)
{
    const ElbowParams params{cfg.c_tau, cfg.c_cap, cell.gamma};
    FittedPredictor p;
    switch (cell.estimator) {
    case Estimator::FpcaLs:
        p = fit_fpca_ls(data.x, data.y, params);
        break;
    case Estimator::ReducedY:
        rec.ell_used = ell_for(cfg, cell.t_samples);
        p = fit_fpca_ls_reduced(data.x, data.y, params, *rec.ell_used,
                                ReductionBasis::YEigs);
        break;
    case Estimator::ReducedX:
        rec.ell_used = ell_for(cfg, cell.t_samples);
        p = fit_fpca_ls_reduced(data.x, data.y, params, *rec.ell_used,
                                ReductionBasis::XEigs);
        break;
    case Estimator::Ridge: {
        // Mirrors the elbow threshold scale; trace = S_1 norm for the PSD
        // sample covariance.
        const double s1 = trace(sample_cov(data.x));
        const double ridge_tau = cfg.c_tau * s1
            * std::pow(static_cast<double>(cell.t_samples), -cell.gamma);
        p = fit_ridge(data.x, data.y, ridge_tau);
        break;
    }
    }
    rec.k_selected = p.k;
    rec.empirical_mspe = empirical_mspe(p, data.x, data.y);
    rec.excess_mspe = rec.empirical_mspe - data.sigma_min_true;
}

dgp::ModelSpec spec_for(const ExperimentConfig& cfg, int model,
                        dgp::NoiseCase noise_case, Index t_samples)
{
    dgp::ModelSpec spec;
    spec.model_id = model;
    spec.noise_case = noise_case;
    spec.t_samples = t_samples;
    spec.grid = make_grid(cfg.grid_points);
    return spec;
}

// Re-represent both datasets in the smoothing subspace; the reference
// level 1/6 for the excess is kept as is.
void apply_smoothing(const OperatorMatrix* projector, dgp::GeneratedData& data)
{
    if (!projector)
        return;
    data.x.coords = projector->entries * data.x.coords;
    data.y.coords = projector->entries * data.y.coords;
}

} // namespace

ReplicationRecord run_replication(const ExperimentConfig& cfg, const Cell& cell,
                                  int rep_index)
{
    ReplicationRecord rec;
    rec.cell = cell;
    rec.rep_index = rep_index;
    rec.seed = derive_seed(cfg.base_seed, cell.model, cell.noise_case,
                           cell.t_samples, cell.gamma, rep_index);
    try {
        std::optional<OperatorMatrix> projector;
        if (cfg.smoothing_dim > 0)
            projector = dgp::smoothing_projector(make_grid(cfg.grid_points),
                                                 cfg.smoothing_dim);
        dgp::GeneratedData data = dgp::generate_dataset(
            spec_for(cfg, cell.model, cell.noise_case, cell.t_samples), rec.seed);
        apply_smoothing(projector ? &*projector : nullptr, data);
        score_replication(cfg, cell, data, rec);
    } catch (const std::exception& e) {
        rec.failed = true;
        rec.fail_reason = e.what();
    }
    return rec;
}

namespace {

struct DataCell {
    int model;
    dgp::NoiseCase noise_case;
    Index t_samples;
    double gamma;
};

// One dataset, every estimator.
std::vector<ReplicationRecord> run_group(const ExperimentConfig& cfg,
                                         const DataCell& dc, int rep_index,
                                         const OperatorMatrix* projector)
{
    std::vector<ReplicationRecord> out;
    out.reserve(cfg.estimators.size());

    const std::uint64_t seed = derive_seed(cfg.base_seed, dc.model, dc.noise_case,
                                           dc.t_samples, dc.gamma, rep_index);

    std::optional<dgp::GeneratedData> data;
    std::string generation_error;
    try {
        data = dgp::generate_dataset(
            spec_for(cfg, dc.model, dc.noise_case, dc.t_samples), seed);
        apply_smoothing(projector, *data);
    } catch (const std::exception& e) {
        data.reset();
        generation_error = e.what();
    }

    for (Estimator est : cfg.estimators) {
        ReplicationRecord rec;
        rec.cell = Cell{dc.model, dc.noise_case, dc.t_samples, dc.gamma, est};
        rec.rep_index = rep_index;
        rec.seed = seed;
        if (!data) {
            rec.failed = true;
            rec.fail_reason = generation_error;
        } else {
            try {
                score_replication(cfg, rec.cell, *data, rec);
            } catch (const std::exception& e) {
                rec.failed = true;
                rec.fail_reason = e.what();
            }
        }
        out.push_back(std::move(rec));
    }
    return out;
}

} // namespace

int resolve_workers(int requested)
{
    if (requested > 0)
        return requested;
    if (const char* env = std::getenv("FOLP_WORKERS")) {
        const int v = std::atoi(env);
        if (v > 0)
            return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

SummaryTable run_experiment(const ExperimentConfig& cfg, int n_workers)
{
    cfg.validate();

    std::vector<DataCell> cells;
    for (int model : cfg.models)
        for (dgp::NoiseCase noise_case : cfg.cases)
            for (Index t : cfg.sample_sizes)
                for (double gamma : cfg.gammas)
                    cells.push_back(DataCell{model, noise_case, t, gamma});

    const int reps = cfg.replications;
    const std::size_t total = cells.size() * static_cast<std::size_t>(reps);
    std::vector<std::vector<ReplicationRecord>> results(total);

    std::optional<OperatorMatrix> projector;
    if (cfg.smoothing_dim > 0)
        projector =
            dgp::smoothing_projector(make_grid(cfg.grid_points), cfg.smoothing_dim);
    const OperatorMatrix* proj_ptr = projector ? &*projector : nullptr;

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= total)
                return;
            try {
                const std::size_t cell_i = i / static_cast<std::size_t>(reps);
                const int rep = static_cast<int>(i % static_cast<std::size_t>(reps));
                results[i] = run_group(cfg, cells[cell_i], rep, proj_ptr);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error)
                    first_error = std::current_exception();
            }
        }
    };

    const int workers = std::max(1, std::min<int>(resolve_workers(n_workers),
                                                  static_cast<int>(total)));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }
    if (first_error)
        std::rethrow_exception(first_error);

    // Aggregation in a fixed order, independent of scheduling.
    SummaryTable table;
    for (std::size_t cell_i = 0; cell_i < cells.size(); ++cell_i) {
        for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
            const DataCell& dc = cells[cell_i];
            SummaryRow row;
            row.model = dc.model;
            row.noise_case = dc.noise_case;
            row.t_samples = dc.t_samples;
            row.gamma = dc.gamma;
            row.estimator = cfg.estimators[e];
            row.ell_rule = (row.estimator == Estimator::ReducedY
                            || row.estimator == Estimator::ReducedX)
                ? cfg.ell_rule
                : "none";
            row.replications = reps;

            double sum = 0.0, k_sum = 0.0;
            int ok = 0;
            for (int rep = 0; rep < reps; ++rep) {
                const auto& rec =
                    results[cell_i * static_cast<std::size_t>(reps)
                            + static_cast<std::size_t>(rep)][e];
                if (rec.failed) {
                    ++row.failures;
                    continue;
                }
                sum += rec.excess_mspe;
                k_sum += static_cast<double>(rec.k_selected);
                ++ok;
            }
            if (ok > 0) {
                row.mean_excess_mspe = sum / ok;
                row.mean_k = k_sum / ok;
            } else {
                row.mean_excess_mspe = std::numeric_limits<double>::quiet_NaN();
                row.mean_k = std::numeric_limits<double>::quiet_NaN();
            }
            if (ok > 1) {
                double ss = 0.0;
                for (int rep = 0; rep < reps; ++rep) {
                    const auto& rec =
                        results[cell_i * static_cast<std::size_t>(reps)
                                + static_cast<std::size_t>(rep)][e];
                    if (rec.failed)
                        continue;
                    const double d = rec.excess_mspe - row.mean_excess_mspe;
                    ss += d * d;
                }
                row.stderr_excess_mspe = std::sqrt(ss / (ok - 1) / ok);
            }
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

namespace {

std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_csv_double(const std::string& s, const char* col)
{
    if (s == "nan")
        return std::numeric_limits<double>::quiet_NaN();
    return parse_double(s, col);
}

constexpr const char* kCsvHeader =
    "model,case,T,gamma,estimator,ell_rule,replications,mean_excess_mspe,"
    "stderr_excess_mspe,mean_k,failures";

} // namespace

void emit_csv(const SummaryTable& table, std::ostream& os)
{
    os << kCsvHeader << '\n';
    for (const auto& r : table.rows) {
        os << r.model << ',' << dgp::to_string(r.noise_case) << ',' << r.t_samples
           << ',' << format_double(r.gamma) << ',' << to_string(r.estimator) << ','
           << r.ell_rule << ',' << r.replications << ','
           << format_double(r.mean_excess_mspe) << ','
           << format_double(r.stderr_excess_mspe) << ',' << format_double(r.mean_k)
           << ',' << r.failures << '\n';
    }
}

void write_csv(const SummaryTable& table, const std::string& path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("write_csv: cannot open " + path);
    emit_csv(table, os);
}

SummaryTable parse_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line))
        throw std::invalid_argument("parse_csv: empty input");
    if (trim(line) != kCsvHeader)
        throw std::invalid_argument("parse_csv: unexpected header");

    SummaryTable table;
    while (std::getline(is, line)) {
        line = trim(line);
        if (line.empty())
            continue;
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ls(line);
        while (std::getline(ls, field, ','))
            fields.push_back(field);
        if (fields.size() != 11)
            throw std::invalid_argument("parse_csv: expected 11 columns");

        SummaryRow r;
        r.model = static_cast<int>(parse_int(fields[0], "model"));
        r.noise_case = dgp::parse_noise_case(fields[1]);
        r.t_samples = parse_int(fields[2], "T");
        r.gamma = parse_csv_double(fields[3], "gamma");
        r.estimator = parse_estimator(fields[4]);
        r.ell_rule = fields[5];
        r.replications = static_cast<int>(parse_int(fields[6], "replications"));
        r.mean_excess_mspe = parse_csv_double(fields[7], "mean_excess_mspe");
        r.stderr_excess_mspe = parse_csv_double(fields[8], "stderr_excess_mspe");
        r.mean_k = parse_csv_double(fields[9], "mean_k");
        r.failures = static_cast<int>(parse_int(fields[10], "failures"));
        table.rows.push_back(std::move(r));
    }
    return table;
}

SummaryTable read_csv(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::invalid_argument("read_csv: cannot open " + path);
    return parse_csv(is);
}

void emit_console(const SummaryTable& table, std::ostream& os)
{
    // Group keys in first-appearance order: (case, gamma, estimator).
    struct GroupKey {
        dgp::NoiseCase noise_case;
        double gamma;
        Estimator estimator;
        bool operator==(const GroupKey&) const = default;
    };
    std::vector<GroupKey> groups;
    for (const auto& r : table.rows) {
        const GroupKey k{r.noise_case, r.gamma, r.estimator};
        if (std::find(groups.begin(), groups.end(), k) == groups.end())
            groups.push_back(k);
    }
    std::stable_sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) {
        if (a.noise_case != b.noise_case)
            return static_cast<int>(a.noise_case) < static_cast<int>(b.noise_case);
        if (a.gamma != b.gamma)
            return a.gamma > b.gamma; // larger gamma first, as in the usual layout
        return static_cast<int>(a.estimator) < static_cast<int>(b.estimator);
    });

    for (const auto& g : groups) {
        std::vector<const SummaryRow*> rows;
        std::vector<Index> ts;
        std::vector<int> models;
        for (const auto& r : table.rows) {
            if (GroupKey{r.noise_case, r.gamma, r.estimator} == g) {
                rows.push_back(&r);
                if (std::find(ts.begin(), ts.end(), r.t_samples) == ts.end())
                    ts.push_back(r.t_samples);
                if (std::find(models.begin(), models.end(), r.model) == models.end())
                    models.push_back(r.model);
            }
        }
        std::sort(ts.begin(), ts.end());
        std::sort(models.begin(), models.end());

        os << "Case " << dgp::to_string(g.noise_case) << ", gamma = " << g.gamma
           << ", estimator = " << to_string(g.estimator) << '\n';
        os << std::setw(10) << "T";
        for (Index t : ts)
            os << std::setw(9) << t;
        os << '\n';
        for (int m : models) {
            os << "   Model " << m;
            for (Index t : ts) {
                const SummaryRow* hit = nullptr;
                for (const auto* r : rows)
                    if (r->model == m && r->t_samples == t)
                        hit = r;
                if (hit)
                    os << std::setw(9) << std::fixed << std::setprecision(3)
                       << hit->mean_excess_mspe;
                else
                    os << std::setw(9) << '-';
                os.unsetf(std::ios::fixed);
            }
            os << '\n';
        }
        os << '\n';
    }
}

bool failure_threshold_exceeded(const SummaryTable& table)
{
    return !rows_over_failure_threshold(table).empty();
}

std::vector<const SummaryRow*> rows_over_failure_threshold(const SummaryTable& table)
{
    std::vector<const SummaryRow*> out;
    for (const auto& r : table.rows)
        if (r.replications > 0
            && r.failures > 0.1 * static_cast<double>(r.replications))
            out.push_back(&r);
    return out;
}

} // namespace folp::mc
