#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fairalloc/core.hpp"
#include "fairalloc/demand.hpp"
#include "fairalloc/history.hpp"
#include "fairalloc/metrics.hpp"
#include "fairalloc/policies.hpp"

namespace fairalloc {

enum class OutputFormat { csv, structured };

std::string to_string(OutputFormat format);
OutputFormat parse_output_format(const std::string& text);

/// One synthetic Monte-Carlo experiment. Loaded from JSON; CLI flags override fields.
struct ExperimentConfig {
    std::string id = "experiment";
    SettingName setting = SettingName::symmetric;
    std::size_t num_agents = 10;
    std::size_t horizon = 10;
    double expected_arrivals = 2.0;
    double budget_fraction = 0.5;
    SettingOptions options;
    std::vector<PolicyConfig> policies;
    std::size_t episodes = 200;
    std::uint64_t master_seed = 1;
    std::vector<double> noise_deltas{0.0};
    std::vector<double> lambda_grid{0.0, 0.01, 0.02, 0.03, 0.05, 0.075, 0.1, 0.15, 0.2, 0.3, 0.5, 1.0};
    LambdaSchedule::Kind lambda_kind = LambdaSchedule::Kind::constant;
    double xi = 0.1;
    BoundRegime regime = BoundRegime::balanced;
    std::string output = "results";
    OutputFormat format = OutputFormat::csv;
    /// 0 means one worker per hardware thread.
    std::size_t threads = 0;

    /// Throws ConfigError for invalid fields.
    void validate() const;
    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig load(const std::filesystem::path& path);
    std::string to_json_text() const;
};

/// Per-episode derived seed; independent of thread count and scheduling.
std::uint64_t episode_seed(std::uint64_t master_seed, std::uint64_t episode);

/// Demand model and instance for one episode of an experiment.
struct EpisodeSetup {
    DemandModel model;
    Instance instance;
    DemandMatrix demands;
};
EpisodeSetup make_episode(const ExperimentConfig& config, std::uint64_t episode, double noise_delta);

struct ResultRow {
    std::string experiment;
    double noise_delta = 0.0;
    std::uint64_t episode = 0;
    std::uint64_t seed = 0;
    std::string policy;
    MetricsReport metrics;
};

struct AggregateRow {
    std::string experiment;
    double noise_delta = 0.0;
    std::string policy;
    std::string metric;
    double mean = 0.0;
    /// Sample standard deviation (n - 1 denominator; 0 for one episode).
    double std = 0.0;
    std::size_t count = 0;
};

struct TimingRow {
    std::string policy;
    std::uint64_t episode = 0;
    double noise_delta = 0.0;
    double seconds = 0.0;
};

/**
 * Raw per-(policy, episode) rows in a fixed order (noise delta, episode, then
 * hindsight followed by the configured policies), their aggregates, and wall
 * times kept apart so the raw rows are reproducible byte for byte.
 */
struct ResultTable {
    std::vector<ResultRow> rows;
    std::vector<AggregateRow> aggregates;
    std::vector<TimingRow> timings;

    /// Recomputes the aggregate rows from the raw rows.
    void aggregate();
    /// Mean and sample std of one metric for one policy and noise level.
    const AggregateRow& find(const std::string& policy, const std::string& metric, double noise_delta = 0.0) const;
    /// Number of rows whose log-NSW exceeds the hindsight log-NSW of the same episode by more than tol.
    std::size_t hindsight_violations(double tol = 1e-9) const;
};

/// Metric names in the order they appear in the raw CSV.
const std::vector<std::string>& metric_names();
double metric_value(const MetricsReport& report, const std::string& name);

/**
 * Runs every configured policy and the hindsight solution on each sampled
 * episode. `threads` overrides config.threads when nonzero. A policy failure
 * aborts the run; the error message names the episode and its seed.
 */
ResultTable run_experiment(const ExperimentConfig& config, std::size_t threads = 0);

struct LambdaPoint {
    double lambda = 0.0;
    double mean_log_nsw = 0.0;
    double std_log_nsw = 0.0;
    double stderr_log_nsw = 0.0;
};

struct LambdaSearchResult {
    LambdaSchedule::Kind kind = LambdaSchedule::Kind::constant;
    double best_lambda = 0.0;
    std::vector<LambdaPoint> points;

    const LambdaPoint& best() const;
};

/// SAFFE-D at every grid point on one common block of episodes; ties go to the smaller lambda.
LambdaSearchResult lambda_search(const ExperimentConfig& config, const std::vector<double>& grid,
                                 LambdaSchedule::Kind kind, std::size_t threads = 0);

struct BoundReport {
    double bound = 0.0;
    double xi = 0.0;
    BoundRegime regime = BoundRegime::balanced;
    /// Unnormalized max_i |online total - hindsight total| per episode.
    std::vector<double> gaps;
    double fraction_within = 0.0;
    bool passed = false;
};

/**
 * Runs SAFFE-D with lambda(t) = sqrt((T - t) / xi) and compares each episode's
 * largest total-allocation gap to theorem_bound. Passes when at least 1 - xi
 * of the episodes fall within the bound.
 */
BoundReport validate_bounds(const ExperimentConfig& config, double xi, std::size_t threads = 0);

/**
 * Keeps each positive entry with probability keep_prob. An agent left without
 * any arrival has its keep coins redrawn like the sampler's row redraw; when
 * that keeps failing, one of its original arrivals is restored.
 */
DemandMatrix erase_arrivals(const DemandMatrix& demands, double keep_prob, std::uint64_t seed);

struct IngestOptions {
    std::string agent_column = "store";
    std::string value_column = "sales";
    std::string date_column = "date";
    char delimiter = ',';
};

/// Per-agent daily totals from a sales CSV. Throws ParseError naming the offending line.
History ingest_sales(const std::filesystem::path& path, const IngestOptions& options = {});
History ingest_sales_text(const std::string& text, const IngestOptions& options = {});

/// date,agent,value rows sorted by agent then date; reads back with agent_column "agent", value_column "value".
std::string history_to_csv(const History& history);

/// Replay of historical demand in fixed windows with fitted moments.
struct RealDataConfig {
    std::string id = "real-data";
    std::string input;
    IngestOptions ingest;
    /// First date of the evaluation range.
    std::string boundary;
    std::size_t period = 7;
    std::size_t horizon = 7;
    std::vector<double> keep_probs{1.0};
    double budget_fraction = 0.5;
    std::vector<PolicyConfig> policies;
    std::uint64_t master_seed = 1;
    /// 0 uses every complete window in the evaluation range.
    std::size_t max_windows = 0;
    std::string output = "real-data";
    OutputFormat format = OutputFormat::csv;
    std::size_t threads = 0;

    void validate() const;
    static RealDataConfig from_json_text(const std::string& text);
    static RealDataConfig load(const std::filesystem::path& path);
};

/**
 * Fits seasonal moments on the history before the boundary and replays the
 * rest in consecutive windows of `horizon` days. Each window is one episode;
 * keep probabilities below 1 erase arrivals and are reflected in the
 * policies' arrival probabilities. The budget is budget_fraction times the
 * window's expected demand under the fitted model. Rows use the keep
 * probability in the noise_delta column.
 */
ResultTable run_real_data(const RealDataConfig& config, const History& history, std::size_t threads = 0);

/// Fitted model shifted so step 0 falls on `start`.
DemandModel window_model(const DemandModel& fitted, Date start, std::size_t horizon, double keep_prob);

/// Raw rows as CSV (header included).
std::string raw_csv(const ResultTable& table);
/// Long-format aggregates: experiment,noise_delta,policy,metric,mean,std,count.
std::string aggregate_csv(const ResultTable& table);
std::string timing_csv(const ResultTable& table);
/// Raw and aggregate rows as one JSON document.
std::string structured_text(const ResultTable& table);

/**
 * Writes <prefix>.raw.csv, <prefix>.aggregate.csv and <prefix>.timing.csv, or
 * <prefix>.json and <prefix>.timing.csv for the structured format. Returns the
 * paths written.
 */
std::vector<std::filesystem::path> write_results(const ResultTable& table, const std::string& prefix,
                                                 OutputFormat format);

/// PolicyConfig <-> JSON text for a single policy object.
PolicyConfig policy_from_json_text(const std::string& text);

} // namespace fairalloc
