#include "fairalloc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "fairalloc/csv.hpp"
#include "fairalloc/hindsight.hpp"
#include "fairalloc/rng.hpp"

namespace fairalloc {

using nlohmann::json;

std::string to_string(OutputFormat format) { return format == OutputFormat::csv ? "csv" : "structured"; }

OutputFormat parse_output_format(const std::string& text) {
    if (text == "csv") return OutputFormat::csv;
    if (text == "structured") return OutputFormat::structured;
    throw ConfigError("unknown output format '" + text + "' (expected csv or structured)");
}

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> known, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
            throw ConfigError("unknown key '" + key + "' in " + where);
        }
    }
}

template <class T>
void read_field(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

PolicyConfig policy_from_json(const json& j) {
    if (j.is_string()) {
        PolicyConfig p;
        p.kind = parse_policy_kind(j.get<std::string>());
        return p;
    }
    reject_unknown_keys(j, {"kind", "schedule", "lambda", "xi", "lt", "epsilon", "label"}, "policy");
    PolicyConfig p;
    std::string kind = "saffe";
    std::string schedule = "constant";
    double lambda = 0.0;
    read_field(j, "kind", kind);
    read_field(j, "schedule", schedule);
    read_field(j, "lambda", lambda);
    read_field(j, "lt", p.guardrail_lt);
    read_field(j, "epsilon", p.epsilon);
    read_field(j, "label", p.label);
    p.kind = parse_policy_kind(kind);
    if (schedule == "concentration") {
        double xi = 0.1;
        read_field(j, "xi", xi);
        p.lambda = LambdaSchedule::concentration(xi);
    } else {
        p.lambda = LambdaSchedule{parse_lambda_kind(schedule), lambda};
    }
    p.validate();
    return p;
}

json policy_to_json(const PolicyConfig& p) {
    json j{{"kind", to_string(p.kind)},
           {"schedule", to_string(p.lambda.kind)},
           {"lambda", p.lambda.value},
           {"lt", p.guardrail_lt},
           {"epsilon", p.epsilon}};
    if (!p.label.empty()) j["label"] = p.label;
    return j;
}

std::vector<PolicyConfig> default_policies() {
    PolicyConfig saffe;
    PolicyConfig saffe_d;
    saffe_d.kind = PolicyKind::saffe_d;
    saffe_d.lambda = LambdaSchedule::sqrt_decay(0.02);
    PolicyConfig hope;
    hope.kind = PolicyKind::hope_online;
    PolicyConfig guarded;
    guarded.kind = PolicyKind::guarded_hope;
    PolicyConfig greedy;
    greedy.kind = PolicyKind::greedy;
    return {saffe, saffe_d, hope, guarded, greedy};
}

std::size_t resolve_threads(std::size_t requested, std::size_t configured) {
    std::size_t n = requested != 0 ? requested : configured;
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

// Runs fn(k) for k in [0, count) on a pool. The first failure by index is rethrown.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn) {
    std::atomic<std::size_t> next{0};
    std::mutex mutex;
    std::size_t failed_index = count;
    std::exception_ptr failure;
    auto worker = [&] {
        for (std::size_t k = next++; k < count; k = next++) {
            try {
                fn(k);
            } catch (...) {
                std::lock_guard lock(mutex);
                if (k < failed_index) {
                    failed_index = k;
                    failure = std::current_exception();
                }
            }
        }
    };
    threads = std::min(threads, std::max<std::size_t>(count, 1));
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < threads; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

[[noreturn]] void rethrow_with_context(const std::string& context) {
    try {
        throw;
    } catch (const Error& e) {
        throw Error(e.category(), context + ": " + e.what());
    } catch (const std::exception& e) {
        throw Error(ErrorCategory::invalid_input, context + ": " + e.what());
    }
}

double sample_std(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

} // namespace

void ExperimentConfig::validate() const {
    if (id.empty()) throw ConfigError("experiment id must not be empty");
    if (num_agents < 1 || horizon < 1) throw ConfigError("num_agents and horizon must be >= 1");
    if (episodes < 1) throw ConfigError("episodes must be >= 1");
    if (!(budget_fraction > 0.0) || !std::isfinite(budget_fraction)) throw ConfigError("budget_fraction must be > 0");
    if (noise_deltas.empty()) throw ConfigError("noise_deltas must not be empty");
    for (double d : noise_deltas) {
        if (!(d > -1.0)) throw ConfigError("every noise delta must be > -1");
    }
    if (!(xi > 0.0 && xi <= 1.0)) throw ConfigError("xi must lie in (0, 1]");
    for (const PolicyConfig& p : policies) p.validate();
    // Surfaces setting-level errors (group divisibility, arrival counts) before any work starts.
    configure_setting(setting, num_agents, horizon, expected_arrivals, master_seed, options);
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    const json j = parse_json(text);
    reject_unknown_keys(j,
                        {"id", "setting", "num_agents", "horizon", "expected_arrivals", "budget_fraction",
                         "fixed_mean", "mean_low", "mean_high", "std_ratio", "group_mean", "policies", "episodes",
                         "seed", "noise_deltas", "lambda_grid", "lambda_kind", "xi", "regime", "output", "format",
                         "threads"},
                        "experiment config");
    ExperimentConfig c;
    std::string setting = to_string(c.setting);
    std::string lambda_kind = to_string(c.lambda_kind);
    std::string regime = to_string(c.regime);
    std::string format = to_string(c.format);
    read_field(j, "id", c.id);
    read_field(j, "setting", setting);
    read_field(j, "num_agents", c.num_agents);
    read_field(j, "horizon", c.horizon);
    read_field(j, "expected_arrivals", c.expected_arrivals);
    read_field(j, "budget_fraction", c.budget_fraction);
    if (j.contains("fixed_mean")) {
        double m = 0.0;
        read_field(j, "fixed_mean", m);
        c.options.fixed_mean = m;
    }
    read_field(j, "mean_low", c.options.mean_low);
    read_field(j, "mean_high", c.options.mean_high);
    read_field(j, "std_ratio", c.options.std_ratio);
    read_field(j, "group_mean", c.options.group_mean);
    read_field(j, "episodes", c.episodes);
    read_field(j, "seed", c.master_seed);
    read_field(j, "noise_deltas", c.noise_deltas);
    read_field(j, "lambda_grid", c.lambda_grid);
    read_field(j, "lambda_kind", lambda_kind);
    read_field(j, "xi", c.xi);
    read_field(j, "regime", regime);
    read_field(j, "output", c.output);
    read_field(j, "format", format);
    read_field(j, "threads", c.threads);
    c.setting = parse_setting_name(setting);
    c.lambda_kind = parse_lambda_kind(lambda_kind);
    c.regime = parse_bound_regime(regime);
    c.format = parse_output_format(format);
    if (j.contains("policies")) {
        if (!j["policies"].is_array()) throw ConfigError("policies must be an array");
        for (const json& p : j["policies"]) c.policies.push_back(policy_from_json(p));
    } else {
        c.policies = default_policies();
    }
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    return from_json_text(read_file(path));
}

std::string ExperimentConfig::to_json_text() const {
    json j{{"id", id},
           {"setting", to_string(setting)},
           {"num_agents", num_agents},
           {"horizon", horizon},
           {"expected_arrivals", expected_arrivals},
           {"budget_fraction", budget_fraction},
           {"mean_low", options.mean_low},
           {"mean_high", options.mean_high},
           {"std_ratio", options.std_ratio},
           {"group_mean", options.group_mean},
           {"episodes", episodes},
           {"seed", master_seed},
           {"noise_deltas", noise_deltas},
           {"lambda_grid", lambda_grid},
           {"lambda_kind", to_string(lambda_kind)},
           {"xi", xi},
           {"regime", to_string(regime)},
           {"output", output},
           {"format", to_string(format)},
           {"threads", threads}};
    if (options.fixed_mean) j["fixed_mean"] = *options.fixed_mean;
    j["policies"] = json::array();
    for (const PolicyConfig& p : policies) j["policies"].push_back(policy_to_json(p));
    return j.dump(2);
}

PolicyConfig policy_from_json_text(const std::string& text) { return policy_from_json(parse_json(text)); }

std::uint64_t episode_seed(std::uint64_t master_seed, std::uint64_t episode) {
    KeyedRng rng{master_seed, static_cast<std::uint64_t>(RngStream::episode_seed), episode};
    return rng();
}

EpisodeSetup make_episode(const ExperimentConfig& config, std::uint64_t episode, double noise_delta) {
    const std::uint64_t seed = episode_seed(config.master_seed, episode);
    EpisodeSetup s;
    s.model = configure_setting(config.setting, config.num_agents, config.horizon, config.expected_arrivals, seed,
                                config.options);
    s.model.noise_delta = noise_delta;
    s.instance = Instance::uniform(config.num_agents, config.horizon,
                                   config.budget_fraction * expected_total_demand(s.model));
    s.demands = sample_episode(s.model, episode);
    return s;
}

const std::vector<std::string>& metric_names() {
    static const std::vector<std::string> names{"log_nsw",         "hindsight_log_nsw", "delta_log_nsw_raw",
                                                "delta_log_nsw",   "utilization_pct",   "delta_a_mean",
                                                "delta_a_max",     "delta_a_max_abs"};
    return names;
}

double metric_value(const MetricsReport& r, const std::string& name) {
    if (name == "log_nsw") return r.log_nsw;
    if (name == "hindsight_log_nsw") return r.hindsight_log_nsw;
    if (name == "delta_log_nsw_raw") return r.delta_log_nsw_raw;
    if (name == "delta_log_nsw") return r.delta_log_nsw;
    if (name == "utilization_pct") return r.utilization_pct;
    if (name == "delta_a_mean") return r.delta_a_mean;
    if (name == "delta_a_max") return r.delta_a_max;
    if (name == "delta_a_max_abs") return r.delta_a_max_abs;
    throw InvalidInput("unknown metric '" + name + "'");
}

void ResultTable::aggregate() {
    aggregates.clear();
    // Groups in order of first appearance.
    std::vector<std::pair<double, std::string>> keys;
    for (const ResultRow& r : rows) {
        std::pair<double, std::string> key{r.noise_delta, r.policy};
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    }
    for (const auto& [delta, policy] : keys) {
        for (const std::string& metric : metric_names()) {
            std::vector<double> xs;
            std::string experiment;
            for (const ResultRow& r : rows) {
                if (r.noise_delta == delta && r.policy == policy) {
                    xs.push_back(metric_value(r.metrics, metric));
                    experiment = r.experiment;
                }
            }
            double mean = 0.0;
            for (double x : xs) mean += x;
            mean /= static_cast<double>(xs.size());
            aggregates.push_back({experiment, delta, policy, metric, mean, sample_std(xs, mean), xs.size()});
        }
    }
}

const AggregateRow& ResultTable::find(const std::string& policy, const std::string& metric, double noise_delta) const {
    for (const AggregateRow& a : aggregates) {
        if (a.policy == policy && a.metric == metric && a.noise_delta == noise_delta) return a;
    }
    throw InvalidInput("no aggregate for policy '" + policy + "', metric '" + metric + "'");
}

std::size_t ResultTable::hindsight_violations(double tol) const {
    std::size_t count = 0;
    for (const ResultRow& r : rows) {
        if (r.metrics.log_nsw > r.metrics.hindsight_log_nsw + tol) ++count;
    }
    return count;
}

namespace {

struct EpisodeResult {
    std::vector<ResultRow> rows;
    std::vector<TimingRow> timings;
};

// Hindsight plus each policy on one realization.
EpisodeResult evaluate_episode(const std::string& experiment, double delta, std::uint64_t episode,
                               std::uint64_t seed, const Instance& instance, const DemandMatrix& demands,
                               const MomentTable& horizon_moments, const std::vector<PolicyConfig>& policies) {
    using clock = std::chrono::steady_clock;
    EpisodeResult out;
    auto t0 = clock::now();
    const HindsightSolution hs = solve_hindsight(instance, demands);
    out.rows.push_back({experiment, delta, episode, seed, "hindsight",
                        compute_metrics(instance, demands, hs.per_step, hs)});
    out.timings.push_back({"hindsight", episode, delta, std::chrono::duration<double>(clock::now() - t0).count()});
    for (const PolicyConfig& p : policies) {
        t0 = clock::now();
        const AllocationMatrix alloc = run_policy(instance, demands, horizon_moments, p);
        out.rows.push_back({experiment, delta, episode, seed, p.name(), compute_metrics(instance, demands, alloc, hs)});
        out.timings.push_back({p.name(), episode, delta, std::chrono::duration<double>(clock::now() - t0).count()});
    }
    return out;
}

ResultTable merge(std::vector<EpisodeResult>& parts) {
    ResultTable table;
    for (EpisodeResult& p : parts) {
        std::move(p.rows.begin(), p.rows.end(), std::back_inserter(table.rows));
        std::move(p.timings.begin(), p.timings.end(), std::back_inserter(table.timings));
    }
    table.aggregate();
    return table;
}

} // namespace

ResultTable run_experiment(const ExperimentConfig& config, std::size_t threads) {
    config.validate();
    const std::size_t episodes = config.episodes;
    const std::size_t tasks = episodes * config.noise_deltas.size();
    std::vector<EpisodeResult> parts(tasks);
    parallel_for(tasks, resolve_threads(threads, config.threads), [&](std::size_t k) {
        const double delta = config.noise_deltas[k / episodes];
        const std::uint64_t episode = k % episodes;
        const std::uint64_t seed = episode_seed(config.master_seed, episode);
        try {
            const EpisodeSetup s = make_episode(config, episode, delta);
            parts[k] = evaluate_episode(config.id, delta, episode, seed, s.instance, s.demands, moments(s.model, 0),
                                        config.policies);
        } catch (...) {
            rethrow_with_context("episode " + std::to_string(episode) + " (seed " + std::to_string(seed) + ")");
        }
    });
    return merge(parts);
}

const LambdaPoint& LambdaSearchResult::best() const {
    for (const LambdaPoint& p : points) {
        if (p.lambda == best_lambda) return p;
    }
    throw InvalidInput("lambda search has no points");
}

LambdaSearchResult lambda_search(const ExperimentConfig& config, const std::vector<double>& grid,
                                 LambdaSchedule::Kind kind, std::size_t threads) {
    if (grid.empty()) throw ConfigError("lambda grid must not be empty");
    ExperimentConfig c = config;
    c.noise_deltas = {config.noise_deltas.front()};
    c.policies.clear();
    for (double lambda : grid) {
        PolicyConfig p;
        p.kind = PolicyKind::saffe_d;
        p.lambda = LambdaSchedule{kind, lambda};
        p.label = "saffe_d(" + to_string(kind) + "=" + csv::format_double(lambda) + ")";
        c.policies.push_back(p);
    }
    const ResultTable table = run_experiment(c, threads);

    LambdaSearchResult result;
    result.kind = kind;
    bool have = false;
    double best_mean = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const AggregateRow& a = table.find(c.policies[k].label, "log_nsw", c.noise_deltas.front());
        LambdaPoint p{grid[k], a.mean, a.std, a.std / std::sqrt(static_cast<double>(a.count))};
        result.points.push_back(p);
        if (!have || p.mean_log_nsw > best_mean || (p.mean_log_nsw == best_mean && p.lambda < result.best_lambda)) {
            have = true;
            best_mean = p.mean_log_nsw;
            result.best_lambda = p.lambda;
        }
    }
    return result;
}

BoundReport validate_bounds(const ExperimentConfig& config, double xi, std::size_t threads) {
    config.validate();
    PolicyConfig policy;
    policy.kind = PolicyKind::saffe_d;
    policy.lambda = LambdaSchedule::concentration(xi);

    BoundReport report;
    report.xi = xi;
    report.regime = config.regime;
    report.gaps.assign(config.episodes, 0.0);
    std::vector<double> bounds(config.episodes, 0.0);
    const double delta = config.noise_deltas.front();
    parallel_for(config.episodes, resolve_threads(threads, config.threads), [&](std::size_t e) {
        try {
            const EpisodeSetup s = make_episode(config, e, delta);
            const HindsightSolution hs = solve_hindsight(s.instance, s.demands);
            const AllocationMatrix alloc = run_policy(s.instance, s.demands, s.model, policy);
            report.gaps[e] = compute_metrics(s.instance, s.demands, alloc, hs).delta_a_max_abs;
            bounds[e] = theorem_bound(s.instance, s.model, xi, config.regime);
        } catch (...) {
            rethrow_with_context("episode " + std::to_string(e));
        }
    });
    std::size_t within = 0;
    for (std::size_t e = 0; e < config.episodes; ++e) {
        if (report.gaps[e] <= bounds[e] + kFeasibilityTol) ++within;
        report.bound = std::max(report.bound, bounds[e]);
    }
    report.fraction_within = static_cast<double>(within) / static_cast<double>(config.episodes);
    report.passed = report.fraction_within >= 1.0 - xi;
    return report;
}

DemandMatrix erase_arrivals(const DemandMatrix& demands, double keep_prob, std::uint64_t seed) {
    if (!(keep_prob >= 0.0 && keep_prob <= 1.0)) throw InvalidInput("keep probability must lie in [0, 1]");
    DemandMatrix out = demands;
    for (std::size_t i = 0; i < demands.agents(); ++i) {
        std::vector<std::size_t> arrivals;
        for (std::size_t t = 0; t < demands.steps(); ++t)
            if (demands(t, i) > 0.0) arrivals.push_back(t);
        if (arrivals.empty()) continue;

        bool any = false;
        for (int attempt = 0; attempt <= kMaxRowRedraws && !any; ++attempt) {
            for (std::size_t t : arrivals) {
                KeyedRng rng{seed, static_cast<std::uint64_t>(RngStream::erase), i, t,
                             static_cast<std::uint64_t>(attempt)};
                const bool keep = keep_prob >= 1.0 || rng.uniform() < keep_prob;
                out(t, i) = keep ? demands(t, i) : 0.0;
                any = any || keep;
            }
        }
        if (!any) {
            KeyedRng rng{seed, static_cast<std::uint64_t>(RngStream::repair), i};
            const std::size_t t = arrivals[static_cast<std::size_t>(rng.uniform() * arrivals.size())];
            out(t, i) = demands(t, i);
        }
    }
    return out;
}

History ingest_sales_text(const std::string& text, const IngestOptions& options) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("sales file is empty");
    const std::vector<std::string> header = csv::split_line(line, options.delimiter);
    auto column = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw ParseError("line 1: missing column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t agent_col = column(options.agent_column);
    const std::size_t value_col = column(options.value_column);
    const std::size_t date_col = column(options.date_column);
    const std::size_t needed = std::max({agent_col, value_col, date_col}) + 1;

    History h;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> f = csv::split_line(line, options.delimiter);
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (f.size() < needed) throw ParseError(where + "expected at least " + std::to_string(needed) + " fields");
        Date date;
        try {
            date = parse_iso_date(f[date_col]);
        } catch (const ParseError& e) {
            throw ParseError(where + e.what());
        }
        double value = 0.0;
        std::size_t used = 0;
        try {
            value = std::stod(f[value_col], &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != f[value_col].size() || !std::isfinite(value)) {
            throw ParseError(where + "not a number: '" + f[value_col] + "'");
        }
        if (value < 0.0) throw ParseError(where + "negative sales value");
        if (f[agent_col].empty()) throw ParseError(where + "empty agent field");
        h.series[f[agent_col]][date] += value;
    }
    if (h.empty()) throw InvalidInput("sales file has no data rows");
    return h;
}

History ingest_sales(const std::filesystem::path& path, const IngestOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ingest_sales_text(ss.str(), options);
}

std::string history_to_csv(const History& history) {
    std::string out = "date,agent,value\n";
    for (const auto& [agent, series] : history.series) {
        for (const auto& [date, value] : series) {
            out += format_iso_date(date) + "," + csv::escape_field(agent) + "," + csv::format_double(value) + "\n";
        }
    }
    return out;
}

void RealDataConfig::validate() const {
    if (input.empty()) throw ConfigError("real-data config needs an input file");
    if (boundary.empty()) throw ConfigError("real-data config needs a boundary date");
    parse_iso_date(boundary);
    if (period < 1 || horizon < 1) throw ConfigError("period and horizon must be >= 1");
    if (keep_probs.empty()) throw ConfigError("keep_probs must not be empty");
    for (double p : keep_probs) {
        if (!(p > 0.0 && p <= 1.0)) throw ConfigError("keep probabilities must lie in (0, 1]");
    }
    if (!(budget_fraction > 0.0)) throw ConfigError("budget_fraction must be > 0");
    for (const PolicyConfig& p : policies) p.validate();
}

RealDataConfig RealDataConfig::from_json_text(const std::string& text) {
    const json j = parse_json(text);
    reject_unknown_keys(j,
                        {"id", "input", "agent_column", "value_column", "date_column", "boundary", "period",
                         "horizon", "keep_probs", "budget_fraction", "policies", "seed", "max_windows", "output",
                         "format", "threads"},
                        "real-data config");
    RealDataConfig c;
    std::string format = to_string(c.format);
    read_field(j, "id", c.id);
    read_field(j, "input", c.input);
    read_field(j, "agent_column", c.ingest.agent_column);
    read_field(j, "value_column", c.ingest.value_column);
    read_field(j, "date_column", c.ingest.date_column);
    read_field(j, "boundary", c.boundary);
    read_field(j, "period", c.period);
    read_field(j, "horizon", c.horizon);
    read_field(j, "keep_probs", c.keep_probs);
    read_field(j, "budget_fraction", c.budget_fraction);
    read_field(j, "seed", c.master_seed);
    read_field(j, "max_windows", c.max_windows);
    read_field(j, "output", c.output);
    read_field(j, "format", format);
    read_field(j, "threads", c.threads);
    c.format = parse_output_format(format);
    if (j.contains("policies")) {
        if (!j["policies"].is_array()) throw ConfigError("policies must be an array");
        for (const json& p : j["policies"]) c.policies.push_back(policy_from_json(p));
    } else {
        c.policies = default_policies();
    }
    c.validate();
    return c;
}

RealDataConfig RealDataConfig::load(const std::filesystem::path& path) { return from_json_text(read_file(path)); }

DemandModel window_model(const DemandModel& fitted, Date start, std::size_t horizon, double keep_prob) {
    if (!fitted.phase_origin) throw InvalidInput("fitted model has no phase origin");
    const auto period = static_cast<long>(fitted.horizon());
    long offset = (start - *fitted.phase_origin).count() % period;
    if (offset < 0) offset += period;
    DemandModel m = fitted;
    m.arrival_prob = ParameterTable(horizon, fitted.num_agents(), keep_prob);
    m.demand_mean = ParameterTable(horizon, fitted.num_agents());
    m.demand_std = ParameterTable(horizon, fitted.num_agents());
    m.phase_origin = start;
    for (std::size_t s = 0; s < horizon; ++s) {
        const auto row = static_cast<std::size_t>((offset + static_cast<long>(s)) % period);
        for (std::size_t i = 0; i < fitted.num_agents(); ++i) {
            m.demand_mean(s, i) = fitted.demand_mean(row, i);
            m.demand_std(s, i) = fitted.demand_std(row, i);
        }
    }
    return m;
}

ResultTable run_real_data(const RealDataConfig& config, const History& history, std::size_t threads) {
    config.validate();
    const Date boundary = parse_iso_date(config.boundary);
    const auto [fit_part, eval_part] = split_history(history, boundary);
    const DemandModel fitted = fit_empirical(fit_part, config.period);

    const Date last = eval_part.last_date();
    std::size_t windows = 0;
    while (boundary + std::chrono::days(static_cast<long>((windows + 1) * config.horizon) - 1) <= last) ++windows;
    if (config.max_windows != 0) windows = std::min(windows, config.max_windows);
    if (windows == 0) throw InvalidInput("evaluation range is shorter than one window");

    std::vector<std::string> agents;
    for (const auto& [label, series] : history.series) agents.push_back(label);

    const std::size_t tasks = windows * config.keep_probs.size();
    std::vector<EpisodeResult> parts(tasks);
    parallel_for(tasks, resolve_threads(threads, config.threads), [&](std::size_t k) {
        const double keep = config.keep_probs[k / windows];
        const std::uint64_t w = k % windows;
        const std::uint64_t seed = episode_seed(config.master_seed, w);
        const Date start = boundary + std::chrono::days(static_cast<long>(w * config.horizon));
        try {
            DemandMatrix demands(config.horizon, agents.size());
            for (std::size_t i = 0; i < agents.size(); ++i) {
                const auto& series = history.series.at(agents[i]);
                for (std::size_t s = 0; s < config.horizon; ++s) {
                    auto it = series.find(start + std::chrono::days(static_cast<long>(s)));
                    if (it != series.end()) demands(s, i) = it->second;
                }
            }
            if (keep < 1.0) demands = erase_arrivals(demands, keep, seed);
            const DemandModel model = window_model(fitted, start, config.horizon, keep);
            const Instance instance = Instance::uniform(agents.size(), config.horizon,
                                                        config.budget_fraction * expected_total_demand(model));
            parts[k] = evaluate_episode(config.id, keep, w, seed, instance, demands, moments(model, 0),
                                        config.policies);
        } catch (...) {
            rethrow_with_context("window starting " + format_iso_date(start));
        }
    });
    return merge(parts);
}

std::string raw_csv(const ResultTable& table) {
    std::string out = "experiment,noise_delta,episode,seed,policy";
    for (const std::string& m : metric_names()) out += "," + m;
    out += ",per_agent_delta\n";
    for (const ResultRow& r : table.rows) {
        out += csv::escape_field(r.experiment) + "," + csv::format_double(r.noise_delta) + "," +
               std::to_string(r.episode) + "," + std::to_string(r.seed) + "," + csv::escape_field(r.policy);
        for (const std::string& m : metric_names()) out += "," + csv::format_double(metric_value(r.metrics, m));
        std::string per_agent;
        for (std::size_t i = 0; i < r.metrics.per_agent_delta.size(); ++i) {
            if (i) per_agent += ";";
            per_agent += csv::format_double(r.metrics.per_agent_delta[i]);
        }
        out += "," + per_agent + "\n";
    }
    return out;
}

std::string aggregate_csv(const ResultTable& table) {
    std::string out = "experiment,noise_delta,policy,metric,mean,std,count\n";
    for (const AggregateRow& a : table.aggregates) {
        out += csv::escape_field(a.experiment) + "," + csv::format_double(a.noise_delta) + "," +
               csv::escape_field(a.policy) + "," + a.metric + "," + csv::format_double(a.mean) + "," +
               csv::format_double(a.std) + "," + std::to_string(a.count) + "\n";
    }
    return out;
}

std::string timing_csv(const ResultTable& table) {
    std::string out = "noise_delta,episode,policy,wall_seconds\n";
    for (const TimingRow& t : table.timings) {
        out += csv::format_double(t.noise_delta) + "," + std::to_string(t.episode) + "," +
               csv::escape_field(t.policy) + "," + csv::format_double(t.seconds) + "\n";
    }
    return out;
}

std::string structured_text(const ResultTable& table) {
    json j;
    j["rows"] = json::array();
    for (const ResultRow& r : table.rows) {
        json row{{"experiment", r.experiment}, {"noise_delta", r.noise_delta}, {"episode", r.episode},
                 {"seed", r.seed},             {"policy", r.policy}};
        for (const std::string& m : metric_names()) row[m] = metric_value(r.metrics, m);
        row["per_agent_delta"] = r.metrics.per_agent_delta;
        j["rows"].push_back(row);
    }
    j["aggregates"] = json::array();
    for (const AggregateRow& a : table.aggregates) {
        j["aggregates"].push_back({{"experiment", a.experiment},
                                   {"noise_delta", a.noise_delta},
                                   {"policy", a.policy},
                                   {"metric", a.metric},
                                   {"mean", a.mean},
                                   {"std", a.std},
                                   {"count", a.count}});
    }
    return j.dump(2) + "\n";
}

std::vector<std::filesystem::path> write_results(const ResultTable& table, const std::string& prefix,
                                                 OutputFormat format) {
    auto write = [](const std::filesystem::path& path, const std::string& text) {
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ResourceError("cannot write '" + path.string() + "'");
        out << text;
        if (!out) throw ResourceError("failed writing '" + path.string() + "'");
        return path;
    };
    std::vector<std::filesystem::path> written;
    if (format == OutputFormat::csv) {
        written.push_back(write(prefix + ".raw.csv", raw_csv(table)));
        written.push_back(write(prefix + ".aggregate.csv", aggregate_csv(table)));
    } else {
        written.push_back(write(prefix + ".json", structured_text(table)));
    }
    written.push_back(write(prefix + ".timing.csv", timing_csv(table)));
    return written;
}

} // namespace fairalloc
