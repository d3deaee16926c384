#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "fairalloc/csv.hpp"
#include "fairalloc/harness.hpp"

using namespace fairalloc;

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> episodes;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::size_t threads = 0;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--seed", o.seed, "Master seed");
    cmd->add_option("--episodes", o.episodes, "Number of episodes");
    cmd->add_option("--out", o.out, "Output path prefix");
    cmd->add_option("--format", o.format, "csv or structured")->check(CLI::IsMember({"csv", "structured"}));
    cmd->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
}

ExperimentConfig load_experiment(const std::string& path, const Overrides& o) {
    ExperimentConfig c = path.empty() ? ExperimentConfig::from_json_text("{}") : ExperimentConfig::load(path);
    if (o.seed) c.master_seed = *o.seed;
    if (o.episodes) c.episodes = *o.episodes;
    if (o.out) c.output = *o.out;
    if (o.format) c.format = parse_output_format(*o.format);
    if (o.threads) c.threads = o.threads;
    c.validate();
    return c;
}

void print_written(const std::vector<std::filesystem::path>& paths) {
    for (const auto& p : paths) std::cout << "wrote " << p.string() << "\n";
}

void print_summary(const ResultTable& table) {
    std::printf("%-34s %8s %14s %12s %10s %10s\n", "policy", "delta", "log_nsw", "util_pct", "dA_mean", "dA_max");
    for (const AggregateRow& a : table.aggregates) {
        if (a.metric != "log_nsw") continue;
        const double util = table.find(a.policy, "utilization_pct", a.noise_delta).mean;
        const double dmean = table.find(a.policy, "delta_a_mean", a.noise_delta).mean;
        const double dmax = table.find(a.policy, "delta_a_max", a.noise_delta).mean;
        std::printf("%-34s %8.3g %14.6f %12.4f %10.5f %10.5f\n", a.policy.c_str(), a.noise_delta, a.mean, util,
                    dmean, dmax);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fair sequential allocation benchmark"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides o;

    auto* run = app.add_subcommand("run", "Run a Monte-Carlo experiment");
    run->add_option("--config", config_path, "Experiment JSON")->check(CLI::ExistingFile);
    add_overrides(run, o);

    auto* search = app.add_subcommand("lambda-search", "Grid search of SAFFE-D's lambda by mean log-NSW");
    std::string kind_text;
    std::vector<double> grid;
    search->add_option("--config", config_path, "Experiment JSON")->check(CLI::ExistingFile);
    search->add_option("--kind", kind_text, "constant or sqrt_decay (default from config)");
    search->add_option("--grid", grid, "Lambda values")->delimiter(',');
    add_overrides(search, o);

    auto* bounds = app.add_subcommand("validate-bounds", "Check the SAFFE-D gap bound empirically");
    std::optional<double> xi;
    std::string regime_text;
    bounds->add_option("--config", config_path, "Experiment JSON")->check(CLI::ExistingFile);
    bounds->add_option("--xi", xi, "Confidence parameter in (0, 1]");
    bounds->add_option("--regime", regime_text, "balanced or unbalanced");
    add_overrides(bounds, o);

    auto* ingest = app.add_subcommand("ingest", "Aggregate a sales CSV into per-agent daily totals");
    std::string input;
    std::string boundary;
    IngestOptions ingest_options;
    ingest->add_option("--input", input, "Sales CSV")->required()->check(CLI::ExistingFile);
    ingest->add_option("--agent-column", ingest_options.agent_column);
    ingest->add_option("--value-column", ingest_options.value_column);
    ingest->add_option("--date-column", ingest_options.date_column);
    ingest->add_option("--boundary", boundary, "Split date (YYYY-MM-DD); writes .fit.csv and .eval.csv");
    ingest->add_option("--out", o.out, "Output path prefix")->required();

    auto* real = app.add_subcommand("real-data", "Replay historical demand in fixed windows");
    std::string real_config;
    real->add_option("--config", real_config, "Real-data JSON")->required()->check(CLI::ExistingFile);
    add_overrides(real, o);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            const ExperimentConfig c = load_experiment(config_path, o);
            const ResultTable table = run_experiment(c);
            print_summary(table);
            print_written(write_results(table, c.output, c.format));
        } else if (search->parsed()) {
            const ExperimentConfig c = load_experiment(config_path, o);
            const auto kind = kind_text.empty() ? c.lambda_kind : parse_lambda_kind(kind_text);
            const LambdaSearchResult r = lambda_search(c, grid.empty() ? c.lambda_grid : grid, kind);
            std::string out = "kind,lambda,mean_log_nsw,std_log_nsw,stderr_log_nsw,best\n";
            for (const LambdaPoint& p : r.points) {
                out += to_string(kind) + "," + csv::format_double(p.lambda) + "," + csv::format_double(p.mean_log_nsw) +
                       "," + csv::format_double(p.std_log_nsw) + "," + csv::format_double(p.stderr_log_nsw) + "," +
                       (p.lambda == r.best_lambda ? "1" : "0") + "\n";
            }
            std::cout << out;
            std::ofstream(c.output + ".lambda.csv", std::ios::binary) << out;
            std::cout << "best lambda " << r.best_lambda << "\nwrote " << c.output << ".lambda.csv\n";
        } else if (bounds->parsed()) {
            ExperimentConfig c = load_experiment(config_path, o);
            if (!regime_text.empty()) c.regime = parse_bound_regime(regime_text);
            const double x = xi.value_or(c.xi);
            const BoundReport r = validate_bounds(c, x);
            std::string out = "episode,gap\n";
            for (std::size_t e = 0; e < r.gaps.size(); ++e) {
                out += std::to_string(e) + "," + csv::format_double(r.gaps[e]) + "\n";
            }
            std::ofstream(c.output + ".bounds.csv", std::ios::binary) << out;
            std::printf("regime %s, xi %g: bound %.6g, within-bound fraction %.4f (need >= %.4f) -> %s\n",
                        to_string(r.regime).c_str(), x, r.bound, r.fraction_within, 1.0 - x,
                        r.passed ? "PASS" : "FAIL");
            return r.passed ? 0 : 1;
        } else if (ingest->parsed()) {
            const History h = ingest_sales(input, ingest_options);
            auto write = [](const std::string& path, const std::string& text) {
                std::ofstream(path, std::ios::binary) << text;
                std::cout << "wrote " << path << "\n";
            };
            if (boundary.empty()) {
                write(*o.out + ".csv", history_to_csv(h));
            } else {
                const auto [fit, eval] = split_history(h, parse_iso_date(boundary));
                write(*o.out + ".fit.csv", history_to_csv(fit));
                write(*o.out + ".eval.csv", history_to_csv(eval));
            }
        } else if (real->parsed()) {
            RealDataConfig c = RealDataConfig::load(real_config);
            if (o.seed) c.master_seed = *o.seed;
            if (o.episodes) c.max_windows = *o.episodes;
            if (o.out) c.output = *o.out;
            if (o.format) c.format = parse_output_format(*o.format);
            if (o.threads) c.threads = o.threads;
            const History h = ingest_sales(c.input, c.ingest);
            const ResultTable table = run_real_data(c, h);
            print_summary(table);
            print_written(write_results(table, c.output, c.format));
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.category());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
