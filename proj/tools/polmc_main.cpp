// Command-line driver: inference, temperature sweeps, policy evaluation and
// instance generation, all seeded and reproducible.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "polmc/ctp.hpp"
#include "polmc/rocksample.hpp"
#include "polmc/sweep.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::optional<std::string> env;
    std::optional<std::string> instance;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> sampler;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool config_required = true) {
    auto* config = cmd->add_option("--config", opts.config_path, "experiment config JSON");
    if (config_required) config->required();
    cmd->add_option("--env", opts.env, "environment: ctp or rocksample");
    cmd->add_option("--instance", opts.instance, "instance JSON path");
    cmd->add_option("--seed", opts.seed, "random seed override");
    cmd->add_option("--sampler", opts.sampler, "sampler: mh, lmh or is");
}

polmc::ExperimentConfig resolve_config(const CommonOptions& opts) {
    polmc::ExperimentConfig config = polmc::ExperimentConfig::from_json_file(opts.config_path);
    if (opts.env) config.env = polmc::env_from_string(*opts.env);
    if (opts.instance) config.instance_path = *opts.instance;
    if (opts.seed) config.seed = *opts.seed;
    if (opts.sampler) config.sampler = polmc::sampler_from_string(*opts.sampler);
    config.validate();
    return config;
}

void print_summary(const polmc::EvalSummary& row) {
    std::cout << row.tag;
    if (!std::isnan(row.temperature)) std::cout << " @ T=" << row.temperature;
    std::cout << ": mean reward " << row.mean_reward << " (stderr " << row.std_error << ", n="
              << row.n_episodes << ")\n";
}

int cmd_infer(const CommonOptions& opts) {
    const auto config = resolve_config(opts);
    const auto outdir = polmc::resolve_outdir();
    const auto sim = polmc::make_simulator(config);
    const polmc::ThetaVector mode = polmc::infer_mode(config, *sim, outdir);
    const auto theta_path = outdir / "theta.json";
    polmc::save_theta_json(mode, theta_path);
    std::cout << "inferred mode written to " << theta_path.string() << "\n";
    return 0;
}

int cmd_sweep(const CommonOptions& opts) {
    const auto config = resolve_config(opts);
    const auto outdir = polmc::resolve_outdir();
    const polmc::SweepResult result = polmc::run_sweep(config, outdir);
    polmc::emit_plot_data(result.sweep_csv, outdir / "plot.csv");
    for (const auto& row : result.rows) print_summary(row);
    std::cout << "sweep written to " << result.sweep_csv.string() << "\n";
    return 0;
}

int cmd_evaluate(const CommonOptions& opts, const std::string& theta_path) {
    const auto config = resolve_config(opts);
    const auto outdir = polmc::resolve_outdir();
    const auto sim = polmc::make_simulator(config);
    const polmc::ThetaVector theta = polmc::load_theta_json(sim->theta_prior(), theta_path);
    polmc::RngStream rng(config.seed);

    std::vector<polmc::EvalSummary> rows;
    if (config.env == polmc::EnvKind::Ctp) {
        const auto& ctp = dynamic_cast<const polmc::CtpSimulator&>(*sim);
        const auto params = polmc::ctp_params_from_theta(ctp.instance(), theta);
        const auto agents =
            polmc::evaluate_ctp_agents(ctp.instance(), params, config.eval_episodes, rng);
        rows = {agents.policy, agents.random_agent, agents.clairvoyant};
        std::cout << "connected weathers: " << agents.weathers_connected << " of "
                  << agents.weathers_drawn << "\n";
    } else {
        rows = {polmc::evaluate_policy(*sim, theta, config.eval_episodes, rng)};
    }

    std::ofstream out(outdir / "eval.csv", std::ios::binary);
    out << "temperature,tag,mean_reward,std_error,n_episodes\n";
    for (const auto& row : rows) {
        char mean[32], se[32];
        std::snprintf(mean, sizeof mean, "%.17g", row.mean_reward);
        std::snprintf(se, sizeof se, "%.17g", row.std_error);
        out << ',' << row.tag << ',' << mean << ',' << se << ',' << row.n_episodes << '\n';
        print_summary(row);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian policy search over trace-parameterized simulators"};
    app.require_subcommand(1);

    CommonOptions infer_opts, sweep_opts, eval_opts;
    std::string theta_path;

    auto* infer = app.add_subcommand("infer", "annealed inference; writes theta.json and chains");
    add_common(infer, infer_opts);

    auto* sweep = app.add_subcommand("sweep", "temperature sweep with evaluation and baselines");
    add_common(sweep, sweep_opts);

    auto* evaluate = app.add_subcommand("evaluate", "evaluate a saved policy over fresh episodes");
    add_common(evaluate, eval_opts);
    evaluate->add_option("--theta", theta_path, "policy JSON to evaluate")->required();

    auto* gen = app.add_subcommand("gen-instance", "generate a seeded instance JSON");
    std::string gen_env = "ctp";
    std::uint32_t gen_nodes = 20, gen_edges = 46, gen_n = 7, gen_rocks = 8;
    std::uint64_t gen_seed = 1;
    double gen_open_prob = 0.5;
    std::string gen_output;
    gen->add_option("--env", gen_env, "ctp or rocksample")->required();
    gen->add_option("--nodes", gen_nodes, "ctp: node count");
    gen->add_option("--edges", gen_edges, "ctp: edge count");
    gen->add_option("--open-prob", gen_open_prob, "ctp: openness probability for every edge");
    gen->add_option("--n", gen_n, "rocksample: field side");
    gen->add_option("--rocks", gen_rocks, "rocksample: rock count");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--output", gen_output, "write here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (infer->parsed()) return cmd_infer(infer_opts);
        if (sweep->parsed()) return cmd_sweep(sweep_opts);
        if (evaluate->parsed()) return cmd_evaluate(eval_opts, theta_path);
        if (gen->parsed()) {
            std::string text;
            if (gen_env == "ctp")
                text = polmc::ctp_json(
                    polmc::generate_ctp_instance(gen_nodes, gen_edges, gen_seed, gen_open_prob));
            else if (gen_env == "rocksample")
                text = polmc::rocksample_json(
                    polmc::generate_rocksample_instance(gen_n, gen_rocks, gen_seed));
            else
                throw polmc::error("unknown environment '" + gen_env + "'");
            if (gen_output.empty()) {
                std::cout << text;
            } else {
                std::ofstream out(gen_output, std::ios::binary);
                if (!out) throw polmc::error("cannot open " + gen_output);
                out << text;
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
