#include "polmc/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "polmc/rocksample.hpp"

namespace polmc {

namespace {

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt_temp(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", t);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot open output file " + path.string());
    return out;
}

void write_summary_row(std::ostream& out, const EvalSummary& row) {
    out << (std::isnan(row.temperature) ? std::string{} : fmt_temp(row.temperature)) << ','
        << row.tag << ',' << fmt(row.mean_reward) << ',' << fmt(row.std_error) << ','
        << row.n_episodes << '\n';
}

/// Snapshots kept per temperature for policy-distribution evaluation.
constexpr std::uint64_t kPolicySnapshots = 2000;

/// One chain at one temperature with a thinned CSV buffer and evenly spaced
/// policy snapshots from the post-burn-in chain.
struct TempRun {
    ChainResult chain;
    std::string csv;
    std::vector<PolicySample> snapshots;
};

TempRun run_temperature(const Simulator& sim, const ThetaVector& theta_start,
                        const ExperimentConfig& config, double temperature, RngStream rng) {
    SamplerConfig sampler_config;
    sampler_config.iterations = config.iterations;
    sampler_config.temperature = temperature;
    sampler_config.seed = config.seed;
    sampler_config.proposal_mode =
        config.sampler == SamplerKind::Mh ? ProposalMode::WholeTheta : ProposalMode::SingleSite;
    sampler_config.burn_in = config.burn_in();
    sampler_config.keep_records = false;

    TempRun run;
    std::ostringstream csv;
    write_chain_csv_header(csv, sim.theta_prior());
    const std::uint64_t thin = config.effective_thin();
    const std::uint64_t post_burn = config.iterations - config.burn_in();
    const std::uint64_t snap_stride = std::max<std::uint64_t>(1, post_burn / kPolicySnapshots);
    std::uint64_t seen = 0;
    const RecordSink sink = [&](const SampleRecord& rec) {
        if (rec.iteration % thin == 0) write_chain_csv_row(csv, rec, temperature);
        if (seen++ % snap_stride == 0) run.snapshots.push_back(rec.theta);
    };

    run.chain = config.sampler == SamplerKind::Mh
                    ? stochastic_mh(sim, theta_start, sampler_config, rng, sink)
                    : stochastic_lmh(sim, theta_start, sampler_config, rng, sink);
    run.csv = csv.str();
    return run;
}

std::vector<TempRun> run_chains(const Simulator& sim, const ExperimentConfig& config) {
    RngStream root(config.seed);
    const ThetaVector theta0 = sim.theta_prior();
    std::vector<TempRun> runs(config.temperatures.size());
    if (config.warm_start) {
        ThetaVector theta = theta0;
        for (std::size_t ti = 0; ti < config.temperatures.size(); ++ti) {
            runs[ti] = run_temperature(sim, theta, config, config.temperatures[ti], root.split(ti));
            theta = runs[ti].chain.final_state.theta;
        }
    } else {
        // Independent restarts: temperatures are separate chains and can run
        // in parallel; slot-indexed results keep the output deterministic.
        std::exception_ptr failure = nullptr;
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t ti = 0; ti < static_cast<std::int64_t>(config.temperatures.size()); ++ti) {
            try {
                runs[static_cast<std::size_t>(ti)] =
                    run_temperature(sim, theta0, config,
                                    config.temperatures[static_cast<std::size_t>(ti)],
                                    root.split(static_cast<std::uint64_t>(ti)));
            } catch (...) {
#pragma omp critical
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
    }
    return runs;
}

struct InferOutcome {
    std::vector<ThetaVector> mode_per_temp;
    std::vector<std::string> chain_csv_per_temp;
    std::vector<std::vector<PolicySample>> snapshots_per_temp;
};

InferOutcome run_inference(const Simulator& sim, const ExperimentConfig& config) {
    InferOutcome out;
    if (config.sampler == SamplerKind::Is) {
        RngStream root(config.seed);
        RngStream is_rng = root.split(0x15);
        const auto samples = importance_sampling(sim, config.iterations, is_rng);
        std::ostringstream csv;
        write_chain_csv_header(csv, sim.theta_prior());
        const std::uint64_t thin = config.effective_thin();
        for (std::size_t i = 0; i < samples.size(); i += thin) {
            SampleRecord rec{i, 0.0, samples[i].reward_raw, false, true, samples[i].theta};
            write_chain_csv_row(csv, rec, 0.0);
        }
        for (std::size_t ti = 0; ti < config.temperatures.size(); ++ti) {
            // The tempered posterior at this temperature, approximated by
            // self-normalized resampling with weights to the power 1/T.
            RngStream pick_rng = root.split(0x9000 + ti);
            std::vector<PolicySample> snapshots;
            snapshots.reserve(kPolicySnapshots);
            for (std::uint64_t k = 0; k < kPolicySnapshots; ++k)
                snapshots.push_back(
                    samples[tempered_resample_index(samples, config.temperatures[ti], pick_rng)]
                        .theta);
            ThetaVector mode = sim.theta_prior();
            for (std::size_t c = 0; c < mode.size(); ++c)
                mode.set_value(c, snapshots.back()[c]);
            out.mode_per_temp.push_back(std::move(mode));
            out.chain_csv_per_temp.push_back(csv.str());
            out.snapshots_per_temp.push_back(std::move(snapshots));
        }
        return out;
    }
    for (auto& run : run_chains(sim, config)) {
        out.mode_per_temp.push_back(run.chain.final_state.theta);
        out.chain_csv_per_temp.push_back(std::move(run.csv));
        out.snapshots_per_temp.push_back(std::move(run.snapshots));
    }
    return out;
}

} // namespace

void ExperimentConfig::validate() const {
    if (temperatures.empty()) throw error("config: temperatures must be nonempty");
    for (std::size_t i = 0; i < temperatures.size(); ++i) {
        if (!(temperatures[i] > 0.0)) throw error("config: temperatures must be positive");
        if (i && !(temperatures[i] < temperatures[i - 1]))
            throw error("config: temperatures must be strictly descending");
    }
    if (iterations == 0) throw error("config: iterations must be positive");
    if (eval_episodes == 0) throw error("config: eval_episodes must be positive");
    if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0))
        throw error("config: burn_in_fraction must be in [0, 1)");
}

std::uint64_t ExperimentConfig::burn_in() const {
    return static_cast<std::uint64_t>(burn_in_fraction * static_cast<double>(iterations));
}

std::uint64_t ExperimentConfig::effective_thin() const {
    if (chain_thin > 0) return chain_thin;
    return std::max<std::uint64_t>(1, iterations / 1000);
}

std::string to_string(EnvKind env) { return env == EnvKind::Ctp ? "ctp" : "rocksample"; }

std::string to_string(SamplerKind sampler) {
    switch (sampler) {
    case SamplerKind::Mh: return "mh";
    case SamplerKind::Lmh: return "lmh";
    default: return "is";
    }
}

EnvKind env_from_string(const std::string& s) {
    if (s == "ctp") return EnvKind::Ctp;
    if (s == "rocksample") return EnvKind::RockSample;
    throw error("unknown environment '" + s + "' (expected ctp or rocksample)");
}

SamplerKind sampler_from_string(const std::string& s) {
    if (s == "mh") return SamplerKind::Mh;
    if (s == "lmh") return SamplerKind::Lmh;
    if (s == "is") return SamplerKind::Is;
    throw error("unknown sampler '" + s + "' (expected mh, lmh or is)");
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error("cannot open config file " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw error(path + ": " + e.what());
    }
    ExperimentConfig config;
    try {
        config.env = env_from_string(j.at("env").get<std::string>());
        config.instance_path = j.value("instance", std::string{});
        if (j.contains("temperatures"))
            config.temperatures = j.at("temperatures").get<std::vector<double>>();
        config.iterations = j.value("iterations", config.iterations);
        config.eval_episodes = j.value("eval_episodes", config.eval_episodes);
        config.seed = j.value("seed", config.seed);
        if (j.contains("sampler")) config.sampler = sampler_from_string(j.at("sampler"));
        config.warm_start = j.value("warm_start", config.warm_start);
        config.burn_in_fraction = j.value("burn_in_fraction", config.burn_in_fraction);
        config.chain_thin = j.value("chain_thin", config.chain_thin);
    } catch (const nlohmann::json::exception& e) {
        throw error(path + ": " + e.what());
    }
    config.validate();
    return config;
}

std::string ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["env"] = to_string(env);
    j["instance"] = instance_path;
    j["temperatures"] = temperatures;
    j["iterations"] = iterations;
    j["eval_episodes"] = eval_episodes;
    j["seed"] = seed;
    j["sampler"] = to_string(sampler);
    j["warm_start"] = warm_start;
    j["burn_in_fraction"] = burn_in_fraction;
    j["chain_thin"] = chain_thin;
    return j.dump(2) + "\n";
}

std::unique_ptr<Simulator> make_simulator(const ExperimentConfig& config) {
    if (config.instance_path.empty()) throw error("config: instance path is required");
    if (config.env == EnvKind::Ctp)
        return std::make_unique<CtpSimulator>(load_ctp_instance(config.instance_path));
    return std::make_unique<RockSampleSimulator>(load_rocksample_instance(config.instance_path));
}

std::size_t tempered_resample_index(const std::vector<WeightedSample>& samples, double temperature,
                                    RngStream& rng) {
    if (samples.empty()) throw error("tempered_resample_index: no samples");
    if (!(temperature > 0.0)) throw error("tempered_resample_index: temperature must be positive");
    std::vector<double> log_w(samples.size(), -std::numeric_limits<double>::infinity());
    double max_log = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].weight > 0.0) {
            log_w[i] = std::log(samples[i].weight) / temperature;
            max_log = std::max(max_log, log_w[i]);
        }
    }
    if (max_log == -std::numeric_limits<double>::infinity())
        throw degenerate_weights_error("tempered_resample_index: every weight is zero");
    double total = 0.0;
    std::vector<double> w(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        w[i] = std::exp(log_w[i] - max_log);
        total += w[i];
    }
    const double u = rng.next_double() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        acc += w[i];
        if (u < acc) return i;
    }
    return samples.size() - 1;
}

SweepResult run_sweep(const ExperimentConfig& config, const std::filesystem::path& outdir) {
    config.validate();
    const auto sim = make_simulator(config);
    std::filesystem::create_directories(outdir);

    InferOutcome inference = run_inference(*sim, config);

    SweepResult result;
    for (std::size_t ti = 0; ti < config.temperatures.size(); ++ti) {
        const auto path = outdir / ("chain_" + fmt_temp(config.temperatures[ti]) + ".csv");
        auto out = open_out(path);
        out << inference.chain_csv_per_temp[ti];
        result.chain_csvs.push_back(path);
    }

    // The same evaluation stream at every temperature keeps the policy rows
    // comparable episode by episode.
    RngStream eval_rng = RngStream(config.seed).split(0xe7a1);
    std::vector<EvalSummary> baselines;
    if (config.env == EnvKind::Ctp) {
        const auto& ctp = dynamic_cast<const CtpSimulator&>(*sim);
        for (std::size_t ti = 0; ti < config.temperatures.size(); ++ti) {
            CtpAgentsEval agents = evaluate_ctp_agents_set(
                ctp.instance(), inference.snapshots_per_temp[ti], config.eval_episodes, eval_rng);
            agents.policy.temperature = config.temperatures[ti];
            result.rows.push_back(agents.policy);
            if (ti + 1 == config.temperatures.size()) {
                baselines.push_back(agents.random_agent);
                baselines.push_back(agents.clairvoyant);
            }
        }
    } else {
        const auto& rs = dynamic_cast<const RockSampleSimulator&>(*sim);
        for (std::size_t ti = 0; ti < config.temperatures.size(); ++ti) {
            EvalSummary row = evaluate_policy_set(*sim, inference.snapshots_per_temp[ti],
                                                  config.eval_episodes, eval_rng);
            row.temperature = config.temperatures[ti];
            result.rows.push_back(row);
        }
        ThetaVector heuristic_theta = rs.theta_prior();
        const auto heuristic = heuristic_policy(rs.instance());
        for (std::size_t i = 0; i < heuristic_theta.size(); ++i)
            heuristic_theta.set_value(i, heuristic.sense_threshold[i]);
        EvalSummary row = evaluate_policy(*sim, heuristic_theta, config.eval_episodes, eval_rng);
        row.tag = "heuristic";
        result.rows.push_back(row);
    }
    for (auto& row : baselines) result.rows.push_back(row);

    result.sweep_csv = outdir / "sweep.csv";
    auto out = open_out(result.sweep_csv);
    out << "temperature,tag,mean_reward,std_error,n_episodes\n";
    for (const auto& row : result.rows) write_summary_row(out, row);
    return result;
}

void emit_plot_data(const std::filesystem::path& sweep_csv,
                    const std::filesystem::path& out_path) {
    std::ifstream in(sweep_csv);
    if (!in) throw error("cannot open sweep csv " + sweep_csv.string());
    std::string line;
    if (!std::getline(in, line)) throw error(sweep_csv.string() + ": empty file");
    if (line != "temperature,tag,mean_reward,std_error,n_episodes")
        throw error(sweep_csv.string() + ": unexpected header '" + line + "'");

    auto out = open_out(out_path);
    out << "series,temperature,neg_log10_temperature,mean_reward,std_error\n";
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (line.back() == ',') fields.push_back("");
        if (fields.size() != 5)
            throw error(sweep_csv.string() + ": line " + std::to_string(line_no) +
                        ": expected 5 fields");
        try {
            const std::string& temp = fields[0];
            out << fields[1] << ',' << temp << ',';
            if (!temp.empty()) out << fmt(-std::log10(std::stod(temp)));
            std::stod(fields[2]);
            std::stod(fields[3]);
            out << ',' << fields[2] << ',' << fields[3] << '\n';
        } catch (const std::exception&) {
            throw error(sweep_csv.string() + ": line " + std::to_string(line_no) +
                        ": malformed numeric field");
        }
    }
}

ThetaVector infer_mode(const ExperimentConfig& config, const Simulator& sim,
                       const std::filesystem::path& outdir,
                       std::vector<std::filesystem::path>* chain_files) {
    config.validate();
    std::filesystem::create_directories(outdir);
    InferOutcome inference = run_inference(sim, config);
    for (std::size_t ti = 0; ti < config.temperatures.size(); ++ti) {
        const auto path = outdir / ("chain_" + fmt_temp(config.temperatures[ti]) + ".csv");
        auto out = open_out(path);
        out << inference.chain_csv_per_temp[ti];
        if (chain_files) chain_files->push_back(path);
    }
    return inference.mode_per_temp.back();
}

void save_theta_json(const ThetaVector& theta, const std::filesystem::path& path) {
    nlohmann::json j;
    j["components"] = nlohmann::json::array();
    for (const auto& c : theta.components()) {
        nlohmann::json comp;
        comp["name"] = c.name;
        if (const auto* b = std::get_if<bool>(&c.value))
            comp["value"] = *b;
        else if (const auto* i = std::get_if<std::int64_t>(&c.value))
            comp["value"] = *i;
        else
            comp["value"] = std::get<double>(c.value);
        j["components"].push_back(comp);
    }
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

ThetaVector load_theta_json(const ThetaVector& schema, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw error("cannot open theta file " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw error(path.string() + ": " + e.what());
    }
    ThetaVector theta = schema;
    std::size_t assigned = 0;
    try {
        for (const auto& comp : j.at("components")) {
            const std::size_t idx = theta.index_of(comp.at("name").get<std::string>());
            const auto& prior = theta[idx].prior;
            if (std::holds_alternative<BernoulliPrior>(prior))
                theta.set_value(idx, comp.at("value").get<bool>());
            else if (std::holds_alternative<CategoricalPrior>(prior))
                theta.set_value(idx, comp.at("value").get<std::int64_t>());
            else
                theta.set_value(idx, comp.at("value").get<double>());
            ++assigned;
        }
    } catch (const nlohmann::json::exception& e) {
        throw error(path.string() + ": " + e.what());
    }
    if (assigned != schema.size())
        throw error(path.string() + ": expected " + std::to_string(schema.size()) +
                    " components, found " + std::to_string(assigned));
    return theta;
}

std::filesystem::path resolve_outdir() {
    if (const char* dir = std::getenv("POLMC_OUTDIR")) return dir;
    return ".";
}

} // namespace polmc
