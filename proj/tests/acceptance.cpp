// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails.
//
// Scales: the protocol runs use 100000 iterations with 10000 evaluation
// episodes, and a desk-scale variant (20000 / 2000) that must finish fast.
// POLMC_ACCEPT_DESK_ONLY=1 skips the protocol-scale road-graph run for
// quick local iteration.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "polmc/conditioning.hpp"
#include "polmc/ctp.hpp"
#include "polmc/eval.hpp"
#include "polmc/oracle.hpp"
#include "polmc/rocksample.hpp"
#include "polmc/samplers.hpp"
#include "polmc/stats.hpp"
#include "polmc/sweep.hpp"
#include "toy_models.hpp"

using namespace polmc;
using namespace polmc::tests;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what, const std::string& detail) {
    std::printf("%s criterion %d: %s%s%s\n", pass ? "PASS" : "FAIL", criterion, what.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

struct TauLedger {
    std::uint64_t proposals = 0;
    std::uint64_t accepts = 0;
    bool consistent = true;
    void add(const ChainStats& stats) {
        proposals += stats.proposal_count_tau;
        accepts += stats.accept_count_tau;
        consistent = consistent && stats.accept_count_tau == stats.proposal_count_tau;
    }
};

TauLedger g_tau;

fs::path instance_dir() {
    if (const char* env = std::getenv("POLMC_INSTANCE_DIR")) return env;
#ifdef POLMC_INSTANCE_DIR
    return POLMC_INSTANCE_DIR;
#else
    return "instances";
#endif
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

// ---------------------------------------------------------------- criterion 1

void criterion_oracle_exactness() {
    struct Case {
        std::string name;
        const Simulator& sim;
    };
    const DiscreteModelSimulator two_coin(two_coin_model(), "two-coin");
    const auto ctp_toy = ctp_triangle_class_sim(0.7);
    const auto rs_toy = rocksample_class_sim();
    const Case cases[] = {{"two-coin", two_coin}, {"ctp-triangle", ctp_toy},
                          {"rocksample-3x3", rs_toy}};

    bool all_ok = true;
    std::string detail;
    for (const Case& c : cases) {
        const double t0 = now_seconds();
        const DiscreteModel model = flatten_simulator(c.sim);
        const auto exact = exact_posterior(model);
        const DiscreteThetaIndexer indexer(c.sim.theta_prior());

        SamplerConfig config;
        config.iterations = 110000;
        config.burn_in = 10000; // leaves exactly 100000 post-burn-in samples
        config.keep_records = true;

        config.proposal_mode = ProposalMode::SingleSite;
        RngStream rng_lmh(101);
        const auto lmh = stochastic_lmh(c.sim, c.sim.theta_prior(), config, rng_lmh);
        g_tau.add(lmh.stats);
        const double tv_lmh = tv_distance(exact, chain_theta_marginal(lmh.records, indexer));

        config.proposal_mode = ProposalMode::WholeTheta;
        RngStream rng_mh(102);
        const auto mh = stochastic_mh(c.sim, c.sim.theta_prior(), config, rng_mh);
        g_tau.add(mh.stats);
        const double tv_mh = tv_distance(exact, chain_theta_marginal(mh.records, indexer));

        RngStream rng_is(103);
        const auto is = importance_sampling(c.sim, 100000, rng_is);
        const double tv_is = tv_distance(exact, weighted_theta_marginal(is, indexer));

        const double elapsed = now_seconds() - t0;
        const bool ok = tv_mh <= 0.02 && tv_lmh <= 0.02 && tv_is <= 0.02 && elapsed < 60.0;
        all_ok = all_ok && ok;
        detail += c.name + " tv(mh)=" + fmt(tv_mh) + " tv(lmh)=" + fmt(tv_lmh) +
                  " tv(is)=" + fmt(tv_is) + " in " + fmt(elapsed) + "s; ";
    }
    report(1, all_ok, "samplers reproduce the enumerated posterior within 0.02 TV at 100k",
           detail);
}

// ---------------------------------------------------------------- criterion 3

void criterion_mixture_identities() {
    RngStream rng(31);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto reportod = mixture_identity_check(random_discrete_model(rng));
        worst = std::max({worst, reportod.max_dev_exponential, reportod.max_dev_linear});
    }
    report(3, worst < 1e-12, "conjunction/disjunction identities on 100 random models",
           "max deviation " + fmt(worst));
}

// ---------------------------------------------------------------- criterion 4

void criterion_annealing_mode() {
    const DiscreteModelSimulator sim(anneal_toy_model(), "anneal-toy");
    const auto exact = exact_posterior(flatten_simulator(sim));
    std::size_t argmax = 0;
    for (std::size_t i = 1; i < exact.size(); ++i)
        if (exact[i] > exact[argmax]) argmax = i;

    AnnealOptions options;
    options.iterations_per_temp = 2000;
    const double temps[] = {100.0, 1.0, 0.01};
    int hits = 0;
    for (int rep = 0; rep < 100; ++rep) {
        RngStream rng(40000 + static_cast<std::uint64_t>(rep));
        const auto result = anneal_schedule_run(sim, sim.theta_prior(), temps, options, rng);
        for (const auto& chain : result.chains) g_tau.add(chain.stats);
        if (static_cast<std::size_t>(result.theta_mode.index_at(0)) == argmax) ++hits;
    }
    report(4, hits >= 95, "annealing recovers the unique posterior mode",
           std::to_string(hits) + "/100 runs hit the argmax (need 95)");
}

// ---------------------------------------------------------------- criterion 5/7

struct CtpLevelOutcome {
    double openness;
    double clair, policy, random;
    double sigma_low, sigma_high;
    bool ok;
};

struct CtpProtocolOutcome {
    std::vector<CtpLevelOutcome> levels;
    double spearman_default = 0.0;
    double seconds = 0.0;
    bool all_levels_ok = true;
};

CtpProtocolOutcome run_ctp_protocol(const CtpInstance& base, std::uint64_t iterations,
                                    std::uint64_t episodes) {
    const double temps[] = {100.0, 10.0, 1.0, 0.1, 0.01, 0.001};
    CtpProtocolOutcome out;
    const double t0 = now_seconds();
    for (int level = 0; level < 8; ++level) {
        const double p = 0.3 + 0.1 * level;
        const CtpInstance inst = with_open_prob(base, p);
        const CtpSimulator sim(inst);
        RngStream root(22222 + static_cast<std::uint64_t>(level));
        ThetaVector theta = sim.theta_prior();
        std::vector<PolicySample> snaps;
        std::vector<double> per_temp_means;
        for (std::size_t ti = 0; ti < 6; ++ti) {
            SamplerConfig cfg;
            cfg.iterations = iterations;
            cfg.burn_in = iterations / 10;
            cfg.temperature = temps[ti];
            cfg.proposal_mode = ProposalMode::SingleSite;
            cfg.keep_records = false;
            snaps.clear();
            const std::uint64_t stride =
                std::max<std::uint64_t>(1, (iterations - cfg.burn_in) / 2000);
            std::uint64_t seen = 0;
            const RecordSink sink = [&](const SampleRecord& rec) {
                if (seen++ % stride == 0) snaps.push_back(rec.theta);
            };
            RngStream chain_rng = root.split(ti);
            const auto chain = stochastic_lmh(sim, theta, cfg, chain_rng, sink);
            g_tau.add(chain.stats);
            theta = chain.final_state.theta;
            if (p == 0.5) {
                RngStream eval_rng(99110000 + static_cast<std::uint64_t>(level));
                const auto agents = evaluate_ctp_agents_set(inst, snaps, episodes, eval_rng);
                per_temp_means.push_back(agents.policy.mean_reward);
            }
        }
        RngStream eval_rng(99110000 + static_cast<std::uint64_t>(level));
        const auto agents = evaluate_ctp_agents_set(inst, snaps, episodes, eval_rng);
        CtpLevelOutcome lvl;
        lvl.openness = p;
        lvl.policy = -agents.policy.mean_reward;
        lvl.clair = -agents.clairvoyant.mean_reward;
        lvl.random = -agents.random_agent.mean_reward;
        const double se_cp = std::hypot(agents.policy.std_error, agents.clairvoyant.std_error);
        const double se_pr = std::hypot(agents.policy.std_error, agents.random_agent.std_error);
        lvl.sigma_low = (lvl.policy - lvl.clair) / se_cp;
        lvl.sigma_high = (lvl.random - lvl.policy) / se_pr;
        lvl.ok = lvl.sigma_low > 3.0 && lvl.sigma_high > 3.0;
        out.all_levels_ok = out.all_levels_ok && lvl.ok;
        out.levels.push_back(lvl);
        if (p == 0.5) {
            const std::vector<double> x = {-2.0, -1.0, 0.0, 1.0, 2.0, 3.0};
            out.spearman_default = spearman(x, per_temp_means);
        }
    }
    out.seconds = now_seconds() - t0;
    return out;
}

std::string describe(const CtpProtocolOutcome& out) {
    std::string detail;
    for (const auto& lvl : out.levels)
        if (!lvl.ok)
            detail += "p=" + fmt(lvl.openness) + " clair/policy/random " + fmt(lvl.clair) + "/" +
                      fmt(lvl.policy) + "/" + fmt(lvl.random) + " sigma " + fmt(lvl.sigma_low) +
                      "/" + fmt(lvl.sigma_high) + "; ";
    if (detail.empty()) {
        double min_low = 1e300, min_high = 1e300;
        for (const auto& lvl : out.levels) {
            min_low = std::min(min_low, lvl.sigma_low);
            min_high = std::min(min_high, lvl.sigma_high);
        }
        detail = "all 8 levels bracketed, weakest sigma " + fmt(min_low) + "/" + fmt(min_high);
    }
    return detail + " (" + fmt(out.seconds) + "s)";
}

// ---------------------------------------------------------------- criterion 6/7

struct RockSampleOutcome {
    std::string name;
    double hot, cold, gap_sigma, heuristic;
    bool ok;
    std::vector<double> per_temp_means; // only for the default instance
};

RockSampleOutcome run_rocksample_protocol(const std::string& name, const RockSampleInstance& inst,
                                          std::uint64_t iterations, std::uint64_t episodes,
                                          bool evaluate_all_temps) {
    const double temps[] = {100.0, 10.0, 1.0, 0.1, 0.01, 0.001};
    const RockSampleSimulator sim(inst);
    RngStream root(777);
    ThetaVector theta = sim.theta_prior();
    RockSampleOutcome out;
    out.name = name;
    EvalSummary hot{}, cold{};
    for (std::size_t ti = 0; ti < 6; ++ti) {
        SamplerConfig cfg;
        cfg.iterations = iterations;
        cfg.burn_in = iterations / 10;
        cfg.temperature = temps[ti];
        cfg.proposal_mode = ProposalMode::SingleSite;
        cfg.keep_records = false;
        std::vector<PolicySample> snaps;
        const std::uint64_t stride = std::max<std::uint64_t>(1, (iterations - cfg.burn_in) / 2000);
        std::uint64_t seen = 0;
        const RecordSink sink = [&](const SampleRecord& rec) {
            if (seen++ % stride == 0) snaps.push_back(rec.theta);
        };
        RngStream chain_rng = root.split(ti);
        const auto chain = stochastic_lmh(sim, theta, cfg, chain_rng, sink);
        g_tau.add(chain.stats);
        theta = chain.final_state.theta;
        if (ti == 0 || ti == 5 || evaluate_all_temps) {
            RngStream eval_rng(888);
            const EvalSummary summary = evaluate_policy_set(sim, snaps, episodes, eval_rng);
            if (evaluate_all_temps) out.per_temp_means.push_back(summary.mean_reward);
            if (ti == 0) hot = summary;
            if (ti == 5) cold = summary;
        }
    }
    RngStream eval_rng(888);
    const EvalSummary heuristic = evaluate_policy(sim, sim.theta_prior(), episodes, eval_rng);
    out.hot = hot.mean_reward;
    out.cold = cold.mean_reward;
    out.gap_sigma =
        (cold.mean_reward - hot.mean_reward) / std::hypot(cold.std_error, hot.std_error);
    out.heuristic = heuristic.mean_reward;
    out.ok = out.gap_sigma > 3.0 && out.heuristic > 0.0;
    return out;
}

// ---------------------------------------------------------------- criterion 8

bool same_bytes(const fs::path& a, const fs::path& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    if (!fa || !fb) return false;
    std::ostringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    return sa.str() == sb.str();
}

void criterion_determinism(const fs::path& ctp_instance) {
    ExperimentConfig config;
    config.env = EnvKind::Ctp;
    config.instance_path = ctp_instance.string();
    config.temperatures = {10.0, 0.1};
    config.iterations = 500;
    config.eval_episodes = 200;
    config.seed = 12;
    config.chain_thin = 50;

    const fs::path base = fs::temp_directory_path() / "polmc_acceptance_det";
    fs::remove_all(base);
    const SweepResult a = run_sweep(config, base / "a");
    const SweepResult b = run_sweep(config, base / "b");
    emit_plot_data(a.sweep_csv, base / "a" / "plot.csv");
    emit_plot_data(b.sweep_csv, base / "b" / "plot.csv");

    bool ok = same_bytes(a.sweep_csv, b.sweep_csv) &&
              same_bytes(base / "a" / "plot.csv", base / "b" / "plot.csv") &&
              a.chain_csvs.size() == b.chain_csvs.size();
    for (std::size_t i = 0; ok && i < a.chain_csvs.size(); ++i)
        ok = same_bytes(a.chain_csvs[i], b.chain_csvs[i]);
    fs::remove_all(base);
    report(8, ok, "repeated sweeps with one seed emit byte-identical CSV artifacts", "");
}

// ---------------------------------------------------------------- criterion 9

void criterion_conditioning_suite() {
    bool ok = true;
    std::string detail;
    const auto expect = [&](bool cond, const char* what) {
        if (!cond) {
            ok = false;
            detail += std::string(what) + "; ";
        }
    };

    expect(exp_conditioning(2.0, 2.0) == 1.0, "exp at the bound");
    expect(std::abs(exp_conditioning(2.0 - std::log(2.0), 2.0) - 0.5) < 1e-12, "exp half");
    expect(std::abs(exp_conditioning(-3.0, 0.0) - std::exp(-3.0)) < 1e-12, "exp(-3)");
    const RewardBounds bounds(-4.0, 6.0);
    expect(linear_conditioning(-4.0, bounds) == 0.0, "linear at lower");
    expect(linear_conditioning(6.0, bounds) == 1.0, "linear at upper");
    expect(std::abs(linear_conditioning(1.0, bounds) - 0.5) < 1e-12, "linear midpoint");
    expect(std::abs(softplus_reward(0.0) - std::log(2.0)) < 1e-12, "softplus(0)");
    expect(softplus_reward(-50.0) > 0.0, "softplus positivity");
    expect(std::abs(softplus_reward(100.0) - 100.0) < 1e-12, "softplus asymptote");

    bool threw = false;
    try {
        linear_conditioning(6.5, bounds);
    } catch (const reward_domain_error&) {
        threw = true;
    }
    expect(threw, "out-of-bounds rejection");

    RngStream rng(90);
    for (int trial = 0; trial < 300; ++trial) {
        double r1 = rng.next_uniform(-4.0, 6.0), r2 = rng.next_uniform(-4.0, 6.0);
        if (r1 == r2) continue;
        if (r1 > r2) std::swap(r1, r2);
        expect(exp_conditioning(r1, 6.0) < exp_conditioning(r2, 6.0), "exp monotone");
        expect(linear_conditioning(r1, bounds) < linear_conditioning(r2, bounds),
               "linear monotone");
        const double pe = exp_conditioning(r1, 6.0), pl = linear_conditioning(r1, bounds);
        expect(pe > 0.0 && pe <= 1.0, "exp range");
        expect(pl >= 0.0 && pl <= 1.0, "linear range");
    }

    for (int trial = 0; trial < 200; ++trial) {
        double r[3], w[3], total = 0.0;
        for (int i = 0; i < 3; ++i) {
            r[i] = rng.next_uniform(-3.5, 5.5);
            w[i] = rng.next_uniform(0.05, 1.0);
            total += w[i];
        }
        double mix = 0.0, expectation = 0.0, log_product = 0.0, average = 0.0;
        for (int i = 0; i < 3; ++i) {
            mix += w[i] / total * linear_conditioning(r[i], bounds);
            expectation += w[i] / total * r[i];
            log_product += w[i] / total * log_exp_conditioning(r[i], 6.0);
            average += w[i] / total * exp_conditioning(r[i], 6.0);
        }
        expect(std::abs(mix - linear_conditioning(expectation, bounds)) < 1e-12,
               "flattening identity");
        expect(std::abs(log_product - log_exp_conditioning(expectation, 6.0)) < 1e-12,
               "conjunction log identity");
        expect(average >= exp_conditioning(expectation, 6.0), "jensen direction");
    }

    report(9, ok, "numerical conditioning suite", detail.empty() ? "all checks hold" : detail);
}

} // namespace

int main() {
    const fs::path instances = instance_dir();
    const bool desk_only = std::getenv("POLMC_ACCEPT_DESK_ONLY") != nullptr;

    criterion_oracle_exactness();

    // Criterion 5 and the road-graph half of criterion 7.
    const CtpInstance ctp_base = load_ctp_instance((instances / "ctp_20x46.json").string());
    const CtpProtocolOutcome desk = run_ctp_protocol(ctp_base, 20000, 2000);
    const bool desk_time_ok = desk.seconds < 600.0;
    report(5, desk.all_levels_ok && desk_time_ok,
           "road-graph envelope, desk scale (20k iterations / 2k episodes, < 10 min)",
           describe(desk));
    double ctp_spearman = desk.spearman_default;
    if (!desk_only) {
        const CtpProtocolOutcome full = run_ctp_protocol(ctp_base, 100000, 10000);
        report(5, full.all_levels_ok,
               "road-graph envelope, protocol scale (100k iterations / 10k episodes)",
               describe(full));
        ctp_spearman = full.spearman_default;
    } else {
        std::printf("SKIP criterion 5 (protocol scale): POLMC_ACCEPT_DESK_ONLY set\n");
    }

    // Criterion 6 and the grid half of criterion 7.
    {
        const struct {
            const char* file;
            const char* name;
            bool default_instance;
        } specs[] = {
            {"rocksample_5x5_4.json", "5x5/4", false},
            {"rocksample_7x7_8.json", "7x7/8", true},
            {"rocksample_11x11_11.json", "11x11/11", false},
            {"rocksample_15x15_15.json", "15x15/15", false},
        };
        bool all_ok = true;
        std::string detail;
        std::vector<double> default_means;
        for (const auto& spec : specs) {
            const RockSampleInstance inst =
                load_rocksample_instance((instances / spec.file).string());
            const RockSampleOutcome out =
                run_rocksample_protocol(spec.name, inst, 20000, 10000, spec.default_instance);
            all_ok = all_ok && out.ok;
            detail += out.name + " gap " + fmt(out.gap_sigma) + " sigma, heuristic " +
                      fmt(out.heuristic) + "; ";
            if (spec.default_instance) default_means = out.per_temp_means;
        }
        report(6, all_ok,
               "grid-field reward rises from T=100 to T=0.001 and the heuristic stays positive",
               detail);

        const std::vector<double> x = {-2.0, -1.0, 0.0, 1.0, 2.0, 3.0};
        const double rs_spearman = spearman(x, default_means);
        const bool trend_ok = ctp_spearman >= 0.7 && rs_spearman >= 0.7;
        report(7, trend_ok, "temperature trend on both default instances",
               "spearman ctp " + fmt(ctp_spearman) + ", rocksample " + fmt(rs_spearman));
    }

    criterion_mixture_identities();
    criterion_annealing_mode();

    // Criterion 2 aggregates every chain the suite ran.
    report(2, g_tau.consistent && g_tau.proposals > 0,
           "trace moves accepted exactly as often as proposed",
           std::to_string(g_tau.accepts) + "/" + std::to_string(g_tau.proposals));

    criterion_determinism(instances / "ctp_20x46.json");
    criterion_conditioning_suite();

    if (g_failures == 0) std::printf("acceptance: all criteria passed\n");
    else std::printf("acceptance: %d criterion check(s) failed\n", g_failures);
    return g_failures;
}
