#ifndef POLMC_SAMPLERS_HPP
#define POLMC_SAMPLERS_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "polmc/simulator.hpp"

namespace polmc {

enum class ProposalMode { WholeTheta, SingleSite };

struct SamplerConfig {
    std::uint64_t iterations = 100000;
    double temperature = 1.0;
    std::uint64_t seed = 1;
    ProposalMode proposal_mode = ProposalMode::SingleSite;
    std::uint64_t burn_in = 0;
    bool keep_records = true;

    void validate() const;
};

/// One post-burn-in chain step. Theta values are flattened in the schema
/// order of the simulator's theta_prior().
struct SampleRecord {
    std::uint64_t iteration;
    double reward;     ///< conditioned-space reward of the current state
    double reward_raw; ///< environment-reported reward of the current state
    bool theta_move;   ///< whether this iteration proposed a theta change
    bool accepted;     ///< theta proposals: MH outcome; tau moves: always true
    std::vector<Draw> theta;
};

struct ChainStats {
    std::uint64_t accept_count_theta = 0;
    std::uint64_t proposal_count_theta = 0;
    std::uint64_t accept_count_tau = 0;
    std::uint64_t proposal_count_tau = 0;

    double theta_acceptance_rate() const {
        return proposal_count_theta ? static_cast<double>(accept_count_theta) /
                                          static_cast<double>(proposal_count_theta)
                                    : 0.0;
    }
    double tau_acceptance_rate() const {
        return proposal_count_tau ? static_cast<double>(accept_count_tau) /
                                        static_cast<double>(proposal_count_tau)
                                  : 0.0;
    }
};

/// Current (theta, tau, reward) of a sampler.
struct ChainState {
    ThetaVector theta;
    Trace trace;
    SimReward reward{};
};

struct ChainResult {
    ChainState final_state;
    ChainStats stats;
    std::vector<SampleRecord> records; ///< post-burn-in, empty unless keep_records
};

using RecordSink = std::function<void(const SampleRecord&)>;

/// min(1, ((r_new - lower) / (r_old - lower))^(1/temperature)).
///
/// At temperature 1 this is the untempered reward-ratio acceptance. From a
/// state at the lower bound a strictly better proposal is always accepted;
/// a 0/0 ratio (both at the bound) rejects, so a chain parked on the
/// zero-probability set keeps its theta until the trace refresh finds an
/// informative trace again.
double mh_accept_prob(double r_new, double r_old, double lower, double temperature);

/// Whole-theta stochastic Metropolis-Hastings: every iteration refreshes the
/// trace from its prior (always accepted), reruns at the current theta, then
/// proposes an independent prior redraw of the full theta vector.
ChainResult stochastic_mh(const Simulator& sim, const ThetaVector& theta0,
                          const SamplerConfig& config, RngStream& rng,
                          const RecordSink& sink = {});

/// Single-site variant: each iteration picks one site uniformly among theta
/// components and trace addresses; trace updates are always accepted, theta
/// updates go through the reward-ratio acceptance.
ChainResult stochastic_lmh(const Simulator& sim, const ThetaVector& theta0,
                           const SamplerConfig& config, RngStream& rng,
                           const RecordSink& sink = {});

struct WeightedSample {
    std::vector<Draw> theta; ///< schema order of the simulator's theta_prior()
    double weight;
    double reward_raw;
};

/// Independent prior draws of (theta, trace), one run each, weighted by the
/// linear conditioning probability of the realized reward.
std::vector<WeightedSample> importance_sampling(const Simulator& sim, std::uint64_t n,
                                                RngStream& rng);

/// Serial reference for the parallel kernel above; identical output.
std::vector<WeightedSample> importance_sampling_serial(const Simulator& sim, std::uint64_t n,
                                                       RngStream& rng);

struct AnnealOptions {
    std::uint64_t iterations_per_temp = 10000;
    std::uint64_t burn_in = 0;
    bool keep_records = false;
};

struct AnnealResult {
    ThetaVector theta_mode;
    std::vector<double> temperatures;
    std::vector<ChainResult> chains; ///< one per temperature, same order
};

/// Simulated-annealing mode finding: single-site chains at each temperature
/// of a strictly descending schedule, warm-starting theta across stages.
/// Trace moves are never tempered.
AnnealResult anneal_schedule_run(const Simulator& sim, const ThetaVector& theta0,
                                 std::span<const double> temperatures,
                                 const AnnealOptions& options, RngStream& rng,
                                 const RecordSink& sink = {});

/// Theta of the final record, reconstructed onto the given schema.
ThetaVector mode_estimate(std::span<const SampleRecord> chain, const ThetaVector& schema);

/// CSV serialization: iteration, temperature, reward, accepted, then one
/// column per theta component name.
void write_chain_csv_header(std::ostream& out, const ThetaVector& schema);
void write_chain_csv_row(std::ostream& out, const SampleRecord& record, double temperature);

} // namespace polmc

#endif
