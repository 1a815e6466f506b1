#ifndef POLMC_EVAL_HPP
#define POLMC_EVAL_HPP

#include <cstdint>
#include <string>

#include "polmc/ctp.hpp"
#include "polmc/simulator.hpp"
#include "polmc/stats.hpp"

namespace polmc {

/// One reported statistic: mean raw reward of an agent over fresh episodes.
struct EvalSummary {
    double temperature; ///< NaN for temperature-free baselines
    double mean_reward;
    double std_error;
    std::uint64_t n_episodes;
    std::string tag; ///< policy | random | clairvoyant | heuristic
};

/// Mean raw reward over independent fresh-trace episodes. Episodes run in
/// an OpenMP pool; per-episode streams and slot-indexed writes keep the
/// result identical for any thread count.
EvalSummary evaluate_policy(const Simulator& sim, const ThetaVector& theta,
                            std::uint64_t episodes, RngStream& rng);

/// Serial reference for the kernel above; identical output.
EvalSummary evaluate_policy_serial(const Simulator& sim, const ThetaVector& theta,
                                   std::uint64_t episodes, RngStream& rng);

/// Flattened theta values in the schema order of the simulator.
using PolicySample = std::vector<Draw>;

/// Expected reward of an inferred policy distribution: episode i runs under
/// snapshot floor(i * k / episodes), spreading episodes evenly over the k
/// chain snapshots.
EvalSummary evaluate_policy_set(const Simulator& sim, std::span<const PolicySample> policies,
                                std::uint64_t episodes, RngStream& rng);

EvalSummary evaluate_policy_set_serial(const Simulator& sim,
                                       std::span<const PolicySample> policies,
                                       std::uint64_t episodes, RngStream& rng);

/// Policy, random and clairvoyant agents on the same weather draws,
/// restricted to weathers that keep the goal reachable (the clairvoyant is
/// undefined otherwise, and no agent has a travel distance). Weathers are
/// drawn until `episodes` connected ones accumulate, so every mean rests on
/// the requested episode count at any openness level. Distances are
/// reported as rewards (negated).
struct CtpAgentsEval {
    EvalSummary policy;
    EvalSummary random_agent;
    EvalSummary clairvoyant;
    std::uint64_t weathers_drawn;
    std::uint64_t weathers_connected;
};

CtpAgentsEval evaluate_ctp_agents(const CtpInstance& instance, const CtpPolicyParams& params,
                                  std::uint64_t episodes, RngStream& rng);

CtpAgentsEval evaluate_ctp_agents_serial(const CtpInstance& instance,
                                         const CtpPolicyParams& params, std::uint64_t episodes,
                                         RngStream& rng);

/// As above with the policy drawn from chain snapshots per episode; the
/// weather draws and both baselines are identical to the fixed-policy
/// variant under the same stream.
CtpAgentsEval evaluate_ctp_agents_set(const CtpInstance& instance,
                                      std::span<const PolicySample> policies,
                                      std::uint64_t episodes, RngStream& rng);

CtpAgentsEval evaluate_ctp_agents_set_serial(const CtpInstance& instance,
                                             std::span<const PolicySample> policies,
                                             std::uint64_t episodes, RngStream& rng);

} // namespace polmc

#endif
