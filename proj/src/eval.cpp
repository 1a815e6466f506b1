#include "polmc/eval.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <vector>

namespace polmc {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double one_episode(const Simulator& sim, const ThetaVector& theta, RngStream stream) {
    RunOutput out = run_with_trace(sim, theta, Trace::empty(), stream);
    return out.reward.raw;
}

ThetaVector theta_from_sample(const Simulator& sim, const PolicySample& sample) {
    ThetaVector theta = sim.theta_prior();
    if (sample.size() != theta.size()) throw error("policy sample does not match the theta schema");
    for (std::size_t c = 0; c < theta.size(); ++c) theta.set_value(c, sample[c]);
    return theta;
}

const PolicySample& pick_policy(std::span<const PolicySample> policies, std::uint64_t episode,
                                std::uint64_t episodes) {
    return policies[static_cast<std::size_t>(episode * policies.size() / episodes)];
}

EvalSummary summarize(std::span<const double> rewards, std::uint64_t episodes) {
    const MeanStderr ms = mean_stderr(rewards);
    return EvalSummary{kNan, ms.mean, ms.std_error, episodes, "policy"};
}

struct CtpEpisode {
    std::uint8_t connected;
    double policy_distance;
    double random_distance;
    double clairvoyant_distance;
};

template <typename PolicyAt>
CtpEpisode one_ctp_episode(const CtpInstance& instance, PolicyAt&& policy_at,
                           std::uint64_t attempt, RngStream stream) {
    RngStream weather_rng = stream.split(0);
    RngStream agent_rng = stream.split(1);
    TraceCursor cursor(nullptr, weather_rng);
    const Weather weather = draw_weather(instance, cursor);
    const double clair = clairvoyant_distance(instance, weather);
    if (clair == std::numeric_limits<double>::infinity()) return {0, 0.0, 0.0, 0.0};
    const auto policy_d = policy_walk_distance(instance, weather, policy_at(attempt));
    const auto random_d = random_walk_distance(instance, weather, agent_rng);
    // A connected weather is reachable by any exhaustive walk.
    return {1, policy_d.value(), random_d.value(), clair};
}

/// Draws weathers in attempt order until `episodes` connected ones are
/// found. Blocks are evaluated in a worker pool; collecting in attempt
/// order keeps the result identical to the serial reference.
template <typename PolicyAt>
CtpAgentsEval ctp_quota_eval(const CtpInstance& instance, PolicyAt&& policy_at,
                             std::uint64_t episodes, RngStream& rng, bool parallel) {
    if (episodes == 0) throw error("ctp evaluation: episodes must be positive");
    std::vector<double> policy_r, random_r, clair_r;
    policy_r.reserve(episodes);
    random_r.reserve(episodes);
    clair_r.reserve(episodes);

    const std::uint64_t block = std::max<std::uint64_t>(episodes, 1024);
    const std::uint64_t max_attempts = 1000 * episodes + 1000;
    std::uint64_t attempt_base = 0;
    std::uint64_t drawn = 0;
    std::vector<CtpEpisode> results(block);
    while (policy_r.size() < episodes) {
        if (attempt_base >= max_attempts)
            throw error("ctp evaluation: connected weathers are too rare on this instance");
        std::exception_ptr failure = nullptr;
        if (parallel) {
#pragma omp parallel for schedule(static)
            for (std::int64_t i = 0; i < static_cast<std::int64_t>(block); ++i) {
                try {
                    const std::uint64_t attempt = attempt_base + static_cast<std::uint64_t>(i);
                    results[static_cast<std::size_t>(i)] =
                        one_ctp_episode(instance, policy_at, attempt, rng.split(attempt));
                } catch (...) {
#pragma omp critical
                    if (!failure) failure = std::current_exception();
                }
            }
            if (failure) std::rethrow_exception(failure);
        } else {
            for (std::uint64_t i = 0; i < block; ++i) {
                const std::uint64_t attempt = attempt_base + i;
                results[static_cast<std::size_t>(i)] =
                    one_ctp_episode(instance, policy_at, attempt, rng.split(attempt));
            }
        }
        for (std::uint64_t i = 0; i < block && policy_r.size() < episodes; ++i) {
            drawn = attempt_base + i + 1;
            const CtpEpisode& ep = results[static_cast<std::size_t>(i)];
            if (!ep.connected) continue;
            policy_r.push_back(-ep.policy_distance);
            random_r.push_back(-ep.random_distance);
            clair_r.push_back(-ep.clairvoyant_distance);
        }
        attempt_base += block;
    }

    const auto mk = [&](std::span<const double> r, const char* tag) {
        const MeanStderr ms = mean_stderr(r);
        return EvalSummary{kNan, ms.mean, ms.std_error, r.size(), tag};
    };
    return CtpAgentsEval{mk(policy_r, "policy"), mk(random_r, "random"),
                         mk(clair_r, "clairvoyant"), drawn, episodes};
}

} // namespace

EvalSummary evaluate_policy(const Simulator& sim, const ThetaVector& theta, std::uint64_t episodes,
                            RngStream& rng) {
    if (episodes == 0) throw error("evaluate_policy: episodes must be positive");
    std::vector<double> rewards(episodes);
    std::exception_ptr failure = nullptr;
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(episodes); ++i) {
        try {
            rewards[static_cast<std::size_t>(i)] =
                one_episode(sim, theta, rng.split(static_cast<std::uint64_t>(i)));
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return summarize(rewards, episodes);
}

EvalSummary evaluate_policy_serial(const Simulator& sim, const ThetaVector& theta,
                                   std::uint64_t episodes, RngStream& rng) {
    if (episodes == 0) throw error("evaluate_policy: episodes must be positive");
    std::vector<double> rewards(episodes);
    for (std::uint64_t i = 0; i < episodes; ++i) rewards[i] = one_episode(sim, theta, rng.split(i));
    return summarize(rewards, episodes);
}

EvalSummary evaluate_policy_set(const Simulator& sim, std::span<const PolicySample> policies,
                                std::uint64_t episodes, RngStream& rng) {
    if (episodes == 0) throw error("evaluate_policy_set: episodes must be positive");
    if (policies.empty()) throw error("evaluate_policy_set: no policy snapshots");
    std::vector<double> rewards(episodes);
    std::exception_ptr failure = nullptr;
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(episodes); ++i) {
        try {
            const auto ep = static_cast<std::uint64_t>(i);
            rewards[static_cast<std::size_t>(i)] = one_episode(
                sim, theta_from_sample(sim, pick_policy(policies, ep, episodes)), rng.split(ep));
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return summarize(rewards, episodes);
}

EvalSummary evaluate_policy_set_serial(const Simulator& sim,
                                       std::span<const PolicySample> policies,
                                       std::uint64_t episodes, RngStream& rng) {
    if (episodes == 0) throw error("evaluate_policy_set: episodes must be positive");
    if (policies.empty()) throw error("evaluate_policy_set: no policy snapshots");
    std::vector<double> rewards(episodes);
    for (std::uint64_t i = 0; i < episodes; ++i)
        rewards[i] =
            one_episode(sim, theta_from_sample(sim, pick_policy(policies, i, episodes)), rng.split(i));
    return summarize(rewards, episodes);
}

CtpAgentsEval evaluate_ctp_agents(const CtpInstance& instance, const CtpPolicyParams& params,
                                  std::uint64_t episodes, RngStream& rng) {
    const auto fixed = [&](std::uint64_t) -> const CtpPolicyParams& { return params; };
    return ctp_quota_eval(instance, fixed, episodes, rng, true);
}

CtpAgentsEval evaluate_ctp_agents_serial(const CtpInstance& instance,
                                         const CtpPolicyParams& params, std::uint64_t episodes,
                                         RngStream& rng) {
    const auto fixed = [&](std::uint64_t) -> const CtpPolicyParams& { return params; };
    return ctp_quota_eval(instance, fixed, episodes, rng, false);
}

namespace {

std::vector<CtpPolicyParams> params_from_samples(const CtpInstance& instance,
                                                 std::span<const PolicySample> policies) {
    std::vector<CtpPolicyParams> params(policies.size());
    for (std::size_t k = 0; k < policies.size(); ++k) {
        if (policies[k].size() != instance.policy_slots())
            throw error("ctp policy sample does not match the slot count");
        params[k].weight.resize(policies[k].size());
        for (std::size_t c = 0; c < policies[k].size(); ++c)
            params[k].weight[c] = draw_as_real(policies[k][c]);
    }
    return params;
}

} // namespace

CtpAgentsEval evaluate_ctp_agents_set(const CtpInstance& instance,
                                      std::span<const PolicySample> policies,
                                      std::uint64_t episodes, RngStream& rng) {
    if (policies.empty()) throw error("ctp evaluation: no policy snapshots");
    const auto params = params_from_samples(instance, policies);
    const auto cycled = [&](std::uint64_t attempt) -> const CtpPolicyParams& {
        return params[static_cast<std::size_t>(attempt % params.size())];
    };
    return ctp_quota_eval(instance, cycled, episodes, rng, true);
}

CtpAgentsEval evaluate_ctp_agents_set_serial(const CtpInstance& instance,
                                             std::span<const PolicySample> policies,
                                             std::uint64_t episodes, RngStream& rng) {
    if (policies.empty()) throw error("ctp evaluation: no policy snapshots");
    const auto params = params_from_samples(instance, policies);
    const auto cycled = [&](std::uint64_t attempt) -> const CtpPolicyParams& {
        return params[static_cast<std::size_t>(attempt % params.size())];
    };
    return ctp_quota_eval(instance, cycled, episodes, rng, false);
}

} // namespace polmc
