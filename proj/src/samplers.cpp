#include "polmc/samplers.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <exception>
#include <ostream>
#include <string>

namespace polmc {

namespace {

void require_linear(const Simulator& sim, const char* who) {
    if (sim.conditioning() != ConditioningKind::Linear)
        throw error(std::string(who) + ": simulator must declare linear conditioning");
}

SimReward checked_reward(const Simulator& sim, const RewardBounds& bounds, const SimReward& r) {
    if (r.conditioned < bounds.lower)
        throw bound_violation_error(sim.name() + " returned reward " +
                                    std::to_string(r.conditioned) + " below declared lower bound " +
                                    std::to_string(bounds.lower));
    if (r.conditioned > bounds.upper)
        throw bound_violation_error(sim.name() + " returned reward " +
                                    std::to_string(r.conditioned) + " above declared upper bound " +
                                    std::to_string(bounds.upper));
    return r;
}

void emit(const SamplerConfig& config, const RecordSink& sink, std::vector<SampleRecord>& records,
          std::uint64_t iteration, const ChainState& state, bool theta_move, bool accepted) {
    if (iteration < config.burn_in) return;
    SampleRecord rec{iteration,  state.reward.conditioned, state.reward.raw,
                     theta_move, accepted,                 state.theta.values()};
    if (sink) sink(rec);
    if (config.keep_records) records.push_back(std::move(rec));
}

} // namespace

void SamplerConfig::validate() const {
    if (iterations == 0) throw error("sampler config: iterations must be positive");
    if (iterations <= burn_in) throw error("sampler config: iterations must exceed burn_in");
    if (!(temperature > 0.0)) throw error("sampler config: temperature must be positive");
}

double mh_accept_prob(double r_new, double r_old, double lower, double temperature) {
    if (!(temperature > 0.0)) throw error("mh_accept_prob: temperature must be positive");
    if (r_new < lower || r_old < lower)
        throw reward_domain_error("mh_accept_prob: rewards must not fall below the lower bound");
    // A zero-probability current state carries no evidence about theta:
    // accept anything strictly better, keep the current theta otherwise.
    // Trace refreshes (always accepted) are what move the chain off the
    // null set, so freezing theta there preserves learned structure.
    if (r_old == lower) return r_new > lower ? 1.0 : 0.0;
    const double ratio = (r_new - lower) / (r_old - lower);
    if (ratio >= 1.0) return 1.0;
    return std::pow(ratio, 1.0 / temperature);
}

ChainResult stochastic_mh(const Simulator& sim, const ThetaVector& theta0,
                          const SamplerConfig& config, RngStream& rng, const RecordSink& sink) {
    config.validate();
    if (config.proposal_mode != ProposalMode::WholeTheta)
        throw error("stochastic_mh requires proposal_mode == WholeTheta");
    require_linear(sim, "stochastic_mh");
    const RewardBounds bounds = sim.bounds();

    ChainResult result;
    ChainState& state = result.final_state;
    state.theta = theta0;
    {
        RunOutput out = run_with_trace(sim, state.theta, Trace::empty(), rng);
        state.reward = checked_reward(sim, bounds, out.reward);
        state.trace = std::move(out.trace);
    }

    for (std::uint64_t it = 0; it < config.iterations; ++it) {
        // Trace refresh from its prior: always accepted.
        {
            Trace fresh = resample_all(state.trace, rng);
            RunOutput out = run_with_trace(sim, state.theta, fresh, rng);
            state.reward = checked_reward(sim, bounds, out.reward);
            state.trace = std::move(out.trace);
            ++result.stats.proposal_count_tau;
            ++result.stats.accept_count_tau;
        }

        // Independent whole-theta proposal from the prior, judged under the
        // refreshed trace.
        ThetaVector proposal = state.theta.redrawn_all(rng);
        RunOutput out = run_with_trace(sim, proposal, state.trace, rng);
        checked_reward(sim, bounds, out.reward);
        const double a = mh_accept_prob(out.reward.conditioned, state.reward.conditioned,
                                        bounds.lower, config.temperature);
        ++result.stats.proposal_count_theta;
        const bool accepted = rng.next_double() < a;
        if (accepted) {
            state.theta = std::move(proposal);
            state.trace = std::move(out.trace);
            state.reward = out.reward;
            ++result.stats.accept_count_theta;
        }
        emit(config, sink, result.records, it, state, true, accepted);
    }
    assert(result.stats.accept_count_tau == result.stats.proposal_count_tau);
    return result;
}

ChainResult stochastic_lmh(const Simulator& sim, const ThetaVector& theta0,
                           const SamplerConfig& config, RngStream& rng, const RecordSink& sink) {
    config.validate();
    if (config.proposal_mode != ProposalMode::SingleSite)
        throw error("stochastic_lmh requires proposal_mode == SingleSite");
    require_linear(sim, "stochastic_lmh");
    const RewardBounds bounds = sim.bounds();

    ChainResult result;
    ChainState& state = result.final_state;
    state.theta = theta0;
    {
        RunOutput out = run_with_trace(sim, state.theta, Trace::empty(), rng);
        state.reward = checked_reward(sim, bounds, out.reward);
        state.trace = std::move(out.trace);
    }

    const std::size_t n_theta = state.theta.size();
    for (std::uint64_t it = 0; it < config.iterations; ++it) {
        const std::size_t n_tau = state.trace.size();
        const std::size_t n_sites = n_theta + n_tau;
        if (n_sites == 0) {
            emit(config, sink, result.records, it, state, false, true);
            continue;
        }
        const auto pick = static_cast<std::size_t>(rng.next_index(static_cast<std::int64_t>(n_sites)));
        if (pick >= n_theta) {
            // Trace site: redraw it from its prior and rerun; a component
            // marked as stochastic choice is always accepted.
            const Address& addr = state.trace.draw_log()[pick - n_theta];
            Trace proposed = resample_site(state.trace, addr, rng);
            RunOutput out = run_with_trace(sim, state.theta, proposed, rng);
            state.reward = checked_reward(sim, bounds, out.reward);
            state.trace = std::move(out.trace);
            ++result.stats.proposal_count_tau;
            ++result.stats.accept_count_tau;
            emit(config, sink, result.records, it, state, false, true);
        } else {
            // Theta component: prior redraw, so the prior terms cancel and
            // only the reward ratio decides.
            ThetaVector proposal = state.theta.redrawn_component(pick, rng);
            RunOutput out = run_with_trace(sim, proposal, state.trace, rng);
            checked_reward(sim, bounds, out.reward);
            const double a = mh_accept_prob(out.reward.conditioned, state.reward.conditioned,
                                            bounds.lower, config.temperature);
            ++result.stats.proposal_count_theta;
            const bool accepted = rng.next_double() < a;
            if (accepted) {
                state.theta = std::move(proposal);
                state.trace = std::move(out.trace);
                state.reward = out.reward;
                ++result.stats.accept_count_theta;
            }
            emit(config, sink, result.records, it, state, true, accepted);
        }
    }
    assert(result.stats.accept_count_tau == result.stats.proposal_count_tau);
    return result;
}

namespace {

WeightedSample one_weighted_draw(const Simulator& sim, const RewardBounds& bounds,
                                 RngStream stream) {
    ThetaVector theta = sim.theta_prior().redrawn_all(stream);
    RunOutput out = run_with_trace(sim, theta, Trace::empty(), stream);
    checked_reward(sim, bounds, out.reward);
    const double w = linear_conditioning(out.reward.conditioned, bounds);
    return WeightedSample{theta.values(), w, out.reward.raw};
}

void require_some_weight(const std::vector<WeightedSample>& samples) {
    for (const auto& s : samples)
        if (s.weight > 0.0) return;
    throw degenerate_weights_error("importance sampling: every weight is zero");
}

} // namespace

std::vector<WeightedSample> importance_sampling(const Simulator& sim, std::uint64_t n,
                                                RngStream& rng) {
    if (n == 0) throw error("importance_sampling: n must be positive");
    require_linear(sim, "importance_sampling");
    const RewardBounds bounds = sim.bounds();
    std::vector<WeightedSample> samples(n);
    std::exception_ptr failure = nullptr;
    // Slot-indexed writes with per-slot streams: the result is independent
    // of the schedule and the thread count.
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        try {
            samples[static_cast<std::size_t>(i)] =
                one_weighted_draw(sim, bounds, rng.split(static_cast<std::uint64_t>(i)));
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    require_some_weight(samples);
    return samples;
}

std::vector<WeightedSample> importance_sampling_serial(const Simulator& sim, std::uint64_t n,
                                                       RngStream& rng) {
    if (n == 0) throw error("importance_sampling: n must be positive");
    require_linear(sim, "importance_sampling");
    const RewardBounds bounds = sim.bounds();
    std::vector<WeightedSample> samples;
    samples.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i)
        samples.push_back(one_weighted_draw(sim, bounds, rng.split(i)));
    require_some_weight(samples);
    return samples;
}

AnnealResult anneal_schedule_run(const Simulator& sim, const ThetaVector& theta0,
                                 std::span<const double> temperatures,
                                 const AnnealOptions& options, RngStream& rng,
                                 const RecordSink& sink) {
    if (temperatures.empty()) throw error("anneal_schedule_run: empty temperature schedule");
    for (std::size_t i = 0; i < temperatures.size(); ++i) {
        if (!(temperatures[i] > 0.0)) throw error("anneal_schedule_run: temperatures must be positive");
        if (i && !(temperatures[i] < temperatures[i - 1]))
            throw error("anneal_schedule_run: temperatures must be strictly descending");
    }

    AnnealResult result;
    result.temperatures.assign(temperatures.begin(), temperatures.end());
    ThetaVector theta = theta0;
    for (const double temperature : temperatures) {
        SamplerConfig config;
        config.iterations = options.iterations_per_temp;
        config.temperature = temperature;
        config.proposal_mode = ProposalMode::SingleSite;
        config.burn_in = options.burn_in;
        config.keep_records = options.keep_records;
        ChainResult chain = stochastic_lmh(sim, theta, config, rng, sink);
        theta = chain.final_state.theta;
        result.chains.push_back(std::move(chain));
    }
    result.theta_mode = theta;
    return result;
}

ThetaVector mode_estimate(std::span<const SampleRecord> chain, const ThetaVector& schema) {
    if (chain.empty()) throw error("mode_estimate: empty chain");
    const SampleRecord& last = chain.back();
    if (last.theta.size() != schema.size())
        throw error("mode_estimate: record does not match the theta schema");
    ThetaVector out = schema;
    for (std::size_t i = 0; i < schema.size(); ++i) out.set_value(i, last.theta[i]);
    return out;
}

void write_chain_csv_header(std::ostream& out, const ThetaVector& schema) {
    out << "iteration,temperature,reward,accepted";
    for (const auto& c : schema.components()) out << ',' << c.name;
    out << '\n';
}

void write_chain_csv_row(std::ostream& out, const SampleRecord& record, double temperature) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", temperature);
    out << record.iteration << ',' << buf << ',';
    std::snprintf(buf, sizeof buf, "%.17g", record.reward_raw);
    out << buf << ',' << (record.accepted ? 1 : 0);
    for (const auto& v : record.theta) out << ',' << draw_str(v);
    out << '\n';
}

} // namespace polmc
