#ifndef POLMC_ROCKSAMPLE_HPP
#define POLMC_ROCKSAMPLE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "polmc/simulator.hpp"

namespace polmc {

struct RockPos {
    std::int32_t x, y;
};

/// Square field with rocks of unknown quality, a noisy distance-decaying
/// sensor, and a rover crossing from the middle of the left edge to past
/// the right edge.
class RockSampleInstance {
public:
    RockSampleInstance(std::uint32_t n, std::vector<RockPos> rocks, double good_prior, double d0,
                       double step_cost, double rock_reward, double exit_reward,
                       std::uint64_t max_steps);

    std::uint32_t n() const { return n_; }
    const std::vector<RockPos>& rocks() const { return rocks_; }
    double good_prior() const { return good_prior_; }
    double d0() const { return d0_; }
    double step_cost() const { return step_cost_; }
    double rock_reward() const { return rock_reward_; }
    double exit_reward() const { return exit_reward_; }
    std::uint64_t max_steps() const { return max_steps_; }

    RockPos start() const { return {0, static_cast<std::int32_t>(n_ / 2)}; }

private:
    std::uint32_t n_;
    std::vector<RockPos> rocks_;
    double good_prior_, d0_, step_cost_, rock_reward_, exit_reward_;
    std::uint64_t max_steps_;
};

/// Visit a sensed rock when the smoothed reading reaches its threshold.
struct RockSamplePolicyParams {
    std::vector<double> sense_threshold;
};

/// 0.5 + 0.5 * 2^(-distance/d0): certain at zero range, a coin flip far out.
double sensor_accuracy(double distance, double d0);

/// Probability the rock is good given one sensor reading: the binary reading
/// smoothed by the sensor accuracy and the quality prior.
double smoothed_reading(bool sensed_good, double accuracy, double good_prior);

/// Bounds in softplus space. The raw reward is unbounded below only through
/// step costs, which the step horizon caps.
RewardBounds rocksample_bounds(const RockSampleInstance& instance);

/// One episode. Conditioned reward is the softplus transform; raw is the
/// plain reward total used for evaluation.
SimReward rocksample_simulate(const RockSampleInstance& instance,
                              const RockSamplePolicyParams& params, TraceCursor& trace);

/// All thresholds at 0.5: visit exactly the rocks sensed as good.
RockSamplePolicyParams heuristic_policy(const RockSampleInstance& instance);

/// Uniform(0,1) threshold per rock, named t<rock index>.
ThetaVector rocksample_theta_prior(const RockSampleInstance& instance);
RockSamplePolicyParams rocksample_params_from_theta(const RockSampleInstance& instance,
                                                    const ThetaVector& theta);

class RockSampleSimulator final : public Simulator {
public:
    explicit RockSampleSimulator(RockSampleInstance instance);

    SimReward run(const ThetaVector& theta, TraceCursor& trace) const override;
    const ThetaVector& theta_prior() const override { return prior_; }
    RewardBounds bounds() const override { return bounds_; }
    ConditioningKind conditioning() const override { return ConditioningKind::Linear; }
    std::string name() const override { return "rocksample"; }

    const RockSampleInstance& instance() const { return instance_; }

private:
    RockSampleInstance instance_;
    ThetaVector prior_;
    RewardBounds bounds_;
};

/// Toy adapter for enumeration, mirroring CtpClassSimulator.
class RockSampleClassSimulator final : public Simulator {
public:
    RockSampleClassSimulator(RockSampleInstance instance,
                             std::vector<RockSamplePolicyParams> representatives,
                             std::vector<double> masses);

    SimReward run(const ThetaVector& theta, TraceCursor& trace) const override;
    const ThetaVector& theta_prior() const override { return prior_; }
    RewardBounds bounds() const override { return bounds_; }
    ConditioningKind conditioning() const override { return ConditioningKind::Linear; }
    std::string name() const override { return "rocksample-class"; }

private:
    RockSampleInstance instance_;
    std::vector<RockSamplePolicyParams> representatives_;
    ThetaVector prior_;
    RewardBounds bounds_;
};

/// Seeded instance with distinct random rock cells and the default reward
/// and horizon settings.
RockSampleInstance generate_rocksample_instance(std::uint32_t n, std::uint32_t n_rocks,
                                                std::uint64_t seed);

RockSampleInstance parse_rocksample_json(const std::string& text);
std::string rocksample_json(const RockSampleInstance& instance);
RockSampleInstance load_rocksample_instance(const std::string& path);

} // namespace polmc

#endif
