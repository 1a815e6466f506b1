#ifndef POLMC_ORACLE_HPP
#define POLMC_ORACLE_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "polmc/samplers.hpp"
#include "polmc/simulator.hpp"

namespace polmc {

/// Fully enumerated model: finite theta support, finite trace support and a
/// reward for every pair. Ground truth for sampler tests at desk scale.
struct DiscreteModel {
    std::vector<double> theta_prior;
    std::vector<double> trace_prior;
    std::vector<std::vector<double>> reward; ///< [theta][trace]
    RewardBounds bounds{0.0, 1.0};

    static constexpr std::size_t kMaxPairs = 1000000;

    void validate() const;
    std::size_t theta_count() const { return theta_prior.size(); }
    std::size_t trace_count() const { return trace_prior.size(); }
};

/// Normalized p(theta) * (E[r | theta] - lower); the theta marginal the
/// samplers target.
std::vector<double> exact_posterior(const DiscreteModel& model);

double exact_expected_reward(const DiscreteModel& model, std::size_t theta_index);

/// Max absolute deviations of the conjunction (exponential) and disjunction
/// (linear) decompositions of the conditioning probability of the expected
/// reward, each checked per theta through two independent float routes.
struct MixtureIdentityReport {
    double max_dev_exponential = 0.0;
    double max_dev_linear = 0.0;
};

MixtureIdentityReport mixture_identity_check(const DiscreteModel& model);

/// Runs a DiscreteModel as a simulator: theta is one categorical component,
/// the trace is one categorical site.
class DiscreteModelSimulator final : public Simulator {
public:
    explicit DiscreteModelSimulator(DiscreteModel model, std::string name = "discrete-model");

    SimReward run(const ThetaVector& theta, TraceCursor& trace) const override;
    const ThetaVector& theta_prior() const override { return prior_; }
    RewardBounds bounds() const override { return model_.bounds; }
    ConditioningKind conditioning() const override { return ConditioningKind::Linear; }
    std::string name() const override { return name_; }

    const DiscreteModel& model() const { return model_; }

private:
    DiscreteModel model_;
    ThetaVector prior_;
    std::string name_;
};

/// Flattens a theta schema whose components are all discrete into a single
/// index space; used to line chain samples up against enumerated models.
class DiscreteThetaIndexer {
public:
    explicit DiscreteThetaIndexer(const ThetaVector& schema);

    std::size_t size() const { return size_; }
    std::size_t index(std::span<const Draw> values) const;
    std::vector<Draw> values_at(std::size_t index) const;
    /// Product prior mass per flattened index.
    std::vector<double> prior() const;

private:
    ThetaVector schema_;
    std::vector<std::size_t> radix_;
    std::size_t size_;
};

/// Mechanically enumerates a simulator with discrete theta components and
/// discrete, theta-independent trace sites into a DiscreteModel by replaying
/// every value combination. Raises if control flow or trace masses vary with
/// theta, or the model exceeds the enumeration cap.
DiscreteModel flatten_simulator(const Simulator& sim);

/// Post-burn-in theta marginal of a chain over flattened indices.
std::vector<double> chain_theta_marginal(std::span<const SampleRecord> records,
                                         const DiscreteThetaIndexer& indexer);

/// Self-normalized weighted theta marginal of an importance sample.
std::vector<double> weighted_theta_marginal(std::span<const WeightedSample> samples,
                                            const DiscreteThetaIndexer& indexer);

} // namespace polmc

#endif
