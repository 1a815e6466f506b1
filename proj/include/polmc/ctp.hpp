#ifndef POLMC_CTP_HPP
#define POLMC_CTP_HPP

#include <iosfwd>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polmc/simulator.hpp"

namespace polmc {

struct CtpEdge {
    std::uint32_t u, v;
    double length;
    double open_prob;
};

/// Road graph for the Canadian traveller problem: undirected simple graph
/// with per-edge lengths and openness probabilities. Immutable once built.
class CtpInstance {
public:
    CtpInstance(std::uint32_t nodes, std::uint32_t start, std::uint32_t goal,
                std::vector<CtpEdge> edges);

    std::uint32_t nodes() const { return nodes_; }
    std::uint32_t start() const { return start_; }
    std::uint32_t goal() const { return goal_; }
    const std::vector<CtpEdge>& edges() const { return edges_; }

    /// Incident edge ids of a node, ascending.
    const std::vector<std::uint32_t>& incident(std::uint32_t node) const {
        return incident_[node];
    }

    std::uint32_t other_end(std::uint32_t edge_id, std::uint32_t node) const {
        const CtpEdge& e = edges_[edge_id];
        return e.u == node ? e.v : e.u;
    }

    /// Flat index of the (node, incident edge) policy slot.
    std::size_t policy_slot(std::uint32_t node, std::uint32_t edge_id) const;
    std::size_t policy_slots() const { return slot_offset_.back(); }

    double total_length() const { return total_length_; }

private:
    std::uint32_t nodes_, start_, goal_;
    std::vector<CtpEdge> edges_;
    std::vector<std::vector<std::uint32_t>> incident_;
    std::vector<std::size_t> slot_offset_; ///< per node, plus total at the end
    double total_length_ = 0.0;
};

/// One realization of edge states; indexed by edge id.
struct Weather {
    std::vector<std::uint8_t> open;
};

/// One traversal-preference weight per (node, incident edge) slot.
struct CtpPolicyParams {
    std::vector<double> weight;
};

/// Upper bound: negative all-open shortest path. Lower bound: minus twice
/// the total edge length, since the walk pays each edge at most once per
/// direction.
RewardBounds ctp_bounds(const CtpInstance& instance);

Weather draw_weather(const CtpInstance& instance, TraceCursor& trace);

/// Shortest open path length; +infinity if the goal is unreachable.
double clairvoyant_distance(const CtpInstance& instance, const Weather& weather);

/// Travel distance of the weight-ordered walk under a fixed weather;
/// nullopt when the goal is unreachable.
std::optional<double> policy_walk_distance(const CtpInstance& instance, const Weather& weather,
                                           const CtpPolicyParams& params);

std::optional<double> random_walk_distance(const CtpInstance& instance, const Weather& weather,
                                           RngStream& rng);

/// As random_walk_distance but raises on disconnected weather; callers are
/// expected to filter to connected weathers first.
double random_agent_distance(const CtpInstance& instance, const Weather& weather, RngStream& rng);

/// Full episode: weather from the trace, then the policy walk. Returns the
/// negative travel distance, or the declared lower bound when the sampled
/// weather disconnects start from goal.
SimReward ctp_simulate(const CtpInstance& instance, const CtpPolicyParams& params,
                       TraceCursor& trace);

/// Uniform(0,1) weight per policy slot, named n<node>_e<edge>.
ThetaVector ctp_theta_prior(const CtpInstance& instance);
CtpPolicyParams ctp_params_from_theta(const CtpInstance& instance, const ThetaVector& theta);

class CtpSimulator final : public Simulator {
public:
    explicit CtpSimulator(CtpInstance instance);

    SimReward run(const ThetaVector& theta, TraceCursor& trace) const override;
    const ThetaVector& theta_prior() const override { return prior_; }
    RewardBounds bounds() const override { return bounds_; }
    ConditioningKind conditioning() const override { return ConditioningKind::Linear; }
    std::string name() const override { return "ctp"; }

    const CtpInstance& instance() const { return instance_; }

private:
    CtpInstance instance_;
    ThetaVector prior_;
    RewardBounds bounds_;
};

/// Toy adapter for enumeration: theta is one categorical choice among a
/// fixed set of representative policies.
class CtpClassSimulator final : public Simulator {
public:
    CtpClassSimulator(CtpInstance instance, std::vector<CtpPolicyParams> representatives,
                      std::vector<double> masses);

    SimReward run(const ThetaVector& theta, TraceCursor& trace) const override;
    const ThetaVector& theta_prior() const override { return prior_; }
    RewardBounds bounds() const override { return bounds_; }
    ConditioningKind conditioning() const override { return ConditioningKind::Linear; }
    std::string name() const override { return "ctp-class"; }

    const CtpInstance& instance() const { return instance_; }

private:
    CtpInstance instance_;
    std::vector<CtpPolicyParams> representatives_;
    ThetaVector prior_;
    RewardBounds bounds_;
};

/// Seeded random geometric graph: points in the unit square, a Euclidean
/// minimum spanning tree for connectivity, then the shortest remaining
/// pairs until the edge budget is met.
CtpInstance generate_ctp_instance(std::uint32_t nodes, std::uint32_t edges, std::uint64_t seed,
                                  double open_prob);

/// Same instance with every edge's openness probability replaced.
CtpInstance with_open_prob(const CtpInstance& instance, double open_prob);

CtpInstance parse_ctp_json(const std::string& text);
std::string ctp_json(const CtpInstance& instance);
CtpInstance load_ctp_instance(const std::string& path);

/// Debug dump of one weather realization, one row per edge.
void write_weather_csv(std::ostream& out, const CtpInstance& instance, const Weather& weather);

} // namespace polmc

#endif
