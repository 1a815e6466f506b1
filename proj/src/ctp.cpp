#include "polmc/ctp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

#include "json.hpp"

namespace polmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Dijkstra over the edges admitted by `usable`.
template <typename EdgeFilter>
double shortest_path(const CtpInstance& inst, EdgeFilter usable) {
    std::vector<double> dist(inst.nodes(), kInf);
    using Item = std::pair<double, std::uint32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    dist[inst.start()] = 0.0;
    queue.push({0.0, inst.start()});
    while (!queue.empty()) {
        auto [d, v] = queue.top();
        queue.pop();
        if (d > dist[v]) continue;
        if (v == inst.goal()) return d;
        for (std::uint32_t e : inst.incident(v)) {
            if (!usable(e)) continue;
            const std::uint32_t w = inst.other_end(e, v);
            const double nd = d + inst.edges()[e].length;
            if (nd < dist[w]) {
                dist[w] = nd;
                queue.push({nd, w});
            }
        }
    }
    return dist[inst.goal()];
}

/// Depth-first walk from start to goal under a fixed weather. `pick` selects
/// among candidate edge ids (open, leading to unvisited nodes). Dead ends
/// backtrack along the entry edge and pay its length again.
template <typename Pick>
std::optional<double> dfs_walk(const CtpInstance& inst, const Weather& weather, Pick pick) {
    std::vector<std::uint8_t> visited(inst.nodes(), 0);
    struct Frame {
        std::uint32_t node;
        std::uint32_t entry_edge;
    };
    std::vector<Frame> stack;
    stack.push_back({inst.start(), 0});
    visited[inst.start()] = 1;
    double dist = 0.0;
    std::vector<std::uint32_t> candidates;

    while (true) {
        const std::uint32_t cur = stack.back().node;
        if (cur == inst.goal()) return dist;
        candidates.clear();
        for (std::uint32_t e : inst.incident(cur))
            if (weather.open[e] && !visited[inst.other_end(e, cur)]) candidates.push_back(e);
        if (!candidates.empty()) {
            const std::uint32_t e = pick(cur, candidates);
            const std::uint32_t next = inst.other_end(e, cur);
            dist += inst.edges()[e].length;
            visited[next] = 1;
            stack.push_back({next, e});
        } else {
            if (stack.size() == 1) return std::nullopt; // exhausted: goal unreachable
            dist += inst.edges()[stack.back().entry_edge].length;
            stack.pop_back();
        }
    }
}

} // namespace

CtpInstance::CtpInstance(std::uint32_t nodes, std::uint32_t start, std::uint32_t goal,
                         std::vector<CtpEdge> edges)
    : nodes_(nodes), start_(start), goal_(goal), edges_(std::move(edges)) {
    if (nodes_ == 0) throw invalid_instance_error("ctp: empty graph");
    if (start_ >= nodes_ || goal_ >= nodes_)
        throw invalid_instance_error("ctp: start/goal outside the node range");
    std::vector<std::vector<std::uint8_t>> seen(nodes_);
    for (auto& row : seen) row.assign(nodes_, 0);
    for (const CtpEdge& e : edges_) {
        if (e.u >= nodes_ || e.v >= nodes_)
            throw invalid_instance_error("ctp: edge endpoint outside the node range");
        if (e.u == e.v) throw invalid_instance_error("ctp: self-loop");
        if (seen[e.u][e.v]) throw invalid_instance_error("ctp: duplicate edge");
        seen[e.u][e.v] = seen[e.v][e.u] = 1;
        if (!(e.length > 0.0) || !std::isfinite(e.length))
            throw invalid_instance_error("ctp: edge lengths must be positive and finite");
        if (!(e.open_prob > 0.0 && e.open_prob <= 1.0))
            throw invalid_instance_error("ctp: openness probabilities must be in (0, 1]");
        total_length_ += e.length;
    }
    incident_.assign(nodes_, {});
    for (std::uint32_t i = 0; i < edges_.size(); ++i) {
        incident_[edges_[i].u].push_back(i);
        incident_[edges_[i].v].push_back(i);
    }
    for (auto& list : incident_) std::sort(list.begin(), list.end());
    slot_offset_.assign(nodes_ + 1, 0);
    for (std::uint32_t v = 0; v < nodes_; ++v)
        slot_offset_[v + 1] = slot_offset_[v] + incident_[v].size();

    // The full graph must connect start to goal; per-weather connectivity is
    // the environment's randomness, not an instance defect.
    Weather all_open{std::vector<std::uint8_t>(edges_.size(), 1)};
    if (clairvoyant_distance(*this, all_open) == kInf)
        throw invalid_instance_error("ctp: start and goal are disconnected in the full graph");
}

std::size_t CtpInstance::policy_slot(std::uint32_t node, std::uint32_t edge_id) const {
    const auto& list = incident_[node];
    const auto it = std::lower_bound(list.begin(), list.end(), edge_id);
    if (it == list.end() || *it != edge_id)
        throw error("ctp: edge " + std::to_string(edge_id) + " is not incident to node " +
                    std::to_string(node));
    return slot_offset_[node] + static_cast<std::size_t>(it - list.begin());
}

RewardBounds ctp_bounds(const CtpInstance& instance) {
    const double sp = shortest_path(instance, [](std::uint32_t) { return true; });
    if (sp == kInf) throw invalid_instance_error("ctp: start and goal are disconnected");
    return RewardBounds(-2.0 * instance.total_length(), -sp);
}

Weather draw_weather(const CtpInstance& instance, TraceCursor& trace) {
    Weather weather;
    weather.open.resize(instance.edges().size());
    for (std::uint32_t i = 0; i < instance.edges().size(); ++i)
        weather.open[i] = trace.draw_bernoulli(Address("edge", i), instance.edges()[i].open_prob);
    return weather;
}

double clairvoyant_distance(const CtpInstance& instance, const Weather& weather) {
    return shortest_path(instance, [&](std::uint32_t e) { return weather.open[e] != 0; });
}

std::optional<double> policy_walk_distance(const CtpInstance& instance, const Weather& weather,
                                           const CtpPolicyParams& params) {
    if (params.weight.size() != instance.policy_slots())
        throw error("ctp: policy has the wrong number of weights");
    return dfs_walk(instance, weather,
                    [&](std::uint32_t node, const std::vector<std::uint32_t>& candidates) {
                        std::uint32_t best = candidates.front();
                        double best_w = params.weight[instance.policy_slot(node, best)];
                        for (std::size_t i = 1; i < candidates.size(); ++i) {
                            const double w = params.weight[instance.policy_slot(node, candidates[i])];
                            if (w > best_w) { // ties keep the lowest edge id
                                best = candidates[i];
                                best_w = w;
                            }
                        }
                        return best;
                    });
}

std::optional<double> random_walk_distance(const CtpInstance& instance, const Weather& weather,
                                           RngStream& rng) {
    return dfs_walk(instance, weather,
                    [&](std::uint32_t, const std::vector<std::uint32_t>& candidates) {
                        return candidates[static_cast<std::size_t>(
                            rng.next_index(static_cast<std::int64_t>(candidates.size())))];
                    });
}

double random_agent_distance(const CtpInstance& instance, const Weather& weather, RngStream& rng) {
    const auto d = random_walk_distance(instance, weather, rng);
    if (!d) throw error("random agent: goal unreachable under this weather");
    return *d;
}

SimReward ctp_simulate(const CtpInstance& instance, const CtpPolicyParams& params,
                       TraceCursor& trace) {
    const Weather weather = draw_weather(instance, trace);
    const auto dist = policy_walk_distance(instance, weather, params);
    const double reward = dist ? -*dist : -2.0 * instance.total_length();
    return SimReward{reward, reward};
}

ThetaVector ctp_theta_prior(const CtpInstance& instance) {
    std::vector<ThetaComponent> comps;
    comps.reserve(instance.policy_slots());
    for (std::uint32_t v = 0; v < instance.nodes(); ++v)
        for (std::uint32_t e : instance.incident(v))
            comps.push_back({"n" + std::to_string(v) + "_e" + std::to_string(e), 0.5,
                             UniformPrior{0.0, 1.0}});
    return ThetaVector(std::move(comps));
}

CtpPolicyParams ctp_params_from_theta(const CtpInstance& instance, const ThetaVector& theta) {
    if (theta.size() != instance.policy_slots())
        throw error("ctp: theta does not match the policy slot count");
    CtpPolicyParams params;
    params.weight.resize(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) params.weight[i] = theta.real_at(i);
    return params;
}

CtpSimulator::CtpSimulator(CtpInstance instance)
    : instance_(std::move(instance)), prior_(ctp_theta_prior(instance_)),
      bounds_(ctp_bounds(instance_)) {}

SimReward CtpSimulator::run(const ThetaVector& theta, TraceCursor& trace) const {
    return ctp_simulate(instance_, ctp_params_from_theta(instance_, theta), trace);
}

CtpClassSimulator::CtpClassSimulator(CtpInstance instance,
                                     std::vector<CtpPolicyParams> representatives,
                                     std::vector<double> masses)
    : instance_(std::move(instance)), representatives_(std::move(representatives)),
      bounds_(ctp_bounds(instance_)) {
    if (representatives_.empty() || representatives_.size() != masses.size())
        throw error("ctp-class: need one prior mass per representative policy");
    prior_ = ThetaVector({{"policy_class", std::int64_t{0}, CategoricalPrior{std::move(masses)}}});
}

SimReward CtpClassSimulator::run(const ThetaVector& theta, TraceCursor& trace) const {
    const auto k = static_cast<std::size_t>(theta.index_at(0));
    return ctp_simulate(instance_, representatives_.at(k), trace);
}

CtpInstance generate_ctp_instance(std::uint32_t nodes, std::uint32_t edges, std::uint64_t seed,
                                  double open_prob) {
    if (nodes < 2) throw invalid_instance_error("ctp generator: need at least two nodes");
    const std::uint64_t max_edges = std::uint64_t(nodes) * (nodes - 1) / 2;
    if (edges < nodes - 1 || edges > max_edges)
        throw invalid_instance_error("ctp generator: edge budget must fit a connected simple graph");

    RngStream rng(seed);
    std::vector<std::pair<double, double>> points(nodes);
    for (auto& p : points) {
        p.first = rng.next_double();
        p.second = rng.next_double();
    }
    const auto dist = [&](std::uint32_t a, std::uint32_t b) {
        const double dx = points[a].first - points[b].first;
        const double dy = points[a].second - points[b].second;
        return std::sqrt(dx * dx + dy * dy);
    };

    struct Pair {
        double d;
        std::uint32_t u, v;
    };
    std::vector<Pair> pairs;
    pairs.reserve(max_edges);
    for (std::uint32_t u = 0; u < nodes; ++u)
        for (std::uint32_t v = u + 1; v < nodes; ++v) pairs.push_back({dist(u, v), u, v});
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.d != b.d) return a.d < b.d;
        if (a.u != b.u) return a.u < b.u;
        return a.v < b.v;
    });

    // Euclidean MST via Kruskal keeps the graph connected, then the shortest
    // remaining pairs fill the budget.
    std::vector<std::uint32_t> parent(nodes);
    std::iota(parent.begin(), parent.end(), 0u);
    const auto find = [&](std::uint32_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::vector<std::pair<std::uint32_t, std::uint32_t>> chosen;
    std::vector<std::uint8_t> used(pairs.size(), 0);
    for (std::size_t i = 0; i < pairs.size() && chosen.size() + 1 < nodes; ++i) {
        const auto ru = find(pairs[i].u), rv = find(pairs[i].v);
        if (ru == rv) continue;
        parent[ru] = rv;
        chosen.push_back({pairs[i].u, pairs[i].v});
        used[i] = 1;
    }
    for (std::size_t i = 0; i < pairs.size() && chosen.size() < edges; ++i) {
        if (used[i]) continue;
        chosen.push_back({pairs[i].u, pairs[i].v});
    }

    std::sort(chosen.begin(), chosen.end());
    std::vector<CtpEdge> edge_list;
    edge_list.reserve(chosen.size());
    for (const auto& [u, v] : chosen) edge_list.push_back({u, v, dist(u, v), open_prob});

    std::uint32_t start = 0, goal = 0;
    for (std::uint32_t i = 1; i < nodes; ++i) {
        if (points[i].first < points[start].first) start = i;
        if (points[i].first > points[goal].first) goal = i;
    }
    if (start == goal) goal = (start + 1) % nodes;
    return CtpInstance(nodes, start, goal, std::move(edge_list));
}

CtpInstance with_open_prob(const CtpInstance& instance, double open_prob) {
    std::vector<CtpEdge> edges = instance.edges();
    for (auto& e : edges) e.open_prob = open_prob;
    return CtpInstance(instance.nodes(), instance.start(), instance.goal(), std::move(edges));
}

CtpInstance parse_ctp_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw invalid_instance_error(std::string("ctp instance: ") + e.what());
    }
    try {
        std::vector<CtpEdge> edges;
        for (const auto& edge : j.at("edges"))
            edges.push_back({edge.at("u").get<std::uint32_t>(), edge.at("v").get<std::uint32_t>(),
                             edge.at("length").get<double>(), edge.at("open_prob").get<double>()});
        return CtpInstance(j.at("nodes").get<std::uint32_t>(), j.at("start").get<std::uint32_t>(),
                           j.at("goal").get<std::uint32_t>(), std::move(edges));
    } catch (const nlohmann::json::exception& e) {
        throw invalid_instance_error(std::string("ctp instance: ") + e.what());
    }
}

std::string ctp_json(const CtpInstance& instance) {
    nlohmann::json j;
    j["nodes"] = instance.nodes();
    j["start"] = instance.start();
    j["goal"] = instance.goal();
    j["edges"] = nlohmann::json::array();
    for (const CtpEdge& e : instance.edges())
        j["edges"].push_back(
            {{"u", e.u}, {"v", e.v}, {"length", e.length}, {"open_prob", e.open_prob}});
    return j.dump(2) + "\n";
}

CtpInstance load_ctp_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_instance_error("cannot open ctp instance file " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_ctp_json(buffer.str());
    } catch (const invalid_instance_error& e) {
        throw invalid_instance_error(path + ": " + e.what());
    }
}

void write_weather_csv(std::ostream& out, const CtpInstance& instance, const Weather& weather) {
    if (weather.open.size() != instance.edges().size())
        throw error("weather does not cover this instance's edges");
    out << "edge,u,v,open\n";
    for (std::uint32_t i = 0; i < instance.edges().size(); ++i)
        out << i << ',' << instance.edges()[i].u << ',' << instance.edges()[i].v << ','
            << int(weather.open[i]) << '\n';
}

} // namespace polmc
