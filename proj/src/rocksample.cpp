#include "polmc/rocksample.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace polmc {

namespace {

std::int64_t manhattan(RockPos a, RockPos b) {
    return std::abs(static_cast<std::int64_t>(a.x) - b.x) +
           std::abs(static_cast<std::int64_t>(a.y) - b.y);
}

double euclidean(RockPos a, RockPos b) {
    const double dx = static_cast<double>(a.x) - b.x;
    const double dy = static_cast<double>(a.y) - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

} // namespace

RockSampleInstance::RockSampleInstance(std::uint32_t n, std::vector<RockPos> rocks,
                                       double good_prior, double d0, double step_cost,
                                       double rock_reward, double exit_reward,
                                       std::uint64_t max_steps)
    : n_(n), rocks_(std::move(rocks)), good_prior_(good_prior), d0_(d0), step_cost_(step_cost),
      rock_reward_(rock_reward), exit_reward_(exit_reward), max_steps_(max_steps) {
    if (n_ == 0) throw invalid_instance_error("rocksample: empty field");
    for (std::size_t i = 0; i < rocks_.size(); ++i) {
        const RockPos r = rocks_[i];
        if (r.x < 0 || r.y < 0 || r.x >= static_cast<std::int32_t>(n_) ||
            r.y >= static_cast<std::int32_t>(n_))
            throw invalid_instance_error("rocksample: rock outside the field");
        for (std::size_t j = i + 1; j < rocks_.size(); ++j)
            if (rocks_[j].x == r.x && rocks_[j].y == r.y)
                throw invalid_instance_error("rocksample: rocks must occupy distinct cells");
    }
    if (!(good_prior_ > 0.0 && good_prior_ < 1.0))
        throw invalid_instance_error("rocksample: good_prior must be in (0, 1)");
    if (!(d0_ > 0.0)) throw invalid_instance_error("rocksample: d0 must be positive");
    if (!(step_cost_ < 0.0)) throw invalid_instance_error("rocksample: step cost must be negative");
    if (!(rock_reward_ > 0.0) || !(exit_reward_ > 0.0))
        throw invalid_instance_error("rocksample: rock and exit rewards must be positive");
    if (max_steps_ < 2ull * n_)
        throw invalid_instance_error("rocksample: step horizon too short to cross the field");
}

double sensor_accuracy(double distance, double d0) {
    if (!(distance >= 0.0)) throw error("sensor_accuracy: distance must be nonnegative");
    if (!(d0 > 0.0)) throw error("sensor_accuracy: d0 must be positive");
    return 0.5 + 0.5 * std::exp2(-distance / d0);
}

double smoothed_reading(bool sensed_good, double accuracy, double good_prior) {
    const double g = good_prior;
    if (sensed_good) return g * accuracy / (g * accuracy + (1.0 - g) * (1.0 - accuracy));
    return g * (1.0 - accuracy) / (g * (1.0 - accuracy) + (1.0 - g) * accuracy);
}

RewardBounds rocksample_bounds(const RockSampleInstance& instance) {
    const double best_raw = instance.rock_reward() * static_cast<double>(instance.rocks().size()) +
                            instance.exit_reward() +
                            instance.step_cost() * static_cast<double>(instance.n());
    const double worst_raw = instance.step_cost() * static_cast<double>(instance.max_steps());
    return RewardBounds(softplus_reward(worst_raw), softplus_reward(best_raw));
}

SimReward rocksample_simulate(const RockSampleInstance& instance,
                              const RockSamplePolicyParams& params, TraceCursor& trace) {
    const std::size_t n_rocks = instance.rocks().size();
    if (params.sense_threshold.size() != n_rocks)
        throw error("rocksample: policy needs one threshold per rock");
    for (double t : params.sense_threshold)
        if (!(t >= 0.0 && t <= 1.0)) throw error("rocksample: thresholds must be in [0, 1]");

    // Rock qualities are the environment's latent state, drawn up front.
    std::vector<std::uint8_t> good(n_rocks);
    for (std::uint32_t i = 0; i < n_rocks; ++i)
        good[i] = trace.draw_bernoulli(Address("rock", i), instance.good_prior());

    RockPos pos = instance.start();
    double raw = 0.0;
    std::uint64_t steps = 0;
    bool truncated = false;

    const auto step_towards = [&](RockPos target) {
        while (!truncated && (pos.x != target.x || pos.y != target.y)) {
            if (steps == instance.max_steps()) {
                truncated = true;
                return;
            }
            if (pos.x != target.x)
                pos.x += pos.x < target.x ? 1 : -1;
            else
                pos.y += pos.y < target.y ? 1 : -1;
            ++steps;
            raw += instance.step_cost();
        }
    };

    std::vector<std::uint8_t> pending(n_rocks, 1);
    for (std::size_t done = 0; done < n_rocks && !truncated; ++done) {
        // Nearest pending rock becomes the candidate; ties keep the lowest
        // rock index.
        std::size_t candidate = n_rocks;
        std::int64_t best = 0;
        for (std::size_t i = 0; i < n_rocks; ++i) {
            if (!pending[i]) continue;
            const std::int64_t d = manhattan(pos, instance.rocks()[i]);
            if (candidate == n_rocks || d < best) {
                candidate = i;
                best = d;
            }
        }
        pending[candidate] = 0;

        const double accuracy = sensor_accuracy(euclidean(pos, instance.rocks()[candidate]),
                                                instance.d0());
        const bool correct =
            trace.draw_bernoulli(Address("sense", static_cast<std::uint32_t>(candidate)), accuracy);
        const bool sensed_good = correct ? good[candidate] != 0 : good[candidate] == 0;
        const double belief = smoothed_reading(sensed_good, accuracy, instance.good_prior());

        if (belief >= params.sense_threshold[candidate]) {
            step_towards(instance.rocks()[candidate]);
            if (!truncated && good[candidate]) raw += instance.rock_reward();
        }
    }

    // Exit past the right edge.
    if (!truncated) {
        step_towards({static_cast<std::int32_t>(instance.n()) - 1, pos.y});
        while (!truncated && pos.x < static_cast<std::int32_t>(instance.n())) {
            if (steps == instance.max_steps()) {
                truncated = true;
                break;
            }
            ++pos.x;
            ++steps;
            raw += instance.step_cost();
        }
        if (!truncated) raw += instance.exit_reward();
    }

    return SimReward{softplus_reward(raw), raw};
}

RockSamplePolicyParams heuristic_policy(const RockSampleInstance& instance) {
    return RockSamplePolicyParams{std::vector<double>(instance.rocks().size(), 0.5)};
}

ThetaVector rocksample_theta_prior(const RockSampleInstance& instance) {
    std::vector<ThetaComponent> comps;
    comps.reserve(instance.rocks().size());
    for (std::size_t i = 0; i < instance.rocks().size(); ++i)
        comps.push_back({"t" + std::to_string(i), 0.5, UniformPrior{0.0, 1.0}});
    return ThetaVector(std::move(comps));
}

RockSamplePolicyParams rocksample_params_from_theta(const RockSampleInstance& instance,
                                                    const ThetaVector& theta) {
    if (theta.size() != instance.rocks().size())
        throw error("rocksample: theta does not match the rock count");
    RockSamplePolicyParams params;
    params.sense_threshold.resize(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) params.sense_threshold[i] = theta.real_at(i);
    return params;
}

RockSampleSimulator::RockSampleSimulator(RockSampleInstance instance)
    : instance_(std::move(instance)), prior_(rocksample_theta_prior(instance_)),
      bounds_(rocksample_bounds(instance_)) {}

SimReward RockSampleSimulator::run(const ThetaVector& theta, TraceCursor& trace) const {
    return rocksample_simulate(instance_, rocksample_params_from_theta(instance_, theta), trace);
}

RockSampleClassSimulator::RockSampleClassSimulator(
    RockSampleInstance instance, std::vector<RockSamplePolicyParams> representatives,
    std::vector<double> masses)
    : instance_(std::move(instance)), representatives_(std::move(representatives)),
      bounds_(rocksample_bounds(instance_)) {
    if (representatives_.empty() || representatives_.size() != masses.size())
        throw error("rocksample-class: need one prior mass per representative policy");
    prior_ = ThetaVector({{"policy_class", std::int64_t{0}, CategoricalPrior{std::move(masses)}}});
}

SimReward RockSampleClassSimulator::run(const ThetaVector& theta, TraceCursor& trace) const {
    const auto k = static_cast<std::size_t>(theta.index_at(0));
    return rocksample_simulate(instance_, representatives_.at(k), trace);
}

RockSampleInstance generate_rocksample_instance(std::uint32_t n, std::uint32_t n_rocks,
                                                std::uint64_t seed) {
    if (static_cast<std::uint64_t>(n_rocks) > std::uint64_t(n) * n)
        throw invalid_instance_error("rocksample generator: more rocks than cells");
    RngStream rng(seed);
    std::vector<RockPos> rocks;
    rocks.reserve(n_rocks);
    while (rocks.size() < n_rocks) {
        const RockPos p{static_cast<std::int32_t>(rng.next_index(n)),
                        static_cast<std::int32_t>(rng.next_index(n))};
        bool taken = false;
        for (const RockPos& r : rocks) taken = taken || (r.x == p.x && r.y == p.y);
        if (!taken) rocks.push_back(p);
    }
    const std::uint64_t horizon = 4ull * n * (n_rocks + 1);
    return RockSampleInstance(n, std::move(rocks), 0.5, n / 2.0, -1.0, 10.0, 10.0, horizon);
}

RockSampleInstance parse_rocksample_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw invalid_instance_error(std::string("rocksample instance: ") + e.what());
    }
    try {
        std::vector<RockPos> rocks;
        for (const auto& rock : j.at("rocks"))
            rocks.push_back({rock.at("x").get<std::int32_t>(), rock.at("y").get<std::int32_t>()});
        const auto& rewards = j.at("rewards");
        return RockSampleInstance(j.at("n").get<std::uint32_t>(), std::move(rocks),
                                  j.at("good_prior").get<double>(), j.at("d0").get<double>(),
                                  rewards.at("step").get<double>(), rewards.at("rock").get<double>(),
                                  rewards.at("exit").get<double>(),
                                  j.at("max_steps").get<std::uint64_t>());
    } catch (const nlohmann::json::exception& e) {
        throw invalid_instance_error(std::string("rocksample instance: ") + e.what());
    }
}

std::string rocksample_json(const RockSampleInstance& instance) {
    nlohmann::json j;
    j["n"] = instance.n();
    j["rocks"] = nlohmann::json::array();
    for (const RockPos& r : instance.rocks()) j["rocks"].push_back({{"x", r.x}, {"y", r.y}});
    j["good_prior"] = instance.good_prior();
    j["d0"] = instance.d0();
    j["rewards"] = {{"step", instance.step_cost()},
                    {"rock", instance.rock_reward()},
                    {"exit", instance.exit_reward()}};
    j["max_steps"] = instance.max_steps();
    return j.dump(2) + "\n";
}

RockSampleInstance load_rocksample_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_instance_error("cannot open rocksample instance file " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_rocksample_json(buffer.str());
    } catch (const invalid_instance_error& e) {
        throw invalid_instance_error(path + ": " + e.what());
    }
}

} // namespace polmc
