#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "polmc/eval.hpp"
#include "polmc/rocksample.hpp"
#include "polmc/stats.hpp"

using namespace polmc;

namespace {

RockSampleInstance small_instance(std::uint32_t n, std::vector<RockPos> rocks,
                                  double d0 = 2.0, std::uint64_t max_steps = 200) {
    return RockSampleInstance(n, std::move(rocks), 0.5, d0, -1.0, 10.0, 10.0, max_steps);
}

/// Runs an episode with every rock quality and sensor-correctness bit fixed.
SimReward simulate_fixed(const RockSampleInstance& inst, const RockSamplePolicyParams& params,
                         const std::vector<bool>& good, const std::vector<bool>& correct) {
    Trace trace;
    for (std::uint32_t i = 0; i < good.size(); ++i)
        trace.record(Address("rock", i), good[i], BernoulliPrior{inst.good_prior()});
    for (std::uint32_t i = 0; i < correct.size(); ++i)
        trace.record(Address("sense", i), correct[i], BernoulliPrior{0.5});
    RngStream rng(0);
    TraceCursor cursor(&trace, rng);
    return rocksample_simulate(inst, params, cursor);
}

} // namespace

TEST_CASE("instances validate their structure") {
    CHECK_THROWS_AS(small_instance(3, {{3, 0}}), invalid_instance_error);
    CHECK_THROWS_AS(small_instance(3, {{-1, 0}}), invalid_instance_error);
    CHECK_THROWS_AS(small_instance(3, {{1, 1}, {1, 1}}), invalid_instance_error);
    CHECK_THROWS_AS(RockSampleInstance(3, {}, 0.0, 1.0, -1.0, 10.0, 10.0, 100),
                    invalid_instance_error);
    CHECK_THROWS_AS(RockSampleInstance(3, {}, 0.5, 0.0, -1.0, 10.0, 10.0, 100),
                    invalid_instance_error);
    CHECK_THROWS_AS(RockSampleInstance(3, {}, 0.5, 1.0, 1.0, 10.0, 10.0, 100),
                    invalid_instance_error);
    CHECK_THROWS_AS(RockSampleInstance(5, {}, 0.5, 1.0, -1.0, 10.0, 10.0, 4),
                    invalid_instance_error);
}

TEST_CASE("sensor accuracy examples") {
    CHECK(sensor_accuracy(0.0, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sensor_accuracy(2.0, 2.0) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(sensor_accuracy(4.0, 2.0) == doctest::Approx(0.625).epsilon(1e-12));
    CHECK_THROWS_AS(sensor_accuracy(-1.0, 2.0), error);
    // Strictly decreasing towards the coin-flip limit.
    double previous = 1.1;
    for (double d = 0.0; d < 40.0; d += 0.5) {
        const double a = sensor_accuracy(d, 2.0);
        CHECK(a < previous);
        CHECK(a > 0.5);
        previous = a;
    }
}

TEST_CASE("smoothed reading is the posterior quality belief") {
    // Perfect sensing pins the belief; far sensing reverts to the prior.
    CHECK(smoothed_reading(true, 1.0, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(smoothed_reading(false, 1.0, 0.5) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(smoothed_reading(true, 0.5, 0.3) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(smoothed_reading(false, 0.5, 0.3) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(smoothed_reading(true, 0.8, 0.5) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(smoothed_reading(false, 0.8, 0.5) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("crossing an empty field") {
    const RockSampleInstance empty = small_instance(5, {});
    const SimReward r = simulate_fixed(empty, {{}}, {}, {});
    CHECK(r.raw == doctest::Approx(5.0).epsilon(1e-12)); // 10 - 5 crossing steps
    CHECK(r.conditioned == doctest::Approx(softplus_reward(5.0)).epsilon(1e-12));
}

TEST_CASE("threshold one degenerates to crossing when no rock is underfoot") {
    const RockSampleInstance inst = small_instance(3, {{1, 0}});
    for (bool good : {false, true})
        for (bool correct : {false, true})
            CHECK(simulate_fixed(inst, {{1.0}}, {good}, {correct}).raw ==
                  doctest::Approx(7.0).epsilon(1e-12)); // 10 - 3
}

TEST_CASE("always-visit collects the adjacent good rock") {
    const RockSampleInstance inst = small_instance(3, {{1, 1}});
    // Walk 1 step to the rock, sample, exit in 2: raw = 10 + 10 - 3.
    CHECK(simulate_fixed(inst, {{0.0}}, {true}, {true}).raw ==
          doctest::Approx(17.0).epsilon(1e-12));
    CHECK(simulate_fixed(inst, {{0.0}}, {false}, {true}).raw ==
          doctest::Approx(7.0).epsilon(1e-12));
}

TEST_CASE("heuristic policy visits exactly the rocks sensed good") {
    const RockSampleInstance inst = small_instance(3, {{1, 1}});
    const RockSamplePolicyParams h = heuristic_policy(inst);
    REQUIRE(h.sense_threshold == std::vector<double>{0.5});
    // Sensed good (quality good, correct reading): visit.
    CHECK(simulate_fixed(inst, h, {true}, {true}).raw == doctest::Approx(17.0).epsilon(1e-12));
    // Sensed bad: skip, straight crossing.
    CHECK(simulate_fixed(inst, h, {true}, {false}).raw == doctest::Approx(7.0).epsilon(1e-12));
    CHECK(simulate_fixed(inst, h, {false, }, {true}).raw == doctest::Approx(7.0).epsilon(1e-12));
    // Bad rock misread as good: wasted detour.
    CHECK(simulate_fixed(inst, h, {false}, {false}).raw == doctest::Approx(7.0).epsilon(1e-12));
}

TEST_CASE("bounds in softplus space") {
    SUBCASE("zero-rock field") {
        const RockSampleInstance inst = small_instance(5, {}, 2.0, 120);
        const RewardBounds b = rocksample_bounds(inst);
        CHECK(b.upper == doctest::Approx(softplus_reward(5.0)).epsilon(1e-12));
        CHECK(b.lower == doctest::Approx(softplus_reward(-120.0)).epsilon(1e-12));
        CHECK(b.lower > 0.0);
    }
    SUBCASE("four rocks on a seven field") {
        const RockSampleInstance inst =
            small_instance(7, {{1, 1}, {2, 5}, {4, 3}, {6, 0}}, 3.5, 300);
        const RewardBounds b = rocksample_bounds(inst);
        // Best case: every rock good and on the way, full crossing of 7 steps.
        CHECK(b.upper == doctest::Approx(softplus_reward(43.0)).epsilon(1e-12));
    }
    SUBCASE("negative raw rewards still condition inside [0, 1]") {
        const RockSampleInstance inst = small_instance(5, {{0, 4}, {4, 0}}, 2.0, 40);
        const RewardBounds b = rocksample_bounds(inst);
        const SimReward r = simulate_fixed(inst, {{0.0, 0.0}}, {false, false}, {true, true});
        CHECK(r.raw < 0.0); // two wasted detours cost more than the exit pays
        const double p = linear_conditioning(r.conditioned, b);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
}

TEST_CASE("step horizon truncates the episode and forfeits the exit bonus") {
    const RockSampleInstance inst(5, {{0, 4}, {4, 0}}, 0.5, 2.0, -1.0, 10.0, 10.0, 10);
    const SimReward r = simulate_fixed(inst, {{0.0, 0.0}}, {false, false}, {true, true});
    CHECK(r.raw == doctest::Approx(-10.0).epsilon(1e-12)); // step_cost * max_steps
    CHECK(r.conditioned == doctest::Approx(rocksample_bounds(inst).lower).epsilon(1e-12));
}

TEST_CASE("episode properties under random policies and traces") {
    const RockSampleInstance inst = small_instance(7, {{1, 1}, {2, 5}, {4, 3}, {6, 0}}, 3.5, 300);
    const RockSampleSimulator sim(inst);
    const RewardBounds bounds = sim.bounds();
    RngStream rng(70);
    for (int ep = 0; ep < 2000; ++ep) {
        const ThetaVector theta = sim.theta_prior().redrawn_all(rng);
        const RunOutput out = run_with_trace(sim, theta, Trace::empty(), rng);
        CHECK(out.reward.raw <=
              inst.rock_reward() * 4 + inst.exit_reward() + inst.step_cost() * inst.n() + 1e-12);
        CHECK(out.reward.raw >= inst.step_cost() * static_cast<double>(inst.max_steps()) - 1e-12);
        CHECK(out.reward.conditioned ==
              doctest::Approx(softplus_reward(out.reward.raw)).epsilon(1e-12));
        CHECK(out.reward.conditioned >= bounds.lower);
        CHECK(out.reward.conditioned <= bounds.upper);
    }
}

TEST_CASE("sensor correctness frequency matches the accuracy at that range") {
    const RockSampleInstance inst = small_instance(5, {{3, 2}}, 2.5);
    const double expected = sensor_accuracy(3.0, 2.5);
    const RockSampleSimulator sim(inst);
    ThetaVector never = sim.theta_prior();
    never.set_value(0, 1.0);
    RngStream rng(71);
    int correct = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        RngStream ep = rng.split(static_cast<std::uint64_t>(i));
        const RunOutput out = run_with_trace(sim, never, Trace::empty(), ep);
        if (std::get<bool>(out.trace.at(Address("sense", 0)).value)) ++correct;
    }
    CHECK(std::abs(correct / static_cast<double>(n) - expected) < 0.02);
}

TEST_CASE("better sensing never hurts the heuristic policy") {
    // One rock off the straight row: its detour is only worth paying when
    // the rock is actually good.
    const auto run_with_d0 = [](double d0) {
        const RockSampleInstance inst(5, {{2, 0}}, 0.5, d0, -1.0, 10.0, 10.0, 200);
        const RockSampleSimulator sim(inst);
        ThetaVector theta = sim.theta_prior(); // thresholds 0.5 = heuristic
        RngStream rng(72);
        return evaluate_policy_serial(sim, theta, 10000, rng);
    };
    const EvalSummary sharp = run_with_d0(50.0);
    const EvalSummary blurry = run_with_d0(0.01);
    const double gap = sharp.mean_reward - blurry.mean_reward;
    const double se = std::sqrt(sharp.std_error * sharp.std_error +
                                blurry.std_error * blurry.std_error);
    CHECK(gap > 3.0 * se);
}

TEST_CASE("replay determinism step by step") {
    const RockSampleInstance inst = small_instance(7, {{1, 1}, {2, 5}, {4, 3}}, 3.5);
    const RockSampleSimulator sim(inst);
    RngStream rng(73);
    const ThetaVector theta = sim.theta_prior().redrawn_all(rng);
    const RunOutput first = run_with_trace(sim, theta, Trace::empty(), rng);
    for (std::uint64_t seed : {1ull, 2ull}) {
        RngStream other(seed);
        const RunOutput replay = run_with_trace(sim, theta, first.trace, other);
        CHECK(replay.reward.raw == first.reward.raw);
        CHECK(replay.reward.conditioned == first.reward.conditioned);
        CHECK(replay.trace == first.trace);
    }
}

TEST_CASE("zero-rock heuristic and never-visit policies behave identically") {
    const RockSampleInstance inst = small_instance(5, {});
    const SimReward h = simulate_fixed(inst, heuristic_policy(inst), {}, {});
    const SimReward never = simulate_fixed(inst, {{}}, {}, {});
    CHECK(h.raw == never.raw);
}

TEST_CASE("generator and json round trip") {
    const RockSampleInstance a = generate_rocksample_instance(7, 8, 21);
    CHECK(a.n() == 7);
    CHECK(a.rocks().size() == 8);
    CHECK(a.d0() == doctest::Approx(3.5));
    CHECK(a.max_steps() == 4ull * 7 * 9);
    const RockSampleInstance b = generate_rocksample_instance(7, 8, 21);
    CHECK(rocksample_json(a) == rocksample_json(b));
    const RockSampleInstance c = parse_rocksample_json(rocksample_json(a));
    CHECK(rocksample_json(c) == rocksample_json(a));
    CHECK_THROWS_AS(parse_rocksample_json("nope"), invalid_instance_error);
    CHECK_THROWS_AS(parse_rocksample_json("{\"n\": 3}"), invalid_instance_error);
    CHECK_THROWS_AS(generate_rocksample_instance(2, 5, 1), invalid_instance_error);
}

TEST_CASE("heuristic earns a positive mean reward on a generated instance") {
    const RockSampleInstance inst = generate_rocksample_instance(7, 8, 21);
    const RockSampleSimulator sim(inst);
    RngStream rng(74);
    const EvalSummary summary = evaluate_policy_serial(sim, sim.theta_prior(), 2000, rng);
    CHECK(summary.mean_reward > 0.0);
}
