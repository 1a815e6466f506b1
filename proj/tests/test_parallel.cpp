#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

// The OpenMP kernels must be drop-in replacements for their serial
// references: same seeds, same outputs, any thread count.

#ifdef _OPENMP
#include <omp.h>
#endif

#include "polmc/ctp.hpp"
#include "polmc/eval.hpp"
#include "polmc/rocksample.hpp"
#include "polmc/samplers.hpp"

using namespace polmc;

namespace {

void check_identical(const EvalSummary& a, const EvalSummary& b) {
    CHECK(a.mean_reward == b.mean_reward);
    CHECK(a.std_error == b.std_error);
    CHECK(a.n_episodes == b.n_episodes);
}

} // namespace

TEST_CASE("episode evaluation matches the serial reference bit for bit") {
    const CtpSimulator ctp(generate_ctp_instance(12, 24, 5, 0.6));
    RngStream rng_a(90), rng_b(90);
    check_identical(evaluate_policy_serial(ctp, ctp.theta_prior(), 5000, rng_a),
                    evaluate_policy(ctp, ctp.theta_prior(), 5000, rng_b));

    const RockSampleSimulator rs(generate_rocksample_instance(7, 6, 5));
    RngStream rng_c(91), rng_d(91);
    check_identical(evaluate_policy_serial(rs, rs.theta_prior(), 5000, rng_c),
                    evaluate_policy(rs, rs.theta_prior(), 5000, rng_d));
}

TEST_CASE("importance sampling matches the serial reference bit for bit") {
    const CtpSimulator ctp(generate_ctp_instance(12, 24, 5, 0.6));
    RngStream rng_a(92), rng_b(92);
    const auto serial = importance_sampling_serial(ctp, 4000, rng_a);
    const auto parallel = importance_sampling(ctp, 4000, rng_b);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].weight == parallel[i].weight);
        CHECK(serial[i].reward_raw == parallel[i].reward_raw);
        CHECK(serial[i].theta == parallel[i].theta);
    }
}

TEST_CASE("three-agent evaluation matches the serial reference bit for bit") {
    const CtpInstance inst = generate_ctp_instance(12, 24, 5, 0.6);
    const CtpPolicyParams params = ctp_params_from_theta(inst, ctp_theta_prior(inst));
    RngStream rng_a(93), rng_b(93);
    const CtpAgentsEval serial = evaluate_ctp_agents_serial(inst, params, 5000, rng_a);
    const CtpAgentsEval parallel = evaluate_ctp_agents(inst, params, 5000, rng_b);
    check_identical(serial.policy, parallel.policy);
    check_identical(serial.random_agent, parallel.random_agent);
    check_identical(serial.clairvoyant, parallel.clairvoyant);
    CHECK(serial.weathers_connected == parallel.weathers_connected);
}

#ifdef _OPENMP
TEST_CASE("results do not depend on the thread count") {
    const CtpSimulator ctp(generate_ctp_instance(12, 24, 5, 0.6));
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    RngStream rng_a(94);
    const EvalSummary one = evaluate_policy(ctp, ctp.theta_prior(), 4000, rng_a);
    omp_set_num_threads(saved > 1 ? saved : 2);
    RngStream rng_b(94);
    const EvalSummary many = evaluate_policy(ctp, ctp.theta_prior(), 4000, rng_b);
    omp_set_num_threads(saved);
    check_identical(one, many);
}
#endif

TEST_CASE("kernel errors surface from worker threads") {
    // A policy with the wrong arity fails inside the parallel region; the
    // error must reach the caller intact.
    const CtpInstance inst = generate_ctp_instance(12, 24, 5, 0.6);
    const CtpPolicyParams bad{{0.5, 0.5}};
    RngStream rng(95);
    CHECK_THROWS_AS(evaluate_ctp_agents(inst, bad, 64, rng), error);
}
