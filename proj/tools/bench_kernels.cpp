// Compares the OpenMP evaluation kernels against their serial references:
// same outputs required, wall time reported.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "polmc/ctp.hpp"
#include "polmc/eval.hpp"
#include "polmc/rocksample.hpp"
#include "polmc/samplers.hpp"

namespace {

double time_ms(const std::function<void()>& work) {
    const auto t0 = std::chrono::steady_clock::now();
    work();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

void report(const std::string& label, double serial_ms, double parallel_ms, bool identical) {
    std::printf("%-34s serial %9.1f ms   parallel %9.1f ms   speedup %.2fx   identical %s\n",
                label.c_str(), serial_ms, parallel_ms, serial_ms / parallel_ms,
                identical ? "yes" : "NO");
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; parallel kernels run serially\n");
#endif

    constexpr std::uint64_t kEpisodes = 40000;
    constexpr std::uint64_t kDraws = 40000;

    {
        const polmc::CtpSimulator sim(polmc::generate_ctp_instance(20, 46, 7, 0.6));
        const polmc::ThetaVector theta = sim.theta_prior();
        polmc::RngStream rng_a(11), rng_b(11);
        polmc::EvalSummary serial{}, parallel{};
        const double t_serial =
            time_ms([&] { serial = polmc::evaluate_policy_serial(sim, theta, kEpisodes, rng_a); });
        const double t_parallel =
            time_ms([&] { parallel = polmc::evaluate_policy(sim, theta, kEpisodes, rng_b); });
        report("ctp episode evaluation", t_serial, t_parallel,
               serial.mean_reward == parallel.mean_reward &&
                   serial.std_error == parallel.std_error);
    }

    {
        const polmc::RockSampleSimulator sim(polmc::generate_rocksample_instance(11, 11, 3));
        const polmc::ThetaVector theta = sim.theta_prior();
        polmc::RngStream rng_a(12), rng_b(12);
        polmc::EvalSummary serial{}, parallel{};
        const double t_serial =
            time_ms([&] { serial = polmc::evaluate_policy_serial(sim, theta, kEpisodes, rng_a); });
        const double t_parallel =
            time_ms([&] { parallel = polmc::evaluate_policy(sim, theta, kEpisodes, rng_b); });
        report("rocksample episode evaluation", t_serial, t_parallel,
               serial.mean_reward == parallel.mean_reward &&
                   serial.std_error == parallel.std_error);
    }

    {
        const polmc::CtpSimulator sim(polmc::generate_ctp_instance(20, 46, 7, 0.6));
        polmc::RngStream rng_a(13), rng_b(13);
        std::vector<polmc::WeightedSample> serial, parallel;
        const double t_serial =
            time_ms([&] { serial = polmc::importance_sampling_serial(sim, kDraws, rng_a); });
        const double t_parallel =
            time_ms([&] { parallel = polmc::importance_sampling(sim, kDraws, rng_b); });
        bool identical = serial.size() == parallel.size();
        for (std::size_t i = 0; identical && i < serial.size(); ++i)
            identical = serial[i].weight == parallel[i].weight &&
                        serial[i].theta == parallel[i].theta;
        report("ctp importance sampling", t_serial, t_parallel, identical);
    }

    {
        const polmc::CtpInstance instance = polmc::generate_ctp_instance(20, 46, 7, 0.6);
        const polmc::CtpPolicyParams params =
            polmc::ctp_params_from_theta(instance, polmc::ctp_theta_prior(instance));
        polmc::RngStream rng_a(14), rng_b(14);
        polmc::CtpAgentsEval serial{}, parallel{};
        const double t_serial = time_ms(
            [&] { serial = polmc::evaluate_ctp_agents_serial(instance, params, kEpisodes, rng_a); });
        const double t_parallel =
            time_ms([&] { parallel = polmc::evaluate_ctp_agents(instance, params, kEpisodes, rng_b); });
        report("ctp three-agent evaluation", t_serial, t_parallel,
               serial.policy.mean_reward == parallel.policy.mean_reward &&
                   serial.random_agent.mean_reward == parallel.random_agent.mean_reward &&
                   serial.clairvoyant.mean_reward == parallel.clairvoyant.mean_reward);
    }

    return 0;
}
