#ifndef POLMC_SWEEP_HPP
#define POLMC_SWEEP_HPP

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "polmc/eval.hpp"
#include "polmc/samplers.hpp"

namespace polmc {

enum class EnvKind { Ctp, RockSample };
enum class SamplerKind { Mh, Lmh, Is };

struct ExperimentConfig {
    EnvKind env = EnvKind::Ctp;
    std::string instance_path;
    std::vector<double> temperatures = {100.0, 10.0, 1.0, 0.1, 0.01, 0.001};
    std::uint64_t iterations = 100000;
    std::uint64_t eval_episodes = 10000;
    std::uint64_t seed = 1;
    SamplerKind sampler = SamplerKind::Lmh;
    bool warm_start = true;
    double burn_in_fraction = 0.1;
    std::uint64_t chain_thin = 0; ///< 0 = pick so roughly 1000 rows per chain

    void validate() const;
    std::uint64_t burn_in() const;
    std::uint64_t effective_thin() const;

    static ExperimentConfig from_json_file(const std::string& path);
    std::string to_json() const;
};

std::string to_string(EnvKind env);
std::string to_string(SamplerKind sampler);
EnvKind env_from_string(const std::string& s);
SamplerKind sampler_from_string(const std::string& s);

/// Builds the simulator an ExperimentConfig names.
std::unique_ptr<Simulator> make_simulator(const ExperimentConfig& config);

/// Draws one sample index with weights tempered to the power 1/temperature;
/// low temperatures concentrate on the maximum-weight draw.
std::size_t tempered_resample_index(const std::vector<WeightedSample>& samples,
                                    double temperature, RngStream& rng);

struct SweepResult {
    std::vector<EvalSummary> rows; ///< per-temperature policy rows, then baselines
    std::filesystem::path sweep_csv;
    std::vector<std::filesystem::path> chain_csvs;
};

/// Full temperature-sweep protocol: inference per temperature, policy
/// evaluation, baselines once, CSV artifacts. Byte-reproducible per seed.
SweepResult run_sweep(const ExperimentConfig& config, const std::filesystem::path& outdir);

/// Reshapes a sweep CSV into a long-format plot table (series, temperature,
/// x = -log10(temperature), mean, std_error).
void emit_plot_data(const std::filesystem::path& sweep_csv, const std::filesystem::path& out_path);

/// Annealed inference as the `infer` subcommand runs it: returns the mode
/// and writes chain diagnostics. For the importance sampler the mode comes
/// from tempered resampling at the lowest temperature.
ThetaVector infer_mode(const ExperimentConfig& config, const Simulator& sim,
                       const std::filesystem::path& outdir,
                       std::vector<std::filesystem::path>* chain_files = nullptr);

/// Theta JSON: {"components": [{"name", "value"}, ...]}.
void save_theta_json(const ThetaVector& theta, const std::filesystem::path& path);
ThetaVector load_theta_json(const ThetaVector& schema, const std::filesystem::path& path);

/// Output directory: POLMC_OUTDIR when set, else the current directory.
std::filesystem::path resolve_outdir();

} // namespace polmc

#endif
