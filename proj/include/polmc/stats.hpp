#ifndef POLMC_STATS_HPP
#define POLMC_STATS_HPP

#include <span>
#include <vector>

namespace polmc {

struct MeanStderr {
    double mean;
    double std_error; ///< sample standard deviation / sqrt(n)
};

MeanStderr mean_stderr(std::span<const double> values);

/// Total variation distance between two finite distributions.
double tv_distance(std::span<const double> p, std::span<const double> q);

/// Spearman rank correlation with average ranks on ties.
double spearman(std::span<const double> x, std::span<const double> y);

} // namespace polmc

#endif
