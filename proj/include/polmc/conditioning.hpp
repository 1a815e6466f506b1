#ifndef POLMC_CONDITIONING_HPP
#define POLMC_CONDITIONING_HPP

#include "polmc/errors.hpp"

namespace polmc {

/// Declared reward range of a simulator. Conditioning probabilities and
/// acceptance ratios are only meaningful for rewards inside it.
struct RewardBounds {
    double lower;
    double upper;

    RewardBounds(double lower_bound, double upper_bound);

    double width() const { return upper - lower; }
};

/// Which auxiliary-variable success probability a simulator conditions with.
enum class ConditioningKind { Exponential, Linear };

/// exp(r - upper), in (0, 1]. Requires r <= upper.
double exp_conditioning(double r, double upper);

/// log of the above, i.e. r - upper.
double log_exp_conditioning(double r, double upper);

/// (r - lower) / (upper - lower), in [0, 1]. Requires r within bounds.
/// Out-of-bounds rewards are a simulator bug and raise, never clamp.
double linear_conditioning(double r, const RewardBounds& bounds);

double log_linear_conditioning(double r, const RewardBounds& bounds);

/// log(exp(r) + 1), evaluated in overflow-safe form. Strictly positive and
/// monotone, so bounds stated in softplus space stay ordered.
double softplus_reward(double r);

} // namespace polmc

#endif
