#include "polmc/conditioning.hpp"

#include <cmath>
#include <string>

namespace polmc {

RewardBounds::RewardBounds(double lower_bound, double upper_bound)
    : lower(lower_bound), upper(upper_bound) {
    if (!std::isfinite(lower) || !std::isfinite(upper))
        throw reward_domain_error("reward bounds must be finite");
    if (!(lower < upper))
        throw reward_domain_error("reward bounds require lower < upper, got [" +
                                  std::to_string(lower) + ", " + std::to_string(upper) + "]");
}

double exp_conditioning(double r, double upper) {
    return std::exp(log_exp_conditioning(r, upper));
}

double log_exp_conditioning(double r, double upper) {
    if (r > upper)
        throw reward_domain_error("exp_conditioning: reward " + std::to_string(r) +
                                  " exceeds upper bound " + std::to_string(upper));
    return r - upper;
}

double linear_conditioning(double r, const RewardBounds& bounds) {
    if (r < bounds.lower || r > bounds.upper)
        throw reward_domain_error("linear_conditioning: reward " + std::to_string(r) +
                                  " outside [" + std::to_string(bounds.lower) + ", " +
                                  std::to_string(bounds.upper) + "]");
    return (r - bounds.lower) / bounds.width();
}

double log_linear_conditioning(double r, const RewardBounds& bounds) {
    return std::log(linear_conditioning(r, bounds));
}

double softplus_reward(double r) {
    if (r > 0.0) return r + std::log1p(std::exp(-r));
    return std::log1p(std::exp(r));
}

} // namespace polmc
