#ifndef POLMC_ERRORS_HPP
#define POLMC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace polmc {

/// Base for all library errors so callers can catch the whole family.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A reward fell outside the domain a conditioning function is defined on.
struct reward_domain_error : error {
    using error::error;
};

/// A simulator returned a reward outside its declared bounds mid-chain.
struct bound_violation_error : error {
    using error::error;
};

/// A replayed trace entry does not belong to the distribution family the
/// simulator declares at that address.
struct trace_incompatibility_error : error {
    using error::error;
};

/// Every importance weight came out zero.
struct degenerate_weights_error : error {
    using error::error;
};

/// An enumeration model whose unnormalized posterior is identically zero,
/// or one too large to enumerate.
struct degenerate_model_error : error {
    using error::error;
};

/// An environment instance violating its structural invariants.
struct invalid_instance_error : error {
    using error::error;
};

} // namespace polmc

#endif
