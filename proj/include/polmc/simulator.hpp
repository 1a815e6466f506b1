#ifndef POLMC_SIMULATOR_HPP
#define POLMC_SIMULATOR_HPP

#include <string>
#include <vector>

#include "polmc/conditioning.hpp"
#include "polmc/trace.hpp"

namespace polmc {

struct ThetaComponent {
    std::string name;
    Draw value;
    PriorDesc prior;
};

/// Policy parameters with their per-component priors. Component order is the
/// schema used when values are flattened into records and CSV columns.
class ThetaVector {
public:
    ThetaVector() = default;
    explicit ThetaVector(std::vector<ThetaComponent> components);

    std::size_t size() const { return comps_.size(); }
    bool empty() const { return comps_.empty(); }
    const ThetaComponent& operator[](std::size_t i) const { return comps_[i]; }
    const std::vector<ThetaComponent>& components() const { return comps_; }

    /// Index of a named component; throws if absent.
    std::size_t index_of(const std::string& name) const;

    double real_at(std::size_t i) const { return draw_as_real(comps_[i].value); }
    std::int64_t index_at(std::size_t i) const { return std::get<std::int64_t>(comps_[i].value); }

    void set_value(std::size_t i, Draw value);

    /// All component values, in schema order.
    std::vector<Draw> values() const;

    ThetaVector redrawn_all(RngStream& rng) const;
    ThetaVector redrawn_component(std::size_t i, RngStream& rng) const;

    bool operator==(const ThetaVector& other) const;

private:
    std::vector<ThetaComponent> comps_;
};

struct SimReward {
    double conditioned; ///< reward in the space the bounds are declared in
    double raw;         ///< reward as the environment reports it
};

/// Behavioral contract of a trace-parameterized simulator: one run maps
/// (theta, trace) to a reward, deterministically given a full trace.
class Simulator {
public:
    virtual ~Simulator() = default;

    virtual SimReward run(const ThetaVector& theta, TraceCursor& trace) const = 0;

    /// Component schema and priors; values double as the default theta0.
    virtual const ThetaVector& theta_prior() const = 0;

    virtual RewardBounds bounds() const = 0;
    virtual ConditioningKind conditioning() const = 0;
    virtual std::string name() const { return "simulator"; }
};

struct RunOutput {
    SimReward reward;
    Trace trace;
};

/// Runs the simulator replaying recorded values at matching addresses and
/// drawing fresh ones elsewhere. Entries whose addresses were not visited
/// are dropped from the returned trace.
RunOutput run_with_trace(const Simulator& sim, const ThetaVector& theta, const Trace& trace,
                         RngStream& rng);

/// Marks the whole trace for redrawing; the next run draws everything fresh.
Trace resample_all(const Trace& trace, RngStream& rng);

/// Redraws only the given address from its recorded descriptor.
Trace resample_site(const Trace& trace, const Address& addr, RngStream& rng);

} // namespace polmc

#endif
