#ifndef POLMC_TRACE_HPP
#define POLMC_TRACE_HPP

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "polmc/errors.hpp"
#include "polmc/rng.hpp"

namespace polmc {

/// Identifies one random-choice site inside a simulator run. Simulator
/// authors label sites explicitly; loop iterations disambiguate by index.
struct AddressSegment {
    std::string label;
    std::uint32_t index = 0;

    auto operator<=>(const AddressSegment&) const = default;
};

class Address {
public:
    Address() = default;
    Address(std::string label, std::uint32_t index = 0) {
        path_.push_back({std::move(label), index});
        validate();
    }

    /// Nested scope, e.g. addr("episode", 3).child("edge", 7).
    Address child(std::string label, std::uint32_t index = 0) const {
        Address out = *this;
        out.path_.push_back({std::move(label), index});
        out.validate();
        return out;
    }

    const std::vector<AddressSegment>& path() const { return path_; }
    bool empty() const { return path_.empty(); }

    std::string str() const {
        std::string out;
        for (std::size_t i = 0; i < path_.size(); ++i) {
            if (i) out += '/';
            out += path_[i].label;
            out += '[';
            out += std::to_string(path_[i].index);
            out += ']';
        }
        return out;
    }

    auto operator<=>(const Address&) const = default;

private:
    void validate() const {
        for (const auto& seg : path_)
            if (seg.label.empty()) throw error("address labels must be non-empty");
    }

    std::vector<AddressSegment> path_;
};

/// A primitive draw recorded in a trace or held by a policy component.
/// Equality is exact, which is what replay determinism needs.
using Draw = std::variant<bool, std::int64_t, double>;

struct BernoulliPrior {
    double p;
};
struct CategoricalPrior {
    std::vector<double> probs;
};
struct UniformPrior {
    double lo, hi;
};
struct BetaPrior {
    double alpha, beta;
};

using PriorDesc = std::variant<BernoulliPrior, CategoricalPrior, UniformPrior, BetaPrior>;

bool same_family(const PriorDesc& a, const PriorDesc& b);
bool in_support(const PriorDesc& prior, const Draw& value);
/// Log mass for discrete priors, log density for continuous ones.
double log_prior_mass(const PriorDesc& prior, const Draw& value);
Draw draw_from_prior(const PriorDesc& prior, RngStream& rng);
std::string prior_str(const PriorDesc& prior);
std::string draw_str(const Draw& value);
double draw_as_real(const Draw& value);

struct TraceEntry {
    Draw value;
    PriorDesc prior;
};

/// All random choices of one simulator run, keyed by address and replayable.
/// Traces are immutable values once a run completes; operations that modify
/// them return new traces.
class Trace {
public:
    static Trace empty() { return Trace{}; }

    bool contains(const Address& addr) const { return entries_.count(addr) != 0; }

    const TraceEntry* find(const Address& addr) const {
        auto it = entries_.find(addr);
        return it == entries_.end() ? nullptr : &it->second;
    }

    const TraceEntry& at(const Address& addr) const;

    std::size_t size() const { return draw_log_.size(); }

    /// Addresses in execution order.
    const std::vector<Address>& draw_log() const { return draw_log_; }

    void record(const Address& addr, Draw value, PriorDesc prior);

    /// Replaces the value at an existing address, keeping its descriptor.
    void replace_value(const Address& addr, Draw value);

    /// Sum over entries of log prior mass/density at the recorded value.
    double log_prior() const;

    bool operator==(const Trace& other) const {
        return draw_log_ == other.draw_log_ && entry_values_equal(other);
    }

private:
    bool entry_values_equal(const Trace& other) const;

    std::map<Address, TraceEntry> entries_;
    std::vector<Address> draw_log_;
};

/// Debug dump: one "address,value" row per entry in execution order.
void write_trace_csv(std::ostream& out, const Trace& trace);

/// Hands random choices to a simulator while it runs: replays values found
/// in the previous trace and draws fresh ones elsewhere, recording the
/// completed trace as it goes. One cursor serves exactly one run.
class TraceCursor {
public:
    TraceCursor(const Trace* previous, RngStream& rng) : prev_(previous), rng_(&rng) {}

    bool draw_bernoulli(const Address& addr, double p);
    std::int64_t draw_categorical(const Address& addr, std::vector<double> probs);
    double draw_uniform(const Address& addr, double lo, double hi);
    double draw_beta(const Address& addr, double alpha, double beta);

    Trace take() && { return std::move(out_); }
    const Trace& completed() const { return out_; }

private:
    Draw site(const Address& addr, PriorDesc prior);

    const Trace* prev_;
    Trace out_;
    RngStream* rng_;
};

} // namespace polmc

#endif
