#include "polmc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace polmc {

ThetaVector::ThetaVector(std::vector<ThetaComponent> components) : comps_(std::move(components)) {
    std::set<std::string> names;
    for (const auto& c : comps_) {
        if (c.name.empty()) throw error("theta component names must be non-empty");
        if (!names.insert(c.name).second) throw error("duplicate theta component name " + c.name);
        if (!in_support(c.prior, c.value))
            throw error("theta component " + c.name + " value " + draw_str(c.value) +
                        " outside support of " + prior_str(c.prior));
    }
}

std::size_t ThetaVector::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < comps_.size(); ++i)
        if (comps_[i].name == name) return i;
    throw error("no theta component named " + name);
}

void ThetaVector::set_value(std::size_t i, Draw value) {
    if (!in_support(comps_[i].prior, value))
        throw error("theta component " + comps_[i].name + " value " + draw_str(value) +
                    " outside support of " + prior_str(comps_[i].prior));
    comps_[i].value = std::move(value);
}

std::vector<Draw> ThetaVector::values() const {
    std::vector<Draw> out;
    out.reserve(comps_.size());
    for (const auto& c : comps_) out.push_back(c.value);
    return out;
}

ThetaVector ThetaVector::redrawn_all(RngStream& rng) const {
    ThetaVector out = *this;
    for (auto& c : out.comps_) c.value = draw_from_prior(c.prior, rng);
    return out;
}

ThetaVector ThetaVector::redrawn_component(std::size_t i, RngStream& rng) const {
    ThetaVector out = *this;
    out.comps_.at(i).value = draw_from_prior(out.comps_[i].prior, rng);
    return out;
}

bool ThetaVector::operator==(const ThetaVector& other) const {
    if (comps_.size() != other.comps_.size()) return false;
    for (std::size_t i = 0; i < comps_.size(); ++i)
        if (comps_[i].name != other.comps_[i].name || comps_[i].value != other.comps_[i].value)
            return false;
    return true;
}

RunOutput run_with_trace(const Simulator& sim, const ThetaVector& theta, const Trace& trace,
                         RngStream& rng) {
    TraceCursor cursor(&trace, rng);
    SimReward reward = sim.run(theta, cursor);
    return RunOutput{reward, std::move(cursor).take()};
}

Trace resample_all(const Trace&, RngStream&) { return Trace::empty(); }

Trace resample_site(const Trace& trace, const Address& addr, RngStream& rng) {
    const TraceEntry& entry = trace.at(addr); // throws if absent
    Trace out = trace;
    out.replace_value(addr, draw_from_prior(entry.prior, rng));
    return out;
}

} // namespace polmc
