#include "polmc/trace.hpp"

#include <cmath>
#include <ostream>

namespace polmc {

namespace {

double lgamma_safe(double x) { return std::lgamma(x); }

} // namespace

bool same_family(const PriorDesc& a, const PriorDesc& b) {
    return a.index() == b.index();
}

bool in_support(const PriorDesc& prior, const Draw& value) {
    if (std::holds_alternative<BernoulliPrior>(prior)) return std::holds_alternative<bool>(value);
    if (const auto* cat = std::get_if<CategoricalPrior>(&prior)) {
        const auto* idx = std::get_if<std::int64_t>(&value);
        return idx && *idx >= 0 && *idx < static_cast<std::int64_t>(cat->probs.size());
    }
    if (const auto* uni = std::get_if<UniformPrior>(&prior)) {
        const auto* x = std::get_if<double>(&value);
        return x && *x >= uni->lo && *x <= uni->hi;
    }
    const auto* x = std::get_if<double>(&value);
    return x && *x > 0.0 && *x < 1.0; // beta
}

double log_prior_mass(const PriorDesc& prior, const Draw& value) {
    if (!in_support(prior, value)) return -std::numeric_limits<double>::infinity();
    if (const auto* ber = std::get_if<BernoulliPrior>(&prior)) {
        const bool v = std::get<bool>(value);
        return std::log(v ? ber->p : 1.0 - ber->p);
    }
    if (const auto* cat = std::get_if<CategoricalPrior>(&prior))
        return std::log(cat->probs[static_cast<std::size_t>(std::get<std::int64_t>(value))]);
    if (const auto* uni = std::get_if<UniformPrior>(&prior))
        return -std::log(uni->hi - uni->lo);
    const auto& beta = std::get<BetaPrior>(prior);
    const double x = std::get<double>(value);
    return (beta.alpha - 1.0) * std::log(x) + (beta.beta - 1.0) * std::log1p(-x) +
           lgamma_safe(beta.alpha + beta.beta) - lgamma_safe(beta.alpha) - lgamma_safe(beta.beta);
}

Draw draw_from_prior(const PriorDesc& prior, RngStream& rng) {
    if (const auto* ber = std::get_if<BernoulliPrior>(&prior)) return rng.next_bernoulli(ber->p);
    if (const auto* cat = std::get_if<CategoricalPrior>(&prior)) return rng.next_categorical(cat->probs);
    if (const auto* uni = std::get_if<UniformPrior>(&prior)) return rng.next_uniform(uni->lo, uni->hi);
    const auto& beta = std::get<BetaPrior>(prior);
    return rng.next_beta(beta.alpha, beta.beta);
}

std::string prior_str(const PriorDesc& prior) {
    if (const auto* ber = std::get_if<BernoulliPrior>(&prior))
        return "bernoulli(" + std::to_string(ber->p) + ")";
    if (const auto* cat = std::get_if<CategoricalPrior>(&prior))
        return "categorical(" + std::to_string(cat->probs.size()) + ")";
    if (const auto* uni = std::get_if<UniformPrior>(&prior))
        return "uniform(" + std::to_string(uni->lo) + ", " + std::to_string(uni->hi) + ")";
    const auto& beta = std::get<BetaPrior>(prior);
    return "beta(" + std::to_string(beta.alpha) + ", " + std::to_string(beta.beta) + ")";
}

std::string draw_str(const Draw& value) {
    if (const auto* b = std::get_if<bool>(&value)) return *b ? "1" : "0";
    if (const auto* i = std::get_if<std::int64_t>(&value)) return std::to_string(*i);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", std::get<double>(value));
    return buf;
}

double draw_as_real(const Draw& value) {
    if (const auto* b = std::get_if<bool>(&value)) return *b ? 1.0 : 0.0;
    if (const auto* i = std::get_if<std::int64_t>(&value)) return static_cast<double>(*i);
    return std::get<double>(value);
}

const TraceEntry& Trace::at(const Address& addr) const {
    const auto* entry = find(addr);
    if (!entry) throw error("trace has no entry at " + addr.str());
    return *entry;
}

void Trace::record(const Address& addr, Draw value, PriorDesc prior) {
    if (addr.empty()) throw error("cannot record at an empty address");
    if (!in_support(prior, value))
        throw error("value " + draw_str(value) + " outside support of " + prior_str(prior) +
                    " at " + addr.str());
    auto [it, inserted] = entries_.emplace(addr, TraceEntry{std::move(value), std::move(prior)});
    if (!inserted)
        throw error("duplicate trace address " + addr.str() +
                    "; every executed choice site needs a unique address");
    draw_log_.push_back(addr);
}

void Trace::replace_value(const Address& addr, Draw value) {
    auto it = entries_.find(addr);
    if (it == entries_.end()) throw error("trace has no entry at " + addr.str());
    if (!in_support(it->second.prior, value))
        throw error("value " + draw_str(value) + " outside support of " +
                    prior_str(it->second.prior) + " at " + addr.str());
    it->second.value = std::move(value);
}

double Trace::log_prior() const {
    double total = 0.0;
    for (const auto& [addr, entry] : entries_) total += log_prior_mass(entry.prior, entry.value);
    return total;
}

bool Trace::entry_values_equal(const Trace& other) const {
    if (entries_.size() != other.entries_.size()) return false;
    auto it = entries_.begin();
    auto jt = other.entries_.begin();
    for (; it != entries_.end(); ++it, ++jt) {
        if (it->first != jt->first) return false;
        if (it->second.value != jt->second.value) return false;
    }
    return true;
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
    out << "address,value\n";
    for (const Address& addr : trace.draw_log())
        out << addr.str() << ',' << draw_str(trace.at(addr).value) << '\n';
}

Draw TraceCursor::site(const Address& addr, PriorDesc prior) {
    if (prev_) {
        if (const auto* entry = prev_->find(addr)) {
            if (!same_family(entry->prior, prior))
                throw trace_incompatibility_error(
                    "trace entry at " + addr.str() + " records " + prior_str(entry->prior) +
                    " but the site declares " + prior_str(prior));
            if (in_support(prior, entry->value)) {
                out_.record(addr, entry->value, std::move(prior));
                return entry->value;
            }
            // Value fell out of the declared support (e.g. a narrowed
            // uniform range); fall through to a fresh draw.
        }
    }
    Draw value = draw_from_prior(prior, *rng_);
    out_.record(addr, value, std::move(prior));
    return value;
}

bool TraceCursor::draw_bernoulli(const Address& addr, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw error("bernoulli probability out of range at " + addr.str());
    return std::get<bool>(site(addr, BernoulliPrior{p}));
}

std::int64_t TraceCursor::draw_categorical(const Address& addr, std::vector<double> probs) {
    if (probs.empty()) throw error("categorical with empty support at " + addr.str());
    return std::get<std::int64_t>(site(addr, CategoricalPrior{std::move(probs)}));
}

double TraceCursor::draw_uniform(const Address& addr, double lo, double hi) {
    if (!(lo < hi)) throw error("uniform requires lo < hi at " + addr.str());
    return std::get<double>(site(addr, UniformPrior{lo, hi}));
}

double TraceCursor::draw_beta(const Address& addr, double alpha, double beta) {
    if (!(alpha > 0.0 && beta > 0.0)) throw error("beta parameters must be positive at " + addr.str());
    return std::get<double>(site(addr, BetaPrior{alpha, beta}));
}

} // namespace polmc
