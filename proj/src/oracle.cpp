#include "polmc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace polmc {

namespace {

constexpr double kMassTol = 1e-12;

double clamp_to(double x, const RewardBounds& bounds) {
    return std::min(std::max(x, bounds.lower), bounds.upper);
}

} // namespace

void DiscreteModel::validate() const {
    if (theta_prior.empty() || trace_prior.empty())
        throw degenerate_model_error("discrete model needs nonempty theta and trace supports");
    if (theta_prior.size() * trace_prior.size() > kMaxPairs)
        throw degenerate_model_error("discrete model exceeds the enumeration cap");
    double mass = 0.0;
    for (double p : theta_prior) {
        if (p < 0.0) throw degenerate_model_error("negative theta prior mass");
        mass += p;
    }
    if (std::abs(mass - 1.0) > kMassTol)
        throw degenerate_model_error("theta prior masses must sum to 1");
    mass = 0.0;
    for (double p : trace_prior) {
        if (p < 0.0) throw degenerate_model_error("negative trace prior mass");
        mass += p;
    }
    if (std::abs(mass - 1.0) > kMassTol)
        throw degenerate_model_error("trace prior masses must sum to 1");
    if (reward.size() != theta_prior.size())
        throw degenerate_model_error("reward table must cover the theta support");
    for (const auto& row : reward) {
        if (row.size() != trace_prior.size())
            throw degenerate_model_error("reward table must cover the trace support");
        for (double r : row)
            if (r < bounds.lower || r > bounds.upper)
                throw degenerate_model_error("reward table entry outside declared bounds");
    }
}

std::vector<double> exact_posterior(const DiscreteModel& model) {
    model.validate();
    std::vector<double> mass(model.theta_count());
    double total = 0.0;
    for (std::size_t i = 0; i < model.theta_count(); ++i) {
        mass[i] = model.theta_prior[i] * (exact_expected_reward(model, i) - model.bounds.lower);
        total += mass[i];
    }
    if (total <= 0.0)
        throw degenerate_model_error("exact_posterior: unnormalized masses are all zero");
    for (double& m : mass) m /= total;
    return mass;
}

double exact_expected_reward(const DiscreteModel& model, std::size_t theta_index) {
    if (theta_index >= model.theta_count())
        throw error("exact_expected_reward: theta index out of range");
    double acc = 0.0;
    for (std::size_t j = 0; j < model.trace_count(); ++j)
        acc += model.trace_prior[j] * model.reward[theta_index][j];
    return acc;
}

MixtureIdentityReport mixture_identity_check(const DiscreteModel& model) {
    model.validate();
    MixtureIdentityReport report;
    for (std::size_t i = 0; i < model.theta_count(); ++i) {
        const double expected = clamp_to(exact_expected_reward(model, i), model.bounds);

        // Conjunction route: product of per-reward probabilities raised to
        // their trace masses, against the probability of the expectation.
        double product = 1.0;
        for (std::size_t j = 0; j < model.trace_count(); ++j)
            product *= std::pow(exp_conditioning(model.reward[i][j], model.bounds.upper),
                                model.trace_prior[j]);
        const double conj = exp_conditioning(expected, model.bounds.upper);
        report.max_dev_exponential = std::max(report.max_dev_exponential, std::abs(product - conj));

        // Disjunction route: mixture of per-reward probabilities, against
        // the probability of the expectation.
        double mixture = 0.0;
        for (std::size_t j = 0; j < model.trace_count(); ++j)
            mixture += model.trace_prior[j] * linear_conditioning(model.reward[i][j], model.bounds);
        const double disj = linear_conditioning(expected, model.bounds);
        report.max_dev_linear = std::max(report.max_dev_linear, std::abs(mixture - disj));
    }
    return report;
}

DiscreteModelSimulator::DiscreteModelSimulator(DiscreteModel model, std::string name)
    : model_(std::move(model)), name_(std::move(name)) {
    model_.validate();
    prior_ = ThetaVector({{"theta", std::int64_t{0}, CategoricalPrior{model_.theta_prior}}});
}

SimReward DiscreteModelSimulator::run(const ThetaVector& theta, TraceCursor& trace) const {
    const auto k = static_cast<std::size_t>(theta.index_at(0));
    const auto j = static_cast<std::size_t>(trace.draw_categorical(Address("tau"), model_.trace_prior));
    const double r = model_.reward[k][j];
    return SimReward{r, r};
}

DiscreteThetaIndexer::DiscreteThetaIndexer(const ThetaVector& schema) : schema_(schema) {
    size_ = 1;
    for (const auto& c : schema_.components()) {
        std::size_t support = 0;
        if (std::holds_alternative<BernoulliPrior>(c.prior)) {
            support = 2;
        } else if (const auto* cat = std::get_if<CategoricalPrior>(&c.prior)) {
            support = cat->probs.size();
        } else {
            throw degenerate_model_error("theta component " + c.name + " is not discrete");
        }
        radix_.push_back(support);
        if (size_ > DiscreteModel::kMaxPairs / support)
            throw degenerate_model_error("theta support exceeds the enumeration cap");
        size_ *= support;
    }
}

std::size_t DiscreteThetaIndexer::index(std::span<const Draw> values) const {
    if (values.size() != radix_.size()) throw error("theta indexer: wrong component count");
    std::size_t out = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::size_t digit;
        if (const auto* b = std::get_if<bool>(&values[i]))
            digit = *b ? 1 : 0;
        else
            digit = static_cast<std::size_t>(std::get<std::int64_t>(values[i]));
        if (digit >= radix_[i]) throw error("theta indexer: value out of range");
        out = out * radix_[i] + digit;
    }
    return out;
}

std::vector<Draw> DiscreteThetaIndexer::values_at(std::size_t index) const {
    if (index >= size_) throw error("theta indexer: index out of range");
    std::vector<Draw> values(radix_.size());
    for (std::size_t i = radix_.size(); i-- > 0;) {
        const std::size_t digit = index % radix_[i];
        index /= radix_[i];
        if (std::holds_alternative<BernoulliPrior>(schema_[i].prior))
            values[i] = digit == 1;
        else
            values[i] = static_cast<std::int64_t>(digit);
    }
    return values;
}

std::vector<double> DiscreteThetaIndexer::prior() const {
    std::vector<double> mass(size_, 1.0);
    for (std::size_t idx = 0; idx < size_; ++idx) {
        const auto values = values_at(idx);
        double m = 1.0;
        for (std::size_t i = 0; i < values.size(); ++i)
            m *= std::exp(log_prior_mass(schema_[i].prior, values[i]));
        mass[idx] = m;
    }
    return mass;
}

namespace {

struct SiteSpec {
    Address addr;
    PriorDesc prior;
    std::size_t support;
};

Draw site_value(const PriorDesc& prior, std::size_t digit) {
    if (std::holds_alternative<BernoulliPrior>(prior)) return digit == 1;
    return static_cast<std::int64_t>(digit);
}

} // namespace

DiscreteModel flatten_simulator(const Simulator& sim) {
    const ThetaVector& schema = sim.theta_prior();
    DiscreteThetaIndexer indexer(schema);

    // Discover the choice sites with one throwaway run.
    std::vector<SiteSpec> sites;
    {
        RngStream probe(0xd15c0);
        ThetaVector theta0 = schema;
        for (std::size_t i = 0; i < schema.size(); ++i)
            theta0.set_value(i, indexer.values_at(0)[i]);
        RunOutput out = run_with_trace(sim, theta0, Trace::empty(), probe);
        for (const Address& addr : out.trace.draw_log()) {
            const TraceEntry& entry = out.trace.at(addr);
            std::size_t support;
            if (std::holds_alternative<BernoulliPrior>(entry.prior))
                support = 2;
            else if (const auto* cat = std::get_if<CategoricalPrior>(&entry.prior))
                support = cat->probs.size();
            else
                throw degenerate_model_error("flatten_simulator: continuous trace site at " +
                                             addr.str());
            sites.push_back({addr, entry.prior, support});
        }
    }

    std::size_t trace_count = 1;
    for (const auto& site : sites) {
        if (trace_count > DiscreteModel::kMaxPairs / site.support)
            throw degenerate_model_error("flatten_simulator: trace space exceeds the cap");
        trace_count *= site.support;
    }
    if (indexer.size() * trace_count > DiscreteModel::kMaxPairs)
        throw degenerate_model_error("flatten_simulator: model exceeds the enumeration cap");

    DiscreteModel model;
    model.bounds = sim.bounds();
    model.theta_prior = indexer.prior();
    model.trace_prior.assign(trace_count, 0.0);
    model.reward.assign(indexer.size(), std::vector<double>(trace_count, 0.0));

    RngStream replay_rng(0); // replays never consume randomness
    for (std::size_t k = 0; k < indexer.size(); ++k) {
        ThetaVector theta = schema;
        const auto theta_values = indexer.values_at(k);
        for (std::size_t i = 0; i < schema.size(); ++i) theta.set_value(i, theta_values[i]);

        for (std::size_t j = 0; j < trace_count; ++j) {
            Trace input;
            std::size_t rem = j;
            for (std::size_t s = sites.size(); s-- > 0;) {
                const std::size_t digit = rem % sites[s].support;
                rem /= sites[s].support;
                input.record(sites[s].addr, site_value(sites[s].prior, digit), sites[s].prior);
            }
            RunOutput out = run_with_trace(sim, theta, input, replay_rng);
            if (out.trace.size() != sites.size())
                throw degenerate_model_error(
                    "flatten_simulator: control flow varies across the support");
            for (const auto& site : sites) {
                const TraceEntry* entry = out.trace.find(site.addr);
                if (!entry || entry->value != input.at(site.addr).value)
                    throw degenerate_model_error(
                        "flatten_simulator: replay altered an enumerated site");
            }
            const double mass = std::exp(out.trace.log_prior());
            if (k == 0)
                model.trace_prior[j] = mass;
            else if (std::abs(model.trace_prior[j] - mass) > kMassTol)
                throw degenerate_model_error(
                    "flatten_simulator: trace distribution depends on theta");
            model.reward[k][j] = out.reward.conditioned;
        }
    }
    model.validate();
    return model;
}

std::vector<double> chain_theta_marginal(std::span<const SampleRecord> records,
                                         const DiscreteThetaIndexer& indexer) {
    if (records.empty()) throw error("chain_theta_marginal: empty chain");
    std::vector<double> counts(indexer.size(), 0.0);
    for (const auto& rec : records) counts[indexer.index(rec.theta)] += 1.0;
    for (double& c : counts) c /= static_cast<double>(records.size());
    return counts;
}

std::vector<double> weighted_theta_marginal(std::span<const WeightedSample> samples,
                                            const DiscreteThetaIndexer& indexer) {
    if (samples.empty()) throw error("weighted_theta_marginal: empty sample");
    std::vector<double> mass(indexer.size(), 0.0);
    double total = 0.0;
    for (const auto& s : samples) {
        mass[indexer.index(s.theta)] += s.weight;
        total += s.weight;
    }
    if (total <= 0.0) throw degenerate_weights_error("weighted_theta_marginal: zero total weight");
    for (double& m : mass) m /= total;
    return mass;
}

} // namespace polmc
