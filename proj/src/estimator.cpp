#include "symdens/estimator.hpp"

#include <cmath>

namespace symdens {

EstimateAccumulator::EstimateAccumulator(EstimatorKind kind, MarginalQuery query,
                                         std::shared_ptr<const SequenceOrbit> orbit)
    : kind_(kind), query_(std::move(query)), orbit_(std::move(orbit)) {}

EstimateAccumulator EstimateAccumulator::standard(MarginalQuery query) {
    return EstimateAccumulator(EstimatorKind::Standard, std::move(query), nullptr);
}

EstimateAccumulator EstimateAccumulator::rao_blackwell(
    MarginalQuery query, std::shared_ptr<const SequenceOrbit> orbit) {
    if (!orbit || orbit->members.empty())
        throw EstimatorError("rao_blackwell accumulator needs a precomputed orbit");
    if (orbit->base != query.vars)
        throw EstimatorError("orbit was computed for a different query sequence");
    return EstimateAccumulator(EstimatorKind::RaoBlackwell, std::move(query), std::move(orbit));
}

void EstimateAccumulator::kahan_add(double x) {
    double y = x - comp_;
    double t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
}

void EstimateAccumulator::add(const Assignment& s) {
    if (kind_ == EstimatorKind::Standard) {
        ++indicator_evals_;
        if (FactorGraph::query_matches(s, query_)) kahan_add(1.0);
    } else {
        int h = orbit_hamming_weight(s, query_, *orbit_);
        indicator_evals_ += static_cast<uint64_t>(orbit_->size());
        if (h > 0) kahan_add(static_cast<double>(h) / static_cast<double>(orbit_->size()));
    }
    ++n_;
}

void EstimateAccumulator::merge(const EstimateAccumulator& other) {
    if (kind_ != other.kind_ || query_.vars != other.query_.vars ||
        query_.target != other.query_.target)
        throw EstimatorError("cannot merge mismatched accumulators");
    if (kind_ == EstimatorKind::RaoBlackwell && orbit_->members != other.orbit_->members)
        throw EstimatorError("cannot merge accumulators with different orbits");
    kahan_add(other.sum_);
    kahan_add(-other.comp_);
    n_ += other.n_;
    indicator_evals_ += other.indicator_evals_;
}

double EstimateAccumulator::estimate() const {
    if (n_ == 0) throw EstimatorError("estimate undefined for N = 0");
    return sum_ / static_cast<double>(n_);
}

SingleVariableBatch::SingleVariableBatch(const FactorGraph& model, const GeneratingSet& group)
    : model_(&model) {
    if (group.n != model.num_vars())
        throw EstimatorError("group acts on a different variable count");
    orbit_count_ = variable_orbit_partition(group, labels_);
    for (int label = 0; label < orbit_count_; ++label) {
        int card = -1;
        for (int v = 0; v < model.num_vars(); ++v) {
            if (labels_[static_cast<size_t>(v)] != label) continue;
            if (card < 0)
                card = model.variable(v).cardinality;
            else if (card != model.variable(v).cardinality)
                throw EstimatorError("variable orbit mixes cardinalities");
        }
    }
    counts_.resize(static_cast<size_t>(model.num_vars()));
    for (int v = 0; v < model.num_vars(); ++v)
        counts_[static_cast<size_t>(v)].assign(
            static_cast<size_t>(model.variable(v).cardinality), 0);
}

void SingleVariableBatch::add(const Assignment& s) {
    for (int v = 0; v < model_->num_vars(); ++v)
        ++counts_[static_cast<size_t>(v)][static_cast<size_t>(s[static_cast<size_t>(v)])];
    ++n_;
}

std::vector<std::vector<double>> SingleVariableBatch::standard_estimates() const {
    if (n_ == 0) throw EstimatorError("estimate undefined for N = 0");
    std::vector<std::vector<double>> est(counts_.size());
    for (size_t v = 0; v < counts_.size(); ++v)
        for (int64_t c : counts_[v])
            est[v].push_back(static_cast<double>(c) / static_cast<double>(n_));
    return est;
}

std::vector<std::vector<double>> SingleVariableBatch::rb_estimates() const {
    if (n_ == 0) throw EstimatorError("estimate undefined for N = 0");
    // Aggregate integer counts per orbit, then divide once. Orbit members
    // get identical rows by construction.
    std::vector<std::vector<int64_t>> orbit_counts(static_cast<size_t>(orbit_count_));
    std::vector<int64_t> orbit_sizes(static_cast<size_t>(orbit_count_), 0);
    for (size_t v = 0; v < counts_.size(); ++v) {
        auto& oc = orbit_counts[static_cast<size_t>(labels_[v])];
        if (oc.empty()) oc.assign(counts_[v].size(), 0);
        for (size_t k = 0; k < counts_[v].size(); ++k) oc[k] += counts_[v][k];
        ++orbit_sizes[static_cast<size_t>(labels_[v])];
    }
    std::vector<std::vector<double>> est(counts_.size());
    for (size_t v = 0; v < counts_.size(); ++v) {
        const auto& oc = orbit_counts[static_cast<size_t>(labels_[v])];
        double denom = static_cast<double>(n_) *
                       static_cast<double>(orbit_sizes[static_cast<size_t>(labels_[v])]);
        for (int64_t c : oc) est[v].push_back(static_cast<double>(c) / denom);
    }
    return est;
}

std::vector<std::vector<double>> batch_single_variable_rb(const std::vector<Assignment>& samples,
                                                          const FactorGraph& model,
                                                          const GeneratingSet& group) {
    SingleVariableBatch batch(model, group);
    for (const Assignment& s : samples) batch.add(s);
    return batch.rb_estimates();
}

}  // namespace symdens
