#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "symdens/group.hpp"
#include "symdens/model.hpp"

namespace symdens {

class EstimatorError : public std::runtime_error {
  public:
    explicit EstimatorError(const std::string& what) : std::runtime_error(what) {}
};

enum class EstimatorKind { Standard, RaoBlackwell };

// Streaming accumulator for the standard and the symmetry-aware
// Rao-Blackwell marginal density estimators. Single writer; cross-chain
// aggregation via merge(), which is order-insensitive up to ~1e-12 thanks
// to compensated summation.
class EstimateAccumulator {
  public:
    static EstimateAccumulator standard(MarginalQuery query);
    static EstimateAccumulator rao_blackwell(MarginalQuery query,
                                             std::shared_ptr<const SequenceOrbit> orbit);

    void add(const Assignment& s);
    void merge(const EstimateAccumulator& other);

    double estimate() const;  // sum / N; throws when N == 0
    long count() const { return n_; }
    double sum() const { return sum_; }
    EstimatorKind kind() const { return kind_; }
    const MarginalQuery& query() const { return query_; }
    const SequenceOrbit* orbit() const { return orbit_.get(); }

    // Indicator evaluations spent so far (complexity contract:
    // one per sample for standard, |orbit| per sample for RB).
    uint64_t indicator_evaluations() const { return indicator_evals_; }

  private:
    EstimateAccumulator(EstimatorKind kind, MarginalQuery query,
                        std::shared_ptr<const SequenceOrbit> orbit);

    void kahan_add(double x);

    EstimatorKind kind_;
    MarginalQuery query_;
    std::shared_ptr<const SequenceOrbit> orbit_;
    long n_ = 0;
    double sum_ = 0.0;
    double comp_ = 0.0;
    uint64_t indicator_evals_ = 0;
};

// Single-variable fast path: per-variable standard counts aggregated over
// the variable orbit partition. estimates[v][k] is the estimate of
// P(X_v = k); variables in the same orbit get identical rows. Total cost
// O(|R| n + N n). Variables sharing an orbit must share a cardinality.
class SingleVariableBatch {
  public:
    SingleVariableBatch(const FactorGraph& model, const GeneratingSet& group);

    void add(const Assignment& s);

    std::vector<std::vector<double>> standard_estimates() const;
    std::vector<std::vector<double>> rb_estimates() const;

    long count() const { return n_; }
    const std::vector<int>& orbit_labels() const { return labels_; }

  private:
    const FactorGraph* model_;
    std::vector<int> labels_;
    int orbit_count_ = 0;
    long n_ = 0;
    std::vector<std::vector<int64_t>> counts_;  // per variable, per value
};

std::vector<std::vector<double>> batch_single_variable_rb(const std::vector<Assignment>& samples,
                                                          const FactorGraph& model,
                                                          const GeneratingSet& group);

}  // namespace symdens
