#pragma once

#include <cstdint>
#include <vector>

#include "symdens/group.hpp"
#include "symdens/model.hpp"
#include "symdens/sampler.hpp"

namespace symdens {

class ExactError : public std::runtime_error {
  public:
    explicit ExactError(const std::string& what) : std::runtime_error(what) {}
};

class NonErgodicError : public ExactError {
  public:
    explicit NonErgodicError(const std::string& what) : ExactError(what) {}
};

constexpr size_t kMaxExactStates = size_t{1} << 20;
constexpr size_t kMaxChainStates = size_t{1} << 16;

// Mixed-radix ranking of the evidence-consistent assignment space. The
// first (lowest-id) free variable is the most significant digit, so ranks,
// representatives and dumps are stable across runs.
class StateSpace {
  public:
    explicit StateSpace(const FactorGraph& model, size_t max_states = kMaxExactStates);

    size_t count() const { return count_; }
    const FactorGraph& model() const { return *model_; }

    Assignment decode(size_t rank) const;  // evidence values filled in
    size_t encode(const Assignment& s) const;

  private:
    const FactorGraph* model_;
    std::vector<size_t> place_value_;  // per free var
    size_t count_ = 1;
};

struct ExactDistribution {
    std::vector<double> probs;  // indexed by assignment rank
    double log_z = 0.0;
};

ExactDistribution exact_distribution(const FactorGraph& model,
                                     size_t max_states = kMaxExactStates);

double exact_marginal(const FactorGraph& model, const MarginalQuery& query,
                      size_t max_states = kMaxExactStates);

// Per-variable categorical marginals; rows of evidence variables are empty.
std::vector<std::vector<double>> exact_variable_marginals(const FactorGraph& model,
                                                          size_t max_states = kMaxExactStates);

// i.i.d. sampling from an enumerated distribution (inverse-CDF).
class ExactSampler {
  public:
    ExactSampler(const StateSpace& space, const ExactDistribution& dist);
    Assignment draw(RngStream& rng) const;

  private:
    const StateSpace* space_;
    std::vector<double> cdf_;
};

struct OrbitPartition {
    std::vector<int> label;              // per assignment rank
    int count = 0;
    std::vector<size_t> representative;  // minimum rank per orbit
};

// Flood-fill of the assignment space under the generators. Throws if a
// generator moves the evidence assignment.
OrbitPartition orbit_partition(const GeneratingSet& g, const FactorGraph& model,
                               size_t max_states = kMaxExactStates);

// Residual of the mixture-of-orbits reparameterization:
// | P(xhat) - sum_O P(xhat|O) P(O) |.
double mixture_check(const FactorGraph& model, const GeneratingSet& g, const MarginalQuery& query,
                     size_t max_states = kMaxExactStates);

// Row-stochastic transition matrix in sparse row form. For the Gibbs chain
// the states are the positive-weight assignment ranks; for quotient chains
// they are block ids.
struct TransitionMatrix {
    std::vector<size_t> states;  // rank per row (empty for quotient chains)
    std::vector<std::vector<std::pair<int, double>>> rows;  // sorted by column

    int size() const { return static_cast<int>(rows.size()); }
    double at(int i, int j) const;
    double max_row_sum_deviation() const;
};

// Random-scan Gibbs kernel over the support of the model: Q(x,y) =
// (1/m) * conditional for single-coordinate moves, self-transitions on the
// diagonal. Throws NonErgodicError on reducible chains.
TransitionMatrix build_gibbs_transition_matrix(const FactorGraph& model,
                                               size_t max_states = kMaxChainStates);

// Stationary distribution of the Gibbs chain, taken from the exact model
// distribution restricted to the chain's states.
std::vector<double> chain_stationary(const FactorGraph& model, const TransitionMatrix& q);

// Orbit labels restricted and compacted to the chain's states.
struct RestrictedPartition {
    std::vector<int> label;  // per chain state index
    int count = 0;
};
RestrictedPartition restrict_partition(const OrbitPartition& part, const TransitionMatrix& q);

struct LumpabilityVerdict {
    bool ordinary = false;
    bool exact = false;
    double ordinary_residual = 0.0;    // max block-mass mismatch across a block's states
    double stationary_residual = 0.0;  // max pi spread within a block
};

LumpabilityVerdict lumpability_check(const TransitionMatrix& q, const RestrictedPartition& part,
                                     const std::vector<double>& pi, double tol = 1e-9);

// Q'(C_i, C_j) from any representative of C_i; requires ordinary
// lumpability (checked, throws otherwise).
TransitionMatrix quotient_chain(const TransitionMatrix& q, const RestrictedPartition& part,
                                double tol = 1e-9);

double tv_distance(const std::vector<double>& p, const std::vector<double>& q);

constexpr long kDefaultMixingCap = 100000;

// Least T with d_tv(Q^t_x, pi) <= eps for all t >= T and all starts x.
// Iterated per-start vector propagation; d_tv to stationarity never
// increases (stochastic matrices contract L1), which the search also
// re-verifies numerically by running past the first crossing.
long mixing_time(const TransitionMatrix& q, const std::vector<double>& pi, double eps,
                 long t_max = kDefaultMixingCap);

// As mixing_time, but several epsilons in one propagation pass and an
// optional restriction of the start states (orbit representatives give the
// exact mixing time when the chain is symmetric under the partition).
std::vector<long> mixing_times(const TransitionMatrix& q, const std::vector<double>& pi,
                               const std::vector<double>& eps_list, long t_max = kDefaultMixingCap,
                               const std::vector<int>* starts = nullptr);

struct MixingRow {
    double eps = 0.0;
    long tau = 0;        // original chain
    long tau_quotient = 0;
};

std::vector<MixingRow> compare_mixing(const TransitionMatrix& q, const RestrictedPartition& part,
                                      const std::vector<double>& pi,
                                      const std::vector<double>& eps_list,
                                      long t_max = kDefaultMixingCap);

struct BiasCheckResult {
    double theta = 0.0;        // exact marginal
    double bias_abs = 0.0;     // worst-start |E[theta_rb] - theta| for N = 1
    double eps = 0.0;
    long burn_in = 0;
    long tau_quotient = -1;    // quotient mixing time at eps
    bool burn_in_sufficient = false;  // burn_in >= tau_quotient
    int worst_block = -1;
};

// Exact N=1 bias of the RB estimator after T burn-in steps, maximized over
// start states: E = sum_O P(xhat|O) Q'^T(x^G, O).  burn_in < 0 means
// "use tau'(eps)".
BiasCheckResult bias_bound_check(const FactorGraph& model, const GeneratingSet& g,
                                 const MarginalQuery& query, double eps, long burn_in,
                                 size_t max_states = kMaxChainStates,
                                 long t_max = kDefaultMixingCap);

}  // namespace symdens
