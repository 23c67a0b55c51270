#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "symdens/estimator.hpp"
#include "symdens/grounding.hpp"
#include "symdens/group.hpp"
#include "symdens/model.hpp"
#include "symdens/sampler.hpp"

namespace symdens {

class BenchError : public std::runtime_error {
  public:
    explicit BenchError(const std::string& what) : std::runtime_error(what) {}
};

// Mean over non-evidence variables of KL(truth || est) between the
// per-variable categorical marginals; estimates are clamped to
// [1e-12, 1 - 1e-12] so the result stays finite.
double average_kl(const std::vector<std::vector<double>>& truth,
                  const std::vector<std::vector<double>>& est);

// Mean squared error of the same per-variable marginals.
double average_mse(const std::vector<std::vector<double>>& truth,
                   const std::vector<std::vector<double>>& est);

struct BenchmarkSpec {
    const FactorGraph* model = nullptr;
    const GeneratingSet* group = nullptr;
    const std::vector<std::vector<double>>* truth = nullptr;  // per-variable marginals
    std::vector<long> checkpoints;  // strictly increasing sample counts
    int runs = 1;
    uint64_t seed = 0;
    long burn_in = 0;
    long thinning = 1;

    void validate() const;
};

struct KLRow {
    int run = 0;
    std::string estimator;  // "standard" | "rb"
    long checkpoint_samples = 0;
    double wall_seconds = 0.0;
    double avg_kl = 0.0;
    double avg_mse = 0.0;
};

struct KLReport {
    std::vector<KLRow> rows;
    // FNV-1a over each run's sample stream; both estimators are computed
    // from the identical stream, so there is one checksum per run.
    std::vector<uint64_t> stream_checksums;

    double mean_kl(const std::string& estimator, long checkpoint) const;
    double mean_seconds(const std::string& estimator, long checkpoint) const;
};

// CSV schema: run,estimator,checkpoint_samples,wall_seconds,avg_kl,avg_mse.
std::string to_csv(const KLReport& report);

// Runs both estimators on the same Gibbs sample stream per run and records
// per-checkpoint average KL and MSE against the supplied truth.
KLReport run_benchmark(const BenchmarkSpec& spec);

struct ScalingRow {
    int domain = 0;
    std::string estimator;
    long samples_to_target = -1;  // -1 when unreached within the cap
    double seconds_to_target = 0.0;
    bool reached = false;
};

// Fig.-3-style sweep: smallest checkpoint at which the run-averaged KL
// drops below target_kl, per domain size and estimator.
std::vector<ScalingRow> domain_scaling(const std::string& template_name,
                                       const std::vector<int>& domains, double target_kl,
                                       const std::vector<long>& checkpoints, int runs,
                                       uint64_t seed, const TemplateWeights& weights = {});
std::string to_csv(const std::vector<ScalingRow>& rows);

// Structured exact truth for the evidence-free smokers templates: cancer
// and friends variables are conditionally independent given the smokes
// block (friends couple only through transitivity), so enumerating
// 2^d smokes configurations (times 2^(d(d-1)) friends configurations with
// transitivity) gives exact per-variable marginals at domain sizes where
// full joint enumeration is out of reach. Independent of the generic
// enumeration oracle; the two are cross-checked in tests.
std::vector<std::vector<double>> smokers_reference_marginals(const std::string& template_name,
                                                             int domain_size,
                                                             const TemplateWeights& weights = {});

// Exact i.i.d. sampler for the evidence-free "smokers" template (no
// transitivity): draws the smokes block from its exact marginal, then
// cancer and friends variables from their conditionals.
class SmokersIidSampler {
  public:
    SmokersIidSampler(int domain_size, const TemplateWeights& weights = {});
    Assignment draw(RngStream& rng) const;
    int num_vars() const { return 2 * d_ + d_ * d_; }

  private:
    int d_;
    TemplateWeights w_;
    std::vector<double> smokes_cdf_;  // over 2^d smokes configurations
};

}  // namespace symdens
