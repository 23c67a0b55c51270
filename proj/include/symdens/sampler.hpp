#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "symdens/model.hpp"

namespace symdens {

class SamplerError : public std::runtime_error {
  public:
    explicit SamplerError(const std::string& what) : std::runtime_error(what) {}
};

struct SamplerConfig {
    long burn_in = 0;    // discarded single-site steps per chain
    long samples = 1;    // delivered sample points per chain
    uint64_t seed = 0;
    int chains = 1;
    enum class Scan { Random, Systematic };
    // Random scan is the canonical (reversible) kernel; systematic scan is a
    // throughput option excluded from the quotient-chain analysis claims.
    Scan scan = Scan::Random;
    long thinning = 1;   // deliver every thinning-th post-burn-in state

    void validate() const;
};

// 64-bit splittable RNG stream. Chains draw from disjoint deterministic
// streams derived from (seed, chain id) via splitmix64, so runs are
// reproducible and chain order is irrelevant.
class RngStream {
  public:
    RngStream(uint64_t seed, uint64_t stream_id);

    uint64_t next_u64();
    double next_double();                 // uniform in [0, 1)
    int next_below(int bound);            // uniform in [0, bound)
    int sample_categorical(const std::vector<double>& probs);

  private:
    uint64_t state_;
};

struct ChainState {
    Assignment current;
    long step = 0;
    uint64_t stream_id = 0;
};

// Evidence-consistent state with finite log-weight: uniform draws first
// (up to 10^4 tries), then greedy per-variable repair. Deterministic given
// the stream. Throws SamplerError when no supported state is found.
ChainState init_state(const FactorGraph& model, RngStream& rng, uint64_t stream_id = 0);

// One random-scan (or systematic) Gibbs update in place.
void gibbs_step(const FactorGraph& model, ChainState& state, RngStream& rng,
                SamplerConfig::Scan scan = SamplerConfig::Scan::Random);

struct RunSummary {
    long total_steps = 0;
    long samples_delivered = 0;
    double wall_seconds = 0.0;
};

using SampleSink = std::function<void(int chain, const Assignment& s)>;

// Runs config.chains independent chains; each discards burn_in steps and
// then delivers config.samples thinned sample points to the sink. Chains
// run sequentially in chain order, so delivery order is deterministic.
RunSummary run_chain(const FactorGraph& model, const SamplerConfig& config, const SampleSink& sink);

// Raw-sample dump format: "# vars: <names>" header, then one line per
// sample of space-separated value indices.
std::string dump_header(const FactorGraph& model);
std::string dump_sample(const Assignment& s);
std::vector<Assignment> parse_dump(const std::string& text, const FactorGraph& model);

}  // namespace symdens
