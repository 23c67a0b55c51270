#include "symdens/sampler.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace symdens {

void SamplerConfig::validate() const {
    if (burn_in < 0) throw SamplerError("burn_in must be >= 0");
    if (samples < 1) throw SamplerError("samples must be >= 1");
    if (chains < 1) throw SamplerError("chains must be >= 1");
    if (thinning < 1) throw SamplerError("thinning must be >= 1");
}

namespace {

constexpr uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

uint64_t mix64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(uint64_t seed, uint64_t stream_id)
    : state_(mix64(seed + kGamma * (stream_id + 1))) {}

uint64_t RngStream::next_u64() {
    state_ += kGamma;
    return mix64(state_);
}

double RngStream::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

int RngStream::next_below(int bound) {
    // Rejection sampling keeps the draw exactly uniform.
    uint64_t b = static_cast<uint64_t>(bound);
    uint64_t limit = UINT64_MAX - UINT64_MAX % b;
    uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return static_cast<int>(x % b);
}

int RngStream::sample_categorical(const std::vector<double>& probs) {
    double u = next_double();
    double acc = 0.0;
    for (size_t k = 0; k < probs.size(); ++k) {
        acc += probs[k];
        if (u < acc) return static_cast<int>(k);
    }
    return static_cast<int>(probs.size()) - 1;
}

ChainState init_state(const FactorGraph& model, RngStream& rng, uint64_t stream_id) {
    ChainState st;
    st.stream_id = stream_id;
    st.current.assign(static_cast<size_t>(model.num_vars()), 0);
    for (auto [v, val] : model.evidence()) st.current[static_cast<size_t>(v)] = val;

    constexpr int kUniformTries = 10000;
    for (int t = 0; t < kUniformTries; ++t) {
        for (int v : model.free_vars())
            st.current[static_cast<size_t>(v)] = rng.next_below(model.variable(v).cardinality);
        if (std::isfinite(model.log_weight(st.current))) return st;
    }
    // Greedy repair: sweep the free variables, fixing each to a value with
    // positive conditional weight given the rest.
    for (int v : model.free_vars()) st.current[static_cast<size_t>(v)] = 0;
    for (int sweep = 0; sweep < model.num_vars() + 1; ++sweep) {
        bool changed = false;
        for (int v : model.free_vars()) {
            std::vector<double> lw = model.conditional_log_weights(st.current, v);
            int best = 0;
            for (size_t k = 1; k < lw.size(); ++k)
                if (lw[k] > lw[static_cast<size_t>(best)]) best = static_cast<int>(k);
            if (st.current[static_cast<size_t>(v)] != best) {
                st.current[static_cast<size_t>(v)] = best;
                changed = true;
            }
        }
        if (std::isfinite(model.log_weight(st.current))) return st;
        if (!changed) break;
    }
    throw SamplerError("no supported initial state found");
}

void gibbs_step(const FactorGraph& model, ChainState& state, RngStream& rng,
                SamplerConfig::Scan scan) {
    const std::vector<int>& free_vars = model.free_vars();
    if (free_vars.empty()) throw SamplerError("model has no free variables");
    int v;
    if (scan == SamplerConfig::Scan::Random) {
        v = free_vars[static_cast<size_t>(rng.next_below(static_cast<int>(free_vars.size())))];
    } else {
        v = free_vars[static_cast<size_t>(state.step % static_cast<long>(free_vars.size()))];
    }
    std::vector<double> cond = model.gibbs_conditional(state.current, v);
    state.current[static_cast<size_t>(v)] = rng.sample_categorical(cond);
    ++state.step;
}

RunSummary run_chain(const FactorGraph& model, const SamplerConfig& config,
                     const SampleSink& sink) {
    config.validate();
    RunSummary summary;
    auto t0 = std::chrono::steady_clock::now();
    for (int chain = 0; chain < config.chains; ++chain) {
        RngStream rng(config.seed, static_cast<uint64_t>(chain));
        ChainState st = init_state(model, rng, static_cast<uint64_t>(chain));
        for (long t = 0; t < config.burn_in; ++t) gibbs_step(model, st, rng, config.scan);
        for (long i = 0; i < config.samples; ++i) {
            for (long k = 0; k < config.thinning; ++k) gibbs_step(model, st, rng, config.scan);
            sink(chain, st.current);
            ++summary.samples_delivered;
        }
        summary.total_steps += st.step;
    }
    summary.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return summary;
}

std::string dump_header(const FactorGraph& model) {
    std::string out = "# vars:";
    for (const Variable& v : model.variables()) out += ' ' + v.name;
    out += '\n';
    return out;
}

std::string dump_sample(const Assignment& s) {
    std::string out;
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) out += ' ';
        out += std::to_string(s[i]);
    }
    out += '\n';
    return out;
}

std::vector<Assignment> parse_dump(const std::string& text, const FactorGraph& model) {
    std::vector<Assignment> samples;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        Assignment s;
        int x;
        while (ls >> x) s.push_back(x);
        if (!model.valid_assignment(s))
            throw SamplerError("dump line is not a valid assignment for this model");
        samples.push_back(std::move(s));
    }
    return samples;
}

}  // namespace symdens
