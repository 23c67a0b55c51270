#include "symdens/bench.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

namespace symdens {

namespace {

double clamp_prob(double p) { return std::min(1.0 - 1e-12, std::max(1e-12, p)); }

std::string fmt(double x, const char* spec = "%.9g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, x);
    return buf;
}

uint64_t fnv1a_update(uint64_t h, const Assignment& s) {
    for (int v : s) {
        h ^= static_cast<uint64_t>(v) + 0x100;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

double average_kl(const std::vector<std::vector<double>>& truth,
                  const std::vector<std::vector<double>>& est) {
    if (truth.size() != est.size()) throw BenchError("average_kl: variable set mismatch");
    double total = 0.0;
    int n = 0;
    for (size_t v = 0; v < truth.size(); ++v) {
        if (truth[v].empty()) continue;  // evidence variable
        if (truth[v].size() != est[v].size())
            throw BenchError("average_kl: cardinality mismatch at variable " + std::to_string(v));
        double kl = 0.0;
        for (size_t k = 0; k < truth[v].size(); ++k) {
            double t = truth[v][k];
            if (t <= 0.0) continue;
            kl += t * std::log(t / clamp_prob(est[v][k]));
        }
        total += kl;
        ++n;
    }
    if (n == 0) throw BenchError("average_kl: no non-evidence variables");
    return total / n;
}

double average_mse(const std::vector<std::vector<double>>& truth,
                   const std::vector<std::vector<double>>& est) {
    if (truth.size() != est.size()) throw BenchError("average_mse: variable set mismatch");
    double total = 0.0;
    int n = 0;
    for (size_t v = 0; v < truth.size(); ++v) {
        if (truth[v].empty()) continue;
        double se = 0.0;
        for (size_t k = 0; k < truth[v].size(); ++k) {
            double d = truth[v][k] - est[v][k];
            se += d * d;
        }
        total += se / static_cast<double>(truth[v].size());
        ++n;
    }
    if (n == 0) throw BenchError("average_mse: no non-evidence variables");
    return total / n;
}

void BenchmarkSpec::validate() const {
    if (!model || !group || !truth) throw BenchError("benchmark spec is missing inputs");
    if (checkpoints.empty()) throw BenchError("benchmark needs at least one checkpoint");
    for (size_t i = 1; i < checkpoints.size(); ++i)
        if (checkpoints[i] <= checkpoints[i - 1])
            throw BenchError("checkpoints must be strictly increasing");
    if (checkpoints.front() < 1) throw BenchError("checkpoints must be >= 1");
    if (runs < 1) throw BenchError("runs must be >= 1");
}

KLReport run_benchmark(const BenchmarkSpec& spec) {
    spec.validate();
    KLReport report;
    long total_samples = spec.checkpoints.back();
    for (int run = 0; run < spec.runs; ++run) {
        RngStream rng(spec.seed, static_cast<uint64_t>(run));
        ChainState st = init_state(*spec.model, rng);
        for (long t = 0; t < spec.burn_in; ++t) gibbs_step(*spec.model, st, rng);

        SingleVariableBatch batch(*spec.model, *spec.group);
        uint64_t checksum = 0xcbf29ce484222325ULL;
        size_t next_cp = 0;
        auto t0 = std::chrono::steady_clock::now();
        for (long i = 1; i <= total_samples; ++i) {
            for (long k = 0; k < spec.thinning; ++k) gibbs_step(*spec.model, st, rng);
            batch.add(st.current);
            checksum = fnv1a_update(checksum, st.current);
            if (next_cp < spec.checkpoints.size() && i == spec.checkpoints[next_cp]) {
                double secs =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                auto std_est = batch.standard_estimates();
                auto rb_est = batch.rb_estimates();
                report.rows.push_back({run, "standard", i, secs, average_kl(*spec.truth, std_est),
                                       average_mse(*spec.truth, std_est)});
                report.rows.push_back({run, "rb", i, secs, average_kl(*spec.truth, rb_est),
                                       average_mse(*spec.truth, rb_est)});
                ++next_cp;
            }
        }
        report.stream_checksums.push_back(checksum);
    }
    return report;
}

double KLReport::mean_kl(const std::string& estimator, long checkpoint) const {
    double acc = 0.0;
    int n = 0;
    for (const KLRow& r : rows)
        if (r.estimator == estimator && r.checkpoint_samples == checkpoint) {
            acc += r.avg_kl;
            ++n;
        }
    if (n == 0) throw BenchError("no rows for requested estimator/checkpoint");
    return acc / n;
}

double KLReport::mean_seconds(const std::string& estimator, long checkpoint) const {
    double acc = 0.0;
    int n = 0;
    for (const KLRow& r : rows)
        if (r.estimator == estimator && r.checkpoint_samples == checkpoint) {
            acc += r.wall_seconds;
            ++n;
        }
    if (n == 0) throw BenchError("no rows for requested estimator/checkpoint");
    return acc / n;
}

std::string to_csv(const KLReport& report) {
    std::string out = "run,estimator,checkpoint_samples,wall_seconds,avg_kl,avg_mse\n";
    for (const KLRow& r : report.rows) {
        out += std::to_string(r.run) + ',' + r.estimator + ',' +
               std::to_string(r.checkpoint_samples) + ',' + fmt(r.wall_seconds, "%.6f") + ',' +
               fmt(r.avg_kl) + ',' + fmt(r.avg_mse) + '\n';
    }
    return out;
}

std::vector<ScalingRow> domain_scaling(const std::string& template_name,
                                       const std::vector<int>& domains, double target_kl,
                                       const std::vector<long>& checkpoints, int runs,
                                       uint64_t seed, const TemplateWeights& weights) {
    std::vector<ScalingRow> out;
    for (int d : domains) {
        Grounding g = ground_template(template_name, d, weights);
        GeneratingSet group = renaming_group(g);
        std::vector<std::vector<double>> truth =
            smokers_reference_marginals(template_name, d, weights);
        BenchmarkSpec spec;
        spec.model = &g.model;
        spec.group = &group;
        spec.truth = &truth;
        spec.checkpoints = checkpoints;
        spec.runs = runs;
        spec.seed = seed + static_cast<uint64_t>(d);
        KLReport report = run_benchmark(spec);
        for (const std::string& est : {std::string("standard"), std::string("rb")}) {
            ScalingRow row;
            row.domain = d;
            row.estimator = est;
            for (long cp : checkpoints) {
                if (report.mean_kl(est, cp) <= target_kl) {
                    row.samples_to_target = cp;
                    row.seconds_to_target = report.mean_seconds(est, cp);
                    row.reached = true;
                    break;
                }
            }
            out.push_back(row);
        }
    }
    return out;
}

std::string to_csv(const std::vector<ScalingRow>& rows) {
    std::string out = "domain,estimator,samples_to_target,seconds_to_target,reached\n";
    for (const ScalingRow& r : rows) {
        out += std::to_string(r.domain) + ',' + r.estimator + ',' +
               std::to_string(r.samples_to_target) + ',' + fmt(r.seconds_to_target, "%.6f") +
               ',' + (r.reached ? "1" : "0") + '\n';
    }
    return out;
}

namespace {

// Shared enumeration over the friends block given a smokes configuration.
// Reflexive atoms carry no formulas and stay uniform.
struct FriendsBlock {
    int d;
    std::vector<std::pair<int, int>> pairs;  // ordered distinct (x,y)

    explicit FriendsBlock(int d_in) : d(d_in) {
        for (int x = 0; x < d; ++x)
            for (int y = 0; y < d; ++y)
                if (x != y) pairs.emplace_back(x, y);
    }

    int pair_index(int x, int y) const {
        for (size_t i = 0; i < pairs.size(); ++i)
            if (pairs[i] == std::make_pair(x, y)) return static_cast<int>(i);
        throw BenchError("internal: unknown friends pair");
    }

    // Partition function of the friends block and per-pair P(f=1), either
    // in closed form (independent pairs) or by joint enumeration when the
    // transitivity formula couples them.
    void analyze(uint64_t smokes_mask, const TemplateWeights& w, bool transitivity,
                 double& log_z, std::vector<double>& p_one) const {
        auto s_bit = [&](int x) { return (smokes_mask >> x) & 1; };
        p_one.assign(pairs.size(), 0.0);
        if (!transitivity) {
            log_z = 0.0;
            for (size_t i = 0; i < pairs.size(); ++i) {
                auto [x, y] = pairs[i];
                double ew = std::exp(w.friends_smokes);
                if (s_bit(x) == 1 && s_bit(y) == 0) {
                    // f=1 violates the clause: weights (e^w, 1).
                    log_z += std::log(ew + 1.0);
                    p_one[i] = 1.0 / (ew + 1.0);
                } else {
                    log_z += std::log(2.0 * ew);
                    p_one[i] = 0.5;
                }
            }
            return;
        }
        size_t n_pairs = pairs.size();
        if (n_pairs > 20) throw BenchError("transitivity truth limited to d(d-1) <= 20");
        std::vector<std::array<int, 3>> triples;
        for (int x = 0; x < d; ++x)
            for (int y = 0; y < d; ++y)
                for (int z = 0; z < d; ++z) {
                    if (x == y || y == z || x == z) continue;
                    triples.push_back({pair_index(x, y), pair_index(y, z), pair_index(x, z)});
                }
        // Stable without log-sum-exp at desk scale: log-weights stay within
        // a few tens.
        double z_total = 0.0;
        std::vector<double> one_mass(n_pairs, 0.0);
        for (uint64_t f = 0; f < (uint64_t{1} << n_pairs); ++f) {
            double lw = 0.0;
            for (size_t i = 0; i < n_pairs; ++i) {
                auto [x, y] = pairs[i];
                bool violated = ((f >> i) & 1) && s_bit(x) == 1 && s_bit(y) == 0;
                if (!violated) lw += w.friends_smokes;
            }
            for (const auto& t : triples) {
                bool violated = ((f >> t[0]) & 1) && ((f >> t[1]) & 1) && !((f >> t[2]) & 1);
                if (!violated) lw += w.transitivity;
            }
            double wgt = std::exp(lw);
            z_total += wgt;
            for (size_t i = 0; i < n_pairs; ++i)
                if ((f >> i) & 1) one_mass[i] += wgt;
        }
        log_z = std::log(z_total);
        for (size_t i = 0; i < n_pairs; ++i) p_one[i] = one_mass[i] / z_total;
    }
};

}  // namespace

std::vector<std::vector<double>> smokers_reference_marginals(const std::string& template_name,
                                                             int d, const TemplateWeights& w) {
    bool transitivity;
    if (template_name == "smokers") {
        transitivity = false;
    } else if (template_name == "smokers+transitivity") {
        transitivity = true;
    } else {
        throw BenchError("structured truth supports only the smokers templates");
    }
    if (d < 1 || d > 20) throw BenchError("structured truth supports 1 <= d <= 20");

    FriendsBlock fb(d);
    double e_sc = std::exp(w.smokes_cancer);
    size_t n_smokes_configs = size_t{1} << d;

    std::vector<double> log_w(n_smokes_configs);
    std::vector<std::vector<double>> friends_p(n_smokes_configs);
    double max_lw = -std::numeric_limits<double>::infinity();
    for (size_t s = 0; s < n_smokes_configs; ++s) {
        double lw = 0.0;
        for (int x = 0; x < d; ++x) {
            bool smokes = (s >> x) & 1;
            if (smokes) lw += w.smokes_bias;
            // cancer(x) summed out: both values satisfy the implication when
            // smokes(x)=0, otherwise only cancer(x)=1 does.
            lw += smokes ? std::log(e_sc + 1.0) : std::log(2.0 * e_sc);
        }
        double friends_log_z;
        fb.analyze(s, w, transitivity, friends_log_z, friends_p[s]);
        lw += friends_log_z;
        lw += static_cast<double>(d) * std::log(2.0);  // reflexive friends atoms
        log_w[s] = lw;
        max_lw = std::max(max_lw, lw);
    }
    double z = 0.0;
    for (double lw : log_w) z += std::exp(lw - max_lw);
    std::vector<double> p_s(n_smokes_configs);
    for (size_t s = 0; s < n_smokes_configs; ++s) p_s[s] = std::exp(log_w[s] - max_lw) / z;

    int n = 2 * d + d * d;
    std::vector<std::vector<double>> marg(static_cast<size_t>(n), std::vector<double>{0.0, 0.0});
    auto var_smokes = [&](int x) { return x; };
    auto var_cancer = [&](int x) { return d + x; };
    auto var_friends = [&](int x, int y) { return 2 * d + x * d + y; };

    for (size_t s = 0; s < n_smokes_configs; ++s) {
        double ps = p_s[s];
        for (int x = 0; x < d; ++x) {
            bool smokes = (s >> x) & 1;
            if (smokes) marg[static_cast<size_t>(var_smokes(x))][1] += ps;
            double pc1 = smokes ? e_sc / (e_sc + 1.0) : 0.5;
            marg[static_cast<size_t>(var_cancer(x))][1] += ps * pc1;
            marg[static_cast<size_t>(var_friends(x, x))][1] += ps * 0.5;
        }
        for (size_t i = 0; i < fb.pairs.size(); ++i) {
            auto [x, y] = fb.pairs[i];
            marg[static_cast<size_t>(var_friends(x, y))][1] += ps * friends_p[s][i];
        }
    }
    for (auto& row : marg) row[0] = 1.0 - row[1];
    return marg;
}

SmokersIidSampler::SmokersIidSampler(int d, const TemplateWeights& w) : d_(d), w_(w) {
    if (d < 1 || d > 20) throw BenchError("iid smokers sampler supports 1 <= d <= 20");
    FriendsBlock fb(d);
    size_t n_configs = size_t{1} << d;
    std::vector<double> log_w(n_configs);
    double e_sc = std::exp(w.smokes_cancer);
    double max_lw = -std::numeric_limits<double>::infinity();
    for (size_t s = 0; s < n_configs; ++s) {
        double lw = 0.0;
        for (int x = 0; x < d; ++x) {
            bool smokes = (s >> x) & 1;
            if (smokes) lw += w.smokes_bias;
            lw += smokes ? std::log(e_sc + 1.0) : std::log(2.0 * e_sc);
        }
        double flz;
        std::vector<double> dummy;
        fb.analyze(s, w, false, flz, dummy);
        log_w[s] = lw + flz;
        max_lw = std::max(max_lw, log_w[s]);
    }
    double z = 0.0;
    for (double lw : log_w) z += std::exp(lw - max_lw);
    smokes_cdf_.resize(n_configs);
    double acc = 0.0;
    for (size_t s = 0; s < n_configs; ++s) {
        acc += std::exp(log_w[s] - max_lw) / z;
        smokes_cdf_[s] = acc;
    }
}

Assignment SmokersIidSampler::draw(RngStream& rng) const {
    double u = rng.next_double();
    size_t s = static_cast<size_t>(
        std::lower_bound(smokes_cdf_.begin(), smokes_cdf_.end(), u) - smokes_cdf_.begin());
    if (s >= smokes_cdf_.size()) s = smokes_cdf_.size() - 1;

    Assignment a(static_cast<size_t>(num_vars()), 0);
    double e_sc = std::exp(w_.smokes_cancer);
    double e_fs = std::exp(w_.friends_smokes);
    for (int x = 0; x < d_; ++x) {
        bool smokes = (s >> x) & 1;
        a[static_cast<size_t>(x)] = smokes ? 1 : 0;
        double pc1 = smokes ? e_sc / (e_sc + 1.0) : 0.5;
        a[static_cast<size_t>(d_ + x)] = rng.next_double() < pc1 ? 1 : 0;
    }
    for (int x = 0; x < d_; ++x)
        for (int y = 0; y < d_; ++y) {
            double p1;
            if (x == y) {
                p1 = 0.5;
            } else if (((s >> x) & 1) == 1 && ((s >> y) & 1) == 0) {
                p1 = 1.0 / (e_fs + 1.0);
            } else {
                p1 = 0.5;
            }
            a[static_cast<size_t>(2 * d_ + x * d_ + y)] = rng.next_double() < p1 ? 1 : 0;
        }
    return a;
}

}  // namespace symdens
