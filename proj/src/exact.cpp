#include "symdens/exact.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

namespace symdens {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

StateSpace::StateSpace(const FactorGraph& model, size_t max_states) : model_(&model) {
    const std::vector<int>& fv = model.free_vars();
    place_value_.assign(fv.size(), 0);
    count_ = 1;
    // Lowest-id free variable is the most significant digit.
    for (size_t i = fv.size(); i-- > 0;) {
        place_value_[i] = count_;
        size_t card = static_cast<size_t>(model.variable(fv[i]).cardinality);
        if (count_ > max_states / card + 1) throw ExactError("assignment space too large");
        count_ *= card;
    }
    if (count_ > max_states) throw ExactError("assignment space too large");
}

Assignment StateSpace::decode(size_t rank) const {
    Assignment s(static_cast<size_t>(model_->num_vars()), 0);
    for (auto [v, val] : model_->evidence()) s[static_cast<size_t>(v)] = val;
    const std::vector<int>& fv = model_->free_vars();
    for (size_t i = 0; i < fv.size(); ++i) {
        size_t card = static_cast<size_t>(model_->variable(fv[i]).cardinality);
        s[static_cast<size_t>(fv[i])] = static_cast<int>(rank / place_value_[i] % card);
    }
    return s;
}

size_t StateSpace::encode(const Assignment& s) const {
    if (!model_->consistent_with_evidence(s))
        throw ExactError("assignment inconsistent with evidence");
    const std::vector<int>& fv = model_->free_vars();
    size_t rank = 0;
    for (size_t i = 0; i < fv.size(); ++i)
        rank += static_cast<size_t>(s[static_cast<size_t>(fv[i])]) * place_value_[i];
    return rank;
}

ExactDistribution exact_distribution(const FactorGraph& model, size_t max_states) {
    StateSpace space(model, max_states);
    ExactDistribution dist;
    std::vector<double> lw(space.count());
    double mx = kNegInf;
    for (size_t r = 0; r < space.count(); ++r) {
        lw[r] = model.log_weight(space.decode(r));
        mx = std::max(mx, lw[r]);
    }
    if (mx == kNegInf) throw ExactError("no assignment has positive weight");
    double z = 0.0;
    for (double x : lw) z += std::exp(x - mx);
    dist.log_z = mx + std::log(z);
    dist.probs.resize(space.count());
    for (size_t r = 0; r < space.count(); ++r) dist.probs[r] = std::exp(lw[r] - mx) / z;
    return dist;
}

double exact_marginal(const FactorGraph& model, const MarginalQuery& query, size_t max_states) {
    model.validate_query(query);
    StateSpace space(model, max_states);
    ExactDistribution dist = exact_distribution(model, max_states);
    double p = 0.0;
    for (size_t r = 0; r < space.count(); ++r)
        if (FactorGraph::query_matches(space.decode(r), query)) p += dist.probs[r];
    return p;
}

std::vector<std::vector<double>> exact_variable_marginals(const FactorGraph& model,
                                                          size_t max_states) {
    StateSpace space(model, max_states);
    ExactDistribution dist = exact_distribution(model, max_states);
    std::vector<std::vector<double>> marg(static_cast<size_t>(model.num_vars()));
    for (int v : model.free_vars())
        marg[static_cast<size_t>(v)].assign(static_cast<size_t>(model.variable(v).cardinality),
                                            0.0);
    for (size_t r = 0; r < space.count(); ++r) {
        Assignment s = space.decode(r);
        for (int v : model.free_vars())
            marg[static_cast<size_t>(v)][static_cast<size_t>(s[static_cast<size_t>(v)])] +=
                dist.probs[r];
    }
    return marg;
}

ExactSampler::ExactSampler(const StateSpace& space, const ExactDistribution& dist)
    : space_(&space) {
    cdf_.resize(dist.probs.size());
    double acc = 0.0;
    for (size_t r = 0; r < dist.probs.size(); ++r) {
        acc += dist.probs[r];
        cdf_[r] = acc;
    }
}

Assignment ExactSampler::draw(RngStream& rng) const {
    double u = rng.next_double();
    size_t r = static_cast<size_t>(
        std::lower_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
    if (r >= cdf_.size()) r = cdf_.size() - 1;
    return space_->decode(r);
}

OrbitPartition orbit_partition(const GeneratingSet& g, const FactorGraph& model,
                               size_t max_states) {
    if (g.n != model.num_vars()) throw GroupError("group acts on a different variable count");
    StateSpace space(model, max_states);
    OrbitPartition part;
    part.label.assign(space.count(), -1);
    std::deque<size_t> frontier;
    // Ascending scan: each orbit is first entered at its minimum rank.
    for (size_t start = 0; start < space.count(); ++start) {
        if (part.label[start] >= 0) continue;
        int label = part.count++;
        part.representative.push_back(start);
        part.label[start] = label;
        frontier.push_back(start);
        while (!frontier.empty()) {
            size_t r = frontier.front();
            frontier.pop_front();
            Assignment s = space.decode(r);
            for (const Permutation& p : g.generators) {
                Assignment img = apply_to_assignment(p, s);
                if (!model.consistent_with_evidence(img))
                    throw ExactError("generator moves the evidence assignment");
                size_t ri = space.encode(img);
                if (part.label[ri] < 0) {
                    part.label[ri] = label;
                    frontier.push_back(ri);
                }
            }
        }
    }
    return part;
}

double mixture_check(const FactorGraph& model, const GeneratingSet& g, const MarginalQuery& query,
                     size_t max_states) {
    model.validate_query(query);
    StateSpace space(model, max_states);
    ExactDistribution dist = exact_distribution(model, max_states);
    OrbitPartition part = orbit_partition(g, model, max_states);

    std::vector<double> p_orbit(static_cast<size_t>(part.count), 0.0);
    std::vector<double> matches(static_cast<size_t>(part.count), 0.0);
    std::vector<double> sizes(static_cast<size_t>(part.count), 0.0);
    double direct = 0.0;
    for (size_t r = 0; r < space.count(); ++r) {
        size_t o = static_cast<size_t>(part.label[r]);
        p_orbit[o] += dist.probs[r];
        sizes[o] += 1.0;
        if (FactorGraph::query_matches(space.decode(r), query)) {
            matches[o] += 1.0;
            direct += dist.probs[r];
        }
    }
    double mixture = 0.0;
    for (size_t o = 0; o < p_orbit.size(); ++o) mixture += matches[o] / sizes[o] * p_orbit[o];
    return std::abs(direct - mixture);
}

double TransitionMatrix::at(int i, int j) const {
    const auto& row = rows[static_cast<size_t>(i)];
    auto it = std::lower_bound(row.begin(), row.end(), j,
                               [](const std::pair<int, double>& e, int col) { return e.first < col; });
    return it != row.end() && it->first == j ? it->second : 0.0;
}

double TransitionMatrix::max_row_sum_deviation() const {
    double worst = 0.0;
    for (const auto& row : rows) {
        double s = 0.0;
        for (auto [c, p] : row) s += p;
        worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
}

TransitionMatrix build_gibbs_transition_matrix(const FactorGraph& model, size_t max_states) {
    StateSpace space(model, max_states);
    // The chain lives on the support of P: zero-weight assignments are
    // unreachable and have no defined conditionals.
    std::vector<size_t> support;
    std::vector<int> index_of_rank(space.count(), -1);
    for (size_t r = 0; r < space.count(); ++r) {
        if (std::isfinite(model.log_weight(space.decode(r)))) {
            index_of_rank[r] = static_cast<int>(support.size());
            support.push_back(r);
        }
    }
    if (support.empty()) throw ExactError("no assignment has positive weight");

    const std::vector<int>& fv = model.free_vars();
    if (fv.empty()) throw ExactError("model has no free variables");
    double inv_m = 1.0 / static_cast<double>(fv.size());

    TransitionMatrix q;
    q.states = support;
    q.rows.resize(support.size());
    for (size_t i = 0; i < support.size(); ++i) {
        Assignment s = space.decode(support[i]);
        std::map<int, double> row;
        for (int v : fv) {
            std::vector<double> cond = model.gibbs_conditional(s, v);
            int cur = s[static_cast<size_t>(v)];
            for (int k = 0; k < static_cast<int>(cond.size()); ++k) {
                if (cond[static_cast<size_t>(k)] == 0.0) continue;
                s[static_cast<size_t>(v)] = k;
                int j = index_of_rank[space.encode(s)];
                row[j] += inv_m * cond[static_cast<size_t>(k)];
            }
            s[static_cast<size_t>(v)] = cur;
        }
        q.rows[i].assign(row.begin(), row.end());
    }

    // Irreducibility: forward and backward reachability from state 0 must
    // both cover the support. Aperiodicity follows from the positive
    // diagonal of the random-scan kernel; verified anyway.
    auto reach = [&](bool forward) {
        std::vector<char> seen(support.size(), 0);
        std::vector<std::vector<int>> radj;
        if (!forward) {
            radj.resize(support.size());
            for (size_t i = 0; i < q.rows.size(); ++i)
                for (auto [j, p] : q.rows[i]) radj[static_cast<size_t>(j)].push_back(static_cast<int>(i));
        }
        std::deque<int> frontier{0};
        seen[0] = 1;
        size_t n_seen = 1;
        while (!frontier.empty()) {
            int i = frontier.front();
            frontier.pop_front();
            if (forward) {
                for (auto [j, p] : q.rows[static_cast<size_t>(i)])
                    if (!seen[static_cast<size_t>(j)]) {
                        seen[static_cast<size_t>(j)] = 1;
                        ++n_seen;
                        frontier.push_back(j);
                    }
            } else {
                for (int j : radj[static_cast<size_t>(i)])
                    if (!seen[static_cast<size_t>(j)]) {
                        seen[static_cast<size_t>(j)] = 1;
                        ++n_seen;
                        frontier.push_back(j);
                    }
            }
        }
        return n_seen == support.size();
    };
    if (!reach(true) || !reach(false))
        throw NonErgodicError("Gibbs chain is reducible on this model's support");
    for (size_t i = 0; i < q.rows.size(); ++i)
        if (q.at(static_cast<int>(i), static_cast<int>(i)) <= 0.0)
            throw NonErgodicError("Gibbs chain has a zero self-transition");
    return q;
}

std::vector<double> chain_stationary(const FactorGraph& model, const TransitionMatrix& q) {
    StateSpace space(model);
    ExactDistribution dist = exact_distribution(model, space.count());
    std::vector<double> pi(q.states.size());
    for (size_t i = 0; i < q.states.size(); ++i) pi[i] = dist.probs[q.states[i]];
    return pi;
}

RestrictedPartition restrict_partition(const OrbitPartition& part, const TransitionMatrix& q) {
    RestrictedPartition out;
    out.label.resize(q.states.size());
    std::vector<int> relabel(static_cast<size_t>(part.count), -1);
    for (size_t i = 0; i < q.states.size(); ++i) {
        int orig = part.label[q.states[i]];
        if (relabel[static_cast<size_t>(orig)] < 0) relabel[static_cast<size_t>(orig)] = out.count++;
        out.label[i] = relabel[static_cast<size_t>(orig)];
    }
    return out;
}

LumpabilityVerdict lumpability_check(const TransitionMatrix& q, const RestrictedPartition& part,
                                     const std::vector<double>& pi, double tol) {
    if (static_cast<int>(part.label.size()) != q.size() || pi.size() != part.label.size())
        throw ExactError("lumpability_check: dimension mismatch");
    LumpabilityVerdict verdict;

    // Aggregated rows per state, compared against the first state of each block.
    std::vector<std::vector<std::pair<int, double>>> block_row_of(
        static_cast<size_t>(part.count));
    std::vector<int> block_rep(static_cast<size_t>(part.count), -1);
    std::vector<double> scratch(static_cast<size_t>(part.count), 0.0);
    for (int i = 0; i < q.size(); ++i) {
        std::vector<int> touched;
        for (auto [j, p] : q.rows[static_cast<size_t>(i)]) {
            int b = part.label[static_cast<size_t>(j)];
            if (scratch[static_cast<size_t>(b)] == 0.0) touched.push_back(b);
            scratch[static_cast<size_t>(b)] += p;
        }
        std::sort(touched.begin(), touched.end());
        std::vector<std::pair<int, double>> agg;
        agg.reserve(touched.size());
        for (int b : touched) {
            agg.emplace_back(b, scratch[static_cast<size_t>(b)]);
            scratch[static_cast<size_t>(b)] = 0.0;
        }
        int bi = part.label[static_cast<size_t>(i)];
        if (block_rep[static_cast<size_t>(bi)] < 0) {
            block_rep[static_cast<size_t>(bi)] = i;
            block_row_of[static_cast<size_t>(bi)] = std::move(agg);
        } else {
            // Max pointwise difference against the representative's row.
            const auto& ref = block_row_of[static_cast<size_t>(bi)];
            size_t a = 0, b = 0;
            while (a < ref.size() || b < agg.size()) {
                if (b == agg.size() || (a < ref.size() && ref[a].first < agg[b].first)) {
                    verdict.ordinary_residual =
                        std::max(verdict.ordinary_residual, std::abs(ref[a].second));
                    ++a;
                } else if (a == ref.size() || agg[b].first < ref[a].first) {
                    verdict.ordinary_residual =
                        std::max(verdict.ordinary_residual, std::abs(agg[b].second));
                    ++b;
                } else {
                    verdict.ordinary_residual = std::max(
                        verdict.ordinary_residual, std::abs(ref[a].second - agg[b].second));
                    ++a;
                    ++b;
                }
            }
        }
    }

    std::vector<double> pi_min(static_cast<size_t>(part.count),
                               std::numeric_limits<double>::infinity());
    std::vector<double> pi_max(static_cast<size_t>(part.count), 0.0);
    for (int i = 0; i < q.size(); ++i) {
        size_t b = static_cast<size_t>(part.label[static_cast<size_t>(i)]);
        pi_min[b] = std::min(pi_min[b], pi[static_cast<size_t>(i)]);
        pi_max[b] = std::max(pi_max[b], pi[static_cast<size_t>(i)]);
    }
    for (size_t b = 0; b < pi_min.size(); ++b)
        verdict.stationary_residual = std::max(verdict.stationary_residual, pi_max[b] - pi_min[b]);

    verdict.ordinary = verdict.ordinary_residual <= tol;
    verdict.exact = verdict.ordinary && verdict.stationary_residual <= tol;
    return verdict;
}

TransitionMatrix quotient_chain(const TransitionMatrix& q, const RestrictedPartition& part,
                                double tol) {
    std::vector<double> pi_dummy(part.label.size(), 0.0);
    LumpabilityVerdict verdict = lumpability_check(q, part, pi_dummy, tol);
    if (!verdict.ordinary)
        throw ExactError("chain is not ordinarily lumpable with respect to this partition");

    TransitionMatrix out;
    out.rows.resize(static_cast<size_t>(part.count));
    std::vector<char> done(static_cast<size_t>(part.count), 0);
    std::vector<double> scratch(static_cast<size_t>(part.count), 0.0);
    for (int i = 0; i < q.size(); ++i) {
        int bi = part.label[static_cast<size_t>(i)];
        if (done[static_cast<size_t>(bi)]) continue;
        done[static_cast<size_t>(bi)] = 1;
        std::vector<int> touched;
        for (auto [j, p] : q.rows[static_cast<size_t>(i)]) {
            int b = part.label[static_cast<size_t>(j)];
            if (scratch[static_cast<size_t>(b)] == 0.0) touched.push_back(b);
            scratch[static_cast<size_t>(b)] += p;
        }
        std::sort(touched.begin(), touched.end());
        for (int b : touched) {
            out.rows[static_cast<size_t>(bi)].emplace_back(b, scratch[static_cast<size_t>(b)]);
            scratch[static_cast<size_t>(b)] = 0.0;
        }
    }
    return out;
}

double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw ExactError("tv_distance: support mismatch");
    double d = 0.0;
    for (size_t i = 0; i < p.size(); ++i) d += std::abs(p[i] - q[i]);
    return 0.5 * d;
}

namespace {

// d_tv(Q^t_x, pi) for one start, streamed over t. Returns the last t at
// which the distance exceeded each epsilon.
std::vector<long> last_exceed_times(const TransitionMatrix& q, const std::vector<double>& pi,
                                    const std::vector<double>& eps_list, int start, long t_max) {
    size_t n = static_cast<size_t>(q.size());
    double eps_floor = *std::min_element(eps_list.begin(), eps_list.end());
    // Run well past the last crossing; d_tv to stationarity cannot rebound
    // (row-stochastic matrices contract L1), so a 1000x undershoot settles it.
    double stop = std::max(eps_floor * 1e-3, 1e-14);

    std::vector<double> v(n, 0.0), next(n, 0.0);
    v[static_cast<size_t>(start)] = 1.0;
    std::vector<long> last(eps_list.size(), -1);
    double d0 = tv_distance(v, pi);
    for (size_t e = 0; e < eps_list.size(); ++e)
        if (d0 > eps_list[e]) last[e] = 0;
    for (long t = 1; t <= t_max; ++t) {
        std::fill(next.begin(), next.end(), 0.0);
        for (size_t i = 0; i < n; ++i) {
            double vi = v[i];
            if (vi == 0.0) continue;
            for (auto [j, p] : q.rows[i]) next[static_cast<size_t>(j)] += vi * p;
        }
        v.swap(next);
        double d = tv_distance(v, pi);
        for (size_t e = 0; e < eps_list.size(); ++e)
            if (d > eps_list[e]) last[e] = t;
        if (d <= stop) return last;
    }
    throw ExactError("mixing_time: step cap reached before convergence");
}

}  // namespace

std::vector<long> mixing_times(const TransitionMatrix& q, const std::vector<double>& pi,
                               const std::vector<double>& eps_list, long t_max,
                               const std::vector<int>* starts) {
    if (pi.size() != static_cast<size_t>(q.size()))
        throw ExactError("mixing_times: dimension mismatch");
    std::vector<long> tau(eps_list.size(), 0);
    auto run_start = [&](int x) {
        std::vector<long> last = last_exceed_times(q, pi, eps_list, x, t_max);
        for (size_t e = 0; e < eps_list.size(); ++e) tau[e] = std::max(tau[e], last[e] + 1);
    };
    if (starts) {
        for (int x : *starts) run_start(x);
    } else {
        for (int x = 0; x < q.size(); ++x) run_start(x);
    }
    return tau;
}

long mixing_time(const TransitionMatrix& q, const std::vector<double>& pi, double eps,
                 long t_max) {
    return mixing_times(q, pi, {eps}, t_max)[0];
}

std::vector<MixingRow> compare_mixing(const TransitionMatrix& q, const RestrictedPartition& part,
                                      const std::vector<double>& pi,
                                      const std::vector<double>& eps_list, long t_max) {
    // The chain is symmetric under the orbit partition, so d_tv from a
    // start is constant on blocks: one representative start per block
    // gives the exact mixing time of the full chain.
    std::vector<int> reps;
    {
        std::vector<char> seen(static_cast<size_t>(part.count), 0);
        for (int i = 0; i < q.size(); ++i) {
            int b = part.label[static_cast<size_t>(i)];
            if (!seen[static_cast<size_t>(b)]) {
                seen[static_cast<size_t>(b)] = 1;
                reps.push_back(i);
            }
        }
    }
    std::vector<long> tau = mixing_times(q, pi, eps_list, t_max, &reps);

    TransitionMatrix qq = quotient_chain(q, part);
    std::vector<double> pi_q(static_cast<size_t>(part.count), 0.0);
    for (int i = 0; i < q.size(); ++i)
        pi_q[static_cast<size_t>(part.label[static_cast<size_t>(i)])] += pi[static_cast<size_t>(i)];
    std::vector<long> tau_q = mixing_times(qq, pi_q, eps_list, t_max);

    std::vector<MixingRow> rows;
    for (size_t e = 0; e < eps_list.size(); ++e) rows.push_back({eps_list[e], tau[e], tau_q[e]});
    return rows;
}

BiasCheckResult bias_bound_check(const FactorGraph& model, const GeneratingSet& g,
                                 const MarginalQuery& query, double eps, long burn_in,
                                 size_t max_states, long t_max) {
    model.validate_query(query);
    BiasCheckResult res;
    res.eps = eps;
    res.burn_in = burn_in;

    StateSpace space(model, max_states);
    res.theta = exact_marginal(model, query, max_states);
    TransitionMatrix q = build_gibbs_transition_matrix(model, max_states);
    std::vector<double> pi = chain_stationary(model, q);
    OrbitPartition part = orbit_partition(g, model, max_states);
    RestrictedPartition rpart = restrict_partition(part, q);
    TransitionMatrix qq = quotient_chain(q, rpart);

    std::vector<double> pi_q(static_cast<size_t>(rpart.count), 0.0);
    std::vector<double> cond(static_cast<size_t>(rpart.count), 0.0);   // P(xhat | O)
    std::vector<double> sizes(static_cast<size_t>(rpart.count), 0.0);
    for (int i = 0; i < q.size(); ++i) {
        size_t b = static_cast<size_t>(rpart.label[static_cast<size_t>(i)]);
        pi_q[b] += pi[static_cast<size_t>(i)];
        sizes[b] += 1.0;
        if (FactorGraph::query_matches(space.decode(q.states[static_cast<size_t>(i)]), query))
            cond[b] += 1.0;
    }
    for (size_t b = 0; b < cond.size(); ++b) cond[b] /= sizes[b];

    res.tau_quotient = mixing_times(qq, pi_q, {eps}, t_max)[0];
    if (burn_in < 0) burn_in = res.tau_quotient;  // default: run exactly tau'(eps) steps
    res.burn_in = burn_in;
    res.burn_in_sufficient = burn_in >= res.tau_quotient;

    // Worst start over quotient blocks (starts in one block are equivalent).
    size_t nb = static_cast<size_t>(rpart.count);
    std::vector<double> v(nb, 0.0), next(nb, 0.0);
    for (int b = 0; b < rpart.count; ++b) {
        std::fill(v.begin(), v.end(), 0.0);
        v[static_cast<size_t>(b)] = 1.0;
        for (long t = 0; t < burn_in; ++t) {
            std::fill(next.begin(), next.end(), 0.0);
            for (size_t i = 0; i < nb; ++i) {
                if (v[i] == 0.0) continue;
                for (auto [j, p] : qq.rows[i]) next[static_cast<size_t>(j)] += v[i] * p;
            }
            v.swap(next);
        }
        double expected = 0.0;
        for (size_t o = 0; o < nb; ++o) expected += cond[o] * v[o];
        double bias = std::abs(expected - res.theta);
        if (bias > res.bias_abs) {
            res.bias_abs = bias;
            res.worst_block = b;
        }
    }
    return res;
}

}  // namespace symdens
