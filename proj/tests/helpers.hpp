#pragma once

// Shared test fixtures and independent oracles. The oracles deliberately
// avoid the library's own code paths: brute-force enumeration with direct
// weight products, definitional indicator loops, etc.

#include <cmath>
#include <string>
#include <vector>

#include "symdens/exact.hpp"
#include "symdens/group.hpp"
#include "symdens/model.hpp"
#include "symdens/sampler.hpp"

namespace testutil {

using namespace symdens;

// Enumerate every evidence-consistent assignment via an odometer over the
// free variables (independent of StateSpace's ranking).
template <typename F>
void for_each_assignment(const FactorGraph& model, F&& fn) {
    Assignment s(static_cast<size_t>(model.num_vars()), 0);
    for (const auto& [v, val] : model.evidence()) s[static_cast<size_t>(v)] = val;
    const std::vector<int>& free_vars = model.free_vars();
    while (true) {
        fn(s);
        size_t i = 0;
        for (; i < free_vars.size(); ++i) {
            int v = free_vars[i];
            if (++s[static_cast<size_t>(v)] < model.variable(v).cardinality) break;
            s[static_cast<size_t>(v)] = 0;
        }
        if (i == free_vars.size()) break;
    }
}

// Direct (non-log) weight evaluation: product of exp(weight) over satisfied
// clauses times the product of table potentials.
inline double direct_weight(const FactorGraph& model, const Assignment& s) {
    double w = 1.0;
    for (const ClauseFeature& c : model.clauses())
        if (clause_satisfied(c, s)) w *= std::exp(c.weight);
    for (const TableFactor& t : model.tables()) {
        size_t idx = 0;
        for (int v : t.scope)
            idx = idx * static_cast<size_t>(model.variable(v).cardinality) +
                  static_cast<size_t>(s[static_cast<size_t>(v)]);
        w *= t.potentials[idx];
    }
    return w;
}

inline double brute_force_marginal(const FactorGraph& model, const MarginalQuery& q) {
    double z = 0.0, hit = 0.0;
    for_each_assignment(model, [&](const Assignment& s) {
        double w = direct_weight(model, s);
        z += w;
        if (FactorGraph::query_matches(s, q)) hit += w;
    });
    return hit / z;
}

inline std::vector<double> brute_force_conditional(const FactorGraph& model, const Assignment& s,
                                                   int v) {
    Assignment t = s;
    int card = model.variable(v).cardinality;
    std::vector<double> w(static_cast<size_t>(card));
    double z = 0.0;
    for (int k = 0; k < card; ++k) {
        t[static_cast<size_t>(v)] = k;
        w[static_cast<size_t>(k)] = direct_weight(model, t);
        z += w[static_cast<size_t>(k)];
    }
    for (double& x : w) x /= z;
    return w;
}

// The 4-atom smokers grounding over constants A, B (smokes and cancer only),
// with the usual implication and bias weights.
inline FactorGraph fig1_model() {
    return parse_model(
        "var smokes_A 2\n"
        "var smokes_B 2\n"
        "var cancer_A 2\n"
        "var cancer_B 2\n"
        "feature -0.3 smokes_A=1\n"
        "feature -0.3 smokes_B=1\n"
        "feature 1.4 !smokes_A=1 cancer_A=1\n"
        "feature 1.4 !smokes_B=1 cancer_B=1\n");
}

inline GeneratingSet fig1_group(const FactorGraph& model) {
    return parse_group_file("(smokes_A smokes_B)(cancer_A cancer_B)\n", model);
}

// Four exchangeable binary variables with pairwise agreement tables; the
// full symmetric group S4 (adjacent transpositions) is an automorphism group.
inline FactorGraph exchangeable4_model(double coupling = 0.8) {
    double c = std::exp(coupling);
    std::string text;
    for (int i = 0; i < 4; ++i) text += "var x" + std::to_string(i) + " 2\n";
    char buf[160];
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            std::snprintf(buf, sizeof(buf), "table x%d x%d %.17g 1 1 %.17g\n", i, j, c, c);
            text += buf;
        }
    return parse_model(text);
}

inline GeneratingSet s4_group(const FactorGraph& model) {
    return parse_group_file("(x0 x1)\n(x1 x2)\n(x2 x3)\n", model);
}

struct SymmetricModel {
    FactorGraph model;
    GeneratingSet group;  // adjacent entity transpositions
};

// Random model that is symmetric by construction: `entities` blocks of
// `per_entity` binary variables; random unary/pairwise clause templates are
// instantiated identically for every entity / ordered entity pair, so every
// entity permutation is an automorphism.
inline SymmetricModel make_entity_model(int entities, int per_entity, uint64_t seed) {
    RngStream rng(seed, 0);
    int n = entities * per_entity;
    std::vector<Variable> vars;
    for (int e = 0; e < entities; ++e)
        for (int k = 0; k < per_entity; ++k)
            vars.push_back({e * per_entity + k,
                            "v" + std::to_string(e) + "_" + std::to_string(k), 2});

    auto vid = [&](int e, int k) { return e * per_entity + k; };
    std::vector<ClauseFeature> clauses;

    int n_unary = 1 + rng.next_below(2);
    for (int t = 0; t < n_unary; ++t) {
        int slot = rng.next_below(per_entity);
        int val = rng.next_below(2);
        bool pos = rng.next_below(2) == 0;
        double w = (rng.next_double() - 0.5) * 2.0;
        for (int e = 0; e < entities; ++e) clauses.push_back({w, {{vid(e, slot), val, pos}}});
    }
    int n_pair = 1 + rng.next_below(2);
    for (int t = 0; t < n_pair; ++t) {
        int sa = rng.next_below(per_entity), sb = rng.next_below(per_entity);
        int va = rng.next_below(2), vb = rng.next_below(2);
        bool pa = rng.next_below(2) == 0, pb = rng.next_below(2) == 0;
        double w = (rng.next_double() - 0.5) * 2.0;
        for (int ea = 0; ea < entities; ++ea)
            for (int eb = 0; eb < entities; ++eb) {
                if (ea == eb) continue;
                clauses.push_back({w, {{vid(ea, sa), va, pa}, {vid(eb, sb), vb, pb}}});
            }
    }

    std::vector<TableFactor> tables;
    if (per_entity >= 2) {
        std::vector<double> pot(4);
        for (double& p : pot) p = 0.2 + rng.next_double();
        for (int e = 0; e < entities; ++e) tables.push_back({{vid(e, 0), vid(e, 1)}, pot});
    }

    FactorGraph model(std::move(vars), std::move(clauses), std::move(tables), {});
    GeneratingSet group{n, {}};
    for (int e = 0; e + 1 < entities; ++e) {
        Permutation g = Permutation::identity(n);
        for (int k = 0; k < per_entity; ++k) {
            g.image[static_cast<size_t>(vid(e, k))] = vid(e + 1, k);
            g.image[static_cast<size_t>(vid(e + 1, k))] = vid(e, k);
        }
        group.generators.push_back(g);
    }
    return {std::move(model), std::move(group)};
}

}  // namespace testutil
