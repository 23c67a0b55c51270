#include "symdens/grounding.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace symdens {

namespace {

std::string constant_name(int i, int d) {
    if (d <= 26) return std::string(1, static_cast<char>('A' + i));
    return "C" + std::to_string(i);
}

std::string atom_name(const GroundAtom& a, const std::vector<std::string>& consts) {
    std::string s = a.predicate + "(";
    for (size_t i = 0; i < a.args.size(); ++i) {
        if (i) s += ',';
        s += consts[static_cast<size_t>(a.args[i])];
    }
    return s + ")";
}

}  // namespace

Grounding ground_template(const std::string& name, int d, const TemplateWeights& w,
                          const EvidenceSpec& evidence) {
    bool transitivity = false, asthma = false;
    if (name == "smokers") {
    } else if (name == "smokers+transitivity") {
        transitivity = true;
    } else if (name == "asthma-lite") {
        asthma = true;
    } else {
        throw ModelError("unsupported template '" + name + "'");
    }
    if (d < 1) throw ModelError("domain size must be >= 1");

    Grounding g;
    for (int i = 0; i < d; ++i) g.constant_names.push_back(constant_name(i, d));

    auto add_atom = [&](const std::string& pred, std::vector<int> args) {
        GroundAtom a{pred, std::move(args)};
        g.atom_index[a] = static_cast<int>(g.atoms.size());
        g.atoms.push_back(std::move(a));
    };
    for (int x = 0; x < d; ++x) add_atom("smokes", {x});
    for (int x = 0; x < d; ++x) add_atom("cancer", {x});
    if (asthma)
        for (int x = 0; x < d; ++x) add_atom("asthma", {x});
    for (int x = 0; x < d; ++x)
        for (int y = 0; y < d; ++y) add_atom("friends", {x, y});

    std::vector<Variable> vars;
    for (size_t i = 0; i < g.atoms.size(); ++i)
        vars.push_back({static_cast<int>(i), atom_name(g.atoms[i], g.constant_names), 2});

    auto id = [&](const std::string& pred, std::vector<int> args) {
        return g.atom_index.at(GroundAtom{pred, std::move(args)});
    };

    std::vector<ClauseFeature> clauses;
    for (int x = 0; x < d; ++x)
        clauses.push_back({w.smokes_bias, {{id("smokes", {x}), 1, true}}});
    for (int x = 0; x < d; ++x)
        clauses.push_back(
            {w.smokes_cancer, {{id("smokes", {x}), 1, false}, {id("cancer", {x}), 1, true}}});
    if (asthma) {
        for (int x = 0; x < d; ++x)
            clauses.push_back(
                {w.asthma_smokes, {{id("asthma", {x}), 1, false}, {id("smokes", {x}), 0, true}}});
    }
    for (int x = 0; x < d; ++x)
        for (int y = 0; y < d; ++y) {
            if (x == y) continue;  // reflexive friends atoms carry no formulas
            clauses.push_back({w.friends_smokes,
                               {{id("friends", {x, y}), 1, false},
                                {id("smokes", {x}), 1, false},
                                {id("smokes", {y}), 1, true}}});
            if (asthma)
                clauses.push_back({w.asthma_friends,
                                   {{id("friends", {x, y}), 1, false},
                                    {id("asthma", {x}), 1, false},
                                    {id("smokes", {y}), 0, true}}});
        }
    if (transitivity) {
        // Ordered distinct triples: x != y, y != z, x != z.
        for (int x = 0; x < d; ++x)
            for (int y = 0; y < d; ++y)
                for (int z = 0; z < d; ++z) {
                    if (x == y || y == z || x == z) continue;
                    clauses.push_back({w.transitivity,
                                       {{id("friends", {x, y}), 1, false},
                                        {id("friends", {y, z}), 1, false},
                                        {id("friends", {x, z}), 1, true}}});
                }
    }

    std::map<int, int> ev;
    std::set<int> touched;  // constants pinned by evidence
    std::map<std::string, int> names;
    for (const Variable& v : vars) names[v.name] = v.id;
    for (const auto& [atom_str, val] : evidence) {
        auto it = names.find(atom_str);
        if (it == names.end())
            throw ModelError("evidence references unknown atom '" + atom_str + "'");
        ev[it->second] = val;
        for (int c : g.atoms[static_cast<size_t>(it->second)].args) touched.insert(c);
    }

    std::vector<int> open;
    for (int c = 0; c < d; ++c) {
        if (touched.count(c))
            g.constant_classes.push_back({c});
        else
            open.push_back(c);
    }
    if (!open.empty()) g.constant_classes.push_back(open);
    std::sort(g.constant_classes.begin(), g.constant_classes.end());

    g.model = FactorGraph(std::move(vars), std::move(clauses), {}, std::move(ev));
    return g;
}

EvidenceSpec percent_evidence(int d, double frac, uint64_t seed) {
    if (frac < 0.0 || frac > 1.0) throw ModelError("evidence fraction must be in [0,1]");
    int observed = static_cast<int>(std::ceil(frac * d));
    std::mt19937_64 rng(seed);
    std::vector<int> people(static_cast<size_t>(d));
    for (int i = 0; i < d; ++i) people[static_cast<size_t>(i)] = i;
    std::shuffle(people.begin(), people.end(), rng);
    people.resize(static_cast<size_t>(observed));

    // Each observed person also reveals up to 10 friendships — min(10, d-1)
    // so small domains stay feasible.
    int friends_per_person = std::min(10, d - 1);
    EvidenceSpec ev;
    for (int p : people) {
        std::string pn = constant_name(p, d);
        ev.emplace_back("smokes(" + pn + ")", static_cast<int>(rng() % 2));
        std::vector<int> others;
        for (int q = 0; q < d; ++q)
            if (q != p) others.push_back(q);
        std::shuffle(others.begin(), others.end(), rng);
        for (int k = 0; k < friends_per_person; ++k)
            ev.emplace_back("friends(" + pn + "," + constant_name(others[static_cast<size_t>(k)], d) + ")", 1);
    }
    std::sort(ev.begin(), ev.end());
    ev.erase(std::unique(ev.begin(), ev.end()), ev.end());
    return ev;
}

GeneratingSet renaming_group(const Grounding& g) {
    return renaming_generators(g.constant_classes, g.atom_index, g.model.num_vars());
}

FactorGraph make_grid_model(int rows, int cols, GridMode mode, double w) {
    if (rows < 1 || cols < 1) throw ModelError("grid dimensions must be >= 1");
    std::vector<Variable> vars;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            vars.push_back({r * cols + c, "x" + std::to_string(r) + "_" + std::to_string(c), 2});
    std::vector<TableFactor> tables;
    double off = mode == GridMode::Soft ? std::exp(w) : 1.0;
    double diag = mode == GridMode::Soft ? 1.0 : 0.0;
    std::vector<double> pot{diag, off, off, diag};
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            int v = r * cols + c;
            if (c + 1 < cols) tables.push_back({{v, v + 1}, pot});
            if (r + 1 < rows) tables.push_back({{v, v + cols}, pot});
        }
    return FactorGraph(std::move(vars), {}, std::move(tables), {});
}

GeneratingSet grid_symmetry_generators(int rows, int cols) {
    int n = rows * cols;
    auto cell = [&](int r, int c) { return r * cols + c; };
    GeneratingSet g;
    g.n = n;
    {
        // Horizontal reflection.
        Permutation p = Permutation::identity(n);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c)
                p.image[static_cast<size_t>(cell(r, c))] = cell(r, cols - 1 - c);
        if (!p.is_identity()) g.generators.push_back(std::move(p));
    }
    {
        // Vertical reflection.
        Permutation p = Permutation::identity(n);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c)
                p.image[static_cast<size_t>(cell(r, c))] = cell(rows - 1 - r, c);
        if (!p.is_identity()) g.generators.push_back(std::move(p));
    }
    if (rows == cols) {
        // Quarter rotation; together with a reflection this generates the
        // full 8-element dihedral group.
        Permutation p = Permutation::identity(n);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c)
                p.image[static_cast<size_t>(cell(r, c))] = cell(c, rows - 1 - r);
        if (!p.is_identity()) g.generators.push_back(std::move(p));
    }
    return g;
}

}  // namespace symdens
