#include "symdens/group.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <set>
#include <sstream>

namespace symdens {

bool Permutation::is_identity() const {
    for (int i = 0; i < size(); ++i)
        if (image[static_cast<size_t>(i)] != i) return false;
    return true;
}

Permutation Permutation::identity(int n) {
    Permutation p;
    p.image.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) p.image[static_cast<size_t>(i)] = i;
    return p;
}

Permutation make_permutation(std::vector<int> image) {
    std::vector<char> seen(image.size(), 0);
    for (int x : image) {
        if (x < 0 || x >= static_cast<int>(image.size()) || seen[static_cast<size_t>(x)])
            throw GroupError("image array is not a bijection");
        seen[static_cast<size_t>(x)] = 1;
    }
    return Permutation{std::move(image)};
}

Permutation compose(const Permutation& g, const Permutation& h) {
    if (g.size() != h.size()) throw GroupError("permutation size mismatch in compose");
    Permutation r;
    r.image.resize(g.image.size());
    for (int i = 0; i < g.size(); ++i) r.image[static_cast<size_t>(i)] = h(g(i));
    return r;
}

Permutation inverse(const Permutation& g) {
    Permutation r;
    r.image.resize(g.image.size());
    for (int i = 0; i < g.size(); ++i) r.image[static_cast<size_t>(g(i))] = i;
    return r;
}

Assignment apply_to_assignment(const Permutation& g, const Assignment& s) {
    if (g.size() != static_cast<int>(s.size()))
        throw GroupError("permutation/assignment size mismatch");
    Assignment r(s.size());
    for (size_t i = 0; i < s.size(); ++i) r[static_cast<size_t>(g.image[i])] = s[i];
    return r;
}

std::vector<int> apply_to_sequence(const Permutation& g, const std::vector<int>& seq) {
    std::vector<int> r(seq.size());
    for (size_t i = 0; i < seq.size(); ++i) {
        if (seq[i] < 0 || seq[i] >= g.size()) throw GroupError("sequence element out of range");
        r[i] = g(seq[i]);
    }
    return r;
}

SequenceOrbit orbit_of_sequence(const GeneratingSet& g, const std::vector<int>& base, size_t cap) {
    SequenceOrbit orb;
    orb.base = base;
    std::set<std::vector<int>> seen;
    seen.insert(base);
    std::deque<std::vector<int>> frontier{base};
    while (!frontier.empty()) {
        std::vector<int> cur = std::move(frontier.front());
        frontier.pop_front();
        for (const Permutation& p : g.generators) {
            ++orb.generator_applications;
            std::vector<int> img = apply_to_sequence(p, cur);
            if (seen.insert(img).second) {
                if (seen.size() > cap) throw GroupError("orbit too large (cap exceeded)");
                frontier.push_back(std::move(img));
            }
        }
    }
    orb.members.assign(seen.begin(), seen.end());
    return orb;
}

int orbit_hamming_weight(const Assignment& s, const MarginalQuery& q, const SequenceOrbit& orb) {
    int h = 0;
    for (const std::vector<int>& a : orb.members) {
        bool match = true;
        for (size_t i = 0; i < a.size(); ++i)
            if (s[static_cast<size_t>(a[i])] != q.target[i]) {
                match = false;
                break;
            }
        if (match) ++h;
    }
    return h;
}

int variable_orbit_partition(const GeneratingSet& g, std::vector<int>& out_labels) {
    int n = g.n;
    std::vector<Permutation> inv;
    inv.reserve(g.generators.size());
    for (const Permutation& p : g.generators) inv.push_back(inverse(p));
    out_labels.assign(static_cast<size_t>(n), -1);
    int count = 0;
    std::deque<int> frontier;
    for (int start = 0; start < n; ++start) {
        if (out_labels[static_cast<size_t>(start)] >= 0) continue;
        int label = count++;
        out_labels[static_cast<size_t>(start)] = label;
        frontier.push_back(start);
        while (!frontier.empty()) {
            int v = frontier.front();
            frontier.pop_front();
            for (size_t gi = 0; gi < g.generators.size(); ++gi) {
                for (int w : {g.generators[gi](v), inv[gi](v)}) {
                    if (out_labels[static_cast<size_t>(w)] < 0) {
                        out_labels[static_cast<size_t>(w)] = label;
                        frontier.push_back(w);
                    }
                }
            }
        }
    }
    return count;
}

GeneratingSet renaming_generators(const std::vector<std::vector<int>>& constant_classes,
                                  const std::map<GroundAtom, int>& atom_index, int n) {
    GeneratingSet g;
    g.n = n;
    for (const std::vector<int>& cls : constant_classes) {
        for (size_t i = 0; i + 1 < cls.size(); ++i) {
            int a = cls[i], b = cls[i + 1];
            Permutation p = Permutation::identity(n);
            for (const auto& [atom, var] : atom_index) {
                GroundAtom img = atom;
                bool moved = false;
                for (int& c : img.args) {
                    if (c == a) {
                        c = b;
                        moved = true;
                    } else if (c == b) {
                        c = a;
                        moved = true;
                    }
                }
                if (!moved) continue;
                auto it = atom_index.find(img);
                if (it == atom_index.end())
                    throw GroupError("constant class references atoms with no swap image");
                p.image[static_cast<size_t>(var)] = it->second;
            }
            g.generators.push_back(make_permutation(std::move(p.image)));
        }
    }
    return g;
}

AutomorphismVerdict verify_automorphism(const FactorGraph& model, const Permutation& g,
                                        bool exhaustive, int sampled_k, uint64_t seed) {
    AutomorphismVerdict verdict;
    if (g.size() != model.num_vars()) {
        verdict.reason = "permutation size does not match variable count";
        return verdict;
    }
    for (int i = 0; i < g.size(); ++i)
        if (model.variable(i).cardinality != model.variable(g(i)).cardinality) {
            verdict.reason = "permutation maps across different cardinalities";
            return verdict;
        }
    // g must fix the evidence assignment: images of evidence variables are
    // evidence variables with the same clamped value.
    for (auto [v, val] : model.evidence()) {
        int w = g(v);
        if (!model.is_evidence(w) || model.evidence_value(w) != val) {
            verdict.reason = "permutation moves the evidence assignment";
            return verdict;
        }
    }
    const std::vector<int>& free_vars = model.free_vars();
    Assignment s(static_cast<size_t>(model.num_vars()), 0);
    for (auto [v, val] : model.evidence()) s[static_cast<size_t>(v)] = val;

    auto check_one = [&](const Assignment& a) -> bool {
        double lw = model.log_weight(a);
        double lw_img = model.log_weight(apply_to_assignment(g, a));
        if (std::isinf(lw) && std::isinf(lw_img)) return true;
        return std::abs(lw - lw_img) <= 1e-9;
    };

    if (exhaustive) {
        double states = 1.0;
        for (int v : free_vars) states *= model.variable(v).cardinality;
        if (states > static_cast<double>(1u << 20))
            throw GroupError("assignment space too large for exhaustive verification");
        // Mixed-radix odometer over the free variables.
        while (true) {
            if (!check_one(s)) {
                verdict.reason = "log-weight differs on a counterexample";
                verdict.counterexample = s;
                return verdict;
            }
            int i = static_cast<int>(free_vars.size()) - 1;
            for (; i >= 0; --i) {
                int v = free_vars[static_cast<size_t>(i)];
                if (++s[static_cast<size_t>(v)] < model.variable(v).cardinality) break;
                s[static_cast<size_t>(v)] = 0;
            }
            if (i < 0) break;
        }
    } else {
        std::mt19937_64 rng(seed);
        for (int k = 0; k < sampled_k; ++k) {
            for (int v : free_vars)
                s[static_cast<size_t>(v)] = static_cast<int>(
                    rng() % static_cast<uint64_t>(model.variable(v).cardinality));
            if (!check_one(s)) {
                verdict.reason = "log-weight differs on a sampled counterexample";
                verdict.counterexample = s;
                return verdict;
            }
        }
    }
    verdict.ok = true;
    return verdict;
}

std::vector<Permutation> group_closure(const GeneratingSet& g, size_t cap) {
    std::set<Permutation> seen;
    seen.insert(Permutation::identity(g.n));
    std::deque<Permutation> frontier(seen.begin(), seen.end());
    while (!frontier.empty()) {
        Permutation cur = std::move(frontier.front());
        frontier.pop_front();
        for (const Permutation& p : g.generators) {
            Permutation img = compose(cur, p);
            if (seen.insert(img).second) {
                if (seen.size() > cap) throw GroupError("group closure too large (cap exceeded)");
                frontier.push_back(std::move(img));
            }
        }
    }
    return {seen.begin(), seen.end()};
}

namespace {

// Splits group-file cycle notation into cycles of name tokens, tracking
// nested parens so atom names like friends(A,B) survive intact.
std::vector<std::vector<std::string>> split_cycles(const std::string& line, int line_no) {
    std::vector<std::vector<std::string>> cycles;
    std::vector<std::string> cur_cycle;
    std::string tok;
    int depth = 0;
    auto flush_tok = [&]() {
        if (!tok.empty()) {
            cur_cycle.push_back(tok);
            tok.clear();
        }
    };
    for (char c : line) {
        if (c == '(') {
            if (depth == 0) {
                cur_cycle.clear();
            } else {
                tok += c;
            }
            ++depth;
        } else if (c == ')') {
            --depth;
            if (depth < 0)
                throw GroupError("line " + std::to_string(line_no) + ": unbalanced ')'");
            if (depth == 0) {
                flush_tok();
                cycles.push_back(cur_cycle);
                cur_cycle.clear();
            } else {
                tok += c;
            }
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            if (depth == 1) {
                flush_tok();
            } else if (depth > 1) {
                throw GroupError("line " + std::to_string(line_no) +
                                 ": whitespace inside an atom name");
            }
        } else {
            if (depth == 0)
                throw GroupError("line " + std::to_string(line_no) +
                                 ": text outside of cycle parens");
            tok += c;
        }
    }
    if (depth != 0) throw GroupError("line " + std::to_string(line_no) + ": unbalanced '('");
    return cycles;
}

}  // namespace

GeneratingSet parse_group_file(const std::string& text, const FactorGraph& model) {
    GeneratingSet g;
    g.n = model.num_vars();
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        bool blank = true;
        for (char c : line)
            if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
        if (blank) continue;
        Permutation p = Permutation::identity(g.n);
        for (const std::vector<std::string>& cycle : split_cycles(line, line_no)) {
            if (cycle.size() < 2) continue;  // fixed point, e.g. "()"
            std::vector<int> ids;
            for (const std::string& name : cycle) {
                int id = model.find_var(name);
                if (id < 0)
                    throw GroupError("line " + std::to_string(line_no) + ": unknown variable '" +
                                     name + "'");
                ids.push_back(id);
            }
            for (size_t i = 0; i < ids.size(); ++i) {
                int from = ids[i], to = ids[(i + 1) % ids.size()];
                if (p.image[static_cast<size_t>(from)] != from)
                    throw GroupError("line " + std::to_string(line_no) +
                                     ": cycles are not disjoint");
                p.image[static_cast<size_t>(from)] = to;
            }
        }
        g.generators.push_back(make_permutation(std::move(p.image)));
    }
    return g;
}

std::string to_cycle_notation(const Permutation& g, const FactorGraph& model) {
    std::string out;
    std::vector<char> done(static_cast<size_t>(g.size()), 0);
    for (int i = 0; i < g.size(); ++i) {
        if (done[static_cast<size_t>(i)] || g(i) == i) continue;
        out += '(';
        int j = i;
        bool first = true;
        do {
            if (!first) out += ' ';
            first = false;
            out += model.variable(j).name;
            done[static_cast<size_t>(j)] = 1;
            j = g(j);
        } while (j != i);
        out += ')';
    }
    if (out.empty()) out = "()";
    return out;
}

std::string to_group_file(const GeneratingSet& g, const FactorGraph& model) {
    std::string out;
    for (const Permutation& p : g.generators) out += to_cycle_notation(p, model) + "\n";
    return out;
}

}  // namespace symdens
