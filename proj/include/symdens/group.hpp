#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "symdens/model.hpp"

namespace symdens {

class GroupError : public std::runtime_error {
  public:
    explicit GroupError(const std::string& what) : std::runtime_error(what) {}
};

// Bijection on {0..n-1}, stored as a dense image array.
struct Permutation {
    std::vector<int> image;

    int size() const { return static_cast<int>(image.size()); }
    int operator()(int i) const { return image[static_cast<size_t>(i)]; }
    bool is_identity() const;
    bool operator==(const Permutation& o) const { return image == o.image; }
    bool operator<(const Permutation& o) const { return image < o.image; }

    static Permutation identity(int n);
};

// Validates that `image` is a bijection; throws GroupError otherwise.
Permutation make_permutation(std::vector<int> image);

// Composition convention, fixed project-wide: compose(g, h) applies g first,
// then h, i.e. compose(g,h)(i) = h(g(i)).
Permutation compose(const Permutation& g, const Permutation& h);
Permutation inverse(const Permutation& g);

// Action on assignments: the value held by variable i moves to its image,
// result[g(i)] = s[i].
Assignment apply_to_assignment(const Permutation& g, const Assignment& s);

// Elementwise image of a variable-id sequence, order preserved.
std::vector<int> apply_to_sequence(const Permutation& g, const std::vector<int>& seq);

struct GeneratingSet {
    int n = 0;
    std::vector<Permutation> generators;
};

struct SequenceOrbit {
    std::vector<int> base;
    std::vector<std::vector<int>> members;  // sorted, deterministic
    // Number of generator-to-sequence applications spent building the orbit
    // (complexity contract: <= |R| * |members|).
    uint64_t generator_applications = 0;

    int size() const { return static_cast<int>(members.size()); }
};

constexpr size_t kDefaultOrbitCap = 1000000;

// Breadth-first closure of {base} under the generators. Throws GroupError
// ("orbit too large") past `cap` members.
SequenceOrbit orbit_of_sequence(const GeneratingSet& g, const std::vector<int>& base,
                                size_t cap = kDefaultOrbitCap);

// Definition: number of orbit members A with s<A> = q.target.
int orbit_hamming_weight(const Assignment& s, const MarginalQuery& q, const SequenceOrbit& orb);

// Orbits of single variable ids under the generating set; out_labels[v] is
// the orbit index of v. Returns the orbit count. Linear in |R| * n.
int variable_orbit_partition(const GeneratingSet& g, std::vector<int>& out_labels);

// Ground atom of a relational template, e.g. friends(A,B) -> {"friends",{0,1}}.
struct GroundAtom {
    std::string predicate;
    std::vector<int> args;

    bool operator<(const GroundAtom& o) const {
        return predicate != o.predicate ? predicate < o.predicate : args < o.args;
    }
};

// Lifts constant classes to variable permutations: for each class of >= 2
// interchangeable constants, emits the adjacent constant transpositions
// mapped through the atom index. Constants absent from every class are fixed.
GeneratingSet renaming_generators(const std::vector<std::vector<int>>& constant_classes,
                                  const std::map<GroundAtom, int>& atom_index, int n);

struct AutomorphismVerdict {
    bool ok = false;
    std::string reason;
    Assignment counterexample;  // empty when ok
};

// Checks log_weight invariance of g and that g fixes the evidence
// assignment. Exhaustive mode enumerates the whole free assignment space
// (requires <= 2^20 states); sampled mode checks k random assignments.
AutomorphismVerdict verify_automorphism(const FactorGraph& model, const Permutation& g,
                                        bool exhaustive = true, int sampled_k = 1000,
                                        uint64_t seed = 1);

// Full group closure of the generating set (identity included).
// Throws GroupError past `cap` elements. Desk-scale only.
std::vector<Permutation> group_closure(const GeneratingSet& g, size_t cap = 100000);

// Cycle-notation I/O over variable names. One generator per line; an empty
// file is the trivial group. Names may themselves contain balanced parens,
// e.g. `(smokes(A) smokes(B))(cancer(A) cancer(B))`.
GeneratingSet parse_group_file(const std::string& text, const FactorGraph& model);
std::string to_cycle_notation(const Permutation& g, const FactorGraph& model);
std::string to_group_file(const GeneratingSet& g, const FactorGraph& model);

}  // namespace symdens
