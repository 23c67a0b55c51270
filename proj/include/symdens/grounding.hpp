#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "symdens/group.hpp"
#include "symdens/model.hpp"

namespace symdens {

// Per-formula weights of the built-in relational templates (log-space).
struct TemplateWeights {
    double smokes_bias = -0.3;     // smokes(x)
    double smokes_cancer = 1.4;    // smokes(x) => cancer(x)
    double friends_smokes = 1.1;   // friends(x,y) ^ smokes(x) => smokes(y)
    double transitivity = 1.0;     // friends(x,y) ^ friends(y,z) => friends(x,z)
    double asthma_smokes = 2.0;    // asthma(x) => !smokes(x)
    double asthma_friends = 1.0;   // friends(x,y) ^ asthma(x) => !smokes(y)
};

// Named evidence atoms, e.g. {"smokes(A)", 1}.
using EvidenceSpec = std::vector<std::pair<std::string, int>>;

struct Grounding {
    FactorGraph model;
    std::vector<GroundAtom> atoms;         // per variable id
    std::map<GroundAtom, int> atom_index;  // inverse of `atoms`
    std::vector<std::string> constant_names;
    // Constants with identical evidence signature; singleton classes listed too.
    std::vector<std::vector<int>> constant_classes;
};

// Grounds one of the built-in schemas: "smokers", "smokers+transitivity",
// "asthma-lite". Variables are ordered smokes(*), cancer(*), [asthma(*)],
// friends(*,*) row-major; friends(x,x) atoms exist but appear in no formula.
Grounding ground_template(const std::string& name, int domain_size,
                          const TemplateWeights& weights = {},
                          const EvidenceSpec& evidence = {});

// Observation protocol: for ceil(frac*d) random people,
// clamp smokes and min(10, d-1) of their friends relations. Deterministic
// in the seed.
EvidenceSpec percent_evidence(int domain_size, double frac, uint64_t seed);

// Renaming automorphisms induced by the grounding's constant classes.
GeneratingSet renaming_group(const Grounding& g);

enum class GridMode { Soft, Hard };

// 2-coloring grid: binary variable per cell, one pairwise table per grid
// edge with potentials exp(w) if the endpoints differ and 1 otherwise
// (0/1 in hard mode). Cell (r,c) is named x<r>_<c>.
FactorGraph make_grid_model(int rows, int cols, GridMode mode, double w = 0.2);

// Reflection/rotation symmetries of the grid: the 8-element dihedral group
// for square grids, the 4-element reflection group otherwise.
GeneratingSet grid_symmetry_generators(int rows, int cols);

}  // namespace symdens
