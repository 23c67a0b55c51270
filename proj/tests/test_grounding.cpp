#include <cmath>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "symdens/grounding.hpp"

using namespace symdens;
using namespace testutil;

TEST_CASE("smokers d=2: atoms, formulas, constant classes") {
    Grounding g = ground_template("smokers", 2);
    const FactorGraph& m = g.model;
    CHECK(m.num_vars() == 8);  // 2 smokes + 2 cancer + 4 friends
    for (const char* name : {"smokes(A)", "smokes(B)", "cancer(A)", "cancer(B)",
                             "friends(A,B)", "friends(B,A)", "friends(A,A)", "friends(B,B)"})
        CHECK(m.find_var(name) >= 0);
    // 2 bias + 2 smokes=>cancer + 2 friendship clauses (ordered distinct pairs)
    CHECK(m.clauses().size() == 6);
    REQUIRE(g.constant_classes.size() == 1);
    CHECK(g.constant_classes[0] == std::vector<int>{0, 1});
}

TEST_CASE("smokers d=1: no pair formulas, reflexive atom present") {
    Grounding g = ground_template("smokers", 1);
    CHECK(g.model.num_vars() == 3);  // smokes(A), cancer(A), friends(A,A)
    CHECK(g.model.clauses().size() == 2);  // bias + implication only
}

TEST_CASE("transitivity grounds over ordered distinct triples") {
    Grounding base = ground_template("smokers", 3);
    Grounding trans = ground_template("smokers+transitivity", 3);
    CHECK(trans.model.clauses().size() == base.model.clauses().size() + 6);
    int three_literal = 0;
    for (const ClauseFeature& c : trans.model.clauses())
        if (c.literals.size() == 3 && std::abs(c.weight - TemplateWeights{}.transitivity) < 1e-15) {
            // all three literals over friends atoms
            bool all_friends = true;
            for (const Literal& l : c.literals)
                if (trans.model.variable(l.var).name.rfind("friends", 0) != 0) all_friends = false;
            if (all_friends) ++three_literal;
        }
    CHECK(three_literal == 6);
}

TEST_CASE("asthma-lite adds asthma atoms and formulas") {
    Grounding g = ground_template("asthma-lite", 2);
    CHECK(g.model.find_var("asthma(A)") >= 0);
    CHECK(g.model.find_var("asthma(B)") >= 0);
    CHECK(g.model.num_vars() == 10);
    CHECK_THROWS_AS(ground_template("nosuch", 2), ModelError);
}

TEST_CASE("grounding is deterministic") {
    std::string a = to_model_text(ground_template("smokers+transitivity", 3).model);
    std::string b = to_model_text(ground_template("smokers+transitivity", 3).model);
    CHECK(a == b);
}

TEST_CASE("evidence splits constant classes by signature") {
    Grounding g = ground_template("smokers", 3, {}, {{"smokes(A)", 1}});
    CHECK(g.model.is_evidence(g.model.find_var("smokes(A)")));
    // A is a singleton; B and C stay interchangeable.
    std::set<size_t> sizes;
    for (const auto& c : g.constant_classes) sizes.insert(c.size());
    CHECK(g.constant_classes.size() == 2);
    CHECK(sizes == std::set<size_t>{1, 2});
    GeneratingSet gens = renaming_group(g);
    REQUIRE(gens.generators.size() == 1);
    CHECK(verify_automorphism(g.model, gens.generators[0]).ok);
    CHECK_THROWS_AS(ground_template("smokers", 2, {}, {{"smokes(Z)", 1}}), ModelError);
}

TEST_CASE("percent_evidence clamps smokes plus min(10, d-1) friends per person") {
    EvidenceSpec ev = percent_evidence(20, 0.1, 7);
    // ceil(0.1 * 20) = 2 people, each with 1 smokes + 10 friends atoms.
    CHECK(ev.size() == 2 * 11);
    CHECK(percent_evidence(20, 0.1, 7) == ev);  // deterministic
    EvidenceSpec small = percent_evidence(3, 0.4, 1);
    CHECK(small.size() == 2 * 3);  // 2 people, 1 smokes + min(10,2)=2 friends
    Grounding g = ground_template("smokers", 3, {}, small);
    CHECK(g.model.evidence().size() == small.size());
}

TEST_CASE("grid model: sizes, potentials, edge counts") {
    FactorGraph g22 = make_grid_model(2, 2, GridMode::Soft, 0.2);
    CHECK(g22.num_vars() == 4);
    CHECK(g22.tables().size() == 4);
    for (const TableFactor& t : g22.tables()) {
        CHECK(t.potentials[0] == doctest::Approx(1.0));
        CHECK(t.potentials[1] == doctest::Approx(std::exp(0.2)));
        CHECK(t.potentials[2] == doctest::Approx(std::exp(0.2)));
        CHECK(t.potentials[3] == doctest::Approx(1.0));
    }

    FactorGraph g11 = make_grid_model(1, 1, GridMode::Soft);
    CHECK(g11.num_vars() == 1);
    CHECK(g11.tables().empty());

    CHECK(make_grid_model(3, 3, GridMode::Soft).tables().size() == 12);

    FactorGraph hard = make_grid_model(2, 2, GridMode::Hard);
    CHECK(hard.tables()[0].potentials == std::vector<double>{0, 1, 1, 0});
    CHECK_THROWS_AS(make_grid_model(0, 2, GridMode::Soft), ModelError);
}

TEST_CASE("grid symmetry generators are verified automorphisms") {
    FactorGraph sq = make_grid_model(3, 3, GridMode::Soft, 0.2);
    GeneratingSet gens = grid_symmetry_generators(3, 3);
    CHECK(group_closure(gens).size() == 8);  // dihedral group of the square
    for (const Permutation& g : gens.generators) CHECK(verify_automorphism(sq, g).ok);

    FactorGraph rect = make_grid_model(2, 3, GridMode::Soft, 0.2);
    GeneratingSet rgens = grid_symmetry_generators(2, 3);
    CHECK(group_closure(rgens).size() == 4);  // reflections only
    for (const Permutation& g : rgens.generators) CHECK(verify_automorphism(rect, g).ok);
}

TEST_CASE("renaming group of the smokers grounding is a verified automorphism group") {
    Grounding g = ground_template("smokers+transitivity", 2);
    for (const Permutation& p : renaming_group(g).generators)
        CHECK(verify_automorphism(g.model, p).ok);
}
