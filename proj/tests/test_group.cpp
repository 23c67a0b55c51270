#include <algorithm>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "symdens/group.hpp"
#include "symdens/grounding.hpp"

using namespace symdens;
using namespace testutil;

namespace {

Permutation random_permutation(int n, RngStream& rng) {
    std::vector<int> image(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) image[static_cast<size_t>(i)] = i;
    for (int i = n - 1; i > 0; --i)
        std::swap(image[static_cast<size_t>(i)], image[static_cast<size_t>(rng.next_below(i + 1))]);
    return make_permutation(std::move(image));
}

}  // namespace

TEST_CASE("permutation basics: identity, inverse, involution") {
    Permutation id = Permutation::identity(4);
    CHECK(id.is_identity());
    Permutation g = make_permutation({1, 0, 3, 2});  // (0 1)(2 3)
    CHECK(compose(g, g).is_identity());
    CHECK(compose(g, inverse(g)).is_identity());
    CHECK_THROWS_AS(make_permutation({0, 0, 1}), GroupError);
    CHECK_THROWS_AS(compose(id, Permutation::identity(3)), GroupError);
}

TEST_CASE("composition convention: compose(g,h) applies g first") {
    RngStream rng(11, 0);
    for (int trial = 0; trial < 20; ++trial) {
        Permutation g = random_permutation(8, rng);
        Permutation h = random_permutation(8, rng);
        Permutation gh = compose(g, h);
        for (int i = 0; i < 8; ++i) CHECK(gh(i) == h(g(i)));
        std::vector<int> seq{3, 1, 4, 1};
        CHECK(apply_to_sequence(gh, seq) == apply_to_sequence(h, apply_to_sequence(g, seq)));
    }
}

TEST_CASE("apply_to_assignment moves values to images") {
    Permutation id = Permutation::identity(4);
    Assignment s{1, 0, 1, 0};
    CHECK(apply_to_assignment(id, s) == s);

    // (smokes_A smokes_B)(cancer_A cancer_B) on <1,0,1,0> gives <0,1,0,1>.
    Permutation g = make_permutation({1, 0, 3, 2});
    CHECK(apply_to_assignment(g, s) == Assignment{0, 1, 0, 1});
}

TEST_CASE("apply_to_assignment is a group action") {
    RngStream rng(12, 0);
    for (int trial = 0; trial < 20; ++trial) {
        Permutation g = random_permutation(6, rng);
        Permutation h = random_permutation(6, rng);
        Assignment s;
        for (int i = 0; i < 6; ++i) s.push_back(rng.next_below(2));
        CHECK(apply_to_assignment(compose(g, h), s) ==
              apply_to_assignment(h, apply_to_assignment(g, s)));
        CHECK(apply_to_assignment(inverse(g), apply_to_assignment(g, s)) == s);
    }
}

TEST_CASE("verified automorphisms preserve log_weight exhaustively") {
    SymmetricModel sm = make_entity_model(3, 2, 5);
    for (const Permutation& g : sm.group.generators) {
        AutomorphismVerdict v = verify_automorphism(sm.model, g);
        CHECK(v.ok);
        for_each_assignment(sm.model, [&](const Assignment& s) {
            CHECK(sm.model.log_weight(s) ==
                  doctest::Approx(sm.model.log_weight(apply_to_assignment(g, s))).epsilon(1e-9));
        });
    }
}

TEST_CASE("apply_to_sequence: renaming example") {
    FactorGraph m = fig1_model();
    GeneratingSet g = fig1_group(m);
    std::vector<int> a{m.find_var("smokes_A")};
    CHECK(apply_to_sequence(g.generators[0], a) ==
          std::vector<int>{m.find_var("smokes_B")});
}

TEST_CASE("orbit_of_sequence: trivial group, renaming pair, full S3") {
    GeneratingSet trivial{4, {}};
    SequenceOrbit orb = orbit_of_sequence(trivial, {2, 0});
    CHECK(orb.size() == 1);
    CHECK(orb.members[0] == std::vector<int>{2, 0});

    FactorGraph m = fig1_model();
    SequenceOrbit smokes_orb = orbit_of_sequence(fig1_group(m), {m.find_var("smokes_A")});
    CHECK(smokes_orb.size() == 2);

    GeneratingSet s3{3, {make_permutation({1, 0, 2}), make_permutation({0, 2, 1})}};
    SequenceOrbit pairs = orbit_of_sequence(s3, {0, 1});
    CHECK(pairs.size() == 6);  // all ordered pairs of distinct ids
    std::set<std::vector<int>> expect;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i != j) expect.insert({i, j});
    CHECK(std::set<std::vector<int>>(pairs.members.begin(), pairs.members.end()) == expect);
}

TEST_CASE("orbit closure and complexity counter") {
    GeneratingSet s3{3, {make_permutation({1, 0, 2}), make_permutation({0, 2, 1})}};
    SequenceOrbit orb = orbit_of_sequence(s3, {0, 1});
    for (const auto& m : orb.members)
        for (const Permutation& g : s3.generators)
            CHECK(std::find(orb.members.begin(), orb.members.end(), apply_to_sequence(g, m)) !=
                  orb.members.end());
    CHECK(orb.generator_applications <=
          static_cast<uint64_t>(s3.generators.size()) * static_cast<uint64_t>(orb.size()));
}

TEST_CASE("orbit cap raises an explicit error") {
    // S12 on 12 ids: the orbit of a 6-tuple has 12!/6! = 665280 members.
    GeneratingSet s12{12, {}};
    for (int i = 0; i + 1 < 12; ++i) {
        Permutation g = Permutation::identity(12);
        std::swap(g.image[static_cast<size_t>(i)], g.image[static_cast<size_t>(i + 1)]);
        s12.generators.push_back(g);
    }
    CHECK_THROWS_AS(orbit_of_sequence(s12, {0, 1, 2, 3, 4, 5}, 1000), GroupError);
}

TEST_CASE("orbit_hamming_weight: worked example and trivial group") {
    FactorGraph m = fig1_model();
    MarginalQuery q{{m.find_var("smokes_A")}, {1}};
    SequenceOrbit orb = orbit_of_sequence(fig1_group(m), q.vars);
    Assignment s{1, 0, 1, 0};
    CHECK(orbit_hamming_weight(s, q, orb) == 1);

    SequenceOrbit trivial = orbit_of_sequence(GeneratingSet{4, {}}, q.vars);
    CHECK(orbit_hamming_weight(s, q, trivial) == 1);
    CHECK(orbit_hamming_weight({0, 1, 0, 1}, q, trivial) == 0);
}

TEST_CASE("orbit_hamming_weight equals a definitional indicator loop") {
    SymmetricModel sm = make_entity_model(3, 2, 21);
    MarginalQuery q{{0, 3}, {1, 0}};
    SequenceOrbit orb = orbit_of_sequence(sm.group, q.vars);
    for_each_assignment(sm.model, [&](const Assignment& s) {
        int direct = 0;
        for (const auto& a : orb.members) {
            bool match = true;
            for (size_t i = 0; i < a.size(); ++i)
                if (s[static_cast<size_t>(a[i])] != q.target[i]) match = false;
            if (match) ++direct;
        }
        CHECK(orbit_hamming_weight(s, q, orb) == direct);
    });
}

TEST_CASE("orbit_hamming_weight is constant on assignment orbits") {
    SymmetricModel sm = make_entity_model(3, 2, 33);
    MarginalQuery q{{0, 1}, {1, 1}};
    SequenceOrbit orb = orbit_of_sequence(sm.group, q.vars);
    for_each_assignment(sm.model, [&](const Assignment& s) {
        int h = orbit_hamming_weight(s, q, orb);
        for (const Permutation& g : sm.group.generators)
            CHECK(orbit_hamming_weight(apply_to_assignment(g, s), q, orb) == h);
    });
}

TEST_CASE("variable_orbit_partition labels follow the generators") {
    GeneratingSet g{5, {make_permutation({1, 0, 2, 3, 4}), make_permutation({0, 1, 3, 2, 4})}};
    std::vector<int> labels;
    int count = variable_orbit_partition(g, labels);
    CHECK(count == 3);
    CHECK(labels[0] == labels[1]);
    CHECK(labels[2] == labels[3]);
    CHECK(labels[0] != labels[2]);
    CHECK(labels[4] != labels[0]);
    CHECK(labels[4] != labels[2]);
}

TEST_CASE("renaming_generators: smokers d=2 gives the full-swap generator") {
    Grounding g = ground_template("smokers", 2);
    GeneratingSet gens = renaming_group(g);
    REQUIRE(gens.generators.size() == 1);
    const Permutation& p = gens.generators[0];
    const FactorGraph& m = g.model;
    CHECK(p(m.find_var("smokes(A)")) == m.find_var("smokes(B)"));
    CHECK(p(m.find_var("cancer(A)")) == m.find_var("cancer(B)"));
    CHECK(p(m.find_var("friends(A,B)")) == m.find_var("friends(B,A)"));
    CHECK(p(m.find_var("friends(A,A)")) == m.find_var("friends(B,B)"));
    CHECK(verify_automorphism(m, p).ok);
}

TEST_CASE("renaming_generators: evidence splits classes; d=4 closure has 24 elements") {
    Grounding with_ev = ground_template("smokers", 2, {}, {{"smokes(A)", 1}});
    CHECK(renaming_group(with_ev).generators.empty());

    Grounding g4 = ground_template("smokers", 4);
    GeneratingSet gens = renaming_group(g4);
    CHECK(gens.generators.size() == 3);
    CHECK(group_closure(gens).size() == 24);
}

TEST_CASE("verify_automorphism: identity, valid generator, broken swap") {
    FactorGraph m = fig1_model();
    CHECK(verify_automorphism(m, Permutation::identity(4)).ok);
    CHECK(verify_automorphism(m, fig1_group(m).generators[0]).ok);

    // Swapping only the smokes atoms breaks the smokes->cancer coupling.
    Permutation bad = make_permutation({1, 0, 2, 3});
    AutomorphismVerdict v = verify_automorphism(m, bad);
    CHECK_FALSE(v.ok);
    REQUIRE(v.counterexample.size() == 4);
    CHECK(m.log_weight(v.counterexample) !=
          doctest::Approx(m.log_weight(apply_to_assignment(bad, v.counterexample)))
              .epsilon(1e-9));
}

TEST_CASE("verify_automorphism requires evidence to be fixed") {
    FactorGraph m = parse_model("var X 2\nvar Y 2\nevidence X 1\n");
    Permutation swap = make_permutation({1, 0});
    CHECK_FALSE(verify_automorphism(m, swap).ok);
}

TEST_CASE("group file round trip, including names with parentheses") {
    Grounding g = ground_template("smokers", 2);
    GeneratingSet gens = renaming_group(g);
    std::string text = to_group_file(gens, g.model);
    GeneratingSet back = parse_group_file(text, g.model);
    REQUIRE(back.generators.size() == gens.generators.size());
    CHECK(back.generators[0] == gens.generators[0]);
    CHECK(parse_group_file("", g.model).generators.empty());
    CHECK_THROWS_AS(parse_group_file("(smokes(A) nosuch(B))\n", g.model), GroupError);
}

TEST_CASE("group_closure of the two-constant renaming group") {
    FactorGraph m = fig1_model();
    auto closure = group_closure(fig1_group(m));
    CHECK(closure.size() == 2);  // identity and the swap
}
