#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace symdens {

// A joint assignment: one value index per variable, in variable-id order.
using Assignment = std::vector<int>;

struct Variable {
    int id = 0;
    std::string name;
    int cardinality = 2;
};

// One literal of a clause feature. A positive literal holds when the
// variable takes `value`; a negated one holds when it does not.
struct Literal {
    int var = 0;
    int value = 0;
    bool positive = true;
};

// Weighted ground clause: contributes `weight` (log-space) to log w(s)
// when the disjunction of its literals is satisfied.
struct ClauseFeature {
    double weight = 0.0;
    std::vector<Literal> literals;
};

// Dense potential table over a scope of one or two variables.
// Potentials are stored row-major (first scope variable is the slower index).
struct TableFactor {
    std::vector<int> scope;
    std::vector<double> potentials;
};

struct MarginalQuery {
    std::vector<int> vars;
    std::vector<int> target;
};

class ModelError : public std::runtime_error {
  public:
    explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

// Ground discrete log-linear model. Immutable after construction; all
// member functions are const and safe to call concurrently.
class FactorGraph {
  public:
    FactorGraph() = default;
    FactorGraph(std::vector<Variable> vars,
                std::vector<ClauseFeature> clauses,
                std::vector<TableFactor> tables,
                std::map<int, int> evidence);

    int num_vars() const { return static_cast<int>(vars_.size()); }
    const std::vector<Variable>& variables() const { return vars_; }
    const Variable& variable(int id) const { return vars_.at(static_cast<size_t>(id)); }
    const std::vector<ClauseFeature>& clauses() const { return clauses_; }
    const std::vector<TableFactor>& tables() const { return tables_; }
    const std::map<int, int>& evidence() const { return evidence_; }

    bool is_evidence(int var) const { return evidence_.count(var) > 0; }
    int evidence_value(int var) const { return evidence_.at(var); }
    const std::vector<int>& free_vars() const { return free_vars_; }

    // -1 if no variable has that name.
    int find_var(const std::string& name) const;

    bool valid_assignment(const Assignment& s) const;
    bool consistent_with_evidence(const Assignment& s) const;

    // log w(s); -inf iff some table potential on s is zero.
    // Throws ModelError if s is invalid or violates evidence.
    double log_weight(const Assignment& s) const;

    // Full conditional of variable v given the rest of s, computed from the
    // factors touching v only. Throws if v is evidence or every value of v
    // has zero weight.
    std::vector<double> gibbs_conditional(const Assignment& s, int v) const;

    // Unnormalized log-weights per value of v (the non-normalized form of
    // gibbs_conditional); entries may be -inf.
    std::vector<double> conditional_log_weights(const Assignment& s, int v) const;

    void validate_query(const MarginalQuery& q) const;
    static bool query_matches(const Assignment& s, const MarginalQuery& q);

  private:
    std::vector<Variable> vars_;
    std::vector<ClauseFeature> clauses_;
    std::vector<TableFactor> tables_;
    std::map<int, int> evidence_;
    std::vector<int> free_vars_;
    // Markov blanket indices: factors touching each variable.
    std::vector<std::vector<int>> clauses_of_var_;
    std::vector<std::vector<int>> tables_of_var_;
    std::map<std::string, int> name_index_;

    void validate() const;
    void build_index();
};

// Parses the line-oriented model format:
//   var <name> <cardinality>
//   feature <weight> <[!]name=value> ...
//   table <name1> <name2> <p...>       (card1*card2 potentials)
//   evidence <name> <value>
// '#' starts a comment. Throws ModelError with a line number on bad input.
FactorGraph parse_model(const std::string& text);

// Deterministic inverse of parse_model (round-trips through parse_model).
std::string to_model_text(const FactorGraph& model);

bool clause_satisfied(const ClauseFeature& c, const Assignment& s);

}  // namespace symdens
