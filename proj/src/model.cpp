#include "symdens/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace symdens {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double table_log_potential(const TableFactor& t, const Assignment& s,
                           const std::vector<Variable>& vars) {
    size_t idx = 0;
    for (int v : t.scope) {
        idx = idx * static_cast<size_t>(vars[static_cast<size_t>(v)].cardinality) +
              static_cast<size_t>(s[static_cast<size_t>(v)]);
    }
    double p = t.potentials[idx];
    return p > 0.0 ? std::log(p) : kNegInf;
}

std::string fmt_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

bool clause_satisfied(const ClauseFeature& c, const Assignment& s) {
    for (const Literal& l : c.literals) {
        bool eq = s[static_cast<size_t>(l.var)] == l.value;
        if (eq == l.positive) return true;
    }
    return false;
}

FactorGraph::FactorGraph(std::vector<Variable> vars,
                         std::vector<ClauseFeature> clauses,
                         std::vector<TableFactor> tables,
                         std::map<int, int> evidence)
    : vars_(std::move(vars)),
      clauses_(std::move(clauses)),
      tables_(std::move(tables)),
      evidence_(std::move(evidence)) {
    validate();
    build_index();
}

void FactorGraph::validate() const {
    for (size_t i = 0; i < vars_.size(); ++i) {
        const Variable& v = vars_[i];
        if (v.id != static_cast<int>(i))
            throw ModelError("variable ids must be contiguous 0..n-1");
        if (v.cardinality < 2)
            throw ModelError("variable '" + v.name + "' has cardinality < 2");
    }
    auto check_var = [&](int id) {
        if (id < 0 || id >= static_cast<int>(vars_.size()))
            throw ModelError("factor references unknown variable id " + std::to_string(id));
    };
    for (const ClauseFeature& c : clauses_) {
        if (c.literals.empty()) throw ModelError("clause feature with empty literal list");
        if (!std::isfinite(c.weight)) throw ModelError("non-finite clause weight");
        for (const Literal& l : c.literals) {
            check_var(l.var);
            if (l.value < 0 || l.value >= vars_[static_cast<size_t>(l.var)].cardinality)
                throw ModelError("literal value out of domain");
        }
    }
    for (const TableFactor& t : tables_) {
        if (t.scope.empty() || t.scope.size() > 2)
            throw ModelError("table factor scope must have 1 or 2 variables");
        size_t expect = 1;
        for (int v : t.scope) {
            check_var(v);
            expect *= static_cast<size_t>(vars_[static_cast<size_t>(v)].cardinality);
        }
        if (t.potentials.size() != expect)
            throw ModelError("table potential count mismatch");
        bool any_pos = false;
        for (double p : t.potentials) {
            if (!(p >= 0.0) || !std::isfinite(p)) throw ModelError("table potentials must be finite and >= 0");
            any_pos = any_pos || p > 0.0;
        }
        if (!any_pos) throw ModelError("table factor with all-zero potentials");
    }
    for (auto [v, val] : evidence_) {
        check_var(v);
        if (val < 0 || val >= vars_[static_cast<size_t>(v)].cardinality)
            throw ModelError("evidence value out of domain");
    }
}

void FactorGraph::build_index() {
    clauses_of_var_.assign(vars_.size(), {});
    tables_of_var_.assign(vars_.size(), {});
    for (size_t i = 0; i < clauses_.size(); ++i)
        for (const Literal& l : clauses_[i].literals) {
            auto& lst = clauses_of_var_[static_cast<size_t>(l.var)];
            if (lst.empty() || lst.back() != static_cast<int>(i)) lst.push_back(static_cast<int>(i));
        }
    for (size_t i = 0; i < tables_.size(); ++i)
        for (int v : tables_[i].scope) tables_of_var_[static_cast<size_t>(v)].push_back(static_cast<int>(i));
    for (const Variable& v : vars_) {
        if (name_index_.count(v.name)) throw ModelError("duplicate variable name '" + v.name + "'");
        name_index_[v.name] = v.id;
        if (!is_evidence(v.id)) free_vars_.push_back(v.id);
    }
}

int FactorGraph::find_var(const std::string& name) const {
    auto it = name_index_.find(name);
    return it == name_index_.end() ? -1 : it->second;
}

bool FactorGraph::valid_assignment(const Assignment& s) const {
    if (s.size() != vars_.size()) return false;
    for (size_t i = 0; i < s.size(); ++i)
        if (s[i] < 0 || s[i] >= vars_[i].cardinality) return false;
    return true;
}

bool FactorGraph::consistent_with_evidence(const Assignment& s) const {
    for (auto [v, val] : evidence_)
        if (s[static_cast<size_t>(v)] != val) return false;
    return true;
}

double FactorGraph::log_weight(const Assignment& s) const {
    if (!valid_assignment(s)) throw ModelError("invalid assignment");
    if (!consistent_with_evidence(s)) throw ModelError("assignment inconsistent with evidence");
    double lw = 0.0;
    for (const ClauseFeature& c : clauses_)
        if (clause_satisfied(c, s)) lw += c.weight;
    for (const TableFactor& t : tables_) {
        double lp = table_log_potential(t, s, vars_);
        if (lp == kNegInf) return kNegInf;
        lw += lp;
    }
    return lw;
}

std::vector<double> FactorGraph::conditional_log_weights(const Assignment& s, int v) const {
    if (v < 0 || v >= num_vars()) throw ModelError("unknown variable id");
    if (is_evidence(v)) throw ModelError("conditional requested for evidence variable");
    const int card = vars_[static_cast<size_t>(v)].cardinality;
    std::vector<double> lw(static_cast<size_t>(card), 0.0);
    Assignment tmp = s;
    for (int k = 0; k < card; ++k) {
        tmp[static_cast<size_t>(v)] = k;
        double acc = 0.0;
        for (int ci : clauses_of_var_[static_cast<size_t>(v)])
            if (clause_satisfied(clauses_[static_cast<size_t>(ci)], tmp))
                acc += clauses_[static_cast<size_t>(ci)].weight;
        for (int ti : tables_of_var_[static_cast<size_t>(v)]) {
            double lp = table_log_potential(tables_[static_cast<size_t>(ti)], tmp, vars_);
            if (lp == kNegInf) {
                acc = kNegInf;
                break;
            }
            acc += lp;
        }
        lw[static_cast<size_t>(k)] = acc;
    }
    return lw;
}

std::vector<double> FactorGraph::gibbs_conditional(const Assignment& s, int v) const {
    std::vector<double> lw = conditional_log_weights(s, v);
    double mx = kNegInf;
    for (double x : lw) mx = std::max(mx, x);
    if (mx == kNegInf)
        throw ModelError("all values of variable " + std::to_string(v) + " have zero weight");
    double z = 0.0;
    for (double& x : lw) {
        x = std::exp(x - mx);
        z += x;
    }
    for (double& x : lw) x /= z;
    return lw;
}

void FactorGraph::validate_query(const MarginalQuery& q) const {
    if (q.vars.empty() || q.vars.size() != q.target.size())
        throw ModelError("malformed marginal query");
    std::vector<int> sorted = q.vars;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw ModelError("query variables must be distinct");
    for (size_t i = 0; i < q.vars.size(); ++i) {
        int v = q.vars[i];
        if (v < 0 || v >= num_vars()) throw ModelError("query references unknown variable");
        if (is_evidence(v)) throw ModelError("query references evidence variable");
        if (q.target[i] < 0 || q.target[i] >= vars_[static_cast<size_t>(v)].cardinality)
            throw ModelError("query target out of domain");
    }
}

bool FactorGraph::query_matches(const Assignment& s, const MarginalQuery& q) {
    for (size_t i = 0; i < q.vars.size(); ++i)
        if (s[static_cast<size_t>(q.vars[i])] != q.target[i]) return false;
    return true;
}

namespace {

struct Parser {
    const FactorGraph* dummy = nullptr;
    std::vector<Variable> vars;
    std::vector<ClauseFeature> clauses;
    std::vector<TableFactor> tables;
    std::map<int, int> evidence;
    std::map<std::string, int> names;
    int line_no = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ModelError("line " + std::to_string(line_no) + ": " + msg);
    }

    int lookup(const std::string& name) const {
        auto it = names.find(name);
        if (it == names.end()) fail("unknown variable '" + name + "'");
        return it->second;
    }

    double parse_number(const std::string& tok) const {
        size_t pos = 0;
        double x;
        try {
            x = std::stod(tok, &pos);
        } catch (const std::exception&) {
            fail("expected a number, got '" + tok + "'");
        }
        if (pos != tok.size()) fail("trailing junk in number '" + tok + "'");
        return x;
    }

    int parse_int(const std::string& tok) const {
        size_t pos = 0;
        long x;
        try {
            x = std::stol(tok, &pos);
        } catch (const std::exception&) {
            fail("expected an integer, got '" + tok + "'");
        }
        if (pos != tok.size()) fail("trailing junk in integer '" + tok + "'");
        return static_cast<int>(x);
    }

    void handle(const std::vector<std::string>& tok) {
        const std::string& kw = tok[0];
        if (kw == "var") {
            if (tok.size() != 3) fail("expected: var <name> <cardinality>");
            if (names.count(tok[1])) fail("duplicate variable '" + tok[1] + "'");
            int card = parse_int(tok[2]);
            if (card < 2) fail("cardinality must be >= 2");
            int id = static_cast<int>(vars.size());
            vars.push_back({id, tok[1], card});
            names[tok[1]] = id;
        } else if (kw == "feature") {
            if (tok.size() < 3) fail("expected: feature <weight> <literal> ...");
            ClauseFeature c;
            c.weight = parse_number(tok[1]);
            if (!std::isfinite(c.weight)) fail("non-finite feature weight");
            for (size_t i = 2; i < tok.size(); ++i) {
                std::string t = tok[i];
                Literal l;
                if (!t.empty() && t[0] == '!') {
                    l.positive = false;
                    t = t.substr(1);
                }
                size_t eq = t.rfind('=');
                if (eq == std::string::npos || eq == 0 || eq + 1 == t.size())
                    fail("malformed literal '" + tok[i] + "'");
                l.var = lookup(t.substr(0, eq));
                l.value = parse_int(t.substr(eq + 1));
                if (l.value < 0 || l.value >= vars[static_cast<size_t>(l.var)].cardinality)
                    fail("literal value out of domain in '" + tok[i] + "'");
                c.literals.push_back(l);
            }
            clauses.push_back(std::move(c));
        } else if (kw == "table") {
            if (tok.size() < 4) fail("expected: table <name1> <name2> <potentials...>");
            TableFactor t;
            t.scope = {lookup(tok[1]), lookup(tok[2])};
            size_t expect = static_cast<size_t>(vars[static_cast<size_t>(t.scope[0])].cardinality) *
                            static_cast<size_t>(vars[static_cast<size_t>(t.scope[1])].cardinality);
            if (tok.size() - 3 != expect)
                fail("expected " + std::to_string(expect) + " potentials, got " +
                     std::to_string(tok.size() - 3));
            for (size_t i = 3; i < tok.size(); ++i) {
                double p = parse_number(tok[i]);
                if (!(p >= 0.0) || !std::isfinite(p)) fail("potentials must be finite and >= 0");
                t.potentials.push_back(p);
            }
            tables.push_back(std::move(t));
        } else if (kw == "evidence") {
            if (tok.size() != 3) fail("expected: evidence <name> <value>");
            int v = lookup(tok[1]);
            int val = parse_int(tok[2]);
            if (val < 0 || val >= vars[static_cast<size_t>(v)].cardinality)
                fail("evidence value out of domain");
            evidence[v] = val;
        } else {
            fail("unknown directive '" + kw + "'");
        }
    }
};

}  // namespace

FactorGraph parse_model(const std::string& text) {
    Parser p;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        ++p.line_no;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::vector<std::string> tok;
        std::string t;
        while (ls >> t) tok.push_back(t);
        if (tok.empty()) continue;
        p.handle(tok);
    }
    try {
        return FactorGraph(std::move(p.vars), std::move(p.clauses), std::move(p.tables),
                           std::move(p.evidence));
    } catch (const ModelError& e) {
        throw ModelError(std::string("model validation: ") + e.what());
    }
}

std::string to_model_text(const FactorGraph& model) {
    std::string out;
    for (const Variable& v : model.variables())
        out += "var " + v.name + " " + std::to_string(v.cardinality) + "\n";
    for (const ClauseFeature& c : model.clauses()) {
        out += "feature " + fmt_double(c.weight);
        for (const Literal& l : c.literals) {
            out += ' ';
            if (!l.positive) out += '!';
            out += model.variable(l.var).name + "=" + std::to_string(l.value);
        }
        out += '\n';
    }
    for (const TableFactor& t : model.tables()) {
        out += "table";
        for (int v : t.scope) out += ' ' + model.variable(v).name;
        for (double p : t.potentials) out += ' ' + fmt_double(p);
        out += '\n';
    }
    for (auto [v, val] : model.evidence())
        out += "evidence " + model.variable(v).name + " " + std::to_string(val) + "\n";
    return out;
}

}  // namespace symdens
