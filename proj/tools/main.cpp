// symdens: marginal density estimation in symmetric discrete log-linear
// models. Subcommands: generate, sample, estimate, exact, analyze, bench.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "symdens/bench.hpp"
#include "symdens/estimator.hpp"
#include "symdens/exact.hpp"
#include "symdens/grounding.hpp"
#include "symdens/group.hpp"
#include "symdens/model.hpp"
#include "symdens/sampler.hpp"

namespace {

using namespace symdens;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty())
        std::cout << content;
    else
        write_file(out_path, content);
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

std::vector<long> parse_longs(const std::string& csv) {
    std::vector<long> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stol(tok));
    return out;
}

std::vector<double> parse_doubles(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

std::vector<int> parse_ints(const std::string& csv) {
    std::vector<int> out;
    for (long x : parse_longs(csv)) out.push_back(static_cast<int>(x));
    return out;
}

MarginalQuery parse_query(const FactorGraph& model, const std::vector<std::string>& atoms) {
    MarginalQuery q;
    for (const std::string& a : atoms) {
        size_t eq = a.rfind('=');
        if (eq == std::string::npos) throw std::runtime_error("malformed query atom '" + a + "'");
        int v = model.find_var(a.substr(0, eq));
        if (v < 0) throw std::runtime_error("unknown variable in query: '" + a + "'");
        q.vars.push_back(v);
        q.target.push_back(std::stoi(a.substr(eq + 1)));
    }
    model.validate_query(q);
    return q;
}

std::string query_to_string(const FactorGraph& model, const MarginalQuery& q) {
    std::string s;
    for (size_t i = 0; i < q.vars.size(); ++i) {
        if (i) s += ' ';
        s += model.variable(q.vars[i]).name + "=" + std::to_string(q.target[i]);
    }
    return s;
}

TemplateWeights weights_from_csv(const std::string& csv) {
    TemplateWeights w;
    if (csv.empty()) return w;
    std::vector<double> v = parse_doubles(csv);
    if (v.size() > 0) w.smokes_bias = v[0];
    if (v.size() > 1) w.smokes_cancer = v[1];
    if (v.size() > 2) w.friends_smokes = v[2];
    if (v.size() > 3) w.transitivity = v[3];
    if (v.size() > 4) w.asthma_smokes = v[4];
    if (v.size() > 5) w.asthma_friends = v[5];
    return w;
}

// Per-variable marginals file: <name> <p0> <p1> ... one line per variable.
std::vector<std::vector<double>> parse_truth_file(const std::string& text,
                                                  const FactorGraph& model) {
    std::vector<std::vector<double>> truth(static_cast<size_t>(model.num_vars()));
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string name;
        ls >> name;
        int v = model.find_var(name);
        if (v < 0) throw std::runtime_error("truth file references unknown variable '" + name + "'");
        double p;
        while (ls >> p) truth[static_cast<size_t>(v)].push_back(p);
    }
    return truth;
}

int cmd_generate(const std::string& tmpl, int domain, const std::string& weights_csv,
                 double evidence_frac, uint64_t seed, const std::string& grid,
                 double grid_weight, bool grid_hard, const std::string& out_model,
                 const std::string& out_group) {
    if (!grid.empty()) {
        size_t x = grid.find('x');
        if (x == std::string::npos) throw std::runtime_error("grid must look like ROWSxCOLS");
        int rows = std::stoi(grid.substr(0, x));
        int cols = std::stoi(grid.substr(x + 1));
        FactorGraph model =
            make_grid_model(rows, cols, grid_hard ? GridMode::Hard : GridMode::Soft, grid_weight);
        emit(out_model, to_model_text(model));
        if (!out_group.empty())
            write_file(out_group, to_group_file(grid_symmetry_generators(rows, cols), model));
        return 0;
    }
    TemplateWeights w = weights_from_csv(weights_csv);
    EvidenceSpec ev;
    if (evidence_frac > 0.0) ev = percent_evidence(domain, evidence_frac, seed);
    Grounding g = ground_template(tmpl, domain, w, ev);
    emit(out_model, to_model_text(g.model));
    if (!out_group.empty()) write_file(out_group, to_group_file(renaming_group(g), g.model));
    return 0;
}

int cmd_sample(const std::string& model_path, SamplerConfig cfg, const std::string& out) {
    FactorGraph model = parse_model(read_file(model_path));
    std::string dump = dump_header(model);
    run_chain(model, cfg, [&](int, const Assignment& s) { dump += dump_sample(s); });
    emit(out, dump);
    return 0;
}

int cmd_estimate(const std::string& model_path, const std::string& group_path,
                 const std::vector<std::string>& query_atoms, const std::string& estimator,
                 SamplerConfig cfg, const std::string& from_dump, const std::string& out) {
    FactorGraph model = parse_model(read_file(model_path));
    GeneratingSet group{model.num_vars(), {}};
    if (!group_path.empty()) group = parse_group_file(read_file(group_path), model);
    MarginalQuery q = parse_query(model, query_atoms);

    bool want_std = estimator == "standard" || estimator == "both";
    bool want_rb = estimator == "rb" || estimator == "both";
    if (!want_std && !want_rb) throw std::runtime_error("estimator must be standard|rb|both");

    std::vector<EstimateAccumulator> accs;
    if (want_std) accs.push_back(EstimateAccumulator::standard(q));
    if (want_rb) {
        auto orbit = std::make_shared<SequenceOrbit>(orbit_of_sequence(group, q.vars));
        accs.push_back(EstimateAccumulator::rao_blackwell(q, orbit));
    }
    if (!from_dump.empty()) {
        for (const Assignment& s : parse_dump(read_file(from_dump), model))
            for (auto& acc : accs) acc.add(s);
    } else {
        run_chain(model, cfg, [&](int, const Assignment& s) {
            for (auto& acc : accs) acc.add(s);
        });
    }
    std::string csv = "query,estimator,N,estimate\n";
    for (const auto& acc : accs) {
        csv += "\"" + query_to_string(model, q) + "\",";
        csv += acc.kind() == EstimatorKind::Standard ? "standard," : "rb,";
        csv += std::to_string(acc.count()) + "," + fmt(acc.estimate()) + "\n";
    }
    emit(out, csv);
    return 0;
}

int cmd_exact(const std::string& model_path, const std::vector<std::string>& query_atoms,
              const std::string& out) {
    FactorGraph model = parse_model(read_file(model_path));
    std::string text;
    if (!query_atoms.empty()) {
        MarginalQuery q = parse_query(model, query_atoms);
        text = "\"" + query_to_string(model, q) + "\" " + fmt(exact_marginal(model, q)) + "\n";
    } else {
        auto marg = exact_variable_marginals(model);
        for (int v : model.free_vars()) {
            text += model.variable(v).name;
            for (double p : marg[static_cast<size_t>(v)]) text += ' ' + fmt(p);
            text += '\n';
        }
    }
    emit(out, text);
    return 0;
}

int cmd_analyze(const std::string& model_path, const std::string& group_path,
                const std::string& eps_csv, const std::vector<std::string>& query_atoms,
                const std::string& out) {
    FactorGraph model = parse_model(read_file(model_path));
    GeneratingSet group = parse_group_file(read_file(group_path), model);
    std::vector<double> eps_list = parse_doubles(eps_csv);

    std::ostringstream rep;
    StateSpace space(model);
    OrbitPartition part = orbit_partition(group, model);
    rep << "states " << space.count() << "\n";
    rep << "orbits " << part.count << "\n";

    TransitionMatrix q = build_gibbs_transition_matrix(model);
    std::vector<double> pi = chain_stationary(model, q);
    RestrictedPartition rpart = restrict_partition(part, q);
    LumpabilityVerdict verdict = lumpability_check(q, rpart, pi);
    rep << "support_states " << q.size() << "\n";
    rep << "ordinary_lumpable " << (verdict.ordinary ? 1 : 0) << " residual "
        << fmt(verdict.ordinary_residual) << "\n";
    rep << "exactly_lumpable " << (verdict.exact ? 1 : 0) << " pi_spread "
        << fmt(verdict.stationary_residual) << "\n";

    rep << "eps,tau,tau_quotient\n";
    for (const MixingRow& row : compare_mixing(q, rpart, pi, eps_list))
        rep << fmt(row.eps) << ',' << row.tau << ',' << row.tau_quotient << '\n';

    if (!query_atoms.empty()) {
        MarginalQuery query = parse_query(model, query_atoms);
        rep << "eps,burn_in,tau_quotient,bias_abs,within_bound\n";
        for (double eps : eps_list) {
            BiasCheckResult bias =
                bias_bound_check(model, group, query, eps, /*burn_in=*/-1, kMaxChainStates);
            // burn_in < 0 requests T = tau'(eps).
            rep << fmt(eps) << ',' << bias.burn_in << ',' << bias.tau_quotient << ','
                << fmt(bias.bias_abs) << ',' << (bias.bias_abs <= eps ? 1 : 0) << '\n';
        }
    }
    emit(out, rep.str());
    return 0;
}

int cmd_bench(const std::string& model_path, const std::string& group_path,
              const std::string& tmpl, int domain, const std::string& weights_csv,
              const std::string& checkpoints_csv, int runs, uint64_t seed, long burn_in,
              long thin, const std::string& truth_path, const std::string& out,
              const std::string& domains_csv, double target_kl) {
    TemplateWeights w = weights_from_csv(weights_csv);
    std::vector<long> checkpoints = parse_longs(checkpoints_csv);

    if (!domains_csv.empty()) {
        auto rows = domain_scaling(tmpl, parse_ints(domains_csv), target_kl, checkpoints, runs,
                                   seed, w);
        emit(out, to_csv(rows));
        return 0;
    }

    FactorGraph model;
    GeneratingSet group;
    std::vector<std::vector<double>> truth;
    if (!model_path.empty()) {
        model = parse_model(read_file(model_path));
        group = group_path.empty() ? GeneratingSet{model.num_vars(), {}}
                                   : parse_group_file(read_file(group_path), model);
    } else {
        Grounding g = ground_template(tmpl, domain, w);
        model = g.model;
        group = renaming_group(g);
    }
    if (!truth_path.empty())
        truth = parse_truth_file(read_file(truth_path), model);
    else if (model_path.empty() && (tmpl == "smokers" || tmpl == "smokers+transitivity"))
        truth = smokers_reference_marginals(tmpl, domain, w);
    else
        truth = exact_variable_marginals(model);

    BenchmarkSpec spec;
    spec.model = &model;
    spec.group = &group;
    spec.truth = &truth;
    spec.checkpoints = checkpoints;
    spec.runs = runs;
    spec.seed = seed;
    spec.burn_in = burn_in;
    spec.thinning = thin;
    emit(out, to_csv(run_benchmark(spec)));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Symmetry-aware marginal density estimation toolkit"};
    app.require_subcommand(1);

    std::string model_path, group_path, out, tmpl = "smokers", weights_csv, grid;
    std::string from_dump, truth_path, eps_csv = "0.25,0.1,0.01";
    std::string checkpoints_csv = "100,1000,10000", domains_csv, estimator = "both";
    std::vector<std::string> query_atoms;
    int domain = 2, runs = 1;
    uint64_t seed = 0;
    long samples = 1000, burn_in = 0, thin = 1;
    int chains = 1;
    double evidence_frac = 0.0, grid_weight = 0.2, target_kl = 1e-3;
    bool grid_hard = false;
    std::string out_model, out_group;

    auto* gen = app.add_subcommand("generate", "emit model and group files");
    gen->add_option("--template", tmpl, "smokers|smokers+transitivity|asthma-lite");
    gen->add_option("--domain", domain, "number of constants");
    gen->add_option("--weights", weights_csv, "per-formula weights, comma separated");
    gen->add_option("--evidence-frac", evidence_frac, "fraction of observed people");
    gen->add_option("--seed", seed);
    gen->add_option("--grid", grid, "ROWSxCOLS 2-coloring grid instead of a template");
    gen->add_option("--grid-weight", grid_weight);
    gen->add_flag("--grid-hard", grid_hard);
    gen->add_option("--out", out_model, "model file path (stdout when omitted)");
    gen->add_option("--out-group", out_group, "group file path");

    auto* smp = app.add_subcommand("sample", "run the Gibbs sampler, dump raw samples");
    smp->add_option("--model", model_path)->required();
    smp->add_option("--samples", samples);
    smp->add_option("--burnin", burn_in);
    smp->add_option("--thin", thin);
    smp->add_option("--seed", seed);
    smp->add_option("--chains", chains);
    smp->add_option("--out", out);

    auto* est = app.add_subcommand("estimate", "estimate a marginal density");
    est->add_option("--model", model_path)->required();
    est->add_option("--group", group_path);
    est->add_option("--query", query_atoms, "atom=value (repeatable)")->required();
    est->add_option("--estimator", estimator, "standard|rb|both");
    est->add_option("--samples", samples);
    est->add_option("--burnin", burn_in);
    est->add_option("--thin", thin);
    est->add_option("--seed", seed);
    est->add_option("--chains", chains);
    est->add_option("--from-dump", from_dump, "read samples from a dump file");
    est->add_option("--out", out);

    auto* exa = app.add_subcommand("exact", "exact marginals by enumeration");
    exa->add_option("--model", model_path)->required();
    exa->add_option("--query", query_atoms, "atom=value (repeatable)");
    exa->add_option("--out", out);

    auto* ana = app.add_subcommand("analyze", "orbit/lumpability/mixing report");
    ana->add_option("--model", model_path)->required();
    ana->add_option("--group", group_path)->required();
    ana->add_option("--eps", eps_csv, "epsilon list");
    ana->add_option("--query", query_atoms, "atom=value for the bias check (repeatable)");
    ana->add_option("--out", out);

    auto* ben = app.add_subcommand("bench", "KL-vs-samples benchmark / domain scaling");
    ben->add_option("--model", model_path);
    ben->add_option("--group", group_path);
    ben->add_option("--template", tmpl);
    ben->add_option("--domain", domain);
    ben->add_option("--weights", weights_csv);
    ben->add_option("--checkpoints", checkpoints_csv);
    ben->add_option("--runs", runs);
    ben->add_option("--seed", seed);
    ben->add_option("--burnin", burn_in);
    ben->add_option("--thin", thin);
    ben->add_option("--truth", truth_path, "reference per-variable marginals file");
    ben->add_option("--domains", domains_csv, "domain-scaling mode: comma separated sizes");
    ben->add_option("--target-kl", target_kl);
    ben->add_option("--out", out);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed())
            return cmd_generate(tmpl, domain, weights_csv, evidence_frac, seed, grid, grid_weight,
                                grid_hard, out_model, out_group);
        if (smp->parsed()) {
            SamplerConfig cfg{burn_in, samples, seed, chains, SamplerConfig::Scan::Random, thin};
            return cmd_sample(model_path, cfg, out);
        }
        if (est->parsed()) {
            SamplerConfig cfg{burn_in, samples, seed, chains, SamplerConfig::Scan::Random, thin};
            return cmd_estimate(model_path, group_path, query_atoms, estimator, cfg, from_dump,
                                out);
        }
        if (exa->parsed()) return cmd_exact(model_path, query_atoms, out);
        if (ana->parsed()) return cmd_analyze(model_path, group_path, eps_csv, query_atoms, out);
        if (ben->parsed())
            return cmd_bench(model_path, group_path, tmpl, domain, weights_csv, checkpoints_csv,
                             runs, seed, burn_in, thin, truth_path, out, domains_csv, target_kl);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
