// Command line for the congested-clique MIS lab: graph fixtures, single
// algorithm runs, set verification, and experiment suites.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ccmis/clique_mis.hpp"
#include "ccmis/experiment.hpp"
#include "ccmis/graph.hpp"
#include "ccmis/greedy.hpp"
#include "ccmis/verify.hpp"
#include "ccmis/version.hpp"

namespace {

ccmis::graph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open graph file: " + path);
    return ccmis::read_edge_list(in);
}

ccmis::vertex_subset load_set(const std::string& path, std::uint32_t n) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open set file: " + path);
    ccmis::vertex_subset s(n);
    ccmis::vertex_id v;
    while (in >> v) s.insert(v);
    return s;
}

struct tau_options {
    std::optional<double> fixed;
    std::optional<double> ln_exp;

    ccmis::degree_threshold resolve() const {
        if (fixed && ln_exp) throw CLI::ValidationError("--tau and --tau-ln-exp are exclusive");
        if (fixed) return ccmis::degree_threshold::fixed(*fixed);
        if (ln_exp) return ccmis::degree_threshold::ln_pow(*ln_exp);
        return ccmis::degree_threshold::ln_pow(4.0);
    }
};

void add_tau_flags(CLI::App* cmd, tau_options& tau) {
    cmd->add_option("--tau", tau.fixed, "fixed degree threshold ending the block phase");
    cmd->add_option("--tau-ln-exp", tau.ln_exp,
                    "threshold as ln(n)^e with this exponent (default e=4)");
}

int cmd_gen(const std::string& family, std::uint32_t n, double p, std::uint32_t d,
            std::uint64_t seed, const std::string& out) {
    ccmis::graph g;
    if (family == "gnp") g = ccmis::gnp_random(n, p, seed);
    else if (family == "regular") g = ccmis::random_regular(n, d, seed);
    else throw std::runtime_error("unknown family: " + family);
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot write " + out);
    ccmis::write_edge_list(os, g);
    std::cout << "wrote " << family << " graph: n=" << g.size() << " m=" << g.edge_count()
              << " -> " << out << "\n";
    return 0;
}

int cmd_run(const ccmis::graph& g, const ccmis::clique_mis_config& cfg,
            const std::string& json_out, const std::string& rounds_log,
            const std::string& trace_csv, const std::string& iterations_csv, bool quiet) {
    const ccmis::clique_mis_result res = ccmis::run_clique_mis(g, cfg);
    const ccmis::verify_result vr = ccmis::verify_mis(g, res.mis);
    const bool equivalent = ccmis::stage_selection_matches_greedy(g, res);
    const auto& st = res.stats;

    if (!quiet) {
        std::cout << "n=" << st.n << " m=" << st.m << " max_degree=" << st.initial_max_degree
                  << " tau=" << st.threshold_value << "\n";
        std::cout << "while_iterations=" << st.while_iterations << " k_final=" << st.k_final
                  << " final_delta=" << st.final_delta << "\n";
        for (const auto& it : st.iterations)
            std::cout << "  i=" << it.index << " delta=" << it.delta << " k=" << it.k
                      << " block_edges=" << it.block_edges << " selected=" << it.selected
                      << " rounds=" << it.rounds << " retries=" << it.fallback_retries << "\n";
        std::cout << "rounds: total=" << st.total_rounds << " (agreement=3, initial=1, stage2="
                  << st.rounds_stage2 << ", finisher=" << st.rounds_finisher << " ["
                  << st.luby_rounds << " finisher rounds; finisher is O(log n), reported"
                  << " separately from the block phase])\n";
        std::cout << "mis_size=" << res.mis.size() << " verify=" << (vr.ok ? "ok" : "FAIL")
                  << " prefix_equivalence=" << (equivalent ? "ok" : "FAIL")
                  << " rounds_formula=" << (st.total_rounds == st.formula_rounds ? "ok" : "FAIL")
                  << "\n";
    }

    if (!json_out.empty()) {
        nlohmann::json j;
        j["version"] = ccmis::version;
        j["stats"] = ccmis::stats_to_json(st);
        j["mis"] = res.mis.to_vector();
        j["verify_ok"] = vr.ok;
        j["equivalence_ok"] = equivalent;
        std::ofstream os(json_out);
        if (!os) throw std::runtime_error("cannot write " + json_out);
        os << j.dump(2) << '\n';
    }
    if (!rounds_log.empty()) {
        std::ofstream os(rounds_log);
        if (!os) throw std::runtime_error("cannot write " + rounds_log);
        ccmis::write_round_reports_jsonl(os, res.reports);
    }
    if (!trace_csv.empty()) {
        std::ofstream os(trace_csv);
        if (!os) throw std::runtime_error("cannot write " + trace_csv);
        ccmis::write_trace_csv(os, ccmis::greedy_mis(g, res.order));
    }
    if (!iterations_csv.empty()) {
        std::ofstream os(iterations_csv);
        if (!os) throw std::runtime_error("cannot write " + iterations_csv);
        os << ccmis::iterations_csv_header << '\n';
        ccmis::write_iteration_rows(os, cfg.seed, st);
    }
    return vr.ok && equivalent ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"congested-clique MIS simulation lab"};
    app.set_version_flag("--version", ccmis::version);
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a graph fixture (edge list)");
    std::string gen_family = "gnp", gen_out;
    std::uint32_t gen_n = 0, gen_d = 0;
    double gen_p = 0.0;
    std::uint64_t gen_seed = 1;
    gen->add_option("--family", gen_family, "gnp | regular")->capture_default_str();
    gen->add_option("--n", gen_n, "vertex count")->required();
    gen->add_option("--p", gen_p, "edge probability for gnp");
    gen->add_option("--d", gen_d, "degree for regular");
    gen->add_option("--seed", gen_seed, "generator seed")->capture_default_str();
    gen->add_option("--out", gen_out, "output edge-list file")->required();

    // run
    auto* run = app.add_subcommand("run", "single algorithm run with verification");
    std::string run_graph;
    std::uint32_t run_n = 0;
    double run_p = 0.0;
    std::uint64_t run_seed = 1, run_graph_seed = 0;
    bool run_has_graph_seed = false;
    tau_options run_tau;
    std::uint32_t run_C = 5, run_cL = 2, run_max_iters = 0;
    bool run_no_fallback = false, run_quiet = false, run_debug = false;
    std::string run_json, run_rounds_log, run_trace_csv, run_iterations_csv;
    run->add_option("--graph", run_graph, "edge-list file (otherwise a gnp graph is drawn)");
    run->add_option("--n", run_n, "gnp vertex count");
    run->add_option("--p", run_p, "gnp edge probability");
    run->add_option("--graph-seed", run_graph_seed, "gnp seed (defaults to --seed)")
        ->each([&](const std::string&) { run_has_graph_seed = true; });
    run->add_option("--seed", run_seed, "order/finisher seed")->capture_default_str();
    add_tau_flags(run, run_tau);
    run->add_option("--C", run_C, "block size constant")->capture_default_str();
    run->add_option("--cL", run_cL, "rounds charged per routing call")->capture_default_str();
    run->add_option("--max-iterations", run_max_iters, "safety cap (0 = n+8)");
    run->add_flag("--no-fallback", run_no_fallback, "disable adaptive block halving");
    run->add_flag("--debug-validate", run_debug, "cross-check node views every iteration");
    run->add_flag("--quiet", run_quiet, "suppress the summary");
    run->add_option("--json", run_json, "write stats JSON here");
    run->add_option("--rounds-log", run_rounds_log, "write round reports as JSON lines");
    run->add_option("--trace-csv", run_trace_csv, "write the sequential greedy trace CSV");
    run->add_option("--iterations-csv", run_iterations_csv, "write the per-iteration table CSV");

    // verify
    auto* verify = app.add_subcommand("verify", "check a vertex set against a graph");
    std::string verify_graph, verify_set;
    verify->add_option("--graph", verify_graph, "edge-list file")->required();
    verify->add_option("--set", verify_set, "whitespace-separated vertex ids")->required();

    // suite
    auto* suite = app.add_subcommand("suite", "run an experiment suite from a JSON spec");
    std::string suite_spec_file, suite_out, suite_seeds, suite_suites, suite_family;
    std::uint32_t suite_n = 0, suite_C = 0, suite_cL = 0;
    double suite_p = -1.0;
    tau_options suite_tau;
    suite->add_option("--spec", suite_spec_file, "JSON spec file (flags override it)");
    suite->add_option("--family", suite_family, "gnp | regular | file");
    suite->add_option("--n", suite_n, "vertex count override");
    suite->add_option("--p", suite_p, "gnp probability override");
    suite->add_option("--seeds", suite_seeds, "seed list, e.g. 1,2,9 or 1..20");
    add_tau_flags(suite, suite_tau);
    suite->add_option("--C", suite_C, "block size constant override");
    suite->add_option("--cL", suite_cL, "routing cost override");
    suite->add_option("--suite", suite_suites,
                      "comma list of sparsity,decay,edges,rounds,equivalence or all");
    suite->add_option("--out", suite_out, "output directory override");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen(gen_family, gen_n, gen_p, gen_d, gen_seed, gen_out);

        if (run->parsed()) {
            ccmis::graph g;
            if (!run_graph.empty()) g = load_graph(run_graph);
            else if (run_n > 0)
                g = ccmis::gnp_random(run_n, run_p,
                                      run_has_graph_seed ? run_graph_seed : run_seed);
            else throw std::runtime_error("run: provide --graph or --n/--p");
            ccmis::clique_mis_config cfg;
            cfg.C = run_C;
            cfg.threshold = run_tau.resolve();
            cfg.route_cost = run_cL;
            cfg.seed = run_seed;
            cfg.adaptive_k_fallback = !run_no_fallback;
            cfg.max_iterations = run_max_iters;
            cfg.debug_validate = run_debug;
            return cmd_run(g, cfg, run_json, run_rounds_log, run_trace_csv, run_iterations_csv,
                           run_quiet);
        }

        if (verify->parsed()) {
            const ccmis::graph g = load_graph(verify_graph);
            const ccmis::vertex_subset s = load_set(verify_set, g.size());
            const ccmis::verify_result vr = ccmis::verify_mis(g, s);
            if (vr.ok) {
                std::cout << "valid maximal independent set (" << s.size() << " vertices)\n";
                return 0;
            }
            std::cout << "INVALID: "
                      << (vr.kind == ccmis::verify_result::failure::dependent_edge
                              ? "edge {" + std::to_string(vr.a) + "," + std::to_string(vr.b) +
                                    "} has both endpoints in the set"
                              : "vertex " + std::to_string(vr.a) + " could still be added")
                      << "\n";
            return 1;
        }

        if (suite->parsed()) {
            ccmis::experiment_spec spec;
            if (!suite_spec_file.empty()) {
                std::ifstream in(suite_spec_file);
                if (!in) throw std::runtime_error("cannot open spec: " + suite_spec_file);
                nlohmann::json j;
                in >> j;
                spec = ccmis::spec_from_json(j);
            }
            if (!suite_family.empty()) spec.family = suite_family;
            if (suite_n > 0) spec.n = suite_n;
            if (suite_p >= 0.0) spec.p = suite_p;
            if (!suite_seeds.empty()) spec.seeds = ccmis::parse_seed_list(suite_seeds);
            if (suite_tau.fixed || suite_tau.ln_exp) spec.threshold = suite_tau.resolve();
            if (suite_C > 0) spec.C = suite_C;
            if (suite_cL > 0) spec.route_cost = suite_cL;
            if (!suite_suites.empty()) {
                spec.suites.clear();
                std::stringstream ss(suite_suites);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    if (item == "all") { spec.suites = ccmis::all_suites(); break; }
                    if (!item.empty()) spec.suites.push_back(ccmis::suite_from_name(item));
                }
            }
            if (!suite_out.empty()) spec.out_dir = suite_out;

            const ccmis::report rep = ccmis::run_suite(spec);
            if (!spec.out_dir.empty()) ccmis::write_report_files(rep, spec.out_dir);

            const auto& a = rep.aggregate;
            std::cout << "runs=" << a.runs << " aborted=" << a.aborted
                      << " verify_failures=" << a.verify_failures
                      << " equivalence_failures=" << a.equivalence_failures
                      << " rounds_mismatches=" << a.rounds_mismatches << "\n";
            std::cout << "sparsity_violations=" << a.sparsity_violations
                      << " decay_violations=" << a.decay_violations
                      << " progress_violations=" << a.progress_violations
                      << " fallback_trigger_runs=" << a.fallback_trigger_runs << "\n";
            std::cout << "max_while_iterations=" << a.max_while_iterations
                      << " max_rounds_finisher=" << a.max_rounds_finisher
                      << " config_hash=" << rep.config_hash << "\n";
            std::cout << (rep.hard_failure ? "HARD FAILURE" : "ok") << "\n";
            return rep.hard_failure ? 1 : 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
