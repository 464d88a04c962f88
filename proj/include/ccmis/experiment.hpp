#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ccmis/clique_mis.hpp"
#include "ccmis/graph.hpp"
#include "ccmis/greedy.hpp"
#include "ccmis/luby.hpp"
#include "ccmis/order.hpp"
#include "ccmis/verify.hpp"
#include "ccmis/version.hpp"

namespace ccmis {

// Experiment harness: declarative specs, seed-parallel execution, bound
// bookkeeping, and CSV/JSON emission. Every run is reproducible from the
// spec alone; there is no ambient randomness and reports carry no
// timestamps.

enum class suite_kind : std::uint8_t { sparsity, decay, edges, rounds, equivalence };

inline const char* suite_name(suite_kind s) {
    switch (s) {
        case suite_kind::sparsity: return "sparsity";
        case suite_kind::decay: return "decay";
        case suite_kind::edges: return "edges";
        case suite_kind::rounds: return "rounds";
        case suite_kind::equivalence: return "equivalence";
    }
    return "?";
}

inline suite_kind suite_from_name(const std::string& name) {
    for (suite_kind s : {suite_kind::sparsity, suite_kind::decay, suite_kind::edges,
                         suite_kind::rounds, suite_kind::equivalence})
        if (name == suite_name(s)) return s;
    throw std::invalid_argument("unknown suite: " + name);
}

inline std::vector<suite_kind> all_suites() {
    return {suite_kind::sparsity, suite_kind::decay, suite_kind::edges, suite_kind::rounds,
            suite_kind::equivalence};
}

struct experiment_spec {
    std::string family = "gnp";  // gnp | regular | file
    std::uint32_t n = 0;
    double p = 0.0;
    std::uint32_t d = 0;
    std::string graph_file;
    std::vector<std::uint64_t> seeds;
    degree_threshold threshold = degree_threshold::ln_pow(4.0);
    std::uint32_t C = 5;
    std::uint32_t route_cost = 2;
    bool adaptive_k_fallback = true;
    std::uint32_t max_iterations = 0;
    std::vector<suite_kind> suites = all_suites();
    std::string out_dir;
};

inline nlohmann::json spec_to_json(const experiment_spec& s) {
    nlohmann::json j;
    j["family"] = s.family;
    j["n"] = s.n;
    if (s.family == "gnp") j["p"] = s.p;
    if (s.family == "regular") j["d"] = s.d;
    if (s.family == "file") j["graph_file"] = s.graph_file;
    j["seeds"] = s.seeds;
    if (s.threshold.mode == degree_threshold::kind::fixed) j["tau"] = s.threshold.value;
    else j["tau"] = {{"ln_exp", s.threshold.value}};
    j["C"] = s.C;
    j["cL"] = s.route_cost;
    j["adaptive_k_fallback"] = s.adaptive_k_fallback;
    j["max_iterations"] = s.max_iterations;
    auto names = nlohmann::json::array();
    for (suite_kind k : s.suites) names.push_back(suite_name(k));
    j["suites"] = names;
    j["out_dir"] = s.out_dir;
    return j;
}

inline experiment_spec spec_from_json(const nlohmann::json& j) {
    experiment_spec s;
    s.family = j.value("family", std::string("gnp"));
    if (s.family != "gnp" && s.family != "regular" && s.family != "file")
        throw std::invalid_argument("spec: unknown family " + s.family);
    s.n = j.value("n", 0u);
    s.p = j.value("p", 0.0);
    s.d = j.value("d", 0u);
    s.graph_file = j.value("graph_file", std::string());
    if (j.contains("seeds")) s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("tau")) {
        const auto& t = j.at("tau");
        if (t.is_object()) s.threshold = degree_threshold::ln_pow(t.at("ln_exp").get<double>());
        else s.threshold = degree_threshold::fixed(t.get<double>());
    }
    s.C = j.value("C", 5u);
    s.route_cost = j.value("cL", 2u);
    s.adaptive_k_fallback = j.value("adaptive_k_fallback", true);
    s.max_iterations = j.value("max_iterations", 0u);
    if (j.contains("suites")) {
        s.suites.clear();
        for (const auto& name : j.at("suites")) {
            if (name.get<std::string>() == "all") { s.suites = all_suites(); break; }
            s.suites.push_back(suite_from_name(name.get<std::string>()));
        }
    }
    s.out_dir = j.value("out_dir", std::string());
    return s;
}

inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

/// Everything observed in one seeded run.
struct run_record {
    std::uint64_t seed = 0;
    bool aborted = false;
    std::string error;
    std::uint32_t n = 0;
    std::uint64_t m = 0;
    std::uint32_t mis_size = 0;
    bool verify_ok = false;
    std::string verify_witness;
    bool equivalence_ok = true;
    bool rounds_match = true;
    std::uint32_t sparsity_violations = 0;
    std::uint32_t decay_violations = 0;
    std::uint32_t progress_violations = 0;  // consecutive residual degrees failing strict decay
    clique_mis_stats stats;
    std::vector<std::uint32_t> luby_active_curve;
    // full sparsity curve for csv/plots, kept only when the suite runs
    std::vector<std::uint32_t> trace_uncovered;
    std::vector<std::uint32_t> trace_max_degree;
};

struct report_aggregate {
    std::uint32_t runs = 0;
    std::uint32_t aborted = 0;
    std::uint32_t verify_failures = 0;
    std::uint32_t equivalence_failures = 0;
    std::uint32_t rounds_mismatches = 0;
    std::uint64_t sparsity_violations = 0;
    std::uint64_t decay_violations = 0;
    std::uint64_t progress_violations = 0;
    std::uint32_t fallback_trigger_runs = 0;
    std::uint64_t fallback_retries = 0;
    std::uint32_t max_while_iterations = 0;
    std::uint64_t max_rounds_finisher = 0;
};

struct report {
    std::string version = ccmis::version;
    std::uint64_t config_hash = 0;
    experiment_spec spec;
    std::vector<run_record> runs;
    report_aggregate aggregate;
    bool hard_failure = false;  // validity, audit/routing aborts, or equivalence
};

inline bool suite_enabled(const experiment_spec& s, suite_kind k) {
    for (suite_kind x : s.suites)
        if (x == k) return true;
    return false;
}

namespace detail {

inline graph make_graph(const experiment_spec& spec, std::uint64_t seed, const graph* fixture) {
    if (spec.family == "file") return *fixture;
    if (spec.family == "gnp") return gnp_random(spec.n, spec.p, seed);
    return random_regular(spec.n, spec.d, seed);
}

inline std::string witness_text(const verify_result& r) {
    switch (r.kind) {
        case verify_result::failure::dependent_edge:
            return "edge {" + std::to_string(r.a) + "," + std::to_string(r.b) + "} inside set";
        case verify_result::failure::extendable_vertex:
            return "vertex " + std::to_string(r.a) + " could be added";
        default: return "";
    }
}

inline run_record execute_run(const experiment_spec& spec, std::uint64_t seed,
                              const graph* fixture) {
    run_record rec;
    rec.seed = seed;
    const graph g = make_graph(spec, seed, fixture);
    rec.n = g.size();
    rec.m = g.edge_count();

    clique_mis_config cfg;
    cfg.C = spec.C;
    cfg.threshold = spec.threshold;
    cfg.route_cost = spec.route_cost;
    cfg.seed = seed;
    cfg.adaptive_k_fallback = spec.adaptive_k_fallback;
    cfg.max_iterations = spec.max_iterations;

    try {
        const clique_mis_result res = run_clique_mis(g, cfg);
        rec.stats = res.stats;
        rec.luby_active_curve = res.luby_active_curve;
        rec.mis_size = res.mis.size();

        const verify_result vr = verify_mis(g, res.mis);
        rec.verify_ok = vr.ok;
        rec.verify_witness = witness_text(vr);

        if (suite_enabled(spec, suite_kind::equivalence))
            rec.equivalence_ok = stage_selection_matches_greedy(g, res);

        if (suite_enabled(spec, suite_kind::rounds))
            rec.rounds_match = rec.stats.total_rounds == rec.stats.formula_rounds;

        if (suite_enabled(spec, suite_kind::decay)) {
            std::uint32_t prev = 0;
            bool have_prev = false;
            for (const iteration_stats& it : rec.stats.iterations) {
                if (!it.decay_ok) ++rec.decay_violations;
                if (have_prev && it.delta >= prev) ++rec.progress_violations;
                prev = it.delta;
                have_prev = true;
            }
            if (have_prev && rec.stats.final_delta >= prev) ++rec.progress_violations;
        }

        if (suite_enabled(spec, suite_kind::sparsity)) {
            const greedy_trace trace = greedy_mis(g, res.order);
            rec.sparsity_violations =
                static_cast<std::uint32_t>(check_residual_sparsity(trace, g.size()).size());
            rec.trace_uncovered = trace.uncovered_count;
            rec.trace_max_degree = trace.max_residual_degree;
        }
    } catch (const std::exception& e) {
        rec.aborted = true;
        rec.error = e.what();
    }
    return rec;
}

}  // namespace detail

/// Executes every seed (in parallel when hardware allows), aggregates, and
/// fills the hard-failure verdict. Deterministic: records are ordered by the
/// spec's seed list.
inline report run_suite(const experiment_spec& spec) {
    report rep;
    rep.spec = spec;
    rep.config_hash = fnv1a64(spec_to_json(spec).dump());

    graph fixture;
    if (spec.family == "file") {
        std::ifstream in(spec.graph_file);
        if (!in) throw std::runtime_error("cannot open graph file: " + spec.graph_file);
        fixture = read_edge_list(in);
    }

    rep.runs.resize(spec.seeds.size());
    const unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                             spec.seeds.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < spec.seeds.size(); ++i)
            rep.runs[i] = detail::execute_run(spec, spec.seeds[i], &fixture);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < spec.seeds.size();
                     i = next.fetch_add(1))
                    rep.runs[i] = detail::execute_run(spec, spec.seeds[i], &fixture);
            });
        for (auto& t : pool) t.join();
    }

    report_aggregate& agg = rep.aggregate;
    agg.runs = static_cast<std::uint32_t>(rep.runs.size());
    for (const run_record& r : rep.runs) {
        agg.aborted += r.aborted;
        if (!r.aborted) {
            agg.verify_failures += !r.verify_ok;
            agg.equivalence_failures += !r.equivalence_ok;
            agg.rounds_mismatches += !r.rounds_match;
            agg.sparsity_violations += r.sparsity_violations;
            agg.decay_violations += r.decay_violations;
            agg.progress_violations += r.progress_violations;
            agg.fallback_trigger_runs += r.stats.fallback_triggers > 0;
            agg.fallback_retries += r.stats.total_fallback_retries;
            agg.max_while_iterations = std::max(agg.max_while_iterations,
                                                r.stats.while_iterations);
            agg.max_rounds_finisher = std::max(agg.max_rounds_finisher,
                                               r.stats.rounds_finisher);
        }
    }
    rep.hard_failure =
        agg.aborted > 0 || agg.verify_failures > 0 || agg.equivalence_failures > 0;
    return rep;
}

inline nlohmann::json iteration_to_json(const iteration_stats& it) {
    return {{"i", it.index},        {"delta", it.delta},
            {"k", it.k},            {"k_formula", it.k_formula},
            {"block_edges", it.block_edges},
            {"selected", it.selected},
            {"rounds", it.rounds},  {"fallback_retries", it.fallback_retries},
            {"decay_bound", it.decay_bound},
            {"decay_ok", it.decay_ok},
            {"edge_budget_ok", it.edge_budget_ok},
            {"max_block_degree", it.max_block_degree},
            {"vertex_budget", it.vertex_budget}};
}

inline nlohmann::json stats_to_json(const clique_mis_stats& st) {
    nlohmann::json j;
    j["n"] = st.n;
    j["m"] = st.m;
    j["initial_max_degree"] = st.initial_max_degree;
    j["threshold"] = st.threshold_value;
    j["while_iterations"] = st.while_iterations;
    j["k_final"] = st.k_final;
    j["final_delta"] = st.final_delta;
    j["rounds"] = {{"order_agreement", st.rounds_order_agreement},
                   {"initial_broadcast", st.rounds_initial_broadcast},
                   {"stage2", st.rounds_stage2},
                   {"finisher", st.rounds_finisher},
                   {"total", st.total_rounds},
                   {"formula", st.formula_rounds}};
    j["luby_rounds"] = st.luby_rounds;
    j["fallback_triggers"] = st.fallback_triggers;
    j["total_fallback_retries"] = st.total_fallback_retries;
    auto arr = nlohmann::json::array();
    for (const iteration_stats& it : st.iterations) arr.push_back(iteration_to_json(it));
    j["iterations"] = arr;
    return j;
}

inline nlohmann::json report_to_json(const report& rep) {
    nlohmann::json j;
    j["version"] = rep.version;
    j["config_hash"] = rep.config_hash;
    j["spec"] = spec_to_json(rep.spec);
    auto runs = nlohmann::json::array();
    for (const run_record& r : rep.runs) {
        nlohmann::json rj;
        rj["seed"] = r.seed;
        rj["aborted"] = r.aborted;
        if (r.aborted) rj["error"] = r.error;
        rj["n"] = r.n;
        rj["m"] = r.m;
        rj["mis_size"] = r.mis_size;
        rj["verify_ok"] = r.verify_ok;
        if (!r.verify_witness.empty()) rj["verify_witness"] = r.verify_witness;
        rj["equivalence_ok"] = r.equivalence_ok;
        rj["rounds_match"] = r.rounds_match;
        rj["sparsity_violations"] = r.sparsity_violations;
        rj["decay_violations"] = r.decay_violations;
        rj["progress_violations"] = r.progress_violations;
        rj["stats"] = stats_to_json(r.stats);
        runs.push_back(std::move(rj));
    }
    j["runs"] = runs;
    j["aggregate"] = {{"runs", rep.aggregate.runs},
                      {"aborted", rep.aggregate.aborted},
                      {"verify_failures", rep.aggregate.verify_failures},
                      {"equivalence_failures", rep.aggregate.equivalence_failures},
                      {"rounds_mismatches", rep.aggregate.rounds_mismatches},
                      {"sparsity_violations", rep.aggregate.sparsity_violations},
                      {"decay_violations", rep.aggregate.decay_violations},
                      {"progress_violations", rep.aggregate.progress_violations},
                      {"fallback_trigger_runs", rep.aggregate.fallback_trigger_runs},
                      {"fallback_retries", rep.aggregate.fallback_retries},
                      {"max_while_iterations", rep.aggregate.max_while_iterations},
                      {"max_rounds_finisher", rep.aggregate.max_rounds_finisher}};
    j["hard_failure"] = rep.hard_failure;
    return j;
}

inline constexpr const char* iterations_csv_header =
    "seed,i,delta,k,k_formula,block_edges,selected,rounds,fallback_retries,"
    "decay_bound,decay_ok,edge_budget_ok,max_block_degree,vertex_budget";

inline void write_iteration_rows(std::ostream& os, std::uint64_t seed,
                                 const clique_mis_stats& st) {
    for (const iteration_stats& it : st.iterations)
        os << seed << ',' << it.index << ',' << it.delta << ',' << it.k << ',' << it.k_formula
           << ',' << it.block_edges << ',' << it.selected << ',' << it.rounds << ','
           << it.fallback_retries << ',' << it.decay_bound << ',' << it.decay_ok << ','
           << it.edge_budget_ok << ',' << it.max_block_degree << ',' << it.vertex_budget << '\n';
}

inline void write_iterations_csv(std::ostream& os, const report& rep) {
    os << iterations_csv_header << '\n';
    for (const run_record& r : rep.runs) write_iteration_rows(os, r.seed, r.stats);
}

inline void write_sparsity_csv(std::ostream& os, const report& rep) {
    os << "seed,t,uncovered,residual_max_degree,bound,violated\n";
    for (const run_record& r : rep.runs) {
        for (std::uint32_t t = 1; t + 1 <= r.trace_max_degree.size(); ++t) {
            const double bound = residual_sparsity_bound(r.n, t);
            const std::uint32_t deg = r.trace_max_degree[t - 1];
            os << r.seed << ',' << t << ',' << r.trace_uncovered[t - 1] << ',' << deg << ','
               << bound << ',' << (static_cast<double>(deg) > bound ? 1 : 0) << '\n';
        }
    }
}

inline void write_rounds_csv(std::ostream& os, const report& rep) {
    os << "seed,total_rounds,formula_rounds,match,order_agreement,initial_broadcast,"
          "stage2,finisher,luby_rounds\n";
    for (const run_record& r : rep.runs) {
        const clique_mis_stats& st = r.stats;
        os << r.seed << ',' << st.total_rounds << ',' << st.formula_rounds << ','
           << (st.total_rounds == st.formula_rounds) << ',' << st.rounds_order_agreement << ','
           << st.rounds_initial_broadcast << ',' << st.rounds_stage2 << ',' << st.rounds_finisher
           << ',' << st.luby_rounds << '\n';
    }
}

inline void write_luby_csv(std::ostream& os, const report& rep) {
    os << "seed,luby_round,active\n";
    for (const run_record& r : rep.runs)
        for (std::size_t i = 0; i < r.luby_active_curve.size(); ++i)
            os << r.seed << ',' << i + 1 << ',' << r.luby_active_curve[i] << '\n';
}

/// Writes report.json plus the per-suite CSV tables under out_dir.
inline void write_report_files(const report& rep, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const auto open = [&](const char* name) {
        std::ofstream os(fs::path(out_dir) / name);
        if (!os) throw std::runtime_error(std::string("cannot write ") + name);
        return os;
    };
    { auto os = open("report.json"); os << report_to_json(rep).dump(2) << '\n'; }
    { auto os = open("iterations.csv"); write_iterations_csv(os, rep); }
    { auto os = open("rounds.csv"); write_rounds_csv(os, rep); }
    { auto os = open("luby.csv"); write_luby_csv(os, rep); }
    if (suite_enabled(rep.spec, suite_kind::sparsity)) {
        auto os = open("sparsity.csv");
        write_sparsity_csv(os, rep);
    }
}

/// Seed lists accept "1,2,7" and ranges "1..20" (inclusive), combined freely.
inline std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string item = text.substr(pos, comma - pos);
        if (!item.empty()) {
            const std::size_t dots = item.find("..");
            try {
                if (dots == std::string::npos) {
                    seeds.push_back(std::stoull(item));
                } else {
                    const std::uint64_t lo = std::stoull(item.substr(0, dots));
                    const std::uint64_t hi = std::stoull(item.substr(dots + 2));
                    if (hi < lo) throw std::invalid_argument("descending range");
                    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
                }
            } catch (const std::exception&) {
                throw std::invalid_argument("bad seed list item: " + item);
            }
        }
        pos = comma + 1;
    }
    return seeds;
}

}  // namespace ccmis
