// Command-line front end: network generation, opinion simulation, data
// collection, trust-matrix recovery, identifiability checks, experiment
// sweeps, and the edge-list ingestion pipeline.

#include "socsense/dynamics.hpp"
#include "socsense/graph.hpp"
#include "socsense/harness.hpp"
#include "socsense/identify.hpp"
#include "socsense/io.hpp"
#include "socsense/recovery.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

using namespace socsense;
using io::json;

namespace {

graph::NetworkModelSpec parse_network(const std::string& model, double p, int m, int b,
                                      double p_rewire) {
    if (model == "er") return graph::NetworkModelSpec::er(p);
    if (model == "ba") return graph::NetworkModelSpec::ba(m);
    if (model == "ws") return graph::NetworkModelSpec::ws(b, p_rewire);
    throw CLI::ValidationError("--model", "expected er, ba or ws");
}

Vector parse_vector(const std::string& csv) {
    Vector out;
    std::vector<double> values;
    std::istringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) values.push_back(std::stod(item));
    out.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out(static_cast<int>(i)) = values[i];
    return out;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DeGroot opinion dynamics, steady-state sensing and trust recovery"};
    app.require_subcommand(1);

    // ---- gen ----------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "generate a trust matrix and stubborn placement");
    struct {
        std::string model = "er";
        double p = 0.1;
        int m = 2;
        int b = 2;
        double p_rewire = 0.08;
        int n_ord = 60;
        int n_s = 20;
        std::string placement = "d_regular";
        int d = 5;
        double p_s = 0.1;
        std::uint64_t seed = 1;
        std::string out = "trust.json";
        std::string support_out;
    } g;
    gen->add_option("--model", g.model, "network model: er|ba|ws");
    gen->add_option("--p", g.p, "ER edge probability");
    gen->add_option("--m", g.m, "BA attachments per node");
    gen->add_option("--b", g.b, "WS ring neighbors per side");
    gen->add_option("--p-rewire", g.p_rewire, "WS rewiring probability");
    gen->add_option("--n-ord", g.n_ord, "ordinary agents");
    gen->add_option("--n-s", g.n_s, "stubborn agents");
    gen->add_option("--placement", g.placement, "d_regular|er_bipartite");
    gen->add_option("--d", g.d, "stubborn neighbors per ordinary agent");
    gen->add_option("--p-s", g.p_s, "bipartite edge probability");
    gen->add_option("--seed", g.seed, "rng seed");
    gen->add_option("--out", g.out, "trust matrix json");
    gen->add_option("--support-out", g.support_out, "bipartite support json");

    // ---- simulate -----------------------------------------------------
    auto* sim = app.add_subcommand("simulate", "run one discussion and export the trace");
    struct {
        std::string in = "trust.json";
        std::string model = "det";
        long T = 1000;
        double sigma = 0.0;
        double gossip_weight = 0.5;
        std::uint64_t seed = 1;
        std::string z;
        std::string out = "trace.csv";
    } s;
    sim->add_option("--in", s.in, "trust matrix json");
    sim->add_option("--model", s.model, "det|ns|bg");
    sim->add_option("--T", s.T, "horizon");
    sim->add_option("--sigma", s.sigma, "observation noise std");
    sim->add_option("--gossip-weight", s.gossip_weight, "broadcast mixing weight");
    sim->add_option("--seed", s.seed, "rng seed");
    sim->add_option("--z", s.z, "stubborn opinions, comma separated (default: gaussian)");
    sim->add_option("--out", s.out, "trace csv");

    // ---- collect ------------------------------------------------------
    auto* col = app.add_subcommand("collect", "run K discussions and export the data matrices");
    struct {
        std::string in = "trust.json";
        int K = 0;
        std::string model = "det";
        double sigma = 0.0;
        double gossip_weight = 0.5;
        int samples = 0;
        long burn_in = -1;
        long t_max = -1;
        long horizon = 4000;
        std::uint64_t seed = 1;
        std::string out = "dataset.json";
    } c;
    col->add_option("--in", c.in, "trust matrix json");
    col->add_option("--K", c.K, "number of discussions (default 2 n_s)");
    col->add_option("--model", c.model, "det|ns|bg");
    col->add_option("--sigma", c.sigma, "observation noise std");
    col->add_option("--gossip-weight", c.gossip_weight, "broadcast mixing weight");
    col->add_option("--samples", c.samples, "temporal-average sample count");
    col->add_option("--burn-in", c.burn_in, "burn-in T_o (-1: auto)");
    col->add_option("--t-max", c.t_max, "sampling horizon (-1: auto)");
    col->add_option("--horizon", c.horizon, "deterministic iteration cap");
    col->add_option("--seed", c.seed, "rng seed");
    col->add_option("--out", c.out, "dataset json");

    // ---- recover ------------------------------------------------------
    auto* rec = app.add_subcommand("recover", "estimate relative trust matrices from a dataset");
    struct {
        std::string in = "dataset.json";
        std::string mode = "sparse";
        std::string support = "support.json";
        std::string truth;
        double lambda = -1.0;
        double gamma = 1e-3;
        int iters = 40000;
        double tol = 1e-10;
        double c_diag = 0.0;
        std::string out = "result.json";
        std::string trace;
    } r;
    rec->add_option("--in", r.in, "dataset json");
    rec->add_option("--mode", r.mode, "full|sparse");
    rec->add_option("--support", r.support, "bipartite support json (omega_B)");
    rec->add_option("--truth", r.truth, "trust json; provides S in full mode and NMSE scoring");
    rec->add_option("--lambda", r.lambda, "l1 weight (-1: auto)");
    rec->add_option("--gamma", r.gamma, "stochasticity penalty");
    rec->add_option("--iters", r.iters, "max iterations");
    rec->add_option("--tol", r.tol, "relative objective tolerance");
    rec->add_option("--c", r.c_diag, "diagonal target for D");
    rec->add_option("--out", r.out, "result json");
    rec->add_option("--trace", r.trace, "objective trace csv");

    // ---- check --------------------------------------------------------
    auto* chk = app.add_subcommand("check", "identifiability certificates");
    struct {
        std::string what = "thm1";
        std::string in;
        std::string support;
        std::string truth;
        double alpha = 0.16;
        double delta = 0.75;
        int d = 5;
        double n = 0.0;
        int k = 1;
        double b_min = 0.0;
        double b_max = 0.0;
        std::string out;
    } ck;
    chk->add_option("--what", ck.what, "rank|spark|expander|thm1");
    chk->add_option("--in", ck.in, "dataset json (rank/spark) or support json (expander)");
    chk->add_option("--support", ck.support, "bipartite support json (omega_B for rank/spark)");
    chk->add_option("--truth", ck.truth, "trust json (restricts S to the true support)");
    chk->add_option("--alpha", ck.alpha, "left-subset fraction");
    chk->add_option("--delta", ck.delta, "expansion quality");
    chk->add_option("--d", ck.d, "left degree");
    chk->add_option("--n", ck.n, "finite-n correction for thm1 (0: asymptotic)");
    chk->add_option("--k", ck.k, "row sparsity for spark");
    chk->add_option("--b-min", ck.b_min, "smallest relative trust in B'");
    chk->add_option("--b-max", ck.b_max, "largest relative trust in B'");
    chk->add_option("--out", ck.out, "verdict json (default: stdout)");

    // ---- experiment ---------------------------------------------------
    auto* exp = app.add_subcommand("experiment", "run a configured sweep");
    struct {
        std::string config;
        std::string out = "results.csv";
        std::string summary;
    } e;
    exp->add_option("--config", e.config, "experiment config json")->required();
    exp->add_option("--out", e.out, "results csv");
    exp->add_option("--summary", e.summary, "per-point summary json");

    // ---- realnet ------------------------------------------------------
    auto* rn = app.add_subcommand("realnet", "edge-list ingestion pipeline");
    struct {
        std::string edges;
        int n_s = 180;
        std::string model = "bg";
        double gossip_weight = 0.5;
        double sigma = 0.0;
        int samples = 20000;
        long burn_in = 20000;
        long t_max = -1;
        int k_factor = 2;
        int iters = 10000;
        std::uint64_t seed = 7;
        std::string out;
    } n;
    rn->add_option("--edges", n.edges, "edge list file (i j [weight] per line)")->required();
    rn->add_option("--n-s", n.n_s, "stubborn agents (median-degree selection)");
    rn->add_option("--model", n.model, "det|ns|bg");
    rn->add_option("--gossip-weight", n.gossip_weight, "broadcast mixing weight");
    rn->add_option("--sigma", n.sigma, "observation noise std");
    rn->add_option("--samples", n.samples, "temporal-average sample count");
    rn->add_option("--burn-in", n.burn_in, "burn-in T_o");
    rn->add_option("--t-max", n.t_max, "sampling horizon (-1: auto)");
    rn->add_option("--k-factor", n.k_factor, "K = k_factor * n_s");
    rn->add_option("--iters", n.iters, "solver iterations");
    rn->add_option("--seed", n.seed, "rng seed");
    rn->add_option("--out", n.out, "report json (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            auto spec = parse_network(g.model, g.p, g.m, g.b, g.p_rewire);
            auto topo = graph::gen_network(spec, g.n_ord, mix_seed(g.seed, 1));
            graph::PlacementSpec placement;
            if (g.placement == "d_regular") {
                placement = graph::PlacementSpec::d_regular(g.d);
            } else if (g.placement == "er_bipartite") {
                placement = graph::PlacementSpec::er_bipartite(g.p_s);
            } else {
                throw std::invalid_argument("placement must be d_regular or er_bipartite");
            }
            auto support = graph::place_stubborn(g.n_ord, g.n_s, placement, mix_seed(g.seed, 2));
            auto w = graph::build_trust_matrix(topo, support, mix_seed(g.seed, 3));
            io::save_json(g.out, io::trust_to_json(w));
            if (!g.support_out.empty()) {
                io::save_json(g.support_out, io::support_to_json(support));
            }
            auto report = graph::validate_trust_matrix(w, topo, support);
            std::cerr << "gen: n_ord=" << g.n_ord << " n_s=" << g.n_s
                      << " |D|=" << topo.edges.size() << " ||D||=" << report.spectral_norm_d
                      << (report.pass ? " (valid)" : " (validation flags raised)") << "\n";
        } else if (*sim) {
            auto w = io::trust_from_json(io::load_json(s.in));
            dynamics::DynamicsModel model{dynamics::dynamics_kind_from_string(s.model),
                                          s.gossip_weight};
            Vector z0;
            if (s.z.empty()) {
                std::mt19937_64 rng(mix_seed(s.seed, 0x5a));
                std::normal_distribution<double> gauss(0.0, 1.0);
                z0.resize(w.n_s());
                for (int i = 0; i < w.n_s(); ++i) z0(i) = gauss(rng);
            } else {
                z0 = parse_vector(s.z);
            }
            auto trace = dynamics::simulate(w, z0, Vector::Zero(w.n_ord()), s.T, model, s.sigma,
                                            s.seed);
            std::ofstream out(s.out);
            if (!out) throw std::runtime_error("cannot write " + s.out);
            io::write_trace_csv(out, trace);
            std::cerr << "simulate: wrote " << (s.T + 1) << " steps to " << s.out << "\n";
        } else if (*col) {
            auto w = io::trust_from_json(io::load_json(c.in));
            dynamics::CollectorConfig cc;
            cc.model = {dynamics::dynamics_kind_from_string(c.model), c.gossip_weight};
            cc.sigma = c.sigma;
            cc.samples = c.samples;
            cc.burn_in = c.burn_in;
            cc.t_max = c.t_max;
            cc.horizon = c.horizon;
            int K = c.K > 0 ? c.K : 2 * w.n_s();
            auto data = dynamics::collect_dataset(w, K, cc, c.seed);
            io::save_json(c.out, io::dataset_to_json(data, c.sigma, cc.model, {c.seed}));
            for (const auto& warning : data.warnings) std::cerr << "collect: " << warning << "\n";
            std::cerr << "collect: K=" << K << " -> " << c.out << "\n";
        } else if (*rec) {
            auto data = io::dataset_from_json(io::load_json(r.in));
            recovery::RecoveryProblem problem;
            problem.Y_hat = data.Y_hat;
            problem.Z = data.Z;
            problem.c = Vector::Constant(data.Y_hat.rows(), r.c_diag);
            auto support = io::support_from_json(io::load_json(r.support));
            problem.omega_b = support.edges;
            graph::TrustMatrix truth;
            bool have_truth = !r.truth.empty();
            if (have_truth) truth = io::trust_from_json(io::load_json(r.truth));
            if (r.mode == "full") {
                if (!have_truth) {
                    throw std::invalid_argument("full mode needs --truth to define S");
                }
                problem.mode = recovery::RecoveryMode::full_support;
                problem.S = graph::offdiag_support(truth.D);
            } else if (r.mode == "sparse") {
                problem.mode = recovery::RecoveryMode::sparse;
                problem.S = graph::all_offdiag_pairs(static_cast<int>(data.Y_hat.rows()));
            } else {
                throw std::invalid_argument("mode must be full or sparse");
            }
            recovery::SolverConfig cfg;
            cfg.lambda = r.lambda;
            cfg.gamma = r.gamma;
            cfg.max_iters = r.iters;
            cfg.tol = r.tol;
            auto result = problem.mode == recovery::RecoveryMode::full_support
                              ? recovery::solve_ls_full_support(problem, cfg)
                              : recovery::fista_solve(problem, cfg);
            json out = io::result_to_json(result);
            if (have_truth) {
                auto rel = graph::canonical_relative_trust(truth, problem.c);
                out["nmse_D"] = harness::nmse(result.D, rel.D);
                out["nmse_B"] = harness::nmse(result.B, rel.B);
            }
            io::save_json(r.out, out);
            if (!r.trace.empty()) {
                std::ofstream trace_out(r.trace);
                io::write_objective_csv(trace_out, result.objective_trace);
            }
            std::cerr << "recover: " << result.iterations << " iterations, objective "
                      << result.final_objective << " -> " << r.out << "\n";
        } else if (*chk) {
            json verdict;
            if (ck.what == "thm1") {
                double beta = identify::theorem1_min_beta(ck.alpha, ck.d, ck.n);
                verdict = {{"what", "thm1"},
                           {"alpha", ck.alpha},
                           {"d", ck.d},
                           {"min_beta", beta},
                           {"budget_2p", identify::asymptotic_budget(ck.alpha / 2.0)}};
                auto bound = identify::theorem1_failure_bound(
                    ck.d, beta, ck.n > 0 ? ck.n : 100.0);
                verdict["failure_bound_leading"] = bound.leading;
                verdict["failure_bound_order_exponent"] = bound.order_exponent;
                if (ck.b_min > 0.0) {
                    verdict["value_condition"] =
                        identify::theorem1_value_condition(ck.b_min, ck.b_max, ck.d);
                }
            } else if (ck.what == "expander") {
                auto support = io::support_from_json(io::load_json(ck.in));
                auto witness = identify::is_expander(support, ck.alpha, ck.delta);
                verdict = {{"what", "expander"},
                           {"alpha", ck.alpha},
                           {"delta", ck.delta},
                           {"certified", witness.certified},
                           {"d_l", witness.d_l},
                           {"d_u", witness.d_u}};
                if (!witness.certified) {
                    verdict["witness"] = witness.violating_set;
                    verdict["witness_edges"] = witness.edge_count;
                    verdict["witness_neighbors"] = witness.neighbor_count;
                }
            } else if (ck.what == "rank" || ck.what == "spark") {
                auto data = io::dataset_from_json(io::load_json(ck.in));
                auto support = io::support_from_json(io::load_json(ck.support));
                int n_ord = static_cast<int>(data.Y_hat.rows());
                Matrix a = identify::stacked_data_matrix(data.Y_hat, data.Z);
                std::vector<std::vector<int>> s_rows(n_ord);
                if (!ck.truth.empty()) {
                    auto truth = io::trust_from_json(io::load_json(ck.truth));
                    for (auto [i, j] : graph::offdiag_support(truth.D)) s_rows[i].push_back(j);
                } else {
                    for (int i = 0; i < n_ord; ++i) {
                        for (int j = 0; j < n_ord; ++j) {
                            if (i != j) s_rows[i].push_back(j);
                        }
                    }
                }
                std::vector<std::vector<int>> b_rows(n_ord);
                for (auto [i, j] : support.edges) b_rows[i].push_back(j);
                json rows = json::array();
                bool all_ok = true;
                for (int i = 0; i < n_ord; ++i) {
                    bool ok = ck.what == "rank"
                                  ? identify::check_rank_full(a, s_rows[i], b_rows[i], n_ord)
                                  : identify::check_spark_partial(a, s_rows[i], b_rows[i], ck.k,
                                                                  n_ord);
                    rows.push_back({{"row", i}, {"ok", ok}});
                    all_ok = all_ok && ok;
                }
                verdict = {{"what", ck.what}, {"pass", all_ok}, {"rows", rows}};
            } else {
                throw std::invalid_argument("--what must be rank, spark, expander or thm1");
            }
            if (ck.out.empty()) {
                std::cout << verdict.dump(2) << "\n";
            } else {
                io::save_json(ck.out, verdict);
            }
        } else if (*exp) {
            harness::ExperimentConfig config;
            try {
                config = harness::experiment_config_from_json(io::load_json(e.config));
            } catch (const std::exception& err) {
                std::cerr << "experiment: config error: " << err.what() << "\n";
                return 2;
            }
            auto table = harness::run_experiment(config);
            std::ofstream out(e.out);
            if (!out) throw std::runtime_error("cannot write " + e.out);
            harness::write_results_csv(out, table);
            auto summary = harness::summarize(table);
            if (!e.summary.empty()) {
                io::save_json(e.summary, harness::summary_to_json(summary));
            }
            for (const auto& point : summary) {
                std::cerr << "experiment: " << config.sweep << "=" << point.label << " median NMSE(D') "
                          << point.median_nmse_d << " over " << point.trials << " trials\n";
            }
            if (table.any_failed()) {
                std::cerr << "experiment: at least one trial hard-failed\n";
                return 3;
            }
        } else if (*rn) {
            auto list = io::read_edge_list_file(n.edges);
            harness::RealNetConfig cfg;
            cfg.n_s = n.n_s;
            cfg.model = {dynamics::dynamics_kind_from_string(n.model), n.gossip_weight};
            cfg.sigma = n.sigma;
            cfg.samples = n.samples;
            cfg.burn_in = n.burn_in;
            cfg.t_max = n.t_max;
            cfg.k_factor = n.k_factor;
            cfg.solver.max_iters = n.iters;
            cfg.seed = n.seed;
            auto result = harness::run_realnet(list, cfg);
            json report = {{"n_ord", result.n_ord},
                           {"n_s", result.n_s},
                           {"directed_edges", result.edge_count},
                           {"mean_degree", result.mean_degree},
                           {"nmse_D", result.nmse_d},
                           {"nmse_B", result.nmse_b},
                           {"collect_seconds", result.collect_seconds},
                           {"solve_seconds", result.solve_seconds},
                           {"iterations", result.iterations}};
            if (n.out.empty()) {
                std::cout << report.dump(2) << "\n";
            } else {
                io::save_json(n.out, report);
            }
        }
    } catch (const std::exception& err) {
        std::cerr << app.get_name() << ": " << err.what() << "\n";
        return 1;
    }
    return 0;
}
