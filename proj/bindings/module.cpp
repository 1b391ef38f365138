// Python bindings for the core operations: generation, simulation,
// collection, recovery and the identifiability checks.

#include "socsense/dynamics.hpp"
#include "socsense/graph.hpp"
#include "socsense/harness.hpp"
#include "socsense/identify.hpp"
#include "socsense/io.hpp"
#include "socsense/recovery.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace socsense;

namespace {

graph::NetworkModelSpec make_network_spec(const std::string& model, double p, int m, int b,
                                          double p_rewire) {
    if (model == "er") return graph::NetworkModelSpec::er(p);
    if (model == "ba") return graph::NetworkModelSpec::ba(m);
    if (model == "ws") return graph::NetworkModelSpec::ws(b, p_rewire);
    throw std::invalid_argument("network model must be 'er', 'ba' or 'ws'");
}

graph::PlacementSpec make_placement_spec(const std::string& mode, int d, double p_s) {
    if (mode == "d_regular") return graph::PlacementSpec::d_regular(d);
    if (mode == "er_bipartite") return graph::PlacementSpec::er_bipartite(p_s);
    throw std::invalid_argument("placement must be 'd_regular' or 'er_bipartite'");
}

dynamics::DynamicsModel make_model(const std::string& kind, double gossip_weight) {
    return {dynamics::dynamics_kind_from_string(kind), gossip_weight};
}

recovery::SolverConfig make_solver_config(double lambda, double gamma, double step, int max_iters,
                                          double tol, bool restart) {
    recovery::SolverConfig cfg;
    cfg.lambda = lambda;
    cfg.gamma = gamma;
    cfg.step = step;
    cfg.max_iters = max_iters;
    cfg.tol = tol;
    cfg.restart = restart;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_socsense, m) {
    m.doc() = "DeGroot opinion dynamics, steady-state sensing and sparse trust recovery";

    // ---- graph ---------------------------------------------------------
    py::class_<graph::NetworkTopology>(m, "NetworkTopology")
        .def_readonly("n_ord", &graph::NetworkTopology::n_ord)
        .def_readonly("edges", &graph::NetworkTopology::edges)
        .def_readonly("model_tag", &graph::NetworkTopology::model_tag)
        .def("has_edge", &graph::NetworkTopology::has_edge);

    py::class_<graph::BipartiteSupport>(m, "BipartiteSupport")
        .def(py::init([](int n_ord, int n_s, std::vector<IndexPair> edges) {
                 graph::BipartiteSupport s;
                 s.n_ord = n_ord;
                 s.n_s = n_s;
                 std::sort(edges.begin(), edges.end());
                 s.edges = std::move(edges);
                 return s;
             }),
             py::arg("n_ord"), py::arg("n_s"), py::arg("edges"))
        .def_readonly("n_ord", &graph::BipartiteSupport::n_ord)
        .def_readonly("n_s", &graph::BipartiteSupport::n_s)
        .def_readonly("edges", &graph::BipartiteSupport::edges)
        .def("row_degrees", &graph::BipartiteSupport::row_degrees);

    py::class_<graph::TrustMatrix>(m, "TrustMatrix")
        .def(py::init([](Matrix b, Matrix d) {
                 graph::TrustMatrix w;
                 w.B = std::move(b);
                 w.D = std::move(d);
                 w.validate(1e-9);
                 return w;
             }),
             py::arg("B"), py::arg("D"))
        .def_readonly("B", &graph::TrustMatrix::B)
        .def_readonly("D", &graph::TrustMatrix::D)
        .def_property_readonly("n_ord", &graph::TrustMatrix::n_ord)
        .def_property_readonly("n_s", &graph::TrustMatrix::n_s);

    py::class_<graph::ValidationReport>(m, "ValidationReport")
        .def_readonly("row_sum_residual", &graph::ValidationReport::row_sum_residual)
        .def_readonly("assumption2_ok", &graph::ValidationReport::assumption2_ok)
        .def_readonly("support_ok", &graph::ValidationReport::support_ok)
        .def_readonly("weakly_connected", &graph::ValidationReport::weakly_connected)
        .def_readonly("strongly_connected", &graph::ValidationReport::strongly_connected)
        .def_readonly("spectral_norm_d", &graph::ValidationReport::spectral_norm_d)
        .def_readonly("passed", &graph::ValidationReport::pass);

    m.def(
        "gen_network",
        [](const std::string& model, int n_ord, std::uint64_t seed, double p, int m_attach, int b,
           double p_rewire) {
            return graph::gen_network(make_network_spec(model, p, m_attach, b, p_rewire), n_ord,
                                      seed);
        },
        py::arg("model"), py::arg("n_ord"), py::arg("seed"), py::arg("p") = 0.1,
        py::arg("m") = 2, py::arg("b") = 2, py::arg("p_rewire") = 0.08);
    m.def(
        "place_stubborn",
        [](int n_ord, int n_s, const std::string& mode, std::uint64_t seed, int d, double p_s) {
            return graph::place_stubborn(n_ord, n_s, make_placement_spec(mode, d, p_s), seed);
        },
        py::arg("n_ord"), py::arg("n_s"), py::arg("mode"), py::arg("seed"), py::arg("d") = 5,
        py::arg("p_s") = 0.1);
    m.def("build_trust_matrix", &graph::build_trust_matrix, py::arg("topology"),
          py::arg("support"), py::arg("seed"));
    m.def("apply_ambiguity", &graph::apply_ambiguity, py::arg("w"), py::arg("lam"));
    m.def(
        "canonical_relative_trust",
        [](const graph::TrustMatrix& w, const Vector& c) {
            auto rel = graph::canonical_relative_trust(w, c);
            return py::make_tuple(rel.B, rel.D);
        },
        py::arg("w"), py::arg("c"));
    m.def("validate_trust_matrix", &graph::validate_trust_matrix, py::arg("w"),
          py::arg("topology"), py::arg("support"));

    // ---- dynamics -------------------------------------------------------
    py::class_<dynamics::OpinionTrace>(m, "OpinionTrace")
        .def_readonly("sigma", &dynamics::OpinionTrace::sigma)
        .def_readonly("n_s", &dynamics::OpinionTrace::n_s)
        .def_readonly("samples", &dynamics::OpinionTrace::samples);

    py::class_<dynamics::SampleSet>(m, "SampleSet")
        .def_readonly("burn_in", &dynamics::SampleSet::burn_in)
        .def_readonly("horizon", &dynamics::SampleSet::horizon)
        .def_readonly("instants", &dynamics::SampleSet::instants);

    py::class_<dynamics::SteadyStateData>(m, "SteadyStateData")
        .def_readonly("Z", &dynamics::SteadyStateData::Z)
        .def_readonly("Y_hat", &dynamics::SteadyStateData::Y_hat)
        .def_readonly("K", &dynamics::SteadyStateData::K)
        .def_readonly("column_variance", &dynamics::SteadyStateData::column_variance)
        .def_readonly("z_full_row_rank", &dynamics::SteadyStateData::z_full_row_rank)
        .def_readonly("warnings", &dynamics::SteadyStateData::warnings);

    m.def("steady_state_exact", &dynamics::steady_state_exact, py::arg("B"), py::arg("D"),
          py::arg("Z"));
    m.def(
        "simulate",
        [](const graph::TrustMatrix& w, const Vector& z0, const Vector& y0, long T,
           const std::string& model, double sigma, std::uint64_t seed, double gossip_weight) {
            return dynamics::simulate(w, z0, y0, T, make_model(model, gossip_weight), sigma, seed);
        },
        py::arg("w"), py::arg("z0"), py::arg("y0"), py::arg("T"), py::arg("model") = "deterministic",
        py::arg("sigma") = 0.0, py::arg("seed") = 1, py::arg("gossip_weight") = 0.5);
    m.def(
        "sample_random_w",
        [](const graph::TrustMatrix& w, const std::string& model, std::uint64_t seed,
           double gossip_weight) {
            auto [B, D] = dynamics::sample_random_w(w, make_model(model, gossip_weight), seed);
            return py::make_tuple(B, D);
        },
        py::arg("w"), py::arg("model"), py::arg("seed"), py::arg("gossip_weight") = 0.5);
    m.def("gossip_mean_matrix", &dynamics::gossip_mean_matrix, py::arg("w"),
          py::arg("gossip_weight"));
    m.def("uniform_sampling_set", &dynamics::uniform_sampling_set, py::arg("burn_in"),
          py::arg("t_max"), py::arg("m"), py::arg("seed"));
    m.def("temporal_average", &dynamics::temporal_average, py::arg("trace"), py::arg("samples"));
    m.def("mse_bound", &dynamics::mse_bound, py::arg("lambda_d"), py::arg("samples"),
          py::arg("c_prime") = 1.0);
    m.def(
        "collect_dataset",
        [](const graph::TrustMatrix& w, int K, const std::string& model, double sigma, int samples,
           long burn_in, long t_max, long horizon, std::uint64_t seed, double gossip_weight,
           py::object z_given) {
            dynamics::CollectorConfig cc;
            cc.model = make_model(model, gossip_weight);
            cc.sigma = sigma;
            cc.samples = samples;
            cc.burn_in = burn_in;
            cc.t_max = t_max;
            cc.horizon = horizon;
            if (z_given.is_none()) {
                return dynamics::collect_dataset(w, K, cc, seed);
            }
            Matrix z = z_given.cast<Matrix>();
            cc.z_mode = dynamics::ZMode::given;
            return dynamics::collect_dataset(w, K, cc, seed, &z);
        },
        py::arg("w"), py::arg("K"), py::arg("model") = "deterministic", py::arg("sigma") = 0.0,
        py::arg("samples") = 0, py::arg("burn_in") = -1, py::arg("t_max") = -1,
        py::arg("horizon") = 4000, py::arg("seed") = 1, py::arg("gossip_weight") = 0.5,
        py::arg("Z") = py::none());

    // ---- recovery -------------------------------------------------------
    py::class_<recovery::FeasibilityResiduals>(m, "FeasibilityResiduals")
        .def_readonly("negativity", &recovery::FeasibilityResiduals::negativity)
        .def_readonly("off_support", &recovery::FeasibilityResiduals::off_support)
        .def_readonly("diag", &recovery::FeasibilityResiduals::diag)
        .def_readonly("row_sum", &recovery::FeasibilityResiduals::row_sum);

    py::class_<recovery::RecoveryResult>(m, "RecoveryResult")
        .def_readonly("B", &recovery::RecoveryResult::B)
        .def_readonly("D", &recovery::RecoveryResult::D)
        .def_readonly("objective_trace", &recovery::RecoveryResult::objective_trace)
        .def_readonly("iterations", &recovery::RecoveryResult::iterations)
        .def_readonly("feasibility", &recovery::RecoveryResult::feasibility)
        .def_readonly("converged", &recovery::RecoveryResult::converged)
        .def_readonly("final_objective", &recovery::RecoveryResult::final_objective);

    py::class_<recovery::RecoveryProblem>(m, "RecoveryProblem")
        .def(py::init([](Matrix y_hat, Matrix z, std::vector<IndexPair> s,
                         std::vector<IndexPair> omega_b, const Vector& c,
                         const std::string& mode) {
                 recovery::RecoveryProblem p;
                 p.Y_hat = std::move(y_hat);
                 p.Z = std::move(z);
                 p.S = std::move(s);
                 p.omega_b = std::move(omega_b);
                 p.c = c;
                 if (mode == "full") {
                     p.mode = recovery::RecoveryMode::full_support;
                 } else if (mode == "sparse") {
                     p.mode = recovery::RecoveryMode::sparse;
                 } else {
                     throw std::invalid_argument("mode must be 'full' or 'sparse'");
                 }
                 p.validate();
                 return p;
             }),
             py::arg("Y_hat"), py::arg("Z"), py::arg("S"), py::arg("omega_b"), py::arg("c"),
             py::arg("mode") = "sparse")
        .def_readonly("Y_hat", &recovery::RecoveryProblem::Y_hat)
        .def_readonly("Z", &recovery::RecoveryProblem::Z)
        .def_readonly("S", &recovery::RecoveryProblem::S)
        .def_readonly("omega_b", &recovery::RecoveryProblem::omega_b)
        .def_readonly("c", &recovery::RecoveryProblem::c);

    m.def("pseudo_inverse_right", &recovery::pseudo_inverse_right, py::arg("Z"),
          py::arg("tol") = 1e-10);
    m.def("objective_f", &recovery::objective_f, py::arg("B"), py::arg("D"), py::arg("Y_hat"),
          py::arg("Z_dag"), py::arg("gamma"));
    m.def(
        "grad_f",
        [](const Matrix& B, const Matrix& D, const Matrix& y_hat, const Matrix& z_dag,
           double gamma) {
            auto [gb, gd] = recovery::grad_f(B, D, y_hat, z_dag, gamma);
            return py::make_tuple(gb, gd);
        },
        py::arg("B"), py::arg("D"), py::arg("Y_hat"), py::arg("Z_dag"), py::arg("gamma"));
    m.def("soft_threshold_one_sided",
          py::overload_cast<const Matrix&, double>(&recovery::soft_threshold_one_sided),
          py::arg("x"), py::arg("tau"));
    m.def(
        "prox_project",
        [](const Matrix& b_tilde, const Matrix& d_tilde, double tau,
           const recovery::RecoveryProblem& problem) {
            auto [b, d] = recovery::prox_project(b_tilde, d_tilde, tau, problem);
            return py::make_tuple(b, d);
        },
        py::arg("B_tilde"), py::arg("D_tilde"), py::arg("tau"), py::arg("problem"));
    m.def("estimate_lipschitz", &recovery::estimate_lipschitz, py::arg("Y_hat"), py::arg("Z_dag"),
          py::arg("gamma"));
    m.def(
        "fista_solve",
        [](const recovery::RecoveryProblem& problem, double lambda, double gamma, double step,
           int max_iters, double tol, bool restart) {
            return recovery::fista_solve(
                problem, make_solver_config(lambda, gamma, step, max_iters, tol, restart));
        },
        py::arg("problem"), py::arg("lambda_") = -1.0, py::arg("gamma") = 1e-3,
        py::arg("step") = -1.0, py::arg("max_iters") = 40000, py::arg("tol") = 1e-10,
        py::arg("restart") = true);
    m.def(
        "solve_ls_full_support",
        [](const recovery::RecoveryProblem& problem, double gamma, double step, int max_iters,
           double tol) {
            return recovery::solve_ls_full_support(
                problem, make_solver_config(-1.0, gamma, step, max_iters, tol, true));
        },
        py::arg("problem"), py::arg("gamma") = 1e-3, py::arg("step") = -1.0,
        py::arg("max_iters") = 40000, py::arg("tol") = 1e-10);
    m.def("brute_force_l0", &recovery::brute_force_l0, py::arg("problem"), py::arg("k_max"),
          py::arg("epsilon") = 1e-9);

    // ---- identifiability -------------------------------------------------
    py::class_<identify::ExpanderWitness>(m, "ExpanderWitness")
        .def_readonly("certified", &identify::ExpanderWitness::certified)
        .def_readonly("violating_set", &identify::ExpanderWitness::violating_set)
        .def_readonly("edge_count", &identify::ExpanderWitness::edge_count)
        .def_readonly("neighbor_count", &identify::ExpanderWitness::neighbor_count)
        .def_readonly("d_l", &identify::ExpanderWitness::d_l)
        .def_readonly("d_u", &identify::ExpanderWitness::d_u);

    py::class_<identify::Rip1Report>(m, "Rip1Report")
        .def_readonly("trials", &identify::Rip1Report::trials)
        .def_readonly("lower_violations", &identify::Rip1Report::lower_violations)
        .def_readonly("upper_violations", &identify::Rip1Report::upper_violations)
        .def_readonly("inverse_violations", &identify::Rip1Report::inverse_violations)
        .def_readonly("lower_bound", &identify::Rip1Report::lower_bound)
        .def_readonly("upper_bound", &identify::Rip1Report::upper_bound)
        .def_readonly("certified", &identify::Rip1Report::certified);

    m.def("stacked_data_matrix", &identify::stacked_data_matrix, py::arg("Y_hat"), py::arg("Z"));
    m.def("check_rank_full", &identify::check_rank_full, py::arg("A_tilde"), py::arg("s_cols"),
          py::arg("b_cols"), py::arg("n_ord"));
    m.def("check_spark_partial", &identify::check_spark_partial, py::arg("A_tilde"),
          py::arg("s_cols"), py::arg("b_cols"), py::arg("k"), py::arg("n_ord"));
    m.def("binary_entropy", &identify::binary_entropy, py::arg("x"));
    m.def("theorem1_min_beta", &identify::theorem1_min_beta, py::arg("alpha"), py::arg("d"),
          py::arg("finite_n") = 0.0);
    m.def("theorem1_value_condition", &identify::theorem1_value_condition, py::arg("b_min"),
          py::arg("b_max"), py::arg("d"));
    m.def(
        "theorem1_failure_bound",
        [](int d, double beta, double n_i) {
            auto b = identify::theorem1_failure_bound(d, beta, n_i);
            return py::make_tuple(b.leading, b.order_exponent);
        },
        py::arg("d"), py::arg("beta"), py::arg("n"));
    m.def("asymptotic_budget", &identify::asymptotic_budget, py::arg("p"));
    m.def("is_expander", &identify::is_expander, py::arg("support"), py::arg("alpha"),
          py::arg("delta"));
    m.def(
        "rip1_check",
        [](const Matrix& a, double alpha, double delta, int d_l, int d_u, double a_min,
           double a_max, int trials, std::uint64_t seed, py::object d_prime,
           bool require_certified) {
            identify::ExpanderSpec spec{alpha, delta, d_l, d_u, a_min, a_max};
            if (d_prime.is_none()) {
                return identify::rip1_check(a, spec, trials, seed, nullptr, require_certified);
            }
            Matrix dp = d_prime.cast<Matrix>();
            return identify::rip1_check(a, spec, trials, seed, &dp, require_certified);
        },
        py::arg("A"), py::arg("alpha"), py::arg("delta"), py::arg("d_l"), py::arg("d_u"),
        py::arg("a_min"), py::arg("a_max"), py::arg("trials"), py::arg("seed"),
        py::arg("D_prime") = py::none(), py::arg("require_certified") = true);
    m.def("corollary1_margin", &identify::corollary1_margin, py::arg("b_min"), py::arg("b_max"),
          py::arg("d_l"), py::arg("d_u"), py::arg("delta"));
    m.def(
        "row_deletion_degree_check",
        [](const graph::BipartiteSupport& support, int trials, std::uint64_t seed) {
            auto r = identify::row_deletion_degree_check(support, trials, seed);
            return py::make_tuple(r.empirical, r.analytic_lower_bound);
        },
        py::arg("support"), py::arg("trials"), py::arg("seed"));

    // ---- harness ---------------------------------------------------------
    m.def("nmse", &harness::nmse, py::arg("estimate"), py::arg("truth"));
    m.def(
        "support_error",
        [](const Matrix& estimate, const Matrix& truth, double tau,
           py::object s) {
            if (s.is_none()) return harness::support_error(estimate, truth, tau, nullptr);
            auto pairs = s.cast<std::vector<IndexPair>>();
            return harness::support_error(estimate, truth, tau, &pairs);
        },
        py::arg("estimate"), py::arg("truth"), py::arg("tau") = -1.0, py::arg("S") = py::none());
    m.def("expose_support", &harness::expose_support, py::arg("true_support"), py::arg("n_ord"),
          py::arg("p_known"), py::arg("seed"));
    m.def(
        "run_experiment",
        [](const std::string& config_json) {
            auto config = harness::experiment_config_from_json(io::json::parse(config_json));
            auto table = harness::run_experiment(config);
            py::list rows;
            for (const auto& r : table.rows) {
                py::dict row;
                row["sweep"] = r.sweep_label;
                row["trial"] = r.trial;
                row["nmse_D"] = r.nmse_d;
                row["nmse_B"] = r.nmse_b;
                row["support_error"] = r.support_err;
                row["runtime_s"] = r.runtime_s;
                row["converged"] = r.converged;
                row["failed"] = r.failed;
                row["error"] = r.error;
                rows.append(std::move(row));
            }
            return rows;
        },
        py::arg("config_json"));
}
