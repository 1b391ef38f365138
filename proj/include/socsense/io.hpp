#pragma once

#include "socsense/dynamics.hpp"
#include "socsense/graph.hpp"
#include "socsense/recovery.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <tuple>
#include <vector>

namespace socsense::io {

using nlohmann::json;

json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j);

/// Trust matrices: {n_ord, n_s, B: dense row-major, D: dense row-major}.
json trust_to_json(const graph::TrustMatrix& w);
graph::TrustMatrix trust_from_json(const json& j);

/// Bipartite supports: {n_ord, n_s, edges: [[i, j], ...]}.
json support_to_json(const graph::BipartiteSupport& s);
graph::BipartiteSupport support_from_json(const json& j);

/// Datasets: {Z, Y_hat, K, sigma, model, seeds, ...diagnostics}.
json dataset_to_json(const dynamics::SteadyStateData& data, double sigma,
                     const dynamics::DynamicsModel& model, const std::vector<std::uint64_t>& seeds);
dynamics::SteadyStateData dataset_from_json(const json& j);

json problem_to_json(const recovery::RecoveryProblem& p);
recovery::RecoveryProblem problem_from_json(const json& j);

json result_to_json(const recovery::RecoveryResult& r);

/// Trace CSV: header t,agent_0,...,agent_{n-1}.
void write_trace_csv(std::ostream& out, const dynamics::OpinionTrace& trace);

/// Objective trace CSV: iter,objective,residual.
void write_objective_csv(std::ostream& out, const std::vector<double>& objective_trace);

/// Plain-text edge list: one "i j [weight]" per line, '#' comments,
/// 0-based vertex ids.
struct EdgeList {
    int n = 0;  // 1 + max vertex id
    std::vector<std::tuple<int, int, double>> edges;
    bool has_weights = false;
};

EdgeList read_edge_list(std::istream& in);
EdgeList read_edge_list_file(const std::string& path);

json load_json(const std::string& path);
void save_json(const std::string& path, const json& j);

}  // namespace socsense::io
