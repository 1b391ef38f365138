#include "socsense/io.hpp"

#include <fstream>
#include <sstream>

namespace socsense::io {

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j) {
    if (!j.is_array()) throw std::invalid_argument("matrix json: expected array of rows");
    int rows = static_cast<int>(j.size());
    if (rows == 0) return Matrix(0, 0);
    int cols = static_cast<int>(j.at(0).size());
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        const auto& row = j.at(i);
        if (static_cast<int>(row.size()) != cols) {
            throw std::invalid_argument("matrix json: ragged rows");
        }
        for (int c = 0; c < cols; ++c) m(i, c) = row.at(c).get<double>();
    }
    return m;
}

json trust_to_json(const graph::TrustMatrix& w) {
    return json{{"n_ord", w.n_ord()},
                {"n_s", w.n_s()},
                {"B", matrix_to_json(w.B)},
                {"D", matrix_to_json(w.D)}};
}

graph::TrustMatrix trust_from_json(const json& j) {
    graph::TrustMatrix w;
    w.B = matrix_from_json(j.at("B"));
    w.D = matrix_from_json(j.at("D"));
    if (w.n_ord() != j.at("n_ord").get<int>() || w.n_s() != j.at("n_s").get<int>()) {
        throw std::invalid_argument("trust json: declared sizes disagree with matrices");
    }
    return w;
}

json support_to_json(const graph::BipartiteSupport& s) {
    json edges = json::array();
    for (const auto& [i, j] : s.edges) edges.push_back(json::array({i, j}));
    return json{{"n_ord", s.n_ord}, {"n_s", s.n_s}, {"edges", std::move(edges)}};
}

graph::BipartiteSupport support_from_json(const json& j) {
    graph::BipartiteSupport s;
    s.n_ord = j.at("n_ord").get<int>();
    s.n_s = j.at("n_s").get<int>();
    for (const auto& e : j.at("edges")) {
        s.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    }
    std::sort(s.edges.begin(), s.edges.end());
    return s;
}

json dataset_to_json(const dynamics::SteadyStateData& data, double sigma,
                     const dynamics::DynamicsModel& model,
                     const std::vector<std::uint64_t>& seeds) {
    json j{{"Z", matrix_to_json(data.Z)},
           {"Y_hat", matrix_to_json(data.Y_hat)},
           {"K", data.K},
           {"sigma", sigma},
           {"model", dynamics::to_string(model.kind)},
           {"seeds", seeds},
           {"z_full_row_rank", data.z_full_row_rank},
           {"warnings", data.warnings}};
    json var = json::array();
    for (int k = 0; k < data.column_variance.size(); ++k) var.push_back(data.column_variance(k));
    j["column_variance"] = std::move(var);
    return j;
}

dynamics::SteadyStateData dataset_from_json(const json& j) {
    dynamics::SteadyStateData data;
    data.Z = matrix_from_json(j.at("Z"));
    data.Y_hat = matrix_from_json(j.at("Y_hat"));
    data.K = j.at("K").get<int>();
    if (data.Z.cols() != data.K || data.Y_hat.cols() != data.K) {
        throw std::invalid_argument("dataset json: K disagrees with matrix shapes");
    }
    data.z_full_row_rank = j.value("z_full_row_rank", true);
    if (j.contains("column_variance")) {
        const auto& var = j.at("column_variance");
        data.column_variance.resize(var.size());
        for (std::size_t k = 0; k < var.size(); ++k) {
            data.column_variance(static_cast<int>(k)) = var.at(k).get<double>();
        }
    }
    if (j.contains("warnings")) {
        data.warnings = j.at("warnings").get<std::vector<std::string>>();
    }
    return data;
}

namespace {

json pairs_to_json(const std::vector<IndexPair>& pairs) {
    json out = json::array();
    for (const auto& [i, j] : pairs) out.push_back(json::array({i, j}));
    return out;
}

std::vector<IndexPair> pairs_from_json(const json& j) {
    std::vector<IndexPair> out;
    for (const auto& e : j) out.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    return out;
}

}  // namespace

json problem_to_json(const recovery::RecoveryProblem& p) {
    json c = json::array();
    for (int i = 0; i < p.c.size(); ++i) c.push_back(p.c(i));
    return json{{"Y_hat", matrix_to_json(p.Y_hat)},
                {"Z", matrix_to_json(p.Z)},
                {"S", pairs_to_json(p.S)},
                {"omega_b", pairs_to_json(p.omega_b)},
                {"c", std::move(c)},
                {"mode", p.mode == recovery::RecoveryMode::full_support ? "full" : "sparse"}};
}

recovery::RecoveryProblem problem_from_json(const json& j) {
    recovery::RecoveryProblem p;
    p.Y_hat = matrix_from_json(j.at("Y_hat"));
    p.Z = matrix_from_json(j.at("Z"));
    p.S = pairs_from_json(j.at("S"));
    p.omega_b = pairs_from_json(j.at("omega_b"));
    const auto& c = j.at("c");
    p.c.resize(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) p.c(static_cast<int>(i)) = c.at(i).get<double>();
    std::string mode = j.at("mode").get<std::string>();
    if (mode == "full") {
        p.mode = recovery::RecoveryMode::full_support;
    } else if (mode == "sparse") {
        p.mode = recovery::RecoveryMode::sparse;
    } else {
        throw std::invalid_argument("problem json: unknown mode '" + mode + "'");
    }
    p.validate();
    return p;
}

json result_to_json(const recovery::RecoveryResult& r) {
    return json{{"B", matrix_to_json(r.B)},
                {"D", matrix_to_json(r.D)},
                {"iterations", r.iterations},
                {"converged", r.converged},
                {"final_objective", r.final_objective},
                {"feasibility",
                 {{"negativity", r.feasibility.negativity},
                  {"off_support", r.feasibility.off_support},
                  {"diag", r.feasibility.diag},
                  {"row_sum", r.feasibility.row_sum}}}};
}

void write_trace_csv(std::ostream& out, const dynamics::OpinionTrace& trace) {
    int n = static_cast<int>(trace.samples.cols());
    out << "t";
    for (int i = 0; i < n; ++i) out << ",agent_" << i;
    out << "\n";
    out.precision(17);
    for (int t = 0; t < trace.samples.rows(); ++t) {
        out << t;
        for (int i = 0; i < n; ++i) out << "," << trace.samples(t, i);
        out << "\n";
    }
}

void write_objective_csv(std::ostream& out, const std::vector<double>& objective_trace) {
    out << "iter,objective,residual\n";
    out.precision(17);
    for (std::size_t i = 0; i < objective_trace.size(); ++i) {
        double resid = i == 0 ? 0.0 : std::abs(objective_trace[i] - objective_trace[i - 1]);
        out << i << "," << objective_trace[i] << "," << resid << "\n";
    }
}

EdgeList read_edge_list(std::istream& in) {
    EdgeList list;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ss(line);
        long i, j;
        if (!(ss >> i)) continue;  // blank or comment-only line
        if (!(ss >> j)) {
            throw std::invalid_argument("edge list line " + std::to_string(line_no) +
                                        ": expected 'i j [weight]'");
        }
        double w = 1.0;
        if (ss >> w) list.has_weights = true;
        if (i < 0 || j < 0) {
            throw std::invalid_argument("edge list line " + std::to_string(line_no) +
                                        ": ids must be non-negative");
        }
        list.edges.emplace_back(static_cast<int>(i), static_cast<int>(j), w);
        list.n = std::max(list.n, static_cast<int>(std::max(i, j)) + 1);
    }
    return list;
}

EdgeList read_edge_list_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open edge list: " + path);
    return read_edge_list(in);
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open json: " + path);
    json j;
    in >> j;
    return j;
}

void save_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write json: " + path);
    out << j.dump(2) << "\n";
}

}  // namespace socsense::io
