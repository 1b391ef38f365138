#include "socsense/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

namespace socsense::harness {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

graph::NetworkModelSpec::Kind network_kind_from_string(const std::string& name) {
    if (name == "er") return graph::NetworkModelSpec::Kind::er;
    if (name == "ba") return graph::NetworkModelSpec::Kind::ba;
    if (name == "ws") return graph::NetworkModelSpec::Kind::ws;
    throw std::invalid_argument("unknown network model '" + name + "'");
}

std::string network_kind_to_string(graph::NetworkModelSpec::Kind kind) {
    switch (kind) {
        case graph::NetworkModelSpec::Kind::er: return "er";
        case graph::NetworkModelSpec::Kind::ba: return "ba";
        case graph::NetworkModelSpec::Kind::ws: return "ws";
    }
    return "?";
}

}  // namespace

double nmse(const Matrix& estimate, const Matrix& truth) {
    if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
        throw DimensionError("nmse: shape mismatch");
    }
    double denom = truth.squaredNorm();
    if (denom <= 0.0) throw std::invalid_argument("nmse: zero-norm truth");
    return (estimate - truth).squaredNorm() / denom;
}

double support_error(const Matrix& estimate, const Matrix& truth, double tau,
                     const std::vector<IndexPair>* S) {
    if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
        throw DimensionError("support_error: shape mismatch");
    }
    if (tau < 0.0) tau = 1e-4 * truth.maxCoeff();
    if (tau <= 0.0) throw std::invalid_argument("support_error: threshold must be positive");
    std::vector<IndexPair> all;
    if (!S) {
        all = graph::all_offdiag_pairs(static_cast<int>(truth.rows()));
        S = &all;
    }
    if (S->empty()) return 0.0;
    long mismatches = 0;
    for (const auto& [i, j] : *S) {
        bool est = std::abs(estimate(i, j)) > tau;
        bool tru = truth(i, j) > 0.0;
        if (est != tru) ++mismatches;
    }
    return static_cast<double>(mismatches) / static_cast<double>(S->size());
}

std::vector<IndexPair> expose_support(const std::vector<IndexPair>& true_support, int n_ord,
                                      double p_known, std::uint64_t seed) {
    if (p_known < 0.0 || p_known > 1.0) {
        throw std::invalid_argument("expose_support: p_known must be in [0, 1]");
    }
    std::vector<IndexPair> sorted_truth = true_support;
    std::sort(sorted_truth.begin(), sorted_truth.end());
    std::vector<IndexPair> zeros;
    for (const auto& pair : graph::all_offdiag_pairs(n_ord)) {
        if (!std::binary_search(sorted_truth.begin(), sorted_truth.end(), pair)) {
            zeros.push_back(pair);
        }
    }
    std::mt19937_64 rng(seed);
    std::shuffle(zeros.begin(), zeros.end(), rng);
    // Excluding a prefix keeps S nested as p_known grows for a fixed seed.
    auto exposed = static_cast<std::size_t>(
        std::llround(p_known * static_cast<double>(zeros.size())));
    std::vector<IndexPair> s(sorted_truth);
    s.insert(s.end(), zeros.begin() + exposed, zeros.end());
    std::sort(s.begin(), s.end());
    return s;
}

void ExperimentConfig::validate() const {
    if (trials < 1) throw std::invalid_argument("experiment: trials must be >= 1");
    if (sweep == "model") {
        if (model_grid.empty()) throw std::invalid_argument("experiment: empty model grid");
    } else if (sweep == "n_s" || sweep == "n_ord" || sweep == "p_known") {
        if (grid.empty()) throw std::invalid_argument("experiment: empty grid");
    } else {
        throw std::invalid_argument("experiment: unknown sweep '" + sweep + "'");
    }
}

int ExperimentConfig::grid_size() const {
    return sweep == "model" ? static_cast<int>(model_grid.size()) : static_cast<int>(grid.size());
}

std::string ExperimentConfig::point_label(int point) const {
    if (sweep == "model") return model_grid.at(point);
    double v = grid.at(point);
    if (v == std::floor(v)) return std::to_string(static_cast<long>(v));
    return std::to_string(v);
}

namespace {

struct PointSetup {
    graph::NetworkModelSpec network;
    int n_ord;
    int n_s;
    double p_known;
};

PointSetup setup_for_point(const ExperimentConfig& config, int point) {
    PointSetup s{config.network, config.n_ord, config.n_s, config.p_known};
    if (config.sweep == "n_s") {
        s.n_s = static_cast<int>(config.grid.at(point));
    } else if (config.sweep == "n_ord") {
        s.n_ord = static_cast<int>(config.grid.at(point));
        if (config.n_s_beta > 0.0) {
            s.n_s = static_cast<int>(std::ceil(config.n_s_beta * s.n_ord));
        }
    } else if (config.sweep == "p_known") {
        s.p_known = config.grid.at(point);
    } else {
        s.network.kind = network_kind_from_string(config.model_grid.at(point));
    }
    return s;
}

TrialRow run_trial(const ExperimentConfig& config, const PointSetup& setup, int point, int trial) {
    TrialRow row;
    row.sweep_label = config.point_label(point);
    row.sweep_value = config.sweep == "model" ? static_cast<double>(point) : config.grid.at(point);
    row.trial = trial;
    auto start = Clock::now();

    std::uint64_t seed = mix_seed(config.seed, static_cast<std::uint64_t>(point),
                                  static_cast<std::uint64_t>(trial));
    auto topology = graph::gen_network(setup.network, setup.n_ord, mix_seed(seed, 1));
    auto support = graph::place_stubborn(setup.n_ord, setup.n_s, config.placement, mix_seed(seed, 2));
    auto w = graph::build_trust_matrix(topology, support, mix_seed(seed, 3));
    Vector c = Vector::Constant(setup.n_ord, config.c_diag);
    auto truth = graph::canonical_relative_trust(w, c);

    dynamics::CollectorConfig cc;
    cc.model = config.collect.model;
    cc.sigma = config.collect.sigma;
    cc.horizon = config.collect.horizon;
    cc.samples = config.collect.samples;
    cc.burn_in = config.collect.burn_in;
    cc.t_max = config.collect.t_max;
    int K = config.collect.k_factor * setup.n_s;
    auto dataset = dynamics::collect_dataset(w, K, cc, mix_seed(seed, 4));

    auto true_support = graph::offdiag_support(truth.D);
    recovery::RecoveryProblem problem;
    problem.Y_hat = dataset.Y_hat;
    problem.Z = dataset.Z;
    problem.omega_b = support.edges;
    problem.c = c;
    problem.mode = config.mode;
    if (config.mode == recovery::RecoveryMode::full_support) {
        problem.S = true_support;
    } else {
        problem.S = expose_support(true_support, setup.n_ord, setup.p_known, mix_seed(seed, 5));
    }

    recovery::RecoveryResult result = config.mode == recovery::RecoveryMode::full_support
                                          ? recovery::solve_ls_full_support(problem, config.solver)
                                          : recovery::fista_solve(problem, config.solver);

    row.nmse_d = nmse(result.D, truth.D);
    row.nmse_b = nmse(result.B, truth.B);
    row.support_err = support_error(result.D, truth.D, config.support_tau, &problem.S);
    row.converged = result.converged;
    row.runtime_s = seconds_since(start);
    return row;
}

}  // namespace

ResultTable run_experiment(const ExperimentConfig& config) {
    config.validate();
    int points = config.grid_size();
    int total = points * config.trials;
    ResultTable table;
    table.rows.resize(total);

    int workers = config.workers > 0 ? config.workers
                                     : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min(workers, total));

    std::atomic<int> next{0};
    auto work = [&]() {
        while (true) {
            int task = next.fetch_add(1);
            if (task >= total) break;
            int point = task / config.trials;
            int trial = task % config.trials;
            TrialRow& row = table.rows[task];
            try {
                row = run_trial(config, setup_for_point(config, point), point, trial);
            } catch (const std::exception& e) {
                row.sweep_label = config.point_label(point);
                row.sweep_value =
                    config.sweep == "model" ? static_cast<double>(point) : config.grid.at(point);
                row.trial = trial;
                row.failed = true;
                row.error = e.what();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int i = 0; i < workers; ++i) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    return table;
}

bool ResultTable::any_failed() const {
    return std::any_of(rows.begin(), rows.end(), [](const TrialRow& r) { return r.failed; });
}

std::vector<PointSummary> summarize(const ResultTable& table) {
    std::vector<PointSummary> points;
    for (const auto& row : table.rows) {
        if (points.empty() || points.back().label != row.sweep_label) {
            PointSummary p;
            p.label = row.sweep_label;
            p.sweep_value = row.sweep_value;
            points.push_back(p);
        }
    }
    for (auto& p : points) {
        std::vector<double> d_vals, b_vals, s_vals;
        for (const auto& row : table.rows) {
            if (row.sweep_label != p.label || row.failed) continue;
            d_vals.push_back(row.nmse_d);
            b_vals.push_back(row.nmse_b);
            s_vals.push_back(row.support_err);
        }
        p.trials = static_cast<int>(d_vals.size());
        if (d_vals.empty()) continue;
        auto mean = [](const std::vector<double>& v) {
            return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        };
        p.mean_nmse_d = mean(d_vals);
        p.mean_nmse_b = mean(b_vals);
        p.mean_support_err = mean(s_vals);
        if (d_vals.size() > 1) {
            double acc = 0.0;
            for (double v : d_vals) acc += (v - p.mean_nmse_d) * (v - p.mean_nmse_d);
            p.stderr_nmse_d = std::sqrt(acc / (d_vals.size() - 1.0) / d_vals.size());
        }
        std::sort(d_vals.begin(), d_vals.end());
        std::size_t mid = d_vals.size() / 2;
        p.median_nmse_d = d_vals.size() % 2 == 1
                              ? d_vals[mid]
                              : 0.5 * (d_vals[mid - 1] + d_vals[mid]);
    }
    return points;
}

void write_results_csv(std::ostream& out, const ResultTable& table) {
    out << "sweep_value,trial,nmse_D,nmse_B,support_error,runtime_s,converged,failed,error\n";
    out.precision(12);
    for (const auto& r : table.rows) {
        out << r.sweep_label << "," << r.trial << "," << r.nmse_d << "," << r.nmse_b << ","
            << r.support_err << "," << r.runtime_s << "," << (r.converged ? 1 : 0) << ","
            << (r.failed ? 1 : 0) << "," << r.error << "\n";
    }
}

io::json summary_to_json(const std::vector<PointSummary>& points) {
    io::json out = io::json::array();
    for (const auto& p : points) {
        out.push_back({{"label", p.label},
                       {"sweep_value", p.sweep_value},
                       {"trials", p.trials},
                       {"mean_nmse_D", p.mean_nmse_d},
                       {"stderr_nmse_D", p.stderr_nmse_d},
                       {"median_nmse_D", p.median_nmse_d},
                       {"mean_nmse_B", p.mean_nmse_b},
                       {"mean_support_error", p.mean_support_err}});
    }
    return out;
}

ExperimentConfig experiment_config_from_json(const io::json& j) {
    ExperimentConfig c;
    c.sweep = j.value("sweep", c.sweep);
    if (j.contains("grid")) {
        if (c.sweep == "model") {
            c.model_grid = j.at("grid").get<std::vector<std::string>>();
        } else {
            c.grid = j.at("grid").get<std::vector<double>>();
        }
    }
    c.trials = j.value("trials", c.trials);
    c.n_ord = j.value("n_ord", c.n_ord);
    c.n_s = j.value("n_s", c.n_s);
    c.n_s_beta = j.value("n_s_beta", c.n_s_beta);
    if (j.contains("network")) {
        const auto& n = j.at("network");
        c.network.kind = network_kind_from_string(n.value("model", std::string("er")));
        c.network.p = n.value("p", c.network.p);
        c.network.m = n.value("m", c.network.m);
        c.network.b = n.value("b", c.network.b);
        c.network.p_rewire = n.value("p_rewire", c.network.p_rewire);
    }
    if (j.contains("placement")) {
        const auto& p = j.at("placement");
        std::string mode = p.value("mode", std::string("d_regular"));
        if (mode == "d_regular") {
            c.placement = graph::PlacementSpec::d_regular(p.value("d", 5));
        } else if (mode == "er_bipartite") {
            c.placement = graph::PlacementSpec::er_bipartite(p.value("p_s", 0.1));
        } else {
            throw std::invalid_argument("unknown placement mode '" + mode + "'");
        }
    }
    if (j.contains("collect")) {
        const auto& col = j.at("collect");
        c.collect.model.kind =
            dynamics::dynamics_kind_from_string(col.value("model", std::string("deterministic")));
        c.collect.model.gossip_weight = col.value("gossip_weight", 0.5);
        c.collect.sigma = col.value("sigma", 0.0);
        c.collect.k_factor = col.value("k_factor", 2);
        c.collect.horizon = col.value("horizon", 4000L);
        c.collect.samples = col.value("samples", 0);
        c.collect.burn_in = col.value("burn_in", -1L);
        c.collect.t_max = col.value("t_max", -1L);
    }
    if (j.contains("recovery")) {
        const auto& r = j.at("recovery");
        std::string mode = r.value("mode", std::string("sparse"));
        if (mode == "full") {
            c.mode = recovery::RecoveryMode::full_support;
        } else if (mode == "sparse") {
            c.mode = recovery::RecoveryMode::sparse;
        } else {
            throw std::invalid_argument("unknown recovery mode '" + mode + "'");
        }
        c.solver.lambda = r.value("lambda", -1.0);
        c.solver.gamma = r.value("gamma", 1e-3);
        c.solver.step = r.value("step", -1.0);
        c.solver.max_iters = r.value("max_iters", 40000);
        c.solver.tol = r.value("tol", 1e-10);
        c.solver.restart = r.value("restart", true);
        c.solver.backtracking = r.value("backtracking", false);
    }
    c.p_known = j.value("p_known", 0.0);
    c.c_diag = j.value("c", 0.0);
    c.support_tau = j.value("support_tau", -1.0);
    c.seed = j.value("seed", static_cast<std::uint64_t>(20240601));
    c.workers = j.value("workers", 0);
    c.validate();
    return c;
}

io::json experiment_config_to_json(const ExperimentConfig& c) {
    io::json j;
    j["sweep"] = c.sweep;
    if (c.sweep == "model") {
        j["grid"] = c.model_grid;
    } else {
        j["grid"] = c.grid;
    }
    j["trials"] = c.trials;
    j["n_ord"] = c.n_ord;
    j["n_s"] = c.n_s;
    j["n_s_beta"] = c.n_s_beta;
    j["network"] = {{"model", network_kind_to_string(c.network.kind)},
                    {"p", c.network.p},
                    {"m", c.network.m},
                    {"b", c.network.b},
                    {"p_rewire", c.network.p_rewire}};
    j["placement"] =
        c.placement.kind == graph::PlacementSpec::Kind::d_regular
            ? io::json{{"mode", "d_regular"}, {"d", c.placement.d}}
            : io::json{{"mode", "er_bipartite"}, {"p_s", c.placement.p_s}};
    j["collect"] = {{"model", dynamics::to_string(c.collect.model.kind)},
                    {"gossip_weight", c.collect.model.gossip_weight},
                    {"sigma", c.collect.sigma},
                    {"k_factor", c.collect.k_factor},
                    {"horizon", c.collect.horizon},
                    {"samples", c.collect.samples},
                    {"burn_in", c.collect.burn_in},
                    {"t_max", c.collect.t_max}};
    j["recovery"] = {{"mode", c.mode == recovery::RecoveryMode::full_support ? "full" : "sparse"},
                     {"lambda", c.solver.lambda},
                     {"gamma", c.solver.gamma},
                     {"step", c.solver.step},
                     {"max_iters", c.solver.max_iters},
                     {"tol", c.solver.tol},
                     {"restart", c.solver.restart},
                     {"backtracking", c.solver.backtracking}};
    j["p_known"] = c.p_known;
    j["c"] = c.c_diag;
    j["support_tau"] = c.support_tau;
    j["seed"] = c.seed;
    j["workers"] = c.workers;
    return j;
}

RealNetResult run_realnet(const io::EdgeList& list, const RealNetConfig& config) {
    int n = list.n;
    if (config.n_s < 1 || config.n_s >= n) {
        throw std::invalid_argument("run_realnet: n_s must be in [1, n)");
    }
    // Undirected adjacency with optional weights (last write wins on
    // duplicates).
    std::vector<std::vector<std::pair<int, double>>> adj(n);
    {
        std::vector<std::tuple<int, int, double>> und;
        und.reserve(2 * list.edges.size());
        for (const auto& [i, j, w] : list.edges) {
            if (i == j) continue;
            und.emplace_back(std::min(i, j), std::max(i, j), w);
        }
        std::sort(und.begin(), und.end());
        und.erase(std::unique(und.begin(), und.end(),
                              [](const auto& a, const auto& b) {
                                  return std::get<0>(a) == std::get<0>(b) &&
                                         std::get<1>(a) == std::get<1>(b);
                              }),
                  und.end());
        for (const auto& [i, j, w] : und) {
            adj[i].emplace_back(j, w);
            adj[j].emplace_back(i, w);
        }
    }

    // Stubborn agents: degrees closest to the median degree.
    std::vector<int> degree(n);
    for (int i = 0; i < n; ++i) degree[i] = static_cast<int>(adj[i].size());
    std::vector<int> by_deg(n);
    std::iota(by_deg.begin(), by_deg.end(), 0);
    std::vector<int> sorted_deg = degree;
    std::sort(sorted_deg.begin(), sorted_deg.end());
    int median = sorted_deg[n / 2];
    std::stable_sort(by_deg.begin(), by_deg.end(), [&](int a, int b) {
        return std::abs(degree[a] - median) < std::abs(degree[b] - median);
    });
    std::vector<char> stubborn(n, 0);
    for (int k = 0; k < config.n_s; ++k) stubborn[by_deg[k]] = 1;

    // Ordinary agents must hear at least one stubborn agent.
    std::vector<int> ord_ids;
    for (int i = 0; i < n; ++i) {
        if (stubborn[i]) continue;
        bool heard = false;
        for (const auto& [j, w] : adj[i]) {
            if (stubborn[j]) {
                heard = true;
                break;
            }
        }
        if (heard) ord_ids.push_back(i);
    }
    std::vector<int> stub_ids;
    for (int i = 0; i < n; ++i) {
        if (stubborn[i]) stub_ids.push_back(i);
    }
    int n_ord = static_cast<int>(ord_ids.size());
    int n_s = static_cast<int>(stub_ids.size());
    std::vector<int> ord_index(n, -1), stub_index(n, -1);
    for (int i = 0; i < n_ord; ++i) ord_index[ord_ids[i]] = i;
    for (int j = 0; j < n_s; ++j) stub_index[stub_ids[j]] = j;

    graph::NetworkTopology topo;
    topo.n_ord = n_ord;
    topo.model_tag = "ingested";
    graph::BipartiteSupport support;
    support.n_ord = n_ord;
    support.n_s = n_s;
    Matrix weight_b = Matrix::Zero(n_ord, n_s);
    Matrix weight_d = Matrix::Zero(n_ord, n_ord);
    for (int i = 0; i < n_ord; ++i) {
        for (const auto& [j, w] : adj[ord_ids[i]]) {
            if (stub_index[j] >= 0) {
                support.edges.emplace_back(i, stub_index[j]);
                weight_b(i, stub_index[j]) = w;
            } else if (ord_index[j] >= 0) {
                topo.edges.emplace_back(i, ord_index[j]);
                weight_d(i, ord_index[j]) = w;
            }
        }
    }
    std::sort(topo.edges.begin(), topo.edges.end());
    std::sort(support.edges.begin(), support.edges.end());

    graph::TrustMatrix w;
    if (list.has_weights) {
        w.B = weight_b;
        w.D = weight_d;
        for (int i = 0; i < n_ord; ++i) {
            double s = w.B.row(i).sum() + w.D.row(i).sum();
            if (s <= 0.0) throw std::runtime_error("run_realnet: zero-weight row");
            w.B.row(i) /= s;
            w.D.row(i) /= s;
        }
    } else {
        w = graph::build_trust_matrix(topo, support, mix_seed(config.seed, 3));
    }

    Vector c = Vector::Constant(n_ord, config.c_diag);
    graph::TrustMatrix estimand = w;
    if (config.model.kind == dynamics::DynamicsKind::broadcast_gossip) {
        estimand = dynamics::gossip_mean_matrix(w, config.model.gossip_weight);
    }
    auto truth = graph::canonical_relative_trust(estimand, c);

    RealNetResult result;
    result.n_ord = n_ord;
    result.n_s = n_s;
    result.edge_count = static_cast<long>(topo.edges.size());
    result.mean_degree = n_ord > 0 ? static_cast<double>(topo.edges.size()) / n_ord : 0.0;

    dynamics::CollectorConfig cc;
    cc.model = config.model;
    cc.sigma = config.sigma;
    cc.samples = config.samples;
    cc.burn_in = config.burn_in;
    cc.t_max = config.t_max;
    int K = config.k_factor * n_s;
    auto t0 = Clock::now();
    auto dataset = dynamics::collect_dataset(w, K, cc, mix_seed(config.seed, 4));
    result.collect_seconds = seconds_since(t0);

    recovery::RecoveryProblem problem;
    problem.Y_hat = dataset.Y_hat;
    problem.Z = dataset.Z;
    problem.S = graph::all_offdiag_pairs(n_ord);
    problem.omega_b = support.edges;
    problem.c = c;
    problem.mode = recovery::RecoveryMode::sparse;

    t0 = Clock::now();
    auto solved = recovery::fista_solve(problem, config.solver);
    result.solve_seconds = seconds_since(t0);
    result.iterations = solved.iterations;
    result.nmse_d = nmse(solved.D, truth.D);
    result.nmse_b = nmse(solved.B, truth.B);
    return result;
}

}  // namespace socsense::harness
