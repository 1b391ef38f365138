#include "socsense/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <set>

namespace socsense {

double spectral_norm(const Matrix& a, int max_iters, double tol) {
    if (a.size() == 0) return 0.0;
    Vector v = Vector::Ones(a.cols());
    v.normalize();
    double value = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        Vector w = a.transpose() * (a * v);
        double norm = w.norm();
        if (norm == 0.0) return 0.0;
        w /= norm;
        double next = std::sqrt(norm);
        if (std::abs(next - value) <= tol * std::max(1.0, next)) {
            return next;
        }
        value = next;
        v = w;
    }
    return value;
}

}  // namespace socsense

namespace socsense::graph {

namespace {

void sort_unique(std::vector<IndexPair>& edges) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

/// Symmetrize an undirected edge set {i < j} into directed pairs.
NetworkTopology from_undirected(int n_ord, const std::set<IndexPair>& und, std::string tag) {
    NetworkTopology topo;
    topo.n_ord = n_ord;
    topo.model_tag = std::move(tag);
    topo.edges.reserve(2 * und.size());
    for (const auto& [i, j] : und) {
        topo.edges.emplace_back(i, j);
        topo.edges.emplace_back(j, i);
    }
    sort_unique(topo.edges);
    return topo;
}

std::set<IndexPair> gen_er_undirected(int n, double p, std::mt19937_64& rng) {
    std::set<IndexPair> edges;
    if (p <= 0.0) return edges;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (p >= 1.0 || unif(rng) < p) edges.insert({i, j});
        }
    }
    return edges;
}

/// Preferential attachment seeded with a clique on m+1 vertices; each
/// incoming node attaches to m distinct targets with probability
/// proportional to degree.
std::set<IndexPair> gen_ba_undirected(int n, int m, std::mt19937_64& rng) {
    std::set<IndexPair> edges;
    std::vector<int> repeated;  // vertex v appears deg(v) times
    int m0 = m + 1;
    for (int i = 0; i < m0; ++i) {
        for (int j = i + 1; j < m0; ++j) {
            edges.insert({i, j});
            repeated.push_back(i);
            repeated.push_back(j);
        }
    }
    for (int v = m0; v < n; ++v) {
        std::set<int> targets;
        while (static_cast<int>(targets.size()) < m) {
            std::uniform_int_distribution<std::size_t> pick(0, repeated.size() - 1);
            targets.insert(repeated[pick(rng)]);
        }
        for (int t : targets) {
            edges.insert({std::min(v, t), std::max(v, t)});
            repeated.push_back(v);
            repeated.push_back(t);
        }
    }
    return edges;
}

std::set<IndexPair> gen_ws_undirected(int n, int b, double p_rewire, std::mt19937_64& rng) {
    std::set<IndexPair> edges;
    for (int i = 0; i < n; ++i) {
        for (int j = 1; j <= b; ++j) {
            int k = (i + j) % n;
            if (i != k) edges.insert({std::min(i, k), std::max(i, k)});
        }
    }
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int i = 0; i < n; ++i) {
        for (int j = 1; j <= b; ++j) {
            int k = (i + j) % n;
            if (i == k) continue;
            IndexPair e{std::min(i, k), std::max(i, k)};
            if (edges.count(e) == 0) continue;  // already rewired away
            if (unif(rng) >= p_rewire) continue;
            // Uniform new endpoint avoiding self-loops and duplicates.
            int t = pick(rng);
            int attempts = 0;
            while ((t == i || edges.count({std::min(i, t), std::max(i, t)}) > 0) &&
                   attempts < 8 * n) {
                t = pick(rng);
                ++attempts;
            }
            if (attempts >= 8 * n) continue;  // node saturated, keep edge
            edges.erase(e);
            edges.insert({std::min(i, t), std::max(i, t)});
        }
    }
    return edges;
}

}  // namespace

NetworkModelSpec NetworkModelSpec::er(double p) {
    NetworkModelSpec s;
    s.kind = Kind::er;
    s.p = p;
    return s;
}

NetworkModelSpec NetworkModelSpec::ba(int m) {
    NetworkModelSpec s;
    s.kind = Kind::ba;
    s.m = m;
    return s;
}

NetworkModelSpec NetworkModelSpec::ws(int b, double p_rewire) {
    NetworkModelSpec s;
    s.kind = Kind::ws;
    s.b = b;
    s.p_rewire = p_rewire;
    return s;
}

PlacementSpec PlacementSpec::d_regular(int d) {
    PlacementSpec s;
    s.kind = Kind::d_regular;
    s.d = d;
    return s;
}

PlacementSpec PlacementSpec::er_bipartite(double p_s) {
    PlacementSpec s;
    s.kind = Kind::er_bipartite;
    s.p_s = p_s;
    return s;
}

bool NetworkTopology::has_edge(int i, int j) const {
    return std::binary_search(edges.begin(), edges.end(), IndexPair{i, j});
}

std::vector<int> NetworkTopology::out_neighbors(int i) const {
    std::vector<int> out;
    auto lo = std::lower_bound(edges.begin(), edges.end(), IndexPair{i, -1});
    for (auto it = lo; it != edges.end() && it->first == i; ++it) out.push_back(it->second);
    return out;
}

void NetworkTopology::validate() const {
    for (const auto& [i, j] : edges) {
        if (i == j) throw std::invalid_argument("topology: self-loop at vertex " + std::to_string(i));
        if (i < 0 || j < 0 || i >= n_ord || j >= n_ord) {
            throw std::invalid_argument("topology: vertex id out of range");
        }
    }
}

std::vector<int> BipartiteSupport::row_degrees() const {
    std::vector<int> deg(n_ord, 0);
    for (const auto& [i, j] : edges) {
        if (i < 0 || i >= n_ord || j < 0 || j >= n_s) {
            throw std::invalid_argument("bipartite support: index out of range");
        }
        ++deg[i];
    }
    return deg;
}

bool BipartiteSupport::is_regular(int* degree) const {
    auto deg = row_degrees();
    if (deg.empty()) return false;
    for (int d : deg) {
        if (d != deg[0]) return false;
    }
    if (degree) *degree = deg[0];
    return true;
}

void BipartiteSupport::validate() const {
    for (int d : row_degrees()) {
        if (d == 0) {
            throw std::invalid_argument(
                "bipartite support: an ordinary agent has no stubborn neighbor");
        }
    }
}

void TrustMatrix::validate(double tol) const {
    if (B.rows() != D.rows() || D.rows() != D.cols()) {
        throw DimensionError("trust matrix: inconsistent block dimensions");
    }
    if ((B.array() < 0).any() || (D.array() < 0).any()) {
        throw std::invalid_argument("trust matrix: negative entry");
    }
    Vector row_sums = B.rowwise().sum() + D.rowwise().sum();
    double resid = (row_sums.array() - 1.0).abs().maxCoeff();
    if (resid > tol) {
        throw std::invalid_argument("trust matrix: row sums deviate from 1 by " +
                                    std::to_string(resid));
    }
}

NetworkTopology gen_network(const NetworkModelSpec& model, int n_ord, std::uint64_t seed) {
    if (n_ord < 2) throw std::invalid_argument("gen_network: n_ord must be >= 2");
    std::mt19937_64 rng(seed);
    switch (model.kind) {
        case NetworkModelSpec::Kind::er: {
            if (model.p < 0.0 || model.p > 1.0) {
                throw std::invalid_argument("gen_network: ER p must be in [0,1]");
            }
            return from_undirected(n_ord, gen_er_undirected(n_ord, model.p, rng), "er");
        }
        case NetworkModelSpec::Kind::ba: {
            if (model.m < 1) throw std::invalid_argument("gen_network: BA m must be >= 1");
            if (model.m >= n_ord) {
                throw std::invalid_argument("gen_network: BA requires m < n_ord");
            }
            return from_undirected(n_ord, gen_ba_undirected(n_ord, model.m, rng), "ba");
        }
        case NetworkModelSpec::Kind::ws: {
            if (model.b < 1) throw std::invalid_argument("gen_network: WS b must be >= 1");
            if (model.p_rewire < 0.0 || model.p_rewire > 1.0) {
                throw std::invalid_argument("gen_network: WS rewiring prob must be in [0,1]");
            }
            return from_undirected(n_ord, gen_ws_undirected(n_ord, model.b, model.p_rewire, rng),
                                   "ws");
        }
    }
    throw std::logic_error("gen_network: unknown model kind");
}

BipartiteSupport place_stubborn(int n_ord, int n_s, const PlacementSpec& placement,
                                std::uint64_t seed) {
    if (n_s < 1) throw std::invalid_argument("place_stubborn: n_s must be >= 1");
    if (n_ord < 1) throw std::invalid_argument("place_stubborn: n_ord must be >= 1");
    std::mt19937_64 rng(seed);
    BipartiteSupport support;
    support.n_ord = n_ord;
    support.n_s = n_s;
    switch (placement.kind) {
        case PlacementSpec::Kind::d_regular: {
            int d = placement.d;
            if (d < 1) throw std::invalid_argument("place_stubborn: d must be >= 1");
            if (d > n_s) throw std::invalid_argument("place_stubborn: d exceeds n_s");
            std::vector<int> pool(n_s);
            for (int i = 0; i < n_ord; ++i) {
                for (int j = 0; j < n_s; ++j) pool[j] = j;
                // Partial Fisher-Yates: first d entries are a uniform subset.
                for (int k = 0; k < d; ++k) {
                    std::uniform_int_distribution<int> pick(k, n_s - 1);
                    std::swap(pool[k], pool[pick(rng)]);
                    support.edges.emplace_back(i, pool[k]);
                }
            }
            break;
        }
        case PlacementSpec::Kind::er_bipartite: {
            if (placement.p_s < 0.0 || placement.p_s > 1.0) {
                throw std::invalid_argument("place_stubborn: p_s must be in [0,1]");
            }
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            std::uniform_int_distribution<int> pick(0, n_s - 1);
            for (int i = 0; i < n_ord; ++i) {
                std::size_t before = support.edges.size();
                for (int j = 0; j < n_s; ++j) {
                    if (placement.p_s >= 1.0 || unif(rng) < placement.p_s) {
                        support.edges.emplace_back(i, j);
                    }
                }
                if (support.edges.size() == before) {
                    support.edges.emplace_back(i, pick(rng));  // repair empty row
                }
            }
            break;
        }
    }
    sort_unique(support.edges);
    return support;
}

TrustMatrix build_trust_matrix(const NetworkTopology& topology, const BipartiteSupport& support,
                               std::uint64_t seed) {
    if (topology.n_ord != support.n_ord) {
        throw DimensionError("build_trust_matrix: topology/support size mismatch");
    }
    int n_ord = topology.n_ord;
    int n_s = support.n_s;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto draw = [&] { return 1.0 - unif(rng); };  // uniform on (0, 1]

    TrustMatrix w;
    w.B = Matrix::Zero(n_ord, n_s);
    w.D = Matrix::Zero(n_ord, n_ord);
    for (const auto& [i, j] : support.edges) w.B(i, j) = draw();
    for (const auto& [i, j] : topology.edges) w.D(i, j) = draw();
    for (int i = 0; i < n_ord; ++i) {
        double s = w.B.row(i).sum() + w.D.row(i).sum();
        if (s <= 0.0) {
            throw std::invalid_argument("build_trust_matrix: agent " + std::to_string(i) +
                                        " has no neighbors to normalize over");
        }
        w.B.row(i) /= s;
        w.D.row(i) /= s;
    }
    return w;
}

TrustMatrix apply_ambiguity(const TrustMatrix& w, const Vector& lambda) {
    int n_ord = w.n_ord();
    if (lambda.size() != n_ord) throw DimensionError("apply_ambiguity: lambda size mismatch");
    if ((lambda.array() <= 0.0).any()) {
        throw std::invalid_argument("apply_ambiguity: lambda must be strictly positive");
    }
    w.validate(1e-9);

    TrustMatrix out;
    out.B = lambda.asDiagonal() * w.B;
    out.D = lambda.asDiagonal() * w.D;
    Vector diag_in = w.D.diagonal();
    Vector off_row_sums = w.D.rowwise().sum() - diag_in;
    Vector new_diag =
        Vector::Ones(n_ord) - lambda.asDiagonal() * (w.B.rowwise().sum() + off_row_sums);
    for (int i = 0; i < n_ord; ++i) {
        if (new_diag(i) < -1e-12) {
            throw std::invalid_argument("apply_ambiguity: ambiguity out of class, diag " +
                                        std::to_string(i) + " would be " +
                                        std::to_string(new_diag(i)));
        }
        out.D(i, i) = std::max(0.0, new_diag(i));
    }
    return out;
}

RelativeTrustPair canonical_relative_trust(const TrustMatrix& w, const Vector& c) {
    int n_ord = w.n_ord();
    if (c.size() != n_ord) throw DimensionError("canonical_relative_trust: c size mismatch");
    if ((c.array() < 0.0).any() || (c.array() >= 1.0).any()) {
        throw std::invalid_argument("canonical_relative_trust: c must satisfy 0 <= c < 1");
    }
    Vector diag_in = w.D.diagonal();
    for (int i = 0; i < n_ord; ++i) {
        if (1.0 - diag_in(i) < 1e-12) {
            throw std::invalid_argument("canonical_relative_trust: self-trust of agent " +
                                        std::to_string(i) + " is 1, scaling singular");
        }
    }
    Vector scale = (Vector::Ones(n_ord) - c).cwiseQuotient(Vector::Ones(n_ord) - diag_in);
    RelativeTrustPair out;
    out.B = scale.asDiagonal() * w.B;
    out.D = scale.asDiagonal() * w.D;
    out.D.diagonal() = c;
    out.c = c;
    return out;
}

namespace {

/// Connectivity of the ordinary subgraph via BFS; weak treats edges as
/// undirected, strong additionally checks the reversed graph.
std::pair<bool, bool> connectivity(const NetworkTopology& topology) {
    int n = topology.n_ord;
    if (n == 0) return {false, false};
    std::vector<std::vector<int>> fwd(n), rev(n), und(n);
    for (const auto& [i, j] : topology.edges) {
        fwd[i].push_back(j);
        rev[j].push_back(i);
        und[i].push_back(j);
        und[j].push_back(i);
    }
    auto reach_all = [n](const std::vector<std::vector<int>>& adj) {
        std::vector<char> seen(n, 0);
        std::queue<int> q;
        q.push(0);
        seen[0] = 1;
        int count = 1;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int v : adj[u]) {
                if (!seen[v]) {
                    seen[v] = 1;
                    ++count;
                    q.push(v);
                }
            }
        }
        return count == n;
    };
    bool weak = reach_all(und);
    bool strong = weak && reach_all(fwd) && reach_all(rev);
    return {weak, strong};
}

}  // namespace

ValidationReport validate_trust_matrix(const TrustMatrix& w, const NetworkTopology& topology,
                                       const BipartiteSupport& support) {
    ValidationReport report;
    Vector row_sums = w.B.rowwise().sum() + w.D.rowwise().sum();
    report.row_sum_residual = (row_sums.array() - 1.0).abs().maxCoeff();

    report.assumption2_ok = true;
    for (int i = 0; i < w.n_ord(); ++i) {
        if (w.B.row(i).maxCoeff() <= 0.0) {
            report.assumption2_ok = false;
            break;
        }
    }

    report.support_ok = true;
    for (int i = 0; i < w.B.rows() && report.support_ok; ++i) {
        for (int j = 0; j < w.B.cols(); ++j) {
            if (w.B(i, j) > 0.0 &&
                !std::binary_search(support.edges.begin(), support.edges.end(), IndexPair{i, j})) {
                report.support_ok = false;
                break;
            }
        }
    }
    for (int i = 0; i < w.D.rows() && report.support_ok; ++i) {
        for (int j = 0; j < w.D.cols(); ++j) {
            if (i != j && w.D(i, j) > 0.0 && !topology.has_edge(i, j)) {
                report.support_ok = false;
                break;
            }
        }
    }

    auto [weak, strong] = connectivity(topology);
    report.weakly_connected = weak;
    report.strongly_connected = strong;
    report.spectral_norm_d = spectral_norm(w.D);
    report.pass = report.row_sum_residual < 1e-9 && report.assumption2_ok && report.support_ok &&
                  report.weakly_connected && report.spectral_norm_d < 1.0;
    return report;
}

BipartiteSupport support_of_b(const Matrix& b) {
    BipartiteSupport s;
    s.n_ord = static_cast<int>(b.rows());
    s.n_s = static_cast<int>(b.cols());
    for (int i = 0; i < b.rows(); ++i) {
        for (int j = 0; j < b.cols(); ++j) {
            if (b(i, j) > 0.0) s.edges.emplace_back(i, j);
        }
    }
    return s;
}

std::vector<IndexPair> offdiag_support(const Matrix& d) {
    std::vector<IndexPair> s;
    for (int i = 0; i < d.rows(); ++i) {
        for (int j = 0; j < d.cols(); ++j) {
            if (i != j && d(i, j) > 0.0) s.emplace_back(i, j);
        }
    }
    return s;
}

std::vector<IndexPair> all_offdiag_pairs(int n_ord) {
    std::vector<IndexPair> s;
    s.reserve(static_cast<std::size_t>(n_ord) * (n_ord - 1));
    for (int i = 0; i < n_ord; ++i) {
        for (int j = 0; j < n_ord; ++j) {
            if (i != j) s.emplace_back(i, j);
        }
    }
    return s;
}

}  // namespace socsense::graph
