#include <doctest.h>

#include "socsense/graph.hpp"

#include <Eigen/LU>

#include <queue>
#include <random>
#include <set>

using namespace socsense;
using namespace socsense::graph;

namespace {

Matrix product_invariant(const TrustMatrix& w) {
    int n = w.n_ord();
    return (Matrix::Identity(n, n) - w.D).partialPivLu().solve(w.B);
}

/// Independent reachability oracle on an explicit adjacency set.
bool bfs_connected_undirected(int n, const std::vector<IndexPair>& edges) {
    std::vector<std::set<int>> adj(n);
    for (auto [i, j] : edges) {
        adj[i].insert(j);
        adj[j].insert(i);
    }
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
}

TrustMatrix random_instance(int n_ord, int n_s, double p, int d, std::uint64_t seed) {
    auto topo = gen_network(NetworkModelSpec::er(p), n_ord, seed);
    auto supp = place_stubborn(n_ord, n_s, PlacementSpec::d_regular(d), seed + 1);
    return build_trust_matrix(topo, supp, seed + 2);
}

}  // namespace

TEST_CASE("gen_network er edge counts") {
    auto empty = gen_network(NetworkModelSpec::er(0.0), 10, 7);
    CHECK(empty.edges.empty());

    auto complete = gen_network(NetworkModelSpec::er(1.0), 5, 7);
    CHECK(complete.edges.size() == 20);

    double total = 0.0;
    for (std::uint64_t s = 0; s < 200; ++s) {
        total += static_cast<double>(gen_network(NetworkModelSpec::er(0.1), 60, s).edges.size());
    }
    // Monte-Carlo oracle: directed count has mean 60*59*0.1 = 354 and the
    // 200-seed average stays within 3 sigma = 5.355.
    CHECK(std::abs(total / 200.0 - 354.0) < 5.355);
}

TEST_CASE("gen_network determinism and symmetry") {
    for (auto spec : {NetworkModelSpec::er(0.2), NetworkModelSpec::ba(2),
                      NetworkModelSpec::ws(2, 0.08)}) {
        auto a = gen_network(spec, 24, 99);
        auto b = gen_network(spec, 24, 99);
        CHECK(a.edges == b.edges);
        a.validate();
        for (auto [i, j] : a.edges) CHECK(a.has_edge(j, i));
    }
}

TEST_CASE("gen_network ba structure") {
    int n = 30, m = 2;
    auto topo = gen_network(NetworkModelSpec::ba(m), n, 3);
    // clique on m+1 vertices plus m undirected edges per new vertex
    std::size_t expected_undirected = m * (m + 1) / 2 + (n - m - 1) * m;
    CHECK(topo.edges.size() == 2 * expected_undirected);
    CHECK(bfs_connected_undirected(n, topo.edges));
    CHECK_THROWS(gen_network(NetworkModelSpec::ba(5), 5, 3));
}

TEST_CASE("gen_network ws structure") {
    int n = 40, b = 2;
    auto ring = gen_network(NetworkModelSpec::ws(b, 0.0), n, 5);
    CHECK(ring.edges.size() == static_cast<std::size_t>(2 * n * b));
    for (int i = 0; i < n; ++i) CHECK(ring.has_edge(i, (i + 1) % n));

    auto rewired = gen_network(NetworkModelSpec::ws(b, 0.08), n, 5);
    CHECK(rewired.edges.size() == static_cast<std::size_t>(2 * n * b));
    rewired.validate();
}

TEST_CASE("place_stubborn d_regular") {
    auto full = place_stubborn(4, 4, PlacementSpec::d_regular(4), 11);
    CHECK(full.edges.size() == 16);

    auto s = place_stubborn(60, 30, PlacementSpec::d_regular(5), 11);
    for (int deg : s.row_degrees()) CHECK(deg == 5);
    int d = 0;
    CHECK(s.is_regular(&d));
    CHECK(d == 5);
    CHECK_THROWS(place_stubborn(10, 3, PlacementSpec::d_regular(4), 11));
}

TEST_CASE("place_stubborn er_bipartite repairs empty rows") {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        auto s = place_stubborn(60, 30, PlacementSpec::er_bipartite(0.1), seed);
        for (int deg : s.row_degrees()) CHECK(deg >= 1);
        total += static_cast<double>(s.edges.size());
    }
    // Monte-Carlo oracle for the repair rule: mean = 60*(3 + 0.9^30) =
    // 182.543, 3 sigma of the 200-seed average = 2.591.
    CHECK(std::abs(total / 200.0 - 182.543) < 2.591);
}

TEST_CASE("build_trust_matrix normalization") {
    auto w = random_instance(60, 30, 0.1, 5, 2024);
    w.validate(1e-12);
    CHECK((w.D.diagonal().array() == 0.0).all());
    CHECK(spectral_norm(w.D) < 1.0);

    // single stubborn neighbor and nothing else -> weight 1
    NetworkTopology topo;
    topo.n_ord = 1;
    BipartiteSupport supp;
    supp.n_ord = 1;
    supp.n_s = 1;
    supp.edges = {{0, 0}};
    auto tiny = build_trust_matrix(topo, supp, 1);
    CHECK(tiny.B(0, 0) == doctest::Approx(1.0));

    BipartiteSupport empty_row;
    empty_row.n_ord = 1;
    empty_row.n_s = 1;
    CHECK_THROWS(build_trust_matrix(topo, empty_row, 1));
}

TEST_CASE("apply_ambiguity scalar examples") {
    TrustMatrix w;
    w.B = Matrix::Constant(1, 1, 0.5);
    w.D = Matrix::Constant(1, 1, 0.5);

    auto same = apply_ambiguity(w, Vector::Constant(1, 1.0));
    CHECK(same.B(0, 0) == doctest::Approx(0.5));
    CHECK(same.D(0, 0) == doctest::Approx(0.5));

    auto scaled = apply_ambiguity(w, Vector::Constant(1, 2.0));
    CHECK(scaled.B(0, 0) == doctest::Approx(1.0));
    CHECK(scaled.D(0, 0) == doctest::Approx(0.0));
    CHECK(product_invariant(w)(0, 0) == doctest::Approx(product_invariant(scaled)(0, 0)));

    CHECK_THROWS_WITH_AS(apply_ambiguity(w, Vector::Constant(1, 3.0)),
                         doctest::Contains("out of class"), std::invalid_argument);
}

TEST_CASE("ambiguity preserves the steady-state map") {
    std::mt19937_64 rng(5150);
    std::uniform_real_distribution<double> unif(0.1, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        auto w = random_instance(10, 4, 0.3, 2, 100 + trial);
        Vector lam(10);
        for (int i = 0; i < 10; ++i) {
            lam(i) = unif(rng) / (1.0 - w.D(i, i));  // keeps diag(D~) >= 0
        }
        auto tilde = apply_ambiguity(w, lam);
        tilde.validate(1e-9);
        CHECK((product_invariant(w) - product_invariant(tilde)).norm() < 1e-9);
    }
}

TEST_CASE("canonical_relative_trust") {
    TrustMatrix w;
    w.B = Matrix::Constant(1, 1, 0.5);
    w.D = Matrix::Constant(1, 1, 0.5);
    auto rel = canonical_relative_trust(w, Vector::Zero(1));
    CHECK(rel.B(0, 0) == doctest::Approx(1.0));
    CHECK(rel.D(0, 0) == doctest::Approx(0.0));

    // already at diag(D) = c: identity
    auto w2 = random_instance(8, 3, 0.3, 2, 17);
    auto rel2 = canonical_relative_trust(w2, Vector::Zero(8));
    CHECK((rel2.B - w2.B).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((rel2.D - w2.D).cwiseAbs().maxCoeff() < 1e-14);

    // constant on equivalence classes
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> unif(0.1, 1.0);
    Vector c = Vector::Constant(8, 0.25);
    for (int trial = 0; trial < 25; ++trial) {
        Vector lam(8);
        for (int i = 0; i < 8; ++i) lam(i) = unif(rng) / (1.0 - w2.D(i, i));
        auto tilde = apply_ambiguity(w2, lam);
        auto a = canonical_relative_trust(w2, c);
        auto b = canonical_relative_trust(tilde, c);
        CHECK((a.B - b.B).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((a.D - b.D).cwiseAbs().maxCoeff() < 1e-10);
    }

    TrustMatrix selfish;
    selfish.B = Matrix::Zero(1, 1);
    selfish.D = Matrix::Constant(1, 1, 1.0);
    CHECK_THROWS(canonical_relative_trust(selfish, Vector::Zero(1)));
    CHECK_THROWS(canonical_relative_trust(w, Vector::Constant(1, 1.0)));
}

TEST_CASE("validate_trust_matrix report") {
    auto topo = gen_network(NetworkModelSpec::er(0.3), 12, 9);
    auto supp = place_stubborn(12, 4, PlacementSpec::d_regular(2), 9);
    auto w = build_trust_matrix(topo, supp, 9);
    auto report = validate_trust_matrix(w, topo, supp);
    CHECK(report.row_sum_residual < 1e-12);
    CHECK(report.assumption2_ok);
    CHECK(report.support_ok);
    CHECK(report.spectral_norm_d < 1.0);
    CHECK(report.pass);

    // zero out a B row: assumption 2 violated (row renormalized onto D)
    TrustMatrix broken = w;
    double mass = broken.B.row(0).sum();
    broken.B.row(0).setZero();
    broken.D.row(0) /= (1.0 - mass);
    auto flagged = validate_trust_matrix(broken, topo, supp);
    CHECK_FALSE(flagged.assumption2_ok);
    CHECK_FALSE(flagged.pass);
}

TEST_CASE("validate connectivity flags") {
    // two 3-cliques with no links between them
    NetworkTopology topo;
    topo.n_ord = 6;
    for (int base : {0, 3}) {
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                if (i != j) topo.edges.emplace_back(base + i, base + j);
            }
        }
    }
    std::sort(topo.edges.begin(), topo.edges.end());
    CHECK_FALSE(bfs_connected_undirected(6, topo.edges));

    auto supp = place_stubborn(6, 2, PlacementSpec::d_regular(1), 4);
    auto w = build_trust_matrix(topo, supp, 4);
    auto report = validate_trust_matrix(w, topo, supp);
    CHECK_FALSE(report.weakly_connected);
    CHECK_FALSE(report.strongly_connected);
    CHECK_FALSE(report.pass);
}

TEST_CASE("support extraction round trip") {
    auto topo = gen_network(NetworkModelSpec::er(0.2), 10, 21);
    auto supp = place_stubborn(10, 5, PlacementSpec::er_bipartite(0.3), 21);
    auto w = build_trust_matrix(topo, supp, 21);
    CHECK(support_of_b(w.B).edges == supp.edges);
    CHECK(offdiag_support(w.D) == topo.edges);
}
