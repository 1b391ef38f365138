#pragma once

#include "socsense/common.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace socsense::graph {

/// Directed trust topology among the ordinary agents. Edge (i, j) means
/// "i places trust in j". Self-loops are excluded; self-trust lives on
/// diag(D) of the trust matrix instead.
struct NetworkTopology {
    int n_ord = 0;
    std::vector<IndexPair> edges;  // sorted, unique, i != j
    std::string model_tag;

    bool has_edge(int i, int j) const;
    std::vector<int> out_neighbors(int i) const;
    void validate() const;
};

/// Stubborn-to-ordinary adjacency: edge (i, j) means ordinary agent i
/// trusts stubborn agent j. Every row must be nonempty so that each
/// ordinary agent hears at least one stubborn agent.
struct BipartiteSupport {
    int n_ord = 0;
    int n_s = 0;
    std::vector<IndexPair> edges;  // sorted, unique

    std::vector<int> row_degrees() const;
    bool is_regular(int* degree = nullptr) const;
    void validate() const;
};

/// Row-stochastic trust structure in block form: ordinary agent i mixes
/// stubborn opinions through row i of B and ordinary opinions through
/// row i of D, with B*1 + D*1 = 1.
struct TrustMatrix {
    Matrix B;  // n_ord x n_s
    Matrix D;  // n_ord x n_ord

    int n_ord() const { return static_cast<int>(D.rows()); }
    int n_s() const { return static_cast<int>(B.cols()); }
    void validate(double tol = 1e-12) const;
};

/// Canonical representative of a trust equivalence class: diag(D') is
/// pinned to c, which removes the diagonal-scaling ambiguity.
struct RelativeTrustPair {
    Matrix B;
    Matrix D;
    Vector c;
};

struct NetworkModelSpec {
    enum class Kind { er, ba, ws };
    Kind kind = Kind::er;
    double p = 0.1;          // er: edge probability
    int m = 2;               // ba: edges added per incoming node
    int b = 2;               // ws: ring neighbors on each side
    double p_rewire = 0.08;  // ws: rewiring probability

    static NetworkModelSpec er(double p);
    static NetworkModelSpec ba(int m);
    static NetworkModelSpec ws(int b, double p_rewire);
};

struct PlacementSpec {
    enum class Kind { d_regular, er_bipartite };
    Kind kind = Kind::d_regular;
    int d = 5;        // d_regular: stubborn neighbors per ordinary agent
    double p_s = 0.1; // er_bipartite: edge probability

    static PlacementSpec d_regular(int d);
    static PlacementSpec er_bipartite(double p_s);
};

/// Generate an undirected ER/BA/WS graph and symmetrize it into directed
/// edge pairs. Deterministic in the seed.
NetworkTopology gen_network(const NetworkModelSpec& model, int n_ord, std::uint64_t seed);

/// Choose the stubborn-to-ordinary support. d_regular rows get exactly d
/// distinct neighbors; er_bipartite rows are i.i.d. with empty rows
/// repaired by one uniform edge.
BipartiteSupport place_stubborn(int n_ord, int n_s, const PlacementSpec& placement,
                                std::uint64_t seed);

/// Draw i.i.d. uniform(0,1] weights on the declared supports, zero
/// self-trust, and normalize each row to sum to one.
TrustMatrix build_trust_matrix(const NetworkTopology& topology, const BipartiteSupport& support,
                               std::uint64_t seed);

/// Diagonal rescaling that preserves (I-D)^{-1} B: B~ = Lambda B,
/// off(D~) = Lambda off(D), diag(D~) = 1 - Lambda (B 1 + off(D) 1).
/// Throws if the induced diagonal would be negative.
TrustMatrix apply_ambiguity(const TrustMatrix& w, const Vector& lambda);

/// Map (B, D) to the unique class representative with diag(D') = c.
RelativeTrustPair canonical_relative_trust(const TrustMatrix& w, const Vector& c);

struct ValidationReport {
    double row_sum_residual = 0.0;
    bool assumption2_ok = false;    // every ordinary agent trusts >= 1 stubborn
    bool support_ok = false;        // supp(B), supp(off(D)) within declared sets
    bool weakly_connected = false;  // of the ordinary subgraph
    bool strongly_connected = false;
    double spectral_norm_d = 0.0;
    bool pass = false;  // residual small, assumption 2, support, weak connectivity, ||D|| < 1
};

ValidationReport validate_trust_matrix(const TrustMatrix& w, const NetworkTopology& topology,
                                       const BipartiteSupport& support);

/// Support extraction helpers (strictly positive entries).
BipartiteSupport support_of_b(const Matrix& b);
std::vector<IndexPair> offdiag_support(const Matrix& d);
std::vector<IndexPair> all_offdiag_pairs(int n_ord);

}  // namespace socsense::graph
