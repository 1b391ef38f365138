#pragma once

#include "socsense/common.hpp"
#include "socsense/graph.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace socsense::identify {

/// Stacked data matrix [Y_hat^T  Z^T], K x (n_ord + n_s). Column j < n_ord
/// corresponds to an off-diagonal unknown of D, column n_ord + j to an
/// unknown of B.
Matrix stacked_data_matrix(const Matrix& Y_hat, const Matrix& Z);

/// Numerical rank with threshold max(rows, cols) * eps * sigma_max.
int numerical_rank(const Matrix& a);

/// Per-row uniqueness certificate for the full-support least squares:
/// rank of the selected columns >= |omega_b_i| + |S_i| - 1, counting the
/// row-sum equality as one extra equation. For exactly noiseless
/// steady-state data that equation is redundant (every column of the
/// stacked matrix is Z^T times coefficients summing to one), so demand
/// full column rank there. Column ids in s_cols index D-columns
/// (0-based), b_cols index B-columns (0-based, offset applied
/// internally).
bool check_rank_full(const Matrix& a_tilde, const std::vector<int>& s_cols,
                     const std::vector<int>& b_cols, int n_ord);

/// Per-row spark certificate for the l0 problem: every subset of S_i of
/// size min(2 k_i, |S_i|) joined with omega_b must have full column rank.
/// Guarded to |S_i| <= 20, k_i <= 5.
bool check_spark_partial(const Matrix& a_tilde, const std::vector<int>& s_cols,
                         const std::vector<int>& b_cols, int k_i, int n_ord);

/// Binary entropy in nats; 0 at the boundary by continuity.
double binary_entropy(double x);

/// Smallest beta satisfying the degree condition
/// d - 1 = (H(alpha) + beta' H(alpha / beta')) / (alpha log(beta' / alpha))
/// with beta' > alpha, solved by bisection. Returns the asymptotic value
/// beta = beta'; for finite n pass n > 0 to add the d/n correction.
double theorem1_min_beta(double alpha, int d, double finite_n = 0.0);

/// Relative-trust magnitude condition: b_min (2d - 3) - 1 - 2 b_max > 0.
bool theorem1_value_condition(double b_min, double b_max, int d);

struct FailureBound {
    double leading = 0.0;         // (d / beta)^4 (d - 1) / n^2
    double order_exponent = 0.0;  // 2 - (d - 1)(d - 3)
};

FailureBound theorem1_failure_bound(int d, double beta, double n_i);

/// Asymptotic stubborn budget: n_s / (n - n_s) >= 2p.
double asymptotic_budget(double p);

struct ExpanderSpec {
    double alpha = 0.5;
    double delta = 0.5;
    int d_l = 1;
    int d_u = 1;
    double a_min = 0.0;
    double a_max = 0.0;
};

struct ExpanderWitness {
    bool certified = false;
    std::vector<int> violating_set;  // empty when certified
    int edge_count = 0;              // |E(S, B)| of the witness
    int neighbor_count = 0;          // |N(S)| of the witness
    int d_l = 0;
    int d_u = 0;
};

/// Exhaustive check of delta |E(S, B)| <= |N(S)| over all left subsets of
/// size <= alpha * n_ord. Guarded to n_ord <= 20.
ExpanderWitness is_expander(const graph::BipartiteSupport& support, double alpha, double delta);

struct Rip1Report {
    int trials = 0;
    int lower_violations = 0;
    int upper_violations = 0;
    int inverse_violations = 0;  // against the (I - D')^{-T} bound
    double lower_bound = 0.0;    // a_min delta d_l - a_max (d_u - delta d_l)
    double upper_bound = 0.0;    // d_u a_max
    double margin = 0.0;         // smallest slack of ||A x||_1 over the lower bound
    bool certified = false;
};

/// Monte-Carlo check of the RIP-1 sandwich on random k-sparse vectors,
/// k <= alpha * n. Columns of A are the left vertices. When d_prime is
/// given, also checks upsilon* ||x||_1 <= ||A (I - D')^{-T} x||_1.
/// Set require_certified = false to probe supports that fail expansion.
Rip1Report rip1_check(const Matrix& a, const ExpanderSpec& spec, int trials, std::uint64_t seed,
                      const Matrix* d_prime = nullptr, bool require_certified = true);

/// upsilon* = b_min delta d_l - b_max (d_u - delta d_l) - (1 - d_l b_min);
/// positive means unique sparse solutions survive the inverse perturbation.
double corollary1_margin(double b_min, double b_max, int d_l, int d_u, double delta);

struct RowDeletionReport {
    double empirical = 0.0;            // fraction of deletions keeping degrees in [d-1, d]
    double analytic_lower_bound = 0.0; // 1 - n^2 (d - 1) (d / n_s)^4
    int trials = 0;
};

/// Delete d random stubborn vertices and check every ordinary degree
/// stays in [d-1, d]; requires a d-regular support.
RowDeletionReport row_deletion_degree_check(const graph::BipartiteSupport& support, int trials,
                                            std::uint64_t seed);

}  // namespace socsense::identify
