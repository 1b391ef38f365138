#pragma once

#include "socsense/common.hpp"

#include <functional>
#include <vector>

namespace socsense::recovery {

enum class RecoveryMode { full_support, sparse };

/// Inputs of one network sensing problem. S lists the admissible
/// off-diagonal entries of D (a superset of the true support), omega_b
/// the admissible entries of B, and c pins diag(D).
struct RecoveryProblem {
    Matrix Y_hat;  // n_ord x K
    Matrix Z;      // n_s x K
    std::vector<IndexPair> S;
    std::vector<IndexPair> omega_b;
    Vector c;
    RecoveryMode mode = RecoveryMode::sparse;

    int n_ord() const { return static_cast<int>(Y_hat.rows()); }
    int n_s() const { return static_cast<int>(Z.rows()); }
    int K() const { return static_cast<int>(Z.cols()); }
    void validate() const;

    /// 0/1 masks of the admissible supports (diag excluded from the D mask).
    Matrix b_mask() const;
    Matrix d_mask() const;
};

struct SolverConfig {
    double lambda = -1.0;  // l1 weight; < 0 selects n * 1e-12 * ||Y_hat Z^dag||_F
    double gamma = 1e-3;   // row-stochasticity penalty
    double step = -1.0;    // fixed step; < 0 selects 1/L from estimate_lipschitz
    int max_iters = 40000;
    double tol = 1e-10;    // relative objective change
    bool restart = true;   // reset momentum when the objective increases
    bool backtracking = false;     // shrink the step until the quadratic model majorizes f
    double backtrack_shrink = 0.5;

    /// Optional warm start; any feasible point is admissible. Empty
    /// matrices select the default (uniform B rows, D = Diag(c)).
    Matrix warm_b;
    Matrix warm_d;

    /// Test hook, called with each prox iterate.
    std::function<void(const Matrix&, const Matrix&)> iterate_callback;
};

struct FeasibilityResiduals {
    double negativity = 0.0;    // most negative entry, as a magnitude
    double off_support = 0.0;   // largest entry outside the masks
    double diag = 0.0;          // max |diag(D) - c|
    double row_sum = 0.0;       // max |B 1 + D 1 - 1|
    double max() const;
};

struct RecoveryResult {
    Matrix B;
    Matrix D;
    std::vector<double> objective_trace;
    int iterations = 0;
    FeasibilityResiduals feasibility;
    bool converged = false;
    double final_objective = 0.0;
};

/// Right pseudo-inverse via column-pivoted QR of Z^T; Z Z^dag = I.
/// Throws naming the deficient rank if Z does not have full row rank.
Matrix pseudo_inverse_right(const Matrix& Z, double tol = 1e-10);

/// ||(I - D) Y_hat Z^dag - B||_F^2 + gamma ||B 1 + D 1 - 1||_2^2.
double objective_f(const Matrix& B, const Matrix& D, const Matrix& Y_hat, const Matrix& Z_dag,
                   double gamma);

/// Analytic gradient of objective_f, as (grad_B, grad_D).
std::pair<Matrix, Matrix> grad_f(const Matrix& B, const Matrix& D, const Matrix& Y_hat,
                                 const Matrix& Z_dag, double gamma);

/// One-sided soft threshold: u(x) * max{0, x - tau}, elementwise.
double soft_threshold_one_sided(double x, double tau);
Matrix soft_threshold_one_sided(const Matrix& x, double tau);

/// Projection onto the feasible set plus the l1 prox on off-diagonal D:
/// clamp B to the nonnegative orthant on omega_b, soft-threshold off(D)
/// on S, pin diag(D) = c.
std::pair<Matrix, Matrix> prox_project(const Matrix& B_tilde, const Matrix& D_tilde, double tau,
                                       const RecoveryProblem& problem);

/// Lipschitz constant of grad f via power iteration on the per-row
/// Hessian operator, with a 10% safety margin.
double estimate_lipschitz(const Matrix& Y_hat, const Matrix& Z_dag, double gamma);

/// Accelerated proximal gradient on the penalized objective. Deterministic
/// given inputs; throws if the objective diverges past 1e6x its initial
/// value (suggests reducing the step).
RecoveryResult fista_solve(const RecoveryProblem& problem, const SolverConfig& config);

/// Full-support least squares: fista with lambda = 0 followed by a row
/// rescaling that restores exact row sums.
RecoveryResult solve_ls_full_support(const RecoveryProblem& problem, const SolverConfig& config);

/// Exhaustive l0 search at desk scale: per row, enumerate supports of
/// size 0..k_max inside S_i and keep the sparsest one whose constrained
/// least-squares residual is <= epsilon.
RecoveryResult brute_force_l0(const RecoveryProblem& problem, int k_max, double epsilon = 1e-9);

namespace detail {
/// min ||A u - y||^2 subject to sum(u) = target, u >= 0, by an active-set
/// iteration on the KKT system. Sizes here are tiny (brute-force rows).
Vector nnls_with_sum(const Matrix& A, const Vector& y, double target, double* residual = nullptr);
}  // namespace detail

}  // namespace socsense::recovery
