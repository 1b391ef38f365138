#include "socsense/recovery.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <random>

namespace socsense::recovery {

namespace {

double objective_m(const Matrix& B, const Matrix& D, const Matrix& M, double gamma) {
    Matrix resid = M - D * M - B;
    Vector row_sums = B.rowwise().sum() + D.rowwise().sum() - Vector::Ones(B.rows());
    return resid.squaredNorm() + gamma * row_sums.squaredNorm();
}

void grad_m(const Matrix& B, const Matrix& D, const Matrix& M, double gamma, Matrix& grad_b,
            Matrix& grad_d) {
    Matrix resid = M - D * M - B;
    Vector penalty = 2.0 * gamma * (B.rowwise().sum() + D.rowwise().sum() - Vector::Ones(B.rows()));
    grad_b = -2.0 * resid;
    grad_b.colwise() += penalty;
    grad_d = -2.0 * (resid * M.transpose());
    grad_d.colwise() += penalty;
}

struct Masks {
    Matrix b;
    Matrix d;
};

Masks build_masks(const RecoveryProblem& problem) {
    Masks m;
    m.b = problem.b_mask();
    m.d = problem.d_mask();
    return m;
}

void prox_masked(const Matrix& B_tilde, const Matrix& D_tilde, double tau, const Masks& masks,
                 const Vector& c, Matrix& B, Matrix& D) {
    B = B_tilde.cwiseMax(0.0).cwiseProduct(masks.b);
    D = soft_threshold_one_sided(D_tilde, tau).cwiseProduct(masks.d);
    D.diagonal() = c;
}

FeasibilityResiduals feasibility_of(const Matrix& B, const Matrix& D, const Masks& masks,
                                    const Vector& c) {
    FeasibilityResiduals f;
    f.negativity = std::max(0.0, -std::min(B.minCoeff(), D.minCoeff()));
    Matrix ones_b = Matrix::Ones(B.rows(), B.cols());
    Matrix ones_d = Matrix::Ones(D.rows(), D.cols());
    double off_b = (B.cwiseProduct(ones_b - masks.b)).cwiseAbs().maxCoeff();
    Matrix d_off_mask = ones_d - masks.d;
    d_off_mask.diagonal().setZero();  // diagonal is governed by c, not the mask
    double off_d = (D.cwiseProduct(d_off_mask)).cwiseAbs().maxCoeff();
    f.off_support = std::max(off_b, off_d);
    f.diag = (D.diagonal() - c).cwiseAbs().maxCoeff();
    f.row_sum =
        (B.rowwise().sum() + D.rowwise().sum() - Vector::Ones(B.rows())).cwiseAbs().maxCoeff();
    return f;
}

}  // namespace

double FeasibilityResiduals::max() const {
    return std::max({negativity, off_support, diag, row_sum});
}

void RecoveryProblem::validate() const {
    if (Y_hat.cols() != Z.cols()) throw DimensionError("recovery problem: Y_hat/Z column mismatch");
    if (c.size() != n_ord()) throw DimensionError("recovery problem: c size mismatch");
    if (K() < n_s()) {
        throw std::invalid_argument("recovery problem: K >= n_s is required for the pseudo-inverse");
    }
    std::vector<char> has_b(n_ord(), 0);
    for (const auto& [i, j] : omega_b) {
        if (i < 0 || i >= n_ord() || j < 0 || j >= n_s()) {
            throw std::invalid_argument("recovery problem: omega_b index out of range");
        }
        has_b[i] = 1;
    }
    for (int i = 0; i < n_ord(); ++i) {
        if (!has_b[i]) {
            throw std::invalid_argument("recovery problem: empty omega_b row " + std::to_string(i));
        }
    }
    for (const auto& [i, j] : S) {
        if (i < 0 || i >= n_ord() || j < 0 || j >= n_ord()) {
            throw std::invalid_argument("recovery problem: S index out of range");
        }
        if (i == j) throw std::invalid_argument("recovery problem: S must exclude the diagonal");
    }
}

Matrix RecoveryProblem::b_mask() const {
    Matrix m = Matrix::Zero(n_ord(), n_s());
    for (const auto& [i, j] : omega_b) m(i, j) = 1.0;
    return m;
}

Matrix RecoveryProblem::d_mask() const {
    Matrix m = Matrix::Zero(n_ord(), n_ord());
    for (const auto& [i, j] : S) m(i, j) = 1.0;
    return m;
}

Matrix pseudo_inverse_right(const Matrix& Z, double tol) {
    int n_s = static_cast<int>(Z.rows());
    int K = static_cast<int>(Z.cols());
    if (K < n_s) {
        throw std::invalid_argument("pseudo_inverse_right: Z has more rows than columns");
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(Z.transpose());
    int rank = static_cast<int>(qr.rank());
    if (rank < n_s) {
        throw std::invalid_argument("pseudo_inverse_right: Z is rank-deficient (rank " +
                                    std::to_string(rank) + " < " + std::to_string(n_s) + ")");
    }
    Matrix thin_q = qr.householderQ() * Matrix::Identity(K, n_s);
    Matrix r = qr.matrixR().topLeftCorner(n_s, n_s).template triangularView<Eigen::Upper>();
    Matrix r_inv_t =
        r.transpose().triangularView<Eigen::Lower>().solve(Matrix::Identity(n_s, n_s));
    Matrix z_dag = thin_q * r_inv_t * qr.colsPermutation().transpose();
    double resid = (Z * z_dag - Matrix::Identity(n_s, n_s)).cwiseAbs().maxCoeff();
    if (!(resid < tol)) {
        throw std::runtime_error("pseudo_inverse_right: residual " + std::to_string(resid) +
                                 " exceeds tolerance");
    }
    return z_dag;
}

double objective_f(const Matrix& B, const Matrix& D, const Matrix& Y_hat, const Matrix& Z_dag,
                   double gamma) {
    return objective_m(B, D, Y_hat * Z_dag, gamma);
}

std::pair<Matrix, Matrix> grad_f(const Matrix& B, const Matrix& D, const Matrix& Y_hat,
                                 const Matrix& Z_dag, double gamma) {
    Matrix gb, gd;
    grad_m(B, D, Y_hat * Z_dag, gamma, gb, gd);
    return {gb, gd};
}

double soft_threshold_one_sided(double x, double tau) {
    if (tau < 0.0) throw std::invalid_argument("soft_threshold_one_sided: tau must be >= 0");
    return x <= 0.0 ? 0.0 : std::max(0.0, x - tau);
}

Matrix soft_threshold_one_sided(const Matrix& x, double tau) {
    if (tau < 0.0) throw std::invalid_argument("soft_threshold_one_sided: tau must be >= 0");
    return (x.array() - tau).cwiseMax(0.0).matrix();
}

std::pair<Matrix, Matrix> prox_project(const Matrix& B_tilde, const Matrix& D_tilde, double tau,
                                       const RecoveryProblem& problem) {
    if (tau < 0.0) throw std::invalid_argument("prox_project: tau must be >= 0");
    Masks masks = build_masks(problem);
    Matrix B, D;
    prox_masked(B_tilde, D_tilde, tau, masks, problem.c, B, D);
    return {B, D};
}

double estimate_lipschitz(const Matrix& Y_hat, const Matrix& Z_dag, double gamma) {
    Matrix M = Y_hat * Z_dag;
    int n_ord = static_cast<int>(M.rows());
    int n_s = static_cast<int>(M.cols());
    int n = n_s + n_ord;

    // Per-row Hessian: H u = 2 (P^T P u + gamma (1^T u) 1), P = [I  M^T].
    auto apply = [&](const Vector& u) {
        Vector v = u.head(n_s) + M.transpose() * u.tail(n_ord);
        Vector out(n);
        out.head(n_s) = v;
        out.tail(n_ord) = M * v;
        out.array() += gamma * u.sum();
        return Vector(2.0 * out);
    };

    std::mt19937_64 rng(0x10c5);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector u = Vector::Ones(n);
    for (int i = 0; i < n; ++i) u(i) += 0.01 * gauss(rng);
    u.normalize();
    double value = 0.0;
    for (int it = 0; it < 20; ++it) {
        Vector w = apply(u);
        double norm = w.norm();
        if (norm <= 0.0) break;
        double next = u.dot(w);
        u = w / norm;
        if (std::abs(next - value) <= 1e-6 * std::max(1.0, std::abs(next))) {
            value = next;
            break;
        }
        value = next;
    }
    return 1.1 * std::max(value, 1e-12);
}

RecoveryResult fista_solve(const RecoveryProblem& problem, const SolverConfig& config) {
    problem.validate();
    Matrix z_dag = pseudo_inverse_right(problem.Z);
    Matrix M = problem.Y_hat * z_dag;
    double gamma = config.gamma;
    if (gamma <= 0.0) throw std::invalid_argument("fista_solve: gamma must be > 0");
    double lambda = config.lambda;
    if (lambda < 0.0) {
        lambda = (problem.n_ord() + problem.n_s()) * 1e-12 * M.norm();
    }
    double alpha = config.step;
    if (alpha <= 0.0) {
        alpha = config.backtracking ? 1.0 : 1.0 / estimate_lipschitz(problem.Y_hat, z_dag, gamma);
    }

    Masks masks = build_masks(problem);

    // Feasible deterministic start: B rows uniform over omega_b summing to
    // 1 - c_i, D = Diag(c); the stochasticity penalty vanishes there.
    Matrix B0, D0;
    if (config.warm_b.size() > 0 || config.warm_d.size() > 0) {
        if (config.warm_b.rows() != problem.n_ord() || config.warm_b.cols() != problem.n_s() ||
            config.warm_d.rows() != problem.n_ord() || config.warm_d.cols() != problem.n_ord()) {
            throw DimensionError("fista_solve: warm start has wrong shape");
        }
        prox_masked(config.warm_b, config.warm_d, 0.0, masks, problem.c, B0, D0);
    } else {
        B0 = masks.b;
        for (int i = 0; i < B0.rows(); ++i) {
            double deg = B0.row(i).sum();
            B0.row(i) *= (1.0 - problem.c(i)) / deg;
        }
        D0 = Matrix::Zero(problem.n_ord(), problem.n_ord());
        D0.diagonal() = problem.c;
    }

    RecoveryResult result;
    if (config.max_iters <= 0) {
        prox_masked(B0, D0, 0.0, masks, problem.c, result.B, result.D);
        result.final_objective = objective_m(result.B, result.D, M, gamma);
        result.objective_trace.push_back(result.final_objective);
        result.feasibility = feasibility_of(result.B, result.D, masks, problem.c);
        return result;
    }

    Matrix B_prev = B0, D_prev = D0;
    Matrix B_y = B0, D_y = D0;
    Matrix B = B0, D = D0;
    Matrix grad_b, grad_d, B_tilde, D_tilde;
    double t_prev = 1.0;
    double obj_prev = objective_m(B0, D0, M, gamma);
    double obj0 = obj_prev;
    result.objective_trace.reserve(config.max_iters + 1);
    result.objective_trace.push_back(obj_prev);

    int iter = 0;
    for (iter = 1; iter <= config.max_iters; ++iter) {
        grad_m(B_y, D_y, M, gamma, grad_b, grad_d);
        double f_y = 0.0;
        if (config.backtracking) f_y = objective_m(B_y, D_y, M, gamma);
        for (;;) {
            B_tilde = B_y - alpha * grad_b;
            D_tilde = D_y - alpha * grad_d;
            prox_masked(B_tilde, D_tilde, alpha * lambda, masks, problem.c, B, D);
            if (!config.backtracking) break;
            // accept once the quadratic model at y majorizes f at the prox point
            double lin = (grad_b.cwiseProduct(B - B_y)).sum() +
                         (grad_d.cwiseProduct(D - D_y)).sum();
            double dist = (B - B_y).squaredNorm() + (D - D_y).squaredNorm();
            double f_p = objective_m(B, D, M, gamma);
            if (f_p <= f_y + lin + dist / (2.0 * alpha) + 1e-15 * std::max(1.0, f_y)) break;
            alpha *= config.backtrack_shrink;
            if (alpha < 1e-30) {
                throw std::runtime_error("fista_solve: backtracking step underflow");
            }
        }
        double obj = objective_m(B, D, M, gamma);
        result.objective_trace.push_back(obj);
        if (config.iterate_callback) config.iterate_callback(B, D);
        if (!std::isfinite(obj) || obj > 1e6 * std::max(obj0, 1e-12)) {
            throw std::runtime_error(
                "fista_solve: objective diverged; reduce the step size below 1/L");
        }
        if (config.restart && obj > obj_prev) {
            t_prev = 1.0;
            B_y = B;
            D_y = D;
        } else {
            double t = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_prev * t_prev));
            double beta = (t_prev - 1.0) / t;
            B_y = B + beta * (B - B_prev);
            D_y = D + beta * (D - D_prev);
            t_prev = t;
        }
        bool stalled = std::abs(obj - obj_prev) <= config.tol * std::max(obj, obj_prev);
        B_prev = B;
        D_prev = D;
        obj_prev = obj;
        if (stalled) {
            result.converged = true;
            break;
        }
    }
    result.B = B;
    result.D = D;
    result.D.diagonal() = problem.c;
    result.iterations = std::min(iter, config.max_iters);
    result.final_objective = obj_prev;
    result.feasibility = feasibility_of(result.B, result.D, masks, problem.c);
    return result;
}

RecoveryResult solve_ls_full_support(const RecoveryProblem& problem, const SolverConfig& config) {
    if (problem.mode != RecoveryMode::full_support) {
        throw std::invalid_argument("solve_ls_full_support: problem mode must be full_support");
    }
    SolverConfig cfg = config;
    cfg.lambda = 0.0;
    RecoveryResult result = fista_solve(problem, cfg);

    // Rescale each row onto the simplex slice so stochasticity is exact.
    for (int i = 0; i < result.B.rows(); ++i) {
        double c_i = problem.c(i);
        double free_mass = result.B.row(i).sum() + result.D.row(i).sum() - c_i;
        if (free_mass > 0.0) {
            double scale = (1.0 - c_i) / free_mass;
            result.B.row(i) *= scale;
            result.D.row(i) *= scale;
            result.D(i, i) = c_i;
        }
    }
    Masks masks = build_masks(problem);
    result.feasibility = feasibility_of(result.B, result.D, masks, problem.c);
    Matrix z_dag = pseudo_inverse_right(problem.Z);
    result.final_objective = objective_f(result.B, result.D, problem.Y_hat, z_dag, config.gamma);
    return result;
}

namespace detail {

Vector nnls_with_sum(const Matrix& A, const Vector& y, double target, double* residual) {
    int n = static_cast<int>(A.cols());
    if (target < 0.0) throw std::invalid_argument("nnls_with_sum: target must be >= 0");
    Matrix gram = 2.0 * A.transpose() * A;
    gram.diagonal().array() += 1e-12;  // guards dependent columns
    Vector lin = 2.0 * A.transpose() * y;

    std::vector<char> passive(n, 1);
    Vector u = Vector::Constant(n, target / n);

    auto solve_passive = [&](Vector& sol, double& mu) {
        std::vector<int> idx;
        for (int j = 0; j < n; ++j) {
            if (passive[j]) idx.push_back(j);
        }
        int p = static_cast<int>(idx.size());
        Matrix kkt = Matrix::Zero(p + 1, p + 1);
        Vector rhs(p + 1);
        for (int a = 0; a < p; ++a) {
            for (int b = 0; b < p; ++b) kkt(a, b) = gram(idx[a], idx[b]);
            kkt(a, p) = 1.0;
            kkt(p, a) = 1.0;
            rhs(a) = lin(idx[a]);
        }
        rhs(p) = target;
        Vector full = kkt.fullPivLu().solve(rhs);
        sol = Vector::Zero(n);
        for (int a = 0; a < p; ++a) sol(idx[a]) = full(a);
        mu = full(p);
    };

    double mu = 0.0;
    Vector trial;
    for (int outer = 0; outer < 10 * n + 10; ++outer) {
        solve_passive(trial, mu);
        double min_trial = 0.0;
        for (int j = 0; j < n; ++j) {
            if (passive[j]) min_trial = std::min(min_trial, trial(j));
        }
        if (min_trial >= -1e-12) {
            u = trial.cwiseMax(0.0);
            // KKT on the pinned coordinates: grad + mu must be nonnegative.
            Vector grad = gram * u - lin;
            int release = -1;
            double worst = 1e-9;
            for (int j = 0; j < n; ++j) {
                if (!passive[j] && -(grad(j) + mu) > worst) {
                    worst = -(grad(j) + mu);
                    release = j;
                }
            }
            if (release < 0) break;
            passive[release] = 1;
            continue;
        }
        // Step from the last feasible point toward the trial, stopping at
        // the first coordinate to hit zero (Lawson-Hanson interpolation).
        double step = 1.0;
        for (int j = 0; j < n; ++j) {
            if (passive[j] && trial(j) < 0.0 && u(j) > trial(j)) {
                step = std::min(step, u(j) / (u(j) - trial(j)));
            }
        }
        u = u + step * (trial - u);
        for (int j = 0; j < n; ++j) {
            if (passive[j] && u(j) <= 1e-12) {
                u(j) = 0.0;
                passive[j] = 0;
            }
        }
    }
    if (residual) *residual = (A * u - y).squaredNorm();
    return u;
}

}  // namespace detail

RecoveryResult brute_force_l0(const RecoveryProblem& problem, int k_max, double epsilon) {
    problem.validate();
    if (problem.n_ord() > 12) {
        throw std::invalid_argument("brute_force_l0: instance too large (n_ord > 12)");
    }
    if (k_max < 0) throw std::invalid_argument("brute_force_l0: k_max must be >= 0");

    int n_ord = problem.n_ord();
    int n_s = problem.n_s();
    Matrix yt = problem.Y_hat.transpose();  // K x n_ord
    Matrix zt = problem.Z.transpose();      // K x n_s

    std::vector<std::vector<int>> s_rows(n_ord), b_rows(n_ord);
    for (const auto& [i, j] : problem.S) s_rows[i].push_back(j);
    for (const auto& [i, j] : problem.omega_b) b_rows[i].push_back(j);
    for (int i = 0; i < n_ord; ++i) {
        if (static_cast<int>(s_rows[i].size()) > 20) {
            throw std::invalid_argument("brute_force_l0: instance too large (|S_i| > 20)");
        }
        std::sort(s_rows[i].begin(), s_rows[i].end());
        std::sort(b_rows[i].begin(), b_rows[i].end());
    }

    RecoveryResult result;
    result.B = Matrix::Zero(n_ord, n_s);
    result.D = Matrix::Zero(n_ord, n_ord);
    result.D.diagonal() = problem.c;
    result.converged = true;

    for (int i = 0; i < n_ord; ++i) {
        double c_i = problem.c(i);
        Vector r = (1.0 - c_i) * yt.col(i);
        const auto& cand = s_rows[i];
        const auto& omega = b_rows[i];
        int nb = static_cast<int>(omega.size());

        auto try_support = [&](const std::vector<int>& supp, Vector& u, double& resid) {
            Matrix A(yt.rows(), supp.size() + nb);
            for (std::size_t a = 0; a < supp.size(); ++a) A.col(a) = yt.col(supp[a]);
            for (int b = 0; b < nb; ++b) A.col(supp.size() + b) = zt.col(omega[b]);
            u = detail::nnls_with_sum(A, r, 1.0 - c_i, &resid);
        };

        bool found = false;
        std::vector<int> best_supp;
        Vector best_u;
        double best_resid = std::numeric_limits<double>::infinity();
        int cap = std::min<int>(k_max, static_cast<int>(cand.size()));
        for (int k = 0; k <= cap && !found; ++k) {
            // Enumerate k-subsets of cand; keep the best residual at this level.
            std::vector<int> pick(k);
            double level_best = std::numeric_limits<double>::infinity();
            std::vector<int> level_supp;
            Vector level_u;
            std::function<void(int, int)> rec = [&](int start, int depth) {
                if (depth == k) {
                    std::vector<int> supp;
                    supp.reserve(k);
                    for (int a = 0; a < k; ++a) supp.push_back(cand[pick[a]]);
                    Vector u;
                    double resid;
                    try_support(supp, u, resid);
                    if (resid < level_best) {
                        level_best = resid;
                        level_supp = supp;
                        level_u = u;
                    }
                    return;
                }
                for (int idx = start; idx <= static_cast<int>(cand.size()) - (k - depth); ++idx) {
                    pick[depth] = idx;
                    rec(idx + 1, depth + 1);
                }
            };
            rec(0, 0);
            if (level_best <= epsilon) {
                found = true;
                best_supp = level_supp;
                best_u = level_u;
                best_resid = level_best;
            } else if (level_best < best_resid) {
                best_resid = level_best;
                best_supp = level_supp;
                best_u = level_u;
            }
        }
        if (!found) result.converged = false;
        for (std::size_t a = 0; a < best_supp.size(); ++a) {
            result.D(i, best_supp[a]) = best_u(a);
        }
        for (int b = 0; b < nb; ++b) {
            result.B(i, omega[b]) = best_u(best_supp.size() + b);
        }
    }

    Masks masks = build_masks(problem);
    result.feasibility = feasibility_of(result.B, result.D, masks, problem.c);
    result.iterations = 0;
    Matrix z_dag = pseudo_inverse_right(problem.Z);
    result.final_objective = objective_f(result.B, result.D, problem.Y_hat, z_dag, 0.0);
    result.objective_trace.push_back(result.final_objective);
    return result;
}

}  // namespace socsense::recovery
