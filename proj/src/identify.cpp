#include "socsense/identify.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

namespace socsense::identify {

Matrix stacked_data_matrix(const Matrix& Y_hat, const Matrix& Z) {
    if (Y_hat.cols() != Z.cols()) throw DimensionError("stacked_data_matrix: column mismatch");
    Matrix a(Z.cols(), Y_hat.rows() + Z.rows());
    a.leftCols(Y_hat.rows()) = Y_hat.transpose();
    a.rightCols(Z.rows()) = Z.transpose();
    return a;
}

int numerical_rank(const Matrix& a) {
    if (a.size() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(a);
    const auto& sv = svd.singularValues();
    double thresh = std::max(a.rows(), a.cols()) * std::numeric_limits<double>::epsilon() * sv(0);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i) {
        if (sv(i) > thresh) ++rank;
    }
    return rank;
}

namespace {

Matrix select_columns(const Matrix& a_tilde, const std::vector<int>& s_cols,
                      const std::vector<int>& b_cols, int n_ord) {
    Matrix sub(a_tilde.rows(), s_cols.size() + b_cols.size());
    int col = 0;
    for (int j : s_cols) {
        if (j < 0 || j >= n_ord) throw std::invalid_argument("column selection: S index out of range");
        sub.col(col++) = a_tilde.col(j);
    }
    for (int j : b_cols) {
        if (j < 0 || n_ord + j >= a_tilde.cols()) {
            throw std::invalid_argument("column selection: B index out of range");
        }
        sub.col(col++) = a_tilde.col(n_ord + j);
    }
    return sub;
}

}  // namespace

bool check_rank_full(const Matrix& a_tilde, const std::vector<int>& s_cols,
                     const std::vector<int>& b_cols, int n_ord) {
    if (s_cols.empty() && b_cols.empty()) {
        throw std::invalid_argument("check_rank_full: empty column selection");
    }
    Matrix sub = select_columns(a_tilde, s_cols, b_cols, n_ord);
    int need = static_cast<int>(b_cols.size() + s_cols.size()) - 1;
    return numerical_rank(sub) >= need;
}

bool check_spark_partial(const Matrix& a_tilde, const std::vector<int>& s_cols,
                         const std::vector<int>& b_cols, int k_i, int n_ord) {
    if (static_cast<int>(s_cols.size()) > 20 || k_i > 5) {
        throw std::invalid_argument("check_spark_partial: instance too large (|S_i| <= 20, k <= 5)");
    }
    if (k_i < 0) throw std::invalid_argument("check_spark_partial: k must be >= 0");
    // Independence of every size-m subset implies the condition for all
    // smaller subsets, so only the maximal size is enumerated. Full column
    // rank is required: for noiseless steady-state data every null vector
    // of the stacked matrix already sums to zero, so the row-sum equality
    // cannot break a residual one-dimensional ambiguity.
    int m = std::min(2 * k_i, static_cast<int>(s_cols.size()));
    int need = static_cast<int>(b_cols.size()) + m;
    bool ok = true;
    std::vector<int> pick(m);
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (!ok) return;
        if (depth == m) {
            std::vector<int> subset;
            subset.reserve(m);
            for (int idx : pick) subset.push_back(s_cols[idx]);
            Matrix sub = select_columns(a_tilde, subset, b_cols, n_ord);
            if (numerical_rank(sub) < need) ok = false;
            return;
        }
        for (int idx = start; idx <= static_cast<int>(s_cols.size()) - (m - depth); ++idx) {
            pick[depth] = idx;
            rec(idx + 1, depth + 1);
        }
    };
    rec(0, 0);
    return ok;
}

double binary_entropy(double x) {
    if (x < 0.0 || x > 1.0) throw std::invalid_argument("binary_entropy: x must be in [0, 1]");
    if (x == 0.0 || x == 1.0) return 0.0;
    return -x * std::log(x) - (1.0 - x) * std::log(1.0 - x);
}

double theorem1_min_beta(double alpha, int d, double finite_n) {
    if (d < 5) throw std::invalid_argument("theorem1_min_beta: requires d >= 5 (condition d > 4)");
    if (alpha <= 0.0 || alpha >= 1.0) {
        throw std::invalid_argument("theorem1_min_beta: alpha must be in (0, 1)");
    }
    auto ratio = [&](double beta_p) {
        return (binary_entropy(alpha) + beta_p * binary_entropy(alpha / beta_p)) /
               (alpha * std::log(beta_p / alpha));
    };
    double target = static_cast<double>(d - 1);
    // ratio decreases from +inf (beta' -> alpha+) toward 1, so the root is
    // bracketed once ratio(hi) < target.
    double hi = 1.0;
    if (ratio(hi) - target >= 0.0) {
        throw std::invalid_argument("theorem1_min_beta: no solution with beta in (alpha, 1]");
    }
    double lo = alpha * (1.0 + 1e-12);
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (ratio(mid) - target > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-12) break;
    }
    double beta = 0.5 * (lo + hi);
    if (finite_n > 0.0) beta += d / finite_n;
    return beta;
}

bool theorem1_value_condition(double b_min, double b_max, int d) {
    if (b_min <= 0.0 || b_max < b_min) {
        throw std::invalid_argument("theorem1_value_condition: need 0 < b_min <= b_max");
    }
    double margin = b_min * (2.0 * d - 3.0) - 1.0 - 2.0 * b_max;
    // strict inequality, robust to roundoff at exact zero
    return margin > 1e-12 * (1.0 + std::abs(b_min) * (2.0 * d - 3.0));
}

FailureBound theorem1_failure_bound(int d, double beta, double n_i) {
    if (d < 4) throw std::invalid_argument("theorem1_failure_bound: d must be >= 4");
    if (beta <= 0.0 || n_i < 1.0) {
        throw std::invalid_argument("theorem1_failure_bound: beta > 0 and n >= 1 required");
    }
    FailureBound b;
    b.leading = std::pow(d / beta, 4.0) * (d - 1.0) / (n_i * n_i);
    b.order_exponent = 2.0 - (d - 1.0) * (d - 3.0);
    return b;
}

double asymptotic_budget(double p) {
    if (p <= 0.0 || p >= 0.5) {
        throw std::invalid_argument("asymptotic_budget: p must be in (0, 0.5)");
    }
    return 2.0 * p;
}

ExpanderWitness is_expander(const graph::BipartiteSupport& support, double alpha, double delta) {
    if (support.n_ord > 20) {
        throw std::invalid_argument("is_expander: instance too large (n_ord <= 20)");
    }
    if (alpha <= 0.0 || alpha > 1.0 || delta <= 0.0 || delta > 1.0) {
        throw std::invalid_argument("is_expander: alpha and delta must be in (0, 1]");
    }
    int n = support.n_ord;
    std::vector<std::uint64_t> neighbor_mask(n, 0);
    std::vector<int> degree(n, 0);
    for (const auto& [i, j] : support.edges) {
        neighbor_mask[i] |= (1ULL << j);
        ++degree[i];
    }
    ExpanderWitness w;
    w.d_l = *std::min_element(degree.begin(), degree.end());
    w.d_u = *std::max_element(degree.begin(), degree.end());

    int max_size = static_cast<int>(std::floor(alpha * n + 1e-9));
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        int size = __builtin_popcount(mask);
        if (size > max_size) continue;
        int edges = 0;
        std::uint64_t neigh = 0;
        for (int i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                edges += degree[i];
                neigh |= neighbor_mask[i];
            }
        }
        int neighbors = __builtin_popcountll(neigh);
        if (delta * edges > neighbors + 1e-12) {
            for (int i = 0; i < n; ++i) {
                if (mask & (1u << i)) w.violating_set.push_back(i);
            }
            w.edge_count = edges;
            w.neighbor_count = neighbors;
            w.certified = false;
            return w;
        }
    }
    w.certified = true;
    return w;
}

Rip1Report rip1_check(const Matrix& a, const ExpanderSpec& spec, int trials, std::uint64_t seed,
                      const Matrix* d_prime, bool require_certified) {
    int n = static_cast<int>(a.cols());
    int m = static_cast<int>(a.rows());
    graph::BipartiteSupport support;
    support.n_ord = n;
    support.n_s = m;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < m; ++i) {
            if (a(i, j) != 0.0) support.edges.emplace_back(j, i);
        }
    }
    std::sort(support.edges.begin(), support.edges.end());

    Rip1Report report;
    report.trials = trials;
    report.lower_bound = spec.a_min * spec.delta * spec.d_l -
                         spec.a_max * (spec.d_u - spec.delta * spec.d_l);
    report.upper_bound = spec.d_u * spec.a_max;
    report.margin = std::numeric_limits<double>::infinity();
    report.certified = is_expander(support, spec.alpha, spec.delta).certified;
    if (require_certified && !report.certified) {
        throw std::invalid_argument("rip1_check: support is not a certified expander at (alpha, delta)");
    }

    double upsilon = corollary1_margin(spec.a_min, spec.a_max, spec.d_l, spec.d_u, spec.delta);
    int k_max = std::max(1, static_cast<int>(std::floor(spec.alpha * n + 1e-9)));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_int_distribution<int> pick_k(1, k_max);

    Matrix inv_t;
    if (d_prime) {
        Matrix lhs = (Matrix::Identity(n, n) - *d_prime).transpose();
        inv_t = lhs.partialPivLu().solve(Matrix::Identity(n, n));
    }

    std::vector<int> perm(n);
    for (int t = 0; t < trials; ++t) {
        int k = pick_k(rng);
        for (int i = 0; i < n; ++i) perm[i] = i;
        Vector x = Vector::Zero(n);
        for (int j = 0; j < k; ++j) {
            std::uniform_int_distribution<int> pick(j, n - 1);
            std::swap(perm[j], perm[pick(rng)]);
            x(perm[j]) = gauss(rng);
        }
        double x1 = x.lpNorm<1>();
        double ax1 = (a * x).lpNorm<1>();
        if (ax1 < report.lower_bound * x1 - 1e-12) ++report.lower_violations;
        if (ax1 > report.upper_bound * x1 + 1e-12) ++report.upper_violations;
        report.margin = std::min(report.margin, ax1 - report.lower_bound * x1);
        if (d_prime) {
            double inv1 = (a * (inv_t * x)).lpNorm<1>();
            if (inv1 < upsilon * x1 - 1e-12) ++report.inverse_violations;
        }
    }
    return report;
}

double corollary1_margin(double b_min, double b_max, int d_l, int d_u, double delta) {
    if (b_min <= 0.0 || b_max < b_min || d_l < 1 || d_u < d_l || delta <= 0.0 || delta > 1.0) {
        throw std::invalid_argument("corollary1_margin: invalid inputs");
    }
    return b_min * delta * d_l - b_max * (d_u - delta * d_l) - (1.0 - d_l * b_min);
}

RowDeletionReport row_deletion_degree_check(const graph::BipartiteSupport& support, int trials,
                                            std::uint64_t seed) {
    int d = 0;
    if (!support.is_regular(&d)) {
        throw std::invalid_argument("row_deletion_degree_check: support must be d-regular");
    }
    int n = support.n_ord;
    int n_s = support.n_s;
    std::vector<std::vector<int>> rows(n);
    for (const auto& [i, j] : support.edges) rows[i].push_back(j);

    std::mt19937_64 rng(seed);
    std::vector<int> pool(n_s);
    std::vector<char> deleted(n_s);
    int good = 0;
    for (int t = 0; t < trials; ++t) {
        for (int j = 0; j < n_s; ++j) pool[j] = j;
        std::fill(deleted.begin(), deleted.end(), 0);
        for (int k = 0; k < d; ++k) {
            std::uniform_int_distribution<int> pick(k, n_s - 1);
            std::swap(pool[k], pool[pick(rng)]);
            deleted[pool[k]] = 1;
        }
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) {
            int lost = 0;
            for (int j : rows[i]) lost += deleted[j];
            if (d - lost < d - 1) ok = false;
        }
        if (ok) ++good;
    }
    RowDeletionReport report;
    report.trials = trials;
    report.empirical = trials > 0 ? static_cast<double>(good) / trials : 0.0;
    report.analytic_lower_bound =
        1.0 - static_cast<double>(n) * n * (d - 1.0) * std::pow(static_cast<double>(d) / n_s, 4.0);
    return report;
}

}  // namespace socsense::identify
