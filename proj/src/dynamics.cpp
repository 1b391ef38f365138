#include "socsense/dynamics.hpp"

#include <Eigen/LU>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace socsense::dynamics {

namespace {

constexpr double kDeterministicResidual = 1e-12;

/// Per-row cumulative weights over the concatenated (B | D) row, used to
/// sample one trusted neighbor with probability equal to its weight.
struct RowSampler {
    std::vector<std::vector<std::pair<double, int>>> rows;  // (cumweight, column in [0, n_s+n_ord))
    int n_s = 0;

    explicit RowSampler(const TrustMatrix& w) : n_s(w.n_s()) {
        int n_ord = w.n_ord();
        rows.resize(n_ord);
        for (int i = 0; i < n_ord; ++i) {
            double cum = 0.0;
            for (int j = 0; j < n_s; ++j) {
                if (w.B(i, j) > 0.0) {
                    cum += w.B(i, j);
                    rows[i].emplace_back(cum, j);
                }
            }
            for (int j = 0; j < n_ord; ++j) {
                if (w.D(i, j) > 0.0) {
                    cum += w.D(i, j);
                    rows[i].emplace_back(cum, n_s + j);
                }
            }
        }
    }

    int sample(int i, std::mt19937_64& rng) const {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        double u = unif(rng) * rows[i].back().first;
        auto it = std::lower_bound(rows[i].begin(), rows[i].end(), u,
                                   [](const auto& e, double v) { return e.first < v; });
        if (it == rows[i].end()) --it;
        return it->second;
    }
};

/// In-neighbor lists: listeners[j] = ordinary agents with positive trust
/// in agent j (full index, stubborn first).
std::vector<std::vector<int>> listener_lists(const TrustMatrix& w) {
    int n_ord = w.n_ord();
    int n_s = w.n_s();
    std::vector<std::vector<int>> listeners(n_s + n_ord);
    for (int i = 0; i < n_ord; ++i) {
        for (int j = 0; j < n_s; ++j) {
            if (w.B(i, j) > 0.0) listeners[j].push_back(i);
        }
        for (int j = 0; j < n_ord; ++j) {
            if (i != j && w.D(i, j) > 0.0) listeners[n_s + j].push_back(i);
        }
    }
    return listeners;
}

void check_model(const DynamicsModel& model) {
    if (model.kind == DynamicsKind::broadcast_gossip &&
        (model.gossip_weight <= 0.0 || model.gossip_weight > 1.0)) {
        throw std::invalid_argument("dynamics: gossip weight must be in (0, 1]");
    }
}

}  // namespace

DynamicsModel DynamicsModel::deterministic() { return {DynamicsKind::deterministic, 0.5}; }
DynamicsModel DynamicsModel::neighbor_sampling() { return {DynamicsKind::neighbor_sampling, 0.5}; }
DynamicsModel DynamicsModel::broadcast_gossip(double gossip_weight) {
    return {DynamicsKind::broadcast_gossip, gossip_weight};
}

std::string to_string(DynamicsKind kind) {
    switch (kind) {
        case DynamicsKind::deterministic: return "deterministic";
        case DynamicsKind::neighbor_sampling: return "neighbor_sampling";
        case DynamicsKind::broadcast_gossip: return "broadcast_gossip";
    }
    return "unknown";
}

DynamicsKind dynamics_kind_from_string(const std::string& name) {
    if (name == "deterministic" || name == "det") return DynamicsKind::deterministic;
    if (name == "neighbor_sampling" || name == "ns") return DynamicsKind::neighbor_sampling;
    if (name == "broadcast_gossip" || name == "bg") return DynamicsKind::broadcast_gossip;
    throw std::invalid_argument("dynamics: unknown model '" + name + "'");
}

void SampleSet::validate() const {
    if (instants.empty()) throw std::invalid_argument("sample set: empty");
    long prev = burn_in;
    for (long t : instants) {
        if (t <= prev) throw std::invalid_argument("sample set: instants must be distinct, sorted, > burn-in");
        prev = t;
    }
    if (horizon > 0 && instants.back() > horizon) {
        throw std::invalid_argument("sample set: instant beyond horizon");
    }
}

OpinionState step_deterministic(const TrustMatrix& w, const OpinionState& state) {
    if (state.z.size() != w.n_s() || state.y.size() != w.n_ord()) {
        throw DimensionError("step_deterministic: state dimension mismatch");
    }
    OpinionState next;
    next.z = state.z;
    next.y = w.B * state.z + w.D * state.y;
    next.t = state.t + 1;
    return next;
}

std::pair<Matrix, Matrix> sample_random_w(const TrustMatrix& w_bar, const DynamicsModel& model,
                                          std::uint64_t seed) {
    check_model(model);
    int n_ord = w_bar.n_ord();
    int n_s = w_bar.n_s();
    std::mt19937_64 rng(seed);
    Matrix B = Matrix::Zero(n_ord, n_s);
    Matrix D = Matrix::Zero(n_ord, n_ord);
    switch (model.kind) {
        case DynamicsKind::deterministic:
            return {w_bar.B, w_bar.D};
        case DynamicsKind::neighbor_sampling: {
            RowSampler sampler(w_bar);
            for (int i = 0; i < n_ord; ++i) {
                int j = sampler.sample(i, rng);
                if (j < n_s) {
                    B(i, j) = 1.0;
                } else {
                    D(i, j - n_s) = 1.0;
                }
            }
            return {B, D};
        }
        case DynamicsKind::broadcast_gossip: {
            D = Matrix::Identity(n_ord, n_ord);
            std::uniform_int_distribution<int> pick(0, n_s + n_ord - 1);
            int j = pick(rng);
            double g = model.gossip_weight;
            auto listeners = listener_lists(w_bar);
            for (int i : listeners[j]) {
                D(i, i) = 1.0 - g;
                if (j < n_s) {
                    B(i, j) = g;
                } else {
                    D(i, j - n_s) += g;
                }
            }
            return {B, D};
        }
    }
    throw std::logic_error("sample_random_w: unknown model");
}

TrustMatrix gossip_mean_matrix(const TrustMatrix& w_bar, double gossip_weight) {
    if (gossip_weight <= 0.0 || gossip_weight > 1.0) {
        throw std::invalid_argument("gossip_mean_matrix: weight must be in (0, 1]");
    }
    int n_ord = w_bar.n_ord();
    int n_s = w_bar.n_s();
    double q = gossip_weight / static_cast<double>(n_s + n_ord);
    TrustMatrix mean;
    mean.B = Matrix::Zero(n_ord, n_s);
    mean.D = Matrix::Zero(n_ord, n_ord);
    for (int i = 0; i < n_ord; ++i) {
        int neighbors = 0;
        for (int j = 0; j < n_s; ++j) {
            if (w_bar.B(i, j) > 0.0) {
                mean.B(i, j) = q;
                ++neighbors;
            }
        }
        for (int j = 0; j < n_ord; ++j) {
            if (i != j && w_bar.D(i, j) > 0.0) {
                mean.D(i, j) = q;
                ++neighbors;
            }
        }
        mean.D(i, i) = 1.0 - q * neighbors;
    }
    return mean;
}

namespace {

/// Streaming evolution shared by simulate() and collect_dataset(): calls
/// observe(t, x) for t = 0..T with the noiseless state x.
template <typename Observer>
void evolve(const TrustMatrix& w, const Vector& z0, const Vector& y0, long T,
            const DynamicsModel& model, std::mt19937_64& rng, Observer&& observe) {
    int n_ord = w.n_ord();
    int n_s = w.n_s();
    Vector x(n_s + n_ord);
    x.head(n_s) = z0;
    x.tail(n_ord) = y0;
    observe(0L, x);
    if (model.kind == DynamicsKind::deterministic) {
        Vector y = y0;
        for (long t = 1; t <= T; ++t) {
            y = w.B * z0 + w.D * y;
            x.tail(n_ord) = y;
            observe(t, x);
        }
    } else if (model.kind == DynamicsKind::neighbor_sampling) {
        RowSampler sampler(w);
        Vector next(n_ord);
        for (long t = 1; t <= T; ++t) {
            for (int i = 0; i < n_ord; ++i) next(i) = x(sampler.sample(i, rng));
            x.tail(n_ord) = next;
            observe(t, x);
        }
    } else {
        auto listeners = listener_lists(w);
        std::uniform_int_distribution<int> pick(0, n_s + n_ord - 1);
        double g = model.gossip_weight;
        for (long t = 1; t <= T; ++t) {
            int j = pick(rng);
            double xj = x(j);
            for (int i : listeners[j]) x(n_s + i) += g * (xj - x(n_s + i));
            observe(t, x);
        }
    }
}

}  // namespace

OpinionTrace simulate(const TrustMatrix& w_bar, const Vector& z0, const Vector& y0, long T,
                      const DynamicsModel& model, double sigma, std::uint64_t seed) {
    if (T < 1) throw std::invalid_argument("simulate: horizon must be >= 1");
    if (z0.size() != w_bar.n_s() || y0.size() != w_bar.n_ord()) {
        throw DimensionError("simulate: initial opinion dimension mismatch");
    }
    check_model(model);
    if (sigma < 0.0) throw std::invalid_argument("simulate: sigma must be >= 0");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    OpinionTrace trace;
    trace.sigma = sigma;
    trace.model = model;
    trace.n_s = w_bar.n_s();
    trace.samples.resize(T + 1, w_bar.n_s() + w_bar.n_ord());
    evolve(w_bar, z0, y0, T, model, rng, [&](long t, const Vector& x) {
        trace.samples.row(t) = x;
        if (sigma > 0.0) {
            for (int i = 0; i < x.size(); ++i) trace.samples(t, i) += sigma * noise(rng);
        }
    });
    return trace;
}

Matrix steady_state_exact(const Matrix& B, const Matrix& D, const Matrix& Z) {
    if (B.rows() != D.rows() || D.rows() != D.cols() || B.cols() != Z.rows()) {
        throw DimensionError("steady_state_exact: dimension mismatch");
    }
    Matrix lhs = Matrix::Identity(D.rows(), D.cols()) - D;
    Matrix rhs = B * Z;
    Eigen::PartialPivLU<Matrix> lu(lhs);
    Matrix Y = lu.solve(rhs);
    double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
    if (!Y.allFinite() || (lhs * Y - rhs).cwiseAbs().maxCoeff() > 1e-8 * scale) {
        throw std::runtime_error("steady_state_exact: (I - D) is numerically singular");
    }
    return Y;
}

SampleSet uniform_sampling_set(long T_o, long T_max, int m, std::uint64_t seed) {
    if (m < 1) throw std::invalid_argument("uniform_sampling_set: m must be >= 1");
    long range = T_max - T_o;
    if (range < m) throw std::invalid_argument("uniform_sampling_set: window too small for m samples");
    std::mt19937_64 rng(seed);
    // Floyd's algorithm: uniform m-subset of {0, ..., range-1}.
    std::set<long> chosen;
    for (long j = range - m; j < range; ++j) {
        std::uniform_int_distribution<long> pick(0, j);
        long t = pick(rng);
        if (!chosen.insert(t).second) chosen.insert(j);
    }
    SampleSet s;
    s.burn_in = T_o;
    s.horizon = T_max;
    s.instants.reserve(m);
    for (long t : chosen) s.instants.push_back(T_o + 1 + t);
    return s;
}

Vector temporal_average(const OpinionTrace& trace, const SampleSet& samples) {
    samples.validate();
    Vector mean = Vector::Zero(trace.samples.cols());
    for (long t : samples.instants) {
        if (t < 0 || t >= trace.samples.rows()) {
            throw std::invalid_argument("temporal_average: instant " + std::to_string(t) +
                                        " not present in trace");
        }
        mean += trace.samples.row(t).transpose();
    }
    return mean / static_cast<double>(samples.size());
}

double mse_bound(double lambda_d, const SampleSet& samples, double c_prime) {
    if (lambda_d < 0.0 || lambda_d >= 1.0) {
        throw std::invalid_argument("mse_bound: lambda must be in [0, 1)");
    }
    samples.validate();
    const auto& t = samples.instants;
    int m = static_cast<int>(t.size());
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
        long gap = std::numeric_limits<long>::max();
        for (int l = 0; l + i < m; ++l) gap = std::min(gap, t[l + i] - t[l]);
        sum += gap == 0 ? 1.0 : std::pow(lambda_d, static_cast<double>(gap));
    }
    return c_prime / static_cast<double>(m) * sum;
}

long default_burn_in(const TrustMatrix& w_bar) {
    double s = spectral_norm(w_bar.D);
    if (s <= 0.0) return 1;
    if (s >= 1.0) {
        throw std::invalid_argument(
            "default_burn_in: ||D|| >= 1, burn-in must be supplied explicitly");
    }
    return static_cast<long>(std::ceil(std::log(1e-6) / std::log(s)));
}

SteadyStateData collect_dataset(const TrustMatrix& w_bar, int K, const CollectorConfig& config,
                                std::uint64_t seed, const Matrix* z_given) {
    if (K < 1) throw std::invalid_argument("collect_dataset: K must be >= 1");
    check_model(config.model);
    int n_ord = w_bar.n_ord();
    int n_s = w_bar.n_s();

    SteadyStateData data;
    data.K = K;
    data.Z.resize(n_s, K);
    data.Y_hat.resize(n_ord, K);
    data.column_variance = Vector::Zero(K);
    if (K < n_s) {
        data.warnings.push_back("K < n_s: Z cannot have full row rank; recovery will be ill-posed");
    }

    if (config.z_mode == ZMode::given) {
        if (!z_given || z_given->rows() != n_s || z_given->cols() != K) {
            throw std::invalid_argument("collect_dataset: given Z has wrong shape");
        }
        data.Z = *z_given;
    } else {
        std::mt19937_64 zrng(mix_seed(seed, 0x5a));
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int k = 0; k < K; ++k) {
            for (int i = 0; i < n_s; ++i) data.Z(i, k) = gauss(zrng);
        }
    }

    Vector y0 = config.y0.size() == n_ord ? config.y0 : Vector::Zero(n_ord);
    bool pure_deterministic = config.model.kind == DynamicsKind::deterministic &&
                              config.sigma == 0.0 && config.samples == 0;

    long burn_in = config.burn_in;
    long t_max = config.t_max;
    if (!pure_deterministic) {
        if (config.samples < 1) {
            throw std::invalid_argument("collect_dataset: temporal estimator needs samples >= 1");
        }
        if (burn_in < 0) burn_in = default_burn_in(w_bar);
        if (t_max < 0) t_max = burn_in + 10L * config.samples;
        if (t_max - burn_in < config.samples) {
            throw std::invalid_argument("collect_dataset: sampling window smaller than samples");
        }
    }

    for (int k = 0; k < K; ++k) {
        std::uint64_t seed_k = mix_seed(seed, static_cast<std::uint64_t>(k) + 1);
        std::mt19937_64 rng(seed_k);
        Vector z0 = data.Z.col(k);
        if (pure_deterministic) {
            Vector y = y0;
            for (long t = 0; t < config.horizon; ++t) {
                Vector next = w_bar.B * z0 + w_bar.D * y;
                double resid = (next - y).cwiseAbs().maxCoeff();
                y = next;
                if (resid < kDeterministicResidual) break;
            }
            data.Y_hat.col(k) = y;
            continue;
        }
        SampleSet samples =
            uniform_sampling_set(burn_in, t_max, config.samples, mix_seed(seed_k, 0x7e));
        std::normal_distribution<double> noise(0.0, 1.0);
        Vector sum = Vector::Zero(n_ord);
        Vector sum_sq = Vector::Zero(n_ord);
        std::size_t next = 0;
        evolve(w_bar, z0, y0, t_max, config.model, rng, [&](long t, const Vector& x) {
            if (next < samples.instants.size() && t == samples.instants[next]) {
                for (int i = 0; i < n_ord; ++i) {
                    double v = x(n_s + i);
                    if (config.sigma > 0.0) v += config.sigma * noise(rng);
                    sum(i) += v;
                    sum_sq(i) += v * v;
                }
                ++next;
            }
        });
        double m = static_cast<double>(config.samples);
        data.Y_hat.col(k) = sum / m;
        if (config.samples > 1) {
            // Mean over agents of the unbiased sample variance of the mean.
            double acc = 0.0;
            for (int i = 0; i < n_ord; ++i) {
                double var = (sum_sq(i) - sum(i) * sum(i) / m) / (m - 1.0);
                acc += std::max(0.0, var) / m;
            }
            data.column_variance(k) = acc / n_ord;
        }
    }

    Eigen::ColPivHouseholderQR<Matrix> qr(data.Z.transpose());
    data.z_full_row_rank = qr.rank() == n_s;
    if (!data.z_full_row_rank) {
        data.warnings.push_back("Z is rank-deficient: right pseudo-inverse will fail");
    }
    return data;
}

}  // namespace socsense::dynamics
