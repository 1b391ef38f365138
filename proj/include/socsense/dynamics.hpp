#pragma once

#include "socsense/common.hpp"
#include "socsense/graph.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace socsense::dynamics {

using graph::TrustMatrix;

/// Opinions at one time step: z never changes within a discussion.
struct OpinionState {
    Vector z;  // stubborn opinions, length n_s
    Vector y;  // ordinary opinions, length n_ord
    long t = 0;
};

enum class DynamicsKind { deterministic, neighbor_sampling, broadcast_gossip };

struct DynamicsModel {
    DynamicsKind kind = DynamicsKind::deterministic;
    double gossip_weight = 0.5;  // broadcast mixing weight, in (0, 1]

    static DynamicsModel deterministic();
    static DynamicsModel neighbor_sampling();
    static DynamicsModel broadcast_gossip(double gossip_weight);
};

std::string to_string(DynamicsKind kind);
DynamicsKind dynamics_kind_from_string(const std::string& name);

/// Noisy observations of one discussion: samples row t holds
/// x_hat(t) = (z(t), y(t)) + noise, t = 0..T.
struct OpinionTrace {
    int discussion = 0;
    double sigma = 0.0;
    DynamicsModel model;
    int n_s = 0;
    Matrix samples;  // (T+1) x (n_s + n_ord), row index = time

    long horizon() const { return samples.rows() - 1; }
};

/// Post-burn-in sampling instants, strictly increasing, all > burn_in.
struct SampleSet {
    long burn_in = 0;
    long horizon = 0;
    std::vector<long> instants;

    int size() const { return static_cast<int>(instants.size()); }
    void validate() const;
};

/// Per-discussion excitation (columns of Z) and estimated steady states
/// (columns of Y_hat).
struct SteadyStateData {
    Matrix Z;      // n_s x K
    Matrix Y_hat;  // n_ord x K
    int K = 0;
    Vector column_variance;  // estimator variance diagnostic per discussion
    bool z_full_row_rank = true;
    std::vector<std::string> warnings;
};

/// One synchronous mean-dynamics step: y <- B z + D y.
OpinionState step_deterministic(const TrustMatrix& w, const OpinionState& state);

/// Draw one realization (B(t), D(t)) of the random trust matrix. Stubborn
/// rows of the full matrix are identity and are not represented here.
std::pair<Matrix, Matrix> sample_random_w(const TrustMatrix& w_bar, const DynamicsModel& model,
                                          std::uint64_t seed);

/// Mean matrix induced by the broadcast gossip protocol, which differs
/// from the generating trust matrix.
TrustMatrix gossip_mean_matrix(const TrustMatrix& w_bar, double gossip_weight);

/// Run one discussion for T steps and record noisy observations of the
/// full opinion vector at t = 0..T.
OpinionTrace simulate(const TrustMatrix& w_bar, const Vector& z0, const Vector& y0, long T,
                      const DynamicsModel& model, double sigma, std::uint64_t seed);

/// Exact expected steady states: Y = (I - D)^{-1} B Z via linear solve.
Matrix steady_state_exact(const Matrix& B, const Matrix& D, const Matrix& Z);

/// m distinct instants uniform without replacement from (T_o, T_max], sorted.
SampleSet uniform_sampling_set(long T_o, long T_max, int m, std::uint64_t seed);

/// Arithmetic mean of the trace rows at the sampling instants.
Vector temporal_average(const OpinionTrace& trace, const SampleSet& samples);

/// Schedule-ranking bound (C'/|T|) * sum_i lambda^(min gap at lag i).
/// Not an absolute guarantee; useful to compare sampling schedules.
double mse_bound(double lambda_d, const SampleSet& samples, double c_prime = 1.0);

enum class ZMode { gaussian, given };

struct CollectorConfig {
    DynamicsModel model;
    double sigma = 0.0;
    ZMode z_mode = ZMode::gaussian;
    long horizon = 2000;        // deterministic path: max steps (early stop at 1e-12)
    int samples = 0;            // temporal-average path: |T_k|; 0 = pure deterministic read-out
    long burn_in = -1;          // -1: auto from spectral norm of D
    long t_max = -1;            // -1: burn_in + 10 * samples
    Vector y0;                  // empty = zeros
};

/// Run K independent discussions and assemble the data matrices. Random
/// models (and noisy deterministic ones) estimate steady states by
/// temporal averaging; the noiseless deterministic path reads out the
/// T-step state.
SteadyStateData collect_dataset(const TrustMatrix& w_bar, int K, const CollectorConfig& config,
                                std::uint64_t seed, const Matrix* z_given = nullptr);

/// Default burn-in: first t with ||D||_2^t below 1e-6.
long default_burn_in(const TrustMatrix& w_bar);

}  // namespace socsense::dynamics
