#pragma once

#include "socsense/common.hpp"
#include "socsense/dynamics.hpp"
#include "socsense/graph.hpp"
#include "socsense/io.hpp"
#include "socsense/recovery.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace socsense::harness {

/// ||estimate - truth||_F^2 / ||truth||_F^2.
double nmse(const Matrix& estimate, const Matrix& truth);

/// Fraction of admissible off-diagonal entries whose thresholded support
/// disagrees with the truth. S defaults to all off-diagonal pairs; tau < 0
/// selects 1e-4 * max(truth).
double support_error(const Matrix& estimate, const Matrix& truth, double tau = -1.0,
                     const std::vector<IndexPair>* S = nullptr);

/// Admissible support when a p_known fraction of the true zero entries is
/// exposed: all off-diagonal pairs minus that many uniformly chosen true
/// zeros. Nested in p_known for a fixed seed.
std::vector<IndexPair> expose_support(const std::vector<IndexPair>& true_support, int n_ord,
                                      double p_known, std::uint64_t seed);

struct CollectSettings {
    dynamics::DynamicsModel model;
    double sigma = 0.0;
    int k_factor = 2;  // K = k_factor * n_s
    long horizon = 4000;
    int samples = 0;
    long burn_in = -1;
    long t_max = -1;
};

struct ExperimentConfig {
    std::string sweep = "n_s";  // n_s | n_ord | p_known | model
    std::vector<double> grid;
    std::vector<std::string> model_grid;  // used when sweep == "model"
    int trials = 100;

    graph::NetworkModelSpec network;
    int n_ord = 60;
    int n_s = 20;
    double n_s_beta = 0.0;  // when > 0 and sweeping n_ord: n_s = ceil(beta * n_ord)
    graph::PlacementSpec placement;

    CollectSettings collect;

    recovery::RecoveryMode mode = recovery::RecoveryMode::sparse;
    recovery::SolverConfig solver;
    double p_known = 0.0;
    double c_diag = 0.0;
    double support_tau = -1.0;

    std::uint64_t seed = 20240601;
    int workers = 0;  // 0: hardware concurrency

    void validate() const;
    int grid_size() const;
    std::string point_label(int point) const;
};

struct TrialRow {
    std::string sweep_label;
    double sweep_value = 0.0;
    int trial = 0;
    double nmse_d = 0.0;
    double nmse_b = 0.0;
    double support_err = 0.0;
    double runtime_s = 0.0;
    bool converged = false;
    bool failed = false;
    std::string error;
};

struct ResultTable {
    std::vector<TrialRow> rows;
    bool any_failed() const;
};

struct PointSummary {
    std::string label;
    double sweep_value = 0.0;
    int trials = 0;
    double mean_nmse_d = 0.0;
    double stderr_nmse_d = 0.0;
    double median_nmse_d = 0.0;
    double mean_nmse_b = 0.0;
    double mean_support_err = 0.0;
};

/// generate -> collect -> recover -> score over the sweep grid; trials run
/// in a worker pool with per-trial seeds hash(base, point, trial). Hard
/// trial failures are recorded, not propagated.
ResultTable run_experiment(const ExperimentConfig& config);

std::vector<PointSummary> summarize(const ResultTable& table);

void write_results_csv(std::ostream& out, const ResultTable& table);
io::json summary_to_json(const std::vector<PointSummary>& points);

ExperimentConfig experiment_config_from_json(const io::json& j);
io::json experiment_config_to_json(const ExperimentConfig& config);

/// Real-network pipeline: select stubborn agents by median degree, drop
/// ordinary agents with no stubborn neighbor, simulate randomized
/// dynamics, estimate steady states by temporal averaging, and recover
/// the relative trust matrices.
struct RealNetConfig {
    int n_s = 180;
    dynamics::DynamicsModel model = dynamics::DynamicsModel::broadcast_gossip(0.5);
    double sigma = 0.0;
    int k_factor = 2;
    int samples = 20000;
    long burn_in = 20000;
    long t_max = -1;
    recovery::SolverConfig solver;
    double c_diag = 0.0;
    std::uint64_t seed = 7;
};

struct RealNetResult {
    int n_ord = 0;
    int n_s = 0;
    long edge_count = 0;
    double mean_degree = 0.0;
    double nmse_d = 0.0;
    double nmse_b = 0.0;
    double collect_seconds = 0.0;
    double solve_seconds = 0.0;
    int iterations = 0;
};

RealNetResult run_realnet(const io::EdgeList& list, const RealNetConfig& config);

}  // namespace socsense::harness
