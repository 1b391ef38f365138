#include <doctest.h>

#include "socsense/harness.hpp"

#include <algorithm>
#include <sstream>

using namespace socsense;
using namespace socsense::harness;

TEST_CASE("nmse") {
    Matrix truth = Matrix::Random(4, 5);
    CHECK(nmse(truth, truth) == 0.0);
    CHECK(nmse(Matrix::Zero(4, 5), truth) == doctest::Approx(1.0));
    CHECK(nmse(2.0 * truth, truth) == doctest::Approx(1.0));
    CHECK_THROWS(nmse(truth, Matrix::Zero(4, 5)));
}

TEST_CASE("support_error") {
    // truth with exactly 10% of the off-diagonal entries positive
    int n = 10;
    Matrix truth = Matrix::Zero(n, n);
    int positives = 9;  // 90 off-diagonal entries
    for (int k = 0; k < positives; ++k) truth(k, (k + 1) % n) = 0.5;

    CHECK(support_error(truth, truth, 1e-6) == 0.0);
    CHECK(support_error(Matrix::Zero(n, n), truth, 1e-6) == doctest::Approx(0.1));

    // complement estimate: wrong everywhere
    Matrix complement = Matrix::Constant(n, n, 1.0) - truth;
    for (int k = 0; k < positives; ++k) complement(k, (k + 1) % n) = 0.0;
    complement.diagonal().setZero();
    CHECK(support_error(complement, truth, 1e-6) == doctest::Approx(1.0));

    // averaged over a restricted admissible set
    std::vector<IndexPair> s = {{0, 1}, {5, 4}};
    CHECK(support_error(Matrix::Zero(n, n), truth, 1e-6, &s) == doctest::Approx(0.5));
}

TEST_CASE("expose_support") {
    std::vector<IndexPair> truth = {{0, 1}, {2, 3}, {3, 0}};
    auto exact = expose_support(truth, 4, 1.0, 9);
    CHECK(exact == truth);

    auto all = expose_support(truth, 4, 0.0, 9);
    CHECK(all.size() == 12);

    // nested in p_known for the same seed
    std::vector<double> grid = {0.0, 0.25, 0.5, 0.75, 1.0};
    for (std::size_t g = 1; g < grid.size(); ++g) {
        auto wider = expose_support(truth, 4, grid[g - 1], 9);
        auto narrower = expose_support(truth, 4, grid[g], 9);
        CHECK(narrower.size() <= wider.size());
        CHECK(std::includes(wider.begin(), wider.end(), narrower.begin(), narrower.end()));
    }
}

namespace {

ExperimentConfig tiny_config() {
    ExperimentConfig cfg;
    cfg.sweep = "n_s";
    cfg.grid = {6.0, 8.0};
    cfg.trials = 3;
    cfg.n_ord = 10;
    cfg.network = graph::NetworkModelSpec::er(0.2);
    cfg.placement = graph::PlacementSpec::d_regular(2);
    cfg.mode = recovery::RecoveryMode::full_support;
    cfg.solver.max_iters = 4000;
    cfg.collect.horizon = 2000;
    cfg.seed = 91;
    cfg.workers = 2;
    return cfg;
}

}  // namespace

TEST_CASE("run_experiment basic sweep and reproducibility") {
    auto cfg = tiny_config();
    auto table = run_experiment(cfg);
    REQUIRE(table.rows.size() == 6);
    CHECK_FALSE(table.any_failed());
    for (const auto& row : table.rows) {
        CHECK(row.nmse_d >= 0.0);
        CHECK(row.runtime_s >= 0.0);
    }

    auto again = run_experiment(cfg);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        CHECK(table.rows[i].nmse_d == again.rows[i].nmse_d);
        CHECK(table.rows[i].nmse_b == again.rows[i].nmse_b);
        CHECK(table.rows[i].support_err == again.rows[i].support_err);
        CHECK(table.rows[i].converged == again.rows[i].converged);
    }

    auto summary = summarize(table);
    REQUIRE(summary.size() == 2);
    CHECK(summary[0].trials == 3);
    CHECK(summary[0].label == "6");
    CHECK(summary[0].median_nmse_d >= 0.0);

    std::ostringstream csv;
    write_results_csv(csv, table);
    std::string text = csv.str();
    CHECK(text.find("nmse_D") != std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') == 7);
}

TEST_CASE("run_experiment marks failing trials without aborting") {
    auto cfg = tiny_config();
    cfg.sweep = "n_ord";
    cfg.grid = {3.0, 10.0};
    cfg.network = graph::NetworkModelSpec::ba(5);  // m >= n_ord fails at 3
    auto table = run_experiment(cfg);
    REQUIRE(table.rows.size() == 6);
    CHECK(table.any_failed());
    int failed = 0;
    for (const auto& row : table.rows) {
        if (row.failed) {
            ++failed;
            CHECK_FALSE(row.error.empty());
        }
    }
    CHECK(failed == 3);  // only the n_ord = 3 point
    auto summary = summarize(table);
    CHECK(summary[0].trials == 0);
    CHECK(summary[1].trials == 3);
}

TEST_CASE("experiment config json round trip") {
    auto cfg = tiny_config();
    cfg.sweep = "model";
    cfg.model_grid = {"ba", "ws"};
    auto j = experiment_config_to_json(cfg);
    auto back = experiment_config_from_json(j);
    CHECK(back.sweep == "model");
    CHECK(back.model_grid == cfg.model_grid);
    CHECK(back.trials == cfg.trials);
    CHECK(back.n_ord == cfg.n_ord);
    CHECK(back.solver.max_iters == cfg.solver.max_iters);
    CHECK(back.placement.d == cfg.placement.d);

    io::json bad = j;
    bad["sweep"] = "nonsense";
    CHECK_THROWS(experiment_config_from_json(bad));
}

TEST_CASE("model sweep runs all three generators") {
    auto cfg = tiny_config();
    cfg.sweep = "model";
    cfg.model_grid = {"er", "ba", "ws"};
    cfg.trials = 2;
    cfg.n_s = 6;
    auto table = run_experiment(cfg);
    REQUIRE(table.rows.size() == 6);
    CHECK_FALSE(table.any_failed());
    CHECK(table.rows[0].sweep_label == "er");
    CHECK(table.rows[2].sweep_label == "ba");
    CHECK(table.rows[4].sweep_label == "ws");
}

TEST_CASE("run_realnet on a synthetic edge list") {
    // ring plus chords, ingested the way an external edge list would be
    io::EdgeList list;
    int n = 40;
    list.n = n;
    for (int i = 0; i < n; ++i) {
        list.edges.emplace_back(i, (i + 1) % n, 1.0);
        list.edges.emplace_back(i, (i + 3) % n, 1.0);
    }
    RealNetConfig cfg;
    cfg.n_s = 10;
    cfg.model = dynamics::DynamicsModel::neighbor_sampling();
    cfg.samples = 2000;
    cfg.burn_in = 500;
    cfg.t_max = 21000;
    cfg.k_factor = 2;
    cfg.solver.max_iters = 3000;
    cfg.seed = 5;
    auto result = run_realnet(list, cfg);
    CHECK(result.n_s == 10);
    CHECK(result.n_ord <= 30);
    CHECK(result.n_ord > 0);
    CHECK(result.nmse_d >= 0.0);
    CHECK(result.nmse_d < 1.0);
}
