#include <doctest.h>

#include "socsense/dynamics.hpp"
#include "socsense/graph.hpp"

#include <cmath>
#include <map>
#include <random>

using namespace socsense;
using namespace socsense::dynamics;
using namespace socsense::graph;

namespace {

TrustMatrix two_agent_ring() {
    TrustMatrix w;
    w.B = Matrix::Zero(2, 2);
    w.B(0, 0) = 0.5;
    w.B(1, 1) = 0.5;
    w.D = Matrix::Zero(2, 2);
    w.D(0, 1) = 0.5;
    w.D(1, 0) = 0.5;
    return w;
}

TrustMatrix random_instance(int n_ord, int n_s, double p, int d, std::uint64_t seed) {
    auto topo = gen_network(NetworkModelSpec::er(p), n_ord, seed);
    auto supp = place_stubborn(n_ord, n_s, PlacementSpec::d_regular(d), seed + 1);
    return build_trust_matrix(topo, supp, seed + 2);
}

}  // namespace

TEST_CASE("step_deterministic hand values") {
    TrustMatrix trusting;
    trusting.B = Matrix::Constant(1, 1, 1.0);
    trusting.D = Matrix::Zero(1, 1);
    OpinionState s{Vector::Constant(1, 0.7), Vector::Constant(1, 0.2), 0};
    auto next = step_deterministic(trusting, s);
    CHECK(next.y(0) == doctest::Approx(0.7));
    CHECK(next.t == 1);

    auto w = two_agent_ring();
    OpinionState s2{Vector::Zero(2), Vector::Zero(2), 0};
    s2.z << 0.0, 1.0;
    auto n2 = step_deterministic(w, s2);
    CHECK(n2.y(0) == doctest::Approx(0.0));
    CHECK(n2.y(1) == doctest::Approx(0.5));

    s.y = Vector::Zero(1);
    CHECK_THROWS(step_deterministic(w, s));
}

TEST_CASE("step preserves the convex hull of opinions") {
    auto w = random_instance(12, 4, 0.3, 2, 31);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        OpinionState s;
        s.z = Vector::NullaryExpr(4, [&](Eigen::Index) { return unif(rng); });
        s.y = Vector::NullaryExpr(12, [&](Eigen::Index) { return unif(rng); });
        double lo = std::min(s.z.minCoeff(), s.y.minCoeff());
        double hi = std::max(s.z.maxCoeff(), s.y.maxCoeff());
        auto next = step_deterministic(w, s);
        CHECK(next.y.minCoeff() >= lo - 1e-12);
        CHECK(next.y.maxCoeff() <= hi + 1e-12);
    }
}

TEST_CASE("steady_state_exact hand values") {
    TrustMatrix trusting;
    trusting.B = Matrix::Constant(1, 1, 1.0);
    trusting.D = Matrix::Zero(1, 1);
    Matrix z = Matrix::Constant(1, 1, 0.7);
    CHECK(steady_state_exact(trusting.B, trusting.D, z)(0, 0) == doctest::Approx(0.7));

    auto w = two_agent_ring();
    Matrix z2(2, 1);
    z2 << 0.0, 1.0;
    Matrix y = steady_state_exact(w.B, w.D, z2);
    CHECK(y(0, 0) == doctest::Approx(1.0 / 3.0));
    CHECK(y(1, 0) == doctest::Approx(2.0 / 3.0));

    // I - D singular: the solve must refuse rather than return garbage
    CHECK_THROWS_AS(steady_state_exact(Matrix::Zero(2, 2), Matrix::Identity(2, 2), z2),
                    std::runtime_error);
}

TEST_CASE("single stubborn agent forces consensus at z") {
    auto w = random_instance(10, 1, 0.35, 1, 77);
    Matrix z = Matrix::Constant(1, 3, 1.0);
    z(0, 1) = -0.4;
    z(0, 2) = 2.5;
    Matrix y = steady_state_exact(w.B, w.D, z);
    for (int k = 0; k < 3; ++k) {
        CHECK((y.col(k).array() - z(0, k)).abs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("deterministic simulation contracts toward the steady state") {
    auto w = random_instance(15, 5, 0.25, 3, 411);
    Vector z0 = Vector::LinSpaced(5, -1.0, 1.0);
    Vector y0 = Vector::Zero(15);
    auto trace = simulate(w, z0, y0, 200, DynamicsModel::deterministic(), 0.0, 2);
    Vector y_inf = steady_state_exact(w.B, w.D, z0);
    double rho = spectral_norm(w.D);
    double base = (y0 - y_inf).norm();
    for (long t : {10L, 50L, 100L, 200L}) {
        double err = (trace.samples.row(t).tail(15).transpose() - y_inf).norm();
        CHECK(err <= std::pow(rho, static_cast<double>(t)) * base + 1e-12);
    }
    // stubborn coordinates never move
    for (long t = 0; t <= 200; ++t) {
        CHECK((trace.samples.row(t).head(5).transpose() - z0).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("neighbor sampling realizations are 0/1 rows with mean W") {
    auto w = random_instance(5, 2, 0.5, 1, 99);
    Matrix sum_b = Matrix::Zero(5, 2);
    Matrix sum_d = Matrix::Zero(5, 5);
    const int trials = 100000;
    for (int t = 0; t < trials; ++t) {
        auto [B, D] = sample_random_w(w, DynamicsModel::neighbor_sampling(), 1000 + t);
        if (t < 50) {
            for (int i = 0; i < 5; ++i) {
                double row_sum = B.row(i).sum() + D.row(i).sum();
                CHECK(row_sum == doctest::Approx(1.0));
                for (int j = 0; j < 2; ++j) CHECK((B(i, j) == 0.0 || B(i, j) == 1.0));
                for (int j = 0; j < 5; ++j) CHECK((D(i, j) == 0.0 || D(i, j) == 1.0));
            }
        }
        sum_b += B;
        sum_d += D;
    }
    CHECK(((sum_b / trials) - w.B).cwiseAbs().maxCoeff() < 1e-2);
    CHECK(((sum_d / trials) - w.D).cwiseAbs().maxCoeff() < 1e-2);
}

TEST_CASE("broadcast gossip realizations have the induced mean") {
    auto w = random_instance(6, 2, 0.4, 1, 55);
    auto mean = gossip_mean_matrix(w, 0.5);
    mean.validate(1e-12);
    Matrix sum_b = Matrix::Zero(6, 2);
    Matrix sum_d = Matrix::Zero(6, 6);
    const int trials = 200000;
    for (int t = 0; t < trials; ++t) {
        auto [B, D] = sample_random_w(w, DynamicsModel::broadcast_gossip(0.5), 5000 + t);
        sum_b += B;
        sum_d += D;
    }
    CHECK(((sum_b / trials) - mean.B).cwiseAbs().maxCoeff() < 5e-3);
    CHECK(((sum_d / trials) - mean.D).cwiseAbs().maxCoeff() < 5e-3);
    CHECK_THROWS(sample_random_w(w, DynamicsModel::broadcast_gossip(1.5), 1));
}

TEST_CASE("random dynamics with two stubborn agents never settles") {
    auto w = random_instance(8, 2, 0.4, 2, 303);
    Vector z0(2);
    z0 << 0.0, 1.0;
    long T = 400;
    auto trace = simulate(w, z0, Vector::Constant(8, 0.5), T, DynamicsModel::neighbor_sampling(),
                          0.0, 17);
    bool moved_late = false;
    for (long t = T / 2 + 1; t <= T && !moved_late; ++t) {
        moved_late = (trace.samples.row(t) - trace.samples.row(t - 1)).cwiseAbs().maxCoeff() > 0.0;
    }
    CHECK(moved_late);
}

TEST_CASE("uniform_sampling_set") {
    auto forced = uniform_sampling_set(0, 5, 5, 3);
    CHECK(forced.instants == std::vector<long>{1, 2, 3, 4, 5});

    auto s = uniform_sampling_set(10, 20, 3, 4);
    s.validate();
    CHECK(s.size() == 3);
    for (long t : s.instants) {
        CHECK(t > 10);
        CHECK(t <= 20);
    }
    CHECK_THROWS(uniform_sampling_set(10, 12, 3, 4));

    // frequency table over seeds vs the uniform chi-square bound at 1%
    std::map<long, int> counts;
    const int runs = 10000;
    for (int seed = 0; seed < runs; ++seed) {
        counts[uniform_sampling_set(10, 20, 1, 9000 + seed).instants[0]] += 1;
    }
    double chi2 = 0.0;
    double expected = runs / 10.0;
    for (long v = 11; v <= 20; ++v) {
        double diff = counts[v] - expected;
        chi2 += diff * diff / expected;
    }
    CHECK(chi2 < 21.666);  // chi-square(9 dof) at the 1% level
}

TEST_CASE("temporal_average basics") {
    OpinionTrace trace;
    trace.n_s = 0;
    trace.samples = Matrix::Zero(6, 1);
    for (int t = 0; t < 6; ++t) trace.samples(t, 0) = (t % 2 == 0) ? 2.0 : 4.0;

    SampleSet constant{0, 5, {2, 4}};
    CHECK(temporal_average(trace, constant)(0) == doctest::Approx(2.0));
    SampleSet alternating{0, 5, {2, 3}};
    CHECK(temporal_average(trace, alternating)(0) == doctest::Approx(3.0));

    SampleSet empty{0, 5, {}};
    CHECK_THROWS(temporal_average(trace, empty));
    SampleSet beyond{0, 10, {9}};
    CHECK_THROWS(temporal_average(trace, beyond));
}

TEST_CASE("mse_bound") {
    SampleSet consecutive{0, 3, {1, 2, 3}};
    CHECK(mse_bound(0.0, consecutive, 2.0) == doctest::Approx(2.0 / 3.0));
    CHECK(mse_bound(0.5, consecutive, 1.0) == doctest::Approx((1.0 + 0.5 + 0.25) / 3.0));

    // widening the gaps can only shrink the bound
    SampleSet wide{0, 30, {10, 20, 30}};
    CHECK(mse_bound(0.5, wide) <= mse_bound(0.5, consecutive));
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        auto base = uniform_sampling_set(0, 100, 8, 400 + trial);
        SampleSet stretched = base;
        for (auto& t : stretched.instants) t *= 3;
        stretched.horizon = 300;
        CHECK(mse_bound(0.7, stretched) <= mse_bound(0.7, base) + 1e-15);
    }
    CHECK_THROWS(mse_bound(1.0, consecutive));
}

TEST_CASE("collect_dataset deterministic matches the exact steady state") {
    auto w = random_instance(12, 4, 0.3, 2, 2025);
    CollectorConfig cc;
    cc.model = DynamicsModel::deterministic();
    cc.horizon = 5000;
    auto data = collect_dataset(w, 8, cc, 42);
    CHECK(data.z_full_row_rank);
    Matrix exact = steady_state_exact(w.B, w.D, data.Z);
    CHECK((data.Y_hat - exact).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("collect_dataset variance diagnostic tracks sigma^2 / m") {
    auto w = random_instance(10, 3, 0.3, 2, 88);
    CollectorConfig cc;
    cc.model = DynamicsModel::deterministic();
    cc.sigma = 0.2;
    cc.samples = 400;
    cc.burn_in = 200;
    cc.t_max = 5000;
    auto data = collect_dataset(w, 6, cc, 4242);
    double expected = 0.2 * 0.2 / 400.0;
    for (int k = 0; k < 6; ++k) {
        CHECK(data.column_variance(k) == doctest::Approx(expected).epsilon(0.25));
    }
}

TEST_CASE("collect_dataset flags rank problems") {
    auto w = random_instance(6, 4, 0.4, 2, 99);
    CollectorConfig cc;
    cc.model = DynamicsModel::deterministic();
    auto data = collect_dataset(w, 2, cc, 5);  // K < n_s
    CHECK_FALSE(data.warnings.empty());
    CHECK_FALSE(data.z_full_row_rank);

    Matrix z = Matrix::Zero(4, 8);  // rank deficient given Z
    cc.z_mode = ZMode::given;
    auto flagged = collect_dataset(w, 8, cc, 5, &z);
    CHECK_FALSE(flagged.z_full_row_rank);
}

TEST_CASE("temporal averaging is unbiased for the random model") {
    // Theorem-2 style check: across independent traces the mean estimate
    // matches the exact steady state within 3 standard errors.
    auto w = random_instance(6, 2, 0.5, 1, 1234);
    Vector z0(2);
    z0 << 0.0, 1.0;
    Vector y_inf = steady_state_exact(w.B, w.D, Matrix(z0));
    long burn_in = 50 * default_burn_in(w);
    int m = 40;
    long t_max = burn_in + 10 * m;
    const int traces = 500;
    Matrix estimates(6, traces);
    for (int r = 0; r < traces; ++r) {
        auto trace = simulate(w, z0, Vector::Zero(6), t_max, DynamicsModel::neighbor_sampling(),
                              0.0, 9000 + r);
        auto samples = uniform_sampling_set(burn_in, t_max, m, 100000 + r);
        estimates.col(r) = temporal_average(trace, samples).tail(6);
    }
    Vector mean = estimates.rowwise().mean();
    for (int i = 0; i < 6; ++i) {
        double sd = std::sqrt((estimates.row(i).array() - mean(i)).square().sum() / (traces - 1));
        double se = sd / std::sqrt(static_cast<double>(traces));
        CHECK(std::abs(mean(i) - y_inf(i)) < 3.0 * se + 1e-12);
    }
}

TEST_CASE("collect_dataset with the temporal estimator approaches exactness") {
    auto w = random_instance(10, 3, 0.35, 2, 777);
    CollectorConfig cc;
    cc.model = DynamicsModel::neighbor_sampling();
    cc.samples = 4000;
    cc.burn_in = 500;
    cc.t_max = 30000;
    auto data = collect_dataset(w, 6, cc, 31);
    Matrix exact = steady_state_exact(w.B, w.D, data.Z);
    CHECK((data.Y_hat - exact).cwiseAbs().maxCoeff() < 0.1);
}
