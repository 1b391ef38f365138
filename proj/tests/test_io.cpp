#include <doctest.h>

#include "socsense/graph.hpp"
#include "socsense/io.hpp"
#include "socsense/recovery.hpp"

#include <sstream>

using namespace socsense;
using namespace socsense::io;

TEST_CASE("trust matrix json round trip") {
    auto topo = graph::gen_network(graph::NetworkModelSpec::er(0.3), 8, 3);
    auto supp = graph::place_stubborn(8, 3, graph::PlacementSpec::d_regular(2), 3);
    auto w = graph::build_trust_matrix(topo, supp, 3);
    auto j = trust_to_json(w);
    auto back = trust_from_json(j);
    CHECK(back.B == w.B);
    CHECK(back.D == w.D);

    auto j2 = j;
    j2["n_ord"] = 5;
    CHECK_THROWS(trust_from_json(j2));
}

TEST_CASE("support json round trip") {
    auto supp = graph::place_stubborn(6, 4, graph::PlacementSpec::er_bipartite(0.4), 11);
    auto back = support_from_json(support_to_json(supp));
    CHECK(back.n_ord == supp.n_ord);
    CHECK(back.n_s == supp.n_s);
    CHECK(back.edges == supp.edges);
}

TEST_CASE("dataset json round trip") {
    dynamics::SteadyStateData data;
    data.K = 3;
    data.Z = Matrix::Random(2, 3);
    data.Y_hat = Matrix::Random(4, 3);
    data.column_variance = Vector::Random(3).cwiseAbs();
    data.z_full_row_rank = true;
    auto j = dataset_to_json(data, 0.1, dynamics::DynamicsModel::neighbor_sampling(), {42});
    CHECK(j.at("model") == "neighbor_sampling");
    CHECK(j.at("sigma") == 0.1);
    auto back = dataset_from_json(j);
    CHECK(back.Z == data.Z);
    CHECK(back.Y_hat == data.Y_hat);
    CHECK(back.K == 3);
    CHECK(back.column_variance(1) == data.column_variance(1));
}

TEST_CASE("problem json round trip") {
    recovery::RecoveryProblem p;
    p.Y_hat = Matrix::Random(4, 6);
    p.Z = Matrix::Random(3, 6);
    p.S = {{0, 1}, {2, 3}};
    p.omega_b = {{0, 0}, {1, 1}, {2, 2}, {3, 0}};
    p.c = Vector::Constant(4, 0.1);
    p.mode = recovery::RecoveryMode::full_support;
    auto back = io::problem_from_json(io::problem_to_json(p));
    CHECK(back.Y_hat == p.Y_hat);
    CHECK(back.Z == p.Z);
    CHECK(back.S == p.S);
    CHECK(back.omega_b == p.omega_b);
    CHECK(back.mode == p.mode);
}

TEST_CASE("trace and objective csv") {
    dynamics::OpinionTrace trace;
    trace.n_s = 1;
    trace.samples = Matrix::Zero(3, 2);
    trace.samples << 0.0, 1.0, 0.5, 0.75, 0.25, 0.875;
    std::ostringstream out;
    write_trace_csv(out, trace);
    auto text = out.str();
    CHECK(text.rfind("t,agent_0,agent_1\n", 0) == 0);
    CHECK(text.find("\n1,0.5,0.75\n") != std::string::npos);

    std::ostringstream obj;
    write_objective_csv(obj, {2.0, 1.0, 0.5});
    CHECK(obj.str().rfind("iter,objective,residual\n", 0) == 0);
    CHECK(obj.str().find("\n1,1,1\n") != std::string::npos);
}

TEST_CASE("edge list parsing") {
    std::istringstream in(
        "# a comment\n"
        "0 1\n"
        "1 2 0.5\n"
        "\n"
        "2 0 # trailing comment\n");
    auto list = read_edge_list(in);
    CHECK(list.n == 3);
    CHECK(list.edges.size() == 3);
    CHECK(list.has_weights);
    CHECK(std::get<2>(list.edges[1]) == 0.5);

    std::istringstream bad("0\n");
    CHECK_THROWS(read_edge_list(bad));
    std::istringstream negative("0 -2\n");
    CHECK_THROWS(read_edge_list(negative));
}
