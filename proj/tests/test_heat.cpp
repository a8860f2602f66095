#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "treelab/graph.hpp"
#include "treelab/heat.hpp"
#include "treelab/tree.hpp"
#include "treelab/weyl.hpp"

using namespace treelab;

TEST_CASE("ball volume matches the branching count on the unit tree") {
    auto G = load_quotient_graph(theta_unit_config());
    auto ball = build_ball(G, 4.0, 0.05);
    // 3-regular unit tree: 3*2^(k-1) edges at depth k, total length 45 in B(4)
    // lumped mass misses h/2 at each of the 24 Dirichlet boundary ends
    const double vol = std::accumulate(ball.mass.begin(), ball.mass.end(), 0.0);
    CHECK(vol == doctest::Approx(45.0 - 24 * 0.05 / 2).epsilon(1e-9));
    double inst_len = 0.0;
    for (const auto& inst : ball.insts) inst_len += inst.mult * inst.length;
    CHECK(inst_len == doctest::Approx(45.0).epsilon(1e-12));
}

TEST_CASE("branch merging is exact for center-sourced data") {
    auto G = load_quotient_graph(theta_dio_config());
    auto full = build_ball(G, 5.0, 0.05, false);
    auto red = build_ball(G, 5.0, 0.05, true);
    CHECK(red.insts.size() < full.insts.size());

    CHECK(lambda0_ball(red) == doctest::Approx(lambda0_ball(full)).epsilon(1e-9));

    TreePoint x = make_vertex_point({});
    TreePoint y = make_vertex_point({0, 3});
    auto ff = heat_solve(full, x, {1.0}, 2e-3);
    auto fr = heat_solve(red, x, {1.0}, 2e-3);
    CHECK(field_value(fr, 0, y) == doctest::Approx(field_value(ff, 0, y)).epsilon(1e-10));
    CHECK(fr.mass_deficit[0] == doctest::Approx(ff.mass_deficit[0]).epsilon(1e-8));
}

TEST_CASE("dirichlet eigenvalue decreases with radius toward lambda0") {
    auto G = load_quotient_graph(theta_unit_config());
    const double lam0 = std::pow(std::acos(2.0 * std::sqrt(2.0) / 3.0), 2);
    double prev = 1e9;
    for (double R : {6.0, 9.0, 12.0}) {
        auto ball = build_ball(G, R, 0.05);
        const double l = lambda0_ball(ball);
        CHECK(l > lam0);  // Dirichlet monotonicity
        CHECK(l < prev);
        prev = l;
    }
    CHECK(prev - lam0 < 5e-2);
}

TEST_CASE("spectral extrapolation hits lambda0 on theta_unit") {
    auto G = load_quotient_graph(theta_unit_config());
    const double lam0 = std::pow(std::acos(2.0 * std::sqrt(2.0) / 3.0), 2);
    auto est = lambda0_spectral(G, 12.0, 0.04);
    CHECK(est.sequence.size() >= 3);
    CHECK(std::abs(est.extrapolated - lam0) < 5e-3);
    CHECK(est.lambda_R > est.extrapolated);
}

TEST_CASE("early-time mass conservation and positivity") {
    auto G = load_quotient_graph(theta_dio_config());
    auto ball = build_ball(G, 8.0, 0.04);
    TreePoint x = make_vertex_point({});
    auto f = heat_solve(ball, x, {0.5, 2.0}, 1e-3);
    // nothing has reached the boundary yet at t=0.5 (distance 8, time 0.5)
    CHECK(f.mass_deficit[0] < 1e-6);
    CHECK(f.mass_deficit[1] < 1e-3);
    CHECK(field_value(f, 0, x) > field_value(f, 1, x));
    TreePoint y = make_vertex_point({0});
    CHECK(field_value(f, 0, y) > 0.0);
}

TEST_CASE("heat kernel short-time gaussian on an edge interior") {
    // far from vertices the kernel is the line kernel e^{-d^2/4t}/sqrt(4 pi t)
    auto G = load_quotient_graph(theta_dio_config());
    auto ball = build_ball(G, 8.0, 0.02);
    // source at the center vertex; compare at small t and small distance along
    // one edge where at most one vertex intervenes
    TreePoint x = make_vertex_point({});
    auto f = heat_solve(ball, x, {0.02}, 1e-4);
    TreePoint y = make_point(G, {}, 4, 0.15);  // 0.15 along the length-2 edge
    const double d = 0.15;
    const double t = 0.02;
    // 3 directions at the source: the free-line kernel splits by 2/3 per branch
    const double expect = (2.0 / 3.0) * std::exp(-d * d / (4 * t)) / std::sqrt(4 * M_PI * t);
    CHECK(field_value(f, 0, y) == doctest::Approx(expect).epsilon(0.02));
}

TEST_CASE("green_from_heat matches the resolvent at distances >= 1") {
    auto G = load_quotient_graph(theta_unit_config());
    const double lam0 = std::pow(std::acos(2.0 * std::sqrt(2.0) / 3.0), 2);
    auto ball = build_ball(G, 14.0, 0.04);
    TreePoint x = make_vertex_point({});
    std::vector<TreePoint> probes = {make_vertex_point({0}), make_vertex_point({0, 3})};
    auto f = heat_solve(ball, x, {40.0}, 0.02, probes, 0.05);
    for (double lam : {0.0, 0.5 * lam0}) {
        auto W = solve_weyl(G, lam);
        for (std::size_t pi = 0; pi < probes.size(); ++pi) {
            const double gr = green(G, W, x, probes[pi]);
            const double gh = green_from_heat(f, lam, pi);
            CHECK(std::abs(gh / gr - 1.0) < 0.03);
        }
    }
}

TEST_CASE("probe outside the ball reads as the Dirichlet extension") {
    auto G = load_quotient_graph(theta_unit_config());
    auto ball = build_ball(G, 3.0, 0.1);
    TreePoint far = make_vertex_point({0, 3, 0, 3});  // distance 4
    CHECK(!ball.locate(far).valid());
    auto f = heat_solve(ball, make_vertex_point({}), {0.1}, 1e-3);
    CHECK(field_value(f, 0, far) == 0.0);
}

TEST_CASE("time step guard") {
    auto G = load_quotient_graph(theta_unit_config());
    auto ball = build_ball(G, 3.0, 0.1);
    CHECK_THROWS_AS(heat_solve(ball, make_vertex_point({}), {1.0}, 5.0), StepTooLarge);
}
