#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "treelab/graph.hpp"
#include "treelab/tree.hpp"
#include "treelab/weyl.hpp"

using namespace treelab;

namespace {

std::vector<int> random_word(const QuotientGraph& G, std::mt19937& rng, int len) {
    std::vector<int> w;
    int at = G.base_vertex(), prev = -1;
    for (int i = 0; i < len; ++i) {
        std::vector<int> cand;
        for (int e : G.out_edges(at))
            if (prev < 0 || e != G.reverse(prev)) cand.push_back(e);
        int e = cand[rng() % cand.size()];
        w.push_back(e);
        prev = e;
        at = G.edge(e).terminus;
    }
    return w;
}

}  // namespace

TEST_CASE("lambda0 matches the analytic vertex-reduction value on theta_unit") {
    auto G = load_quotient_graph(theta_unit_config());
    const double exact = std::pow(std::acos(2.0 * std::sqrt(2.0) / 3.0), 2);
    auto br = lambda0_resolvent(G, 1e-10);
    CHECK(br.value() == doctest::Approx(exact).epsilon(1e-7));
    CHECK(br.lo < br.hi);
}

TEST_CASE("weyl solve converges below lambda0 and diverges above") {
    auto G = load_quotient_graph(theta_dio_config());
    auto br = lambda0_resolvent(G, 1e-9);
    auto Wlo = solve_weyl(G, br.value() - 1e-3);
    CHECK(Wlo.converged);
    CHECK(!Wlo.diverged);
    auto Whi = solve_weyl(G, br.value() + 1e-3);
    CHECK(Whi.diverged);
    CHECK_THROWS_AS(solve_weyl(G, -0.1), NegativeLambda);
}

TEST_CASE("branch hitting factors at lambda=0 on theta_unit are exactly 1/2") {
    // degree-3 regular unit tree: the harmonic branch function halves per edge
    auto G = load_quotient_graph(theta_unit_config());
    auto W = solve_weyl(G, 0.0);
    for (int e = 0; e < G.num_oriented_edges(); ++e)
        CHECK(W.F[e] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("Green symmetry to 1e-10") {
    for (auto cfg : {theta_unit_config(), theta_dio_config()}) {
        auto G = load_quotient_graph(cfg);
        const double lam0 = lambda0_resolvent(G, 1e-9).value();
        std::mt19937 rng(5);
        for (double lam : {0.0, 0.5 * lam0}) {
            auto W = solve_weyl(G, lam);
            for (int trial = 0; trial < 40; ++trial) {
                TreePoint x = make_vertex_point(random_word(G, rng, static_cast<int>(rng() % 5)));
                TreePoint y = make_vertex_point(random_word(G, rng, static_cast<int>(rng() % 5)));
                const double gxy = green(G, W, x, y);
                CHECK(std::abs(green(G, W, y, x) - gxy) <= 1e-10 * std::max(1.0, gxy));
            }
        }
    }
}

TEST_CASE("hitting transform multiplicative along geodesics to 1e-12") {
    auto G = load_quotient_graph(theta_dio_config());
    const double lam0 = lambda0_resolvent(G, 1e-9).value();
    auto W = solve_weyl(G, 0.5 * lam0);
    std::mt19937 rng(17);
    int checked = 0;
    while (checked < 1000) {
        auto w = random_word(G, rng, 2 + static_cast<int>(rng() % 6));
        // x = base, z = endpoint, y = a vertex strictly between them
        std::size_t cut = 1 + rng() % (w.size() - 1);
        TreePoint x = make_vertex_point({});
        TreePoint y = make_vertex_point({w.begin(), w.begin() + cut});
        TreePoint z = make_vertex_point(w);
        REQUIRE(point_on_segment(G, y, x, z));
        const double lhs = hitting_transform(G, W, x, z);
        const double rhs = hitting_transform(G, W, x, y) * hitting_transform(G, W, y, z);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
        ++checked;
    }
}

TEST_CASE("green factorizes through the hitting transform") {
    auto G = load_quotient_graph(theta_dio_config());
    auto W = solve_weyl(G, 0.02);
    TreePoint x = make_vertex_point({});
    TreePoint y = make_vertex_point({0, 3, 1});
    CHECK(green(G, W, x, y) ==
          doctest::Approx(hitting_transform(G, W, x, y) * green_diag(G, W, y)).epsilon(1e-12));
    // interior points work too
    TreePoint p = make_point(G, {0}, 3, 0.4);
    CHECK(green(G, W, x, p) ==
          doctest::Approx(hitting_transform(G, W, x, p) * green_diag(G, W, p)).epsilon(1e-12));
}

TEST_CASE("martin kernel identities") {
    auto G = load_quotient_graph(theta_dio_config());
    const double lam0 = lambda0_resolvent(G, 1e-9).value();
    auto W = solve_weyl(G, 0.5 * lam0);
    TreePoint x0 = make_vertex_point({});
    BoundaryRay xi = deterministic_ray(G, {0, 3});

    // normalization at the base point
    auto k0 = martin_kernel(G, W, x0, x0, xi, 10);
    CHECK(k0.value == doctest::Approx(1.0).epsilon(1e-12));

    // on the ray toward xi the kernel is 1/Phi(x0, x)
    TreePoint x = make_vertex_point(ray_word(xi, 3));
    auto kx = martin_kernel(G, W, x0, x, xi, 10);
    CHECK(kx.value == doctest::Approx(1.0 / hitting_transform(G, W, x0, x)).epsilon(1e-10));

    // away from xi the kernel is Phi(x, x0) (paths to xi pass through x0)
    TreePoint away = make_vertex_point({2, 0});  // first letter differs from xi's
    auto ka = martin_kernel(G, W, x0, away, xi, 10);
    CHECK(ka.value == doctest::Approx(hitting_transform(G, W, away, x0)).epsilon(1e-10));
}

TEST_CASE("exact lambda-derivative of G matches finite differences") {
    auto G = load_quotient_graph(theta_dio_config());
    TreePoint x = make_vertex_point({});
    TreePoint y = make_vertex_point({0, 3});
    const double lam = 0.02;
    const double d1 = green_lambda_derivative(G, lam, x, y, 1);
    const double h = 1e-5;
    auto Wp = solve_weyl(G, lam + h);
    auto Wm = solve_weyl(G, lam - h);
    const double fd = (green(G, Wp, x, y) - green(G, Wm, x, y)) / (2 * h);
    CHECK(d1 == doctest::Approx(fd).epsilon(1e-6));
    // dG/dlambda = integral of G(x,z)G(z,y) > 0 and grows toward lambda0
    CHECK(d1 > 0.0);
    CHECK(green_lambda_derivative(G, 0.04, x, y, 1) > d1);
    // second derivative positive (G is convex in lambda)
    CHECK(green_lambda_derivative(G, lam, x, y, 2) > 0.0);
}

TEST_CASE("ancona diagnostics: exact stabilization on trees") {
    auto G = load_quotient_graph(theta_unit_config());
    const double lam0 = lambda0_resolvent(G, 1e-9).value();
    auto W = solve_weyl(G, 0.5 * lam0);
    auto rep = ancona_diagnostics(G, W, 60, 3);
    CHECK(rep.C_ancona >= 1.0);
    CHECK(rep.C_ancona < 2.0);
    // tree geodesics force the Green function through the midpoint exactly,
    // so cross-ratio deviations sit at rounding level
    CHECK(rep.exact_stabilization);
    CHECK(rep.C_strong < 1e-10);
    CHECK(rep.D_harnack > 0.0);
}
