#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "treelab/asymptotics.hpp"
#include "treelab/graph.hpp"
#include "treelab/tree.hpp"
#include "treelab/weyl.hpp"

using namespace treelab;

namespace {

std::vector<double> time_grid(double t0, double t1, int n) {
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i) t[i] = t0 + (t1 - t0) * i / (n - 1);
    return t;
}

}  // namespace

TEST_CASE("llt_fit recovers a synthetic power law exactly") {
    const double lam0 = 0.08, C = 0.35, alpha = 1.5;
    auto ts = time_grid(20.0, 60.0, 200);
    std::vector<double> ps;
    for (double t : ts) ps.push_back(C * std::pow(t, -alpha) * std::exp(-lam0 * t));
    auto fit = llt_fit(ts, ps, lam0, 20.0, 60.0);
    CHECK(fit.alpha_fit == doctest::Approx(alpha).epsilon(1e-10));
    CHECK(fit.C_fit_free == doctest::Approx(C).epsilon(1e-9));
    CHECK(fit.C_fit == doctest::Approx(C).epsilon(1e-9));
    CHECK(fit.r2 > 1.0 - 1e-12);
}

TEST_CASE("llt_fit separates a wrong exponent") {
    const double lam0 = 0.08;
    auto ts = time_grid(20.0, 60.0, 200);
    std::vector<double> ps;
    for (double t : ts) ps.push_back(0.2 * std::pow(t, -1.0) * std::exp(-lam0 * t));
    auto fit = llt_fit(ts, ps, lam0, 20.0, 60.0);
    CHECK(fit.alpha_fit == doctest::Approx(1.0).epsilon(1e-8));
    // the pinned-3/2 constant then disagrees with the free one
    CHECK(std::abs(fit.C_fit / fit.C_fit_free - 1.0) > 0.5);
}

TEST_CASE("llt_fit rejects contaminated windows") {
    auto ts = time_grid(20.0, 60.0, 100);
    std::vector<double> ps(ts.size(), 1e-3);
    CHECK_THROWS_AS(llt_fit(ts, ps, 0.08, 20.0, 60.0, /*truncation_tail=*/0.05),
                    WindowContaminated);
    // too few samples inside the window
    CHECK_THROWS_AS(llt_fit(ts, ps, 0.08, 59.0, 60.0), WindowContaminated);
}

TEST_CASE("runs test flags structured residuals and passes white ones") {
    const double lam0 = 0.05;
    auto ts = time_grid(10.0, 50.0, 160);
    std::mt19937 rng(2);
    std::normal_distribution<double> gauss(0.0, 1e-4);
    std::vector<double> white, wavy;
    for (double t : ts) {
        const double base = 0.3 * std::pow(t, -1.5) * std::exp(-lam0 * t);
        white.push_back(base * (1.0 + gauss(rng)));
        wavy.push_back(base * (1.0 + 0.01 * std::sin(2.0 * t)));
    }
    CHECK(llt_fit(ts, white, lam0, 10.0, 50.0).residual_white);
    CHECK(!llt_fit(ts, wavy, lam0, 10.0, 50.0).residual_white);
}

TEST_CASE("oscillation analysis finds a planted period") {
    const double lam0 = 0.05;
    auto ts = time_grid(10.0, 60.0, 500);
    std::vector<double> ps;
    const double period = 4.0;
    for (double t : ts) {
        const double osc = 1.0 + 0.05 * std::sin(2.0 * M_PI * t / period);
        ps.push_back(0.3 * std::pow(t, -1.5) * std::exp(-lam0 * t) * osc);
    }
    auto rep = oscillation_analysis(ts, ps, lam0, 10.0, 60.0);
    CHECK(rep.residual_amplitude == doctest::Approx(0.05).epsilon(0.15));
    CHECK(rep.dominant_period == doctest::Approx(period).epsilon(0.1));
}

TEST_CASE("oscillation analysis reports a flat residual as quiet") {
    const double lam0 = 0.05;
    auto ts = time_grid(10.0, 60.0, 500);
    std::vector<double> ps;
    for (double t : ts) ps.push_back(0.3 * std::pow(t, -1.5) * std::exp(-lam0 * t));
    auto rep = oscillation_analysis(ts, ps, lam0, 10.0, 60.0);
    CHECK(rep.residual_amplitude < 2e-3);
}

TEST_CASE("tauberian regression on theta_unit") {
    auto G = load_quotient_graph(theta_unit_config());
    const double lam0 = lambda0_resolvent(G, 1e-10).value();
    TreePoint x = make_vertex_point({});
    TreePoint y = make_vertex_point({0, 3});
    std::vector<double> grid;
    for (int j = 8; j < 20; ++j) grid.push_back(lam0 * (1.0 - std::pow(0.5, j)));
    auto rep = tauberian_limit(G, x, y, lam0, grid);
    CHECK(rep.r2 > 0.99);
    CHECK(rep.L_fit > 0.0);
    CHECK(rep.band < 0.1 * rep.L_fit);
    // near lambda0: d2G ~ (L/2) (lambda0-lambda)^{-3/2}
    CHECK(rep.second_deriv_ratio == doctest::Approx(1.0).epsilon(0.15));
    CHECK(rep.lambdas.size() == grid.size());
}

TEST_CASE("tauberian rejects windows far from lambda0") {
    auto G = load_quotient_graph(theta_unit_config());
    const double lam0 = lambda0_resolvent(G, 1e-10).value();
    TreePoint x = make_vertex_point({});
    TreePoint y = make_vertex_point({0});
    // a wide grid reaching down to lambda0/2 sees strong curvature from the
    // sub-leading terms and must be rejected as not linear enough
    std::vector<double> grid;
    for (int j = 0; j < 12; ++j) grid.push_back(lam0 * (1.0 - 0.5 * std::pow(0.7, j)));
    CHECK_THROWS_AS(tauberian_limit(G, x, y, lam0, grid, true), FitRejected);
}
