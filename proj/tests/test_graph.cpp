#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "treelab/graph.hpp"
#include "treelab/tree.hpp"

using namespace treelab;

TEST_CASE("config validation rejects bad graphs") {
    CHECK_THROWS_AS(load_quotient_graph("{"), ValidationError);
    CHECK_THROWS_AS(
        load_quotient_graph(R"({"vertices":["a"],"edges":[],"base_vertex":"a"})"),
        DegreeTooSmall);
    CHECK_THROWS_AS(load_quotient_graph(R"({"vertices":["a","b"],
        "edges":[{"u":"a","v":"b","length":0.0},{"u":"a","v":"b","length":1},
                 {"u":"a","v":"b","length":1}],"base_vertex":"a"})"),
                    NonPositiveLength);
    CHECK_THROWS_AS(load_quotient_graph(R"({"vertices":["a","b"],
        "edges":[{"u":"a","v":"c","length":1},{"u":"a","v":"b","length":1},
                 {"u":"a","v":"b","length":1}],"base_vertex":"a"})"),
                    ValidationError);
}

TEST_CASE("symbolic lengths parse") {
    auto G = load_quotient_graph(theta_dio_config());
    std::vector<double> ls;
    for (int e = 0; e < G.num_oriented_edges(); ++e) ls.push_back(G.edge(e).length);
    std::sort(ls.begin(), ls.end());
    CHECK(ls.front() == doctest::Approx(1.0));
    CHECK(ls[2] == doctest::Approx(std::sqrt(2.0)));
    CHECK(ls.back() == doctest::Approx(2.0));
}

TEST_CASE("theta graphs have the expected shape") {
    for (auto cfg : {theta_unit_config(), theta_dio_config()}) {
        auto G = load_quotient_graph(cfg);
        CHECK(G.num_vertices() == 2);
        CHECK(G.num_oriented_edges() == 6);
        for (int v = 0; v < G.num_vertices(); ++v) CHECK(G.degree(v) == 3);
        for (int e = 0; e < G.num_oriented_edges(); ++e) {
            CHECK(G.reverse(G.reverse(e)) == e);
            CHECK(G.edge(e).length == G.edge(G.reverse(e)).length);
            // non-backtracking successor count = degree - 1
            CHECK(G.successors(e).size() == 2);
        }
    }
}

TEST_CASE("tree distance agrees with an independent LCA oracle") {
    auto G = load_quotient_graph(theta_dio_config());
    std::mt19937 rng(11);

    auto random_word = [&](int len) {
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
    };
    auto depth = [&](const std::vector<int>& w) {
        double d = 0;
        for (int e : w) d += G.edge(e).length;
        return d;
    };

    for (int trial = 0; trial < 200; ++trial) {
        auto a = random_word(static_cast<int>(rng() % 7));
        auto b = random_word(static_cast<int>(rng() % 7));
        std::size_t k = 0;
        while (k < a.size() && k < b.size() && a[k] == b[k]) ++k;
        std::vector<int> pre(a.begin(), a.begin() + k);
        double expect = depth(a) + depth(b) - 2.0 * depth(pre);
        CHECK(tree_distance(G, make_vertex_point(a), make_vertex_point(b)) ==
              doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("geodesics are consistent with distance and midpoints") {
    auto G = load_quotient_graph(theta_unit_config());
    TreePoint x = make_point(G, {}, 0, 0.25);
    TreePoint y = make_vertex_point({0, 3, 0});
    auto seg = geodesic(G, x, y);
    CHECK(seg.length == doctest::Approx(tree_distance(G, x, y)));
    double sum = 0;
    for (auto& st : seg.steps) sum += st.b - st.a;
    CHECK(sum == doctest::Approx(seg.length));
    TreePoint mid = make_vertex_point({0});
    CHECK(point_on_segment(G, mid, x, y));
    CHECK(tree_distance(G, x, mid) + tree_distance(G, mid, y) ==
          doctest::Approx(seg.length));
}

TEST_CASE("busemann cocycle identities") {
    auto G = load_quotient_graph(theta_dio_config());
    BoundaryRay xi = deterministic_ray(G, {0, 3});
    TreePoint x = make_vertex_point({});
    TreePoint y = make_vertex_point({2});
    TreePoint z = make_vertex_point({4, 1});
    // cocycle: b(x,z) = b(x,y) + b(y,z); antisymmetry
    CHECK(busemann(G, xi, x, z) ==
          doctest::Approx(busemann(G, xi, x, y) + busemann(G, xi, y, z)).epsilon(1e-12));
    CHECK(busemann(G, xi, x, y) == doctest::Approx(-busemann(G, xi, y, x)).epsilon(1e-12));
    // moving toward xi along the ray gains horospherical height:
    // b(x,y) = d(x,xi) - d(y,xi) equals +d(x,y) when y lies past x on the ray
    TreePoint r1 = make_vertex_point(ray_word(xi, 2));
    TreePoint r2 = make_vertex_point(ray_word(xi, 5));
    CHECK(busemann(G, xi, r1, r2) == doctest::Approx(tree_distance(G, r1, r2)));
}

TEST_CASE("gromov product matches distance-to-geodesic in a tree") {
    auto G = load_quotient_graph(theta_unit_config());
    TreePoint base = make_vertex_point({});
    BoundaryRay xi = deterministic_ray(G, {0});
    BoundaryRay zeta = deterministic_ray(G, {2});
    // the two rays split immediately at the base
    CHECK(gromov_product(G, base, xi, zeta) == doctest::Approx(0.0));
    TreePoint off = make_vertex_point({4});
    CHECK(gromov_product(G, off, xi, zeta) == doctest::Approx(1.0));
}

TEST_CASE("lift_words enumerates the ball correctly") {
    auto G = load_quotient_graph(theta_unit_config());
    // base vertex u: lifts of u itself at distance <= 2 are the empty word
    // plus the 3*2 two-step words; lifts of v at distance <= 1 are 3 words
    auto wu = lift_words(G, G.base_vertex(), 2.0);
    CHECK(wu.size() == 7);
    int other = 1 - G.base_vertex();
    auto wv = lift_words(G, other, 1.0);
    CHECK(wv.size() == 3);
    std::set<std::vector<int>> uniq(wu.begin(), wu.end());
    CHECK(uniq.size() == wu.size());
    for (auto& w : wu) CHECK(word_is_admissible(G, w));
}

TEST_CASE("connector_word respects the non-backtracking constraint") {
    auto G = load_quotient_graph(theta_dio_config());
    for (int e = 0; e < G.num_oriented_edges(); ++e) {
        auto w = connector_word(G, G.edge(e).origin, e);
        CHECK(word_is_admissible(G, w));
        if (!w.empty()) CHECK(w.back() != G.reverse(e));
        // appending e must stay admissible
        auto ext = w;
        ext.push_back(e);
        CHECK(word_is_admissible(G, ext));
    }
}

TEST_CASE("deterministic_ray extends a word admissibly and periodically") {
    auto G = load_quotient_graph(theta_unit_config());
    BoundaryRay xi = deterministic_ray(G, {0, 3});
    CHECK(!xi.period.empty());
    auto w = ray_word(xi, 12);
    CHECK(word_is_admissible(G, w));
    CHECK(std::equal(w.begin(), w.begin() + 2, std::vector<int>{0, 3}.begin()));
}

TEST_CASE("length spectrum: lattice vs diophantine flags") {
    auto Gu = load_quotient_graph(theta_unit_config());
    auto ru = length_spectrum(Gu, 6);
    CHECK(ru.lattice);
    CHECK(ru.lattice_generator > 0.0);
    // every translation length is a multiple of the generator
    for (auto& c : ru.cycles) {
        double q = c.translation_length / ru.lattice_generator;
        CHECK(std::abs(q - std::round(q)) < 1e-9);
    }

    auto Gd = load_quotient_graph(theta_dio_config());
    auto rd = length_spectrum(Gd, 6);
    CHECK(!rd.lattice);
    CHECK(rd.diophantine_quality > 0.0);
    // sqrt(2) appears among the primitive translation lengths
    bool has_irrational_ratio = false;
    for (auto& c : rd.cycles)
        for (auto& c2 : rd.cycles) {
            double r = c.translation_length / c2.translation_length;
            if (std::abs(r - std::sqrt(2.0)) < 1e-9) has_irrational_ratio = true;
        }
    CHECK(has_irrational_ratio);
}
