#include "treelab/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace treelab {

namespace {

int word_terminus(const QuotientGraph& G, const std::vector<int>& word) {
    return word.empty() ? G.base_vertex() : G.edge(word.back()).terminus;
}

std::size_t lcp(const std::vector<int>& a, const std::vector<int>& b) {
    std::size_t k = 0;
    while (k < a.size() && k < b.size() && a[k] == b[k]) ++k;
    return k;
}

double vertex_distance(const QuotientGraph& G, const std::vector<int>& a,
                       const std::vector<int>& b) {
    const std::size_t k = lcp(a, b);
    double d = 0.0;
    for (std::size_t i = k; i < a.size(); ++i) d += G.edge(a[i]).length;
    for (std::size_t i = k; i < b.size(); ++i) d += G.edge(b[i]).length;
    return d;
}

// Ways a geodesic can leave (or reach) a point: endpoint vertex word, the
// distance from the point to it, and the partial-edge traversal if any.
struct Portal {
    std::vector<int> word;
    double dist = 0.0;
    std::optional<EdgeTraversal> step;
};

std::vector<Portal> exit_portals(const QuotientGraph& G, const TreePoint& x) {
    if (x.is_vertex()) return {{x.word, 0.0, std::nullopt}};
    const double l = G.edge(x.edge).length;
    std::vector<int> far = x.word;
    far.push_back(x.edge);
    return {
        {x.word, x.offset, EdgeTraversal{G.reverse(x.edge), l - x.offset, l}},
        {std::move(far), l - x.offset, EdgeTraversal{x.edge, x.offset, l}},
    };
}

std::vector<Portal> entry_portals(const QuotientGraph& G, const TreePoint& y) {
    if (y.is_vertex()) return {{y.word, 0.0, std::nullopt}};
    const double l = G.edge(y.edge).length;
    std::vector<int> far = y.word;
    far.push_back(y.edge);
    return {
        {y.word, y.offset, EdgeTraversal{y.edge, 0.0, y.offset}},
        {std::move(far), l - y.offset, EdgeTraversal{G.reverse(y.edge), 0.0, l - y.offset}},
    };
}

bool same_arc(const TreePoint& x, const TreePoint& y) {
    return !x.is_vertex() && !y.is_vertex() && x.edge == y.edge && x.word == y.word;
}

}  // namespace

TreePoint make_vertex_point(std::vector<int> word) {
    TreePoint p;
    p.word = std::move(word);
    return p;
}

TreePoint make_point(const QuotientGraph& G, std::vector<int> word, int edge, double offset) {
    if (edge < 0) return make_vertex_point(std::move(word));
    if (G.edge(edge).origin != word_terminus(G, word))
        throw ValidationError("point edge is not outgoing at the word's vertex");
    const double l = G.edge(edge).length;
    if (offset < 0.0 || offset > l) throw ValidationError("point offset outside its edge");
    // fold a backtracking edge onto the last letter of the word
    if (!word.empty() && edge == G.reverse(word.back())) {
        edge = word.back();
        word.pop_back();
        offset = l - offset;
    }
    if (offset == 0.0) return make_vertex_point(std::move(word));
    if (offset == l) {
        word.push_back(edge);
        return make_vertex_point(std::move(word));
    }
    TreePoint p;
    p.word = std::move(word);
    p.edge = edge;
    p.offset = offset;
    return p;
}

int project(const QuotientGraph& G, const TreeVertex& v) { return word_terminus(G, v.word); }

int project(const QuotientGraph& G, const TreePoint& p) { return word_terminus(G, p.word); }

bool word_is_admissible(const QuotientGraph& G, const std::vector<int>& word) {
    int at = G.base_vertex();
    int prev = -1;
    for (int e : word) {
        if (e < 0 || e >= G.num_oriented_edges()) return false;
        if (G.edge(e).origin != at) return false;
        if (prev >= 0 && e == G.reverse(prev)) return false;
        at = G.edge(e).terminus;
        prev = e;
    }
    return true;
}

BoundaryRay make_ray(const QuotientGraph& G, std::vector<int> prefix, std::vector<int> period) {
    if (period.empty()) throw ValidationError("boundary ray needs a nonempty period");
    std::vector<int> probe = prefix;
    probe.insert(probe.end(), period.begin(), period.end());
    probe.insert(probe.end(), period.begin(), period.end());
    if (!word_is_admissible(G, probe))
        throw ValidationError("ray word backtracks or does not compose");
    return BoundaryRay{std::move(prefix), std::move(period)};
}

std::vector<int> ray_word(const BoundaryRay& xi, std::size_t n) {
    std::vector<int> w;
    w.reserve(n);
    for (std::size_t i = 0; i < n && i < xi.prefix.size(); ++i) w.push_back(xi.prefix[i]);
    std::size_t i = 0;
    while (w.size() < n) w.push_back(xi.period[i++ % xi.period.size()]);
    return w;
}

TreeVertex ray_vertex(const BoundaryRay& xi, std::size_t n) { return TreeVertex{ray_word(xi, n)}; }

bool same_boundary_point(const BoundaryRay& xi, const BoundaryRay& zeta) {
    const std::size_t n = std::max(xi.prefix.size(), zeta.prefix.size()) +
                          2 * xi.period.size() * zeta.period.size() + 4;
    return ray_word(xi, n) == ray_word(zeta, n);
}

double tree_distance(const QuotientGraph& G, const TreePoint& x, const TreePoint& y) {
    if (same_arc(x, y)) return std::abs(x.offset - y.offset);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& ex : exit_portals(G, x))
        for (const auto& en : entry_portals(G, y))
            best = std::min(best, ex.dist + vertex_distance(G, ex.word, en.word) + en.dist);
    return best;
}

GeodesicSegment geodesic(const QuotientGraph& G, const TreePoint& x, const TreePoint& y) {
    GeodesicSegment seg;
    seg.start = x;
    seg.end = y;
    if (x == y) return seg;
    if (same_arc(x, y)) {
        const double l = G.edge(x.edge).length;
        if (x.offset < y.offset)
            seg.steps.push_back({x.edge, x.offset, y.offset});
        else
            seg.steps.push_back({G.reverse(x.edge), l - x.offset, l - y.offset});
        seg.length = std::abs(x.offset - y.offset);
        return seg;
    }
    const auto exits = exit_portals(G, x);
    const auto entries = entry_portals(G, y);
    const Portal* bex = nullptr;
    const Portal* ben = nullptr;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& ex : exits)
        for (const auto& en : entries) {
            const double d = ex.dist + vertex_distance(G, ex.word, en.word) + en.dist;
            if (d < best) {
                best = d;
                bex = &ex;
                ben = &en;
            }
        }
    seg.length = best;
    if (bex->step) seg.steps.push_back(*bex->step);
    const std::size_t k = lcp(bex->word, ben->word);
    for (std::size_t i = bex->word.size(); i-- > k;) {
        const int r = G.reverse(bex->word[i]);
        seg.steps.push_back({r, 0.0, G.edge(r).length});
    }
    for (std::size_t i = k; i < ben->word.size(); ++i)
        seg.steps.push_back({ben->word[i], 0.0, G.edge(ben->word[i]).length});
    if (ben->step) seg.steps.push_back(*ben->step);
    return seg;
}

bool point_on_segment(const QuotientGraph& G, const TreePoint& y, const TreePoint& x,
                      const TreePoint& z, double tol) {
    const double slack =
        tree_distance(G, x, y) + tree_distance(G, y, z) - tree_distance(G, x, z);
    return slack <= tol;
}

TreeVertex deep_ray_point(const QuotientGraph& G, const BoundaryRay& xi, std::size_t extra_depth) {
    (void)G;
    return ray_vertex(xi, xi.prefix.size() + xi.period.size() + extra_depth);
}

double gromov_product(const QuotientGraph& G, const TreePoint& x, const TreePoint& p,
                      const TreePoint& q) {
    return 0.5 * (tree_distance(G, x, p) + tree_distance(G, x, q) - tree_distance(G, p, q));
}

namespace {

std::size_t stable_depth(const BoundaryRay& xi, std::size_t other_letters) {
    return xi.prefix.size() + 2 * xi.period.size() + other_letters + 8;
}

}  // namespace

double gromov_product(const QuotientGraph& G, const TreePoint& x, const BoundaryRay& p,
                      const TreePoint& q) {
    const TreePoint z =
        make_vertex_point(ray_word(p, stable_depth(p, x.word.size() + q.word.size() + 4)));
    return gromov_product(G, x, z, q);
}

double gromov_product(const QuotientGraph& G, const TreePoint& x, const BoundaryRay& p,
                      const BoundaryRay& q) {
    if (same_boundary_point(p, q)) throw EqualBoundaryPoints("gromov product needs p != q");
    const std::size_t extra = x.word.size() + p.prefix.size() + q.prefix.size() + 4;
    const TreePoint zp = make_vertex_point(ray_word(p, stable_depth(p, extra)));
    const TreePoint zq = make_vertex_point(ray_word(q, stable_depth(q, extra)));
    return gromov_product(G, x, zp, zq);
}

double busemann(const QuotientGraph& G, const BoundaryRay& xi, const TreePoint& x,
                const TreePoint& y) {
    const TreePoint z =
        make_vertex_point(ray_word(xi, stable_depth(xi, x.word.size() + y.word.size() + 4)));
    return tree_distance(G, x, z) - tree_distance(G, y, z);
}

bool shadow_contains(const QuotientGraph& G, const TreePoint& x, const TreePoint& y,
                     const BoundaryRay& xi) {
    const TreePoint z =
        make_vertex_point(ray_word(xi, stable_depth(xi, x.word.size() + y.word.size() + 4)));
    return point_on_segment(G, y, x, z);
}

std::vector<std::vector<int>> lift_words(const QuotientGraph& G, int qvertex, double max_dist) {
    std::vector<std::vector<int>> out;
    std::vector<int> word;
    auto dfs = [&](auto&& self, int at, double dist) -> void {
        if (at == qvertex) out.push_back(word);
        for (int e : G.out_edges(at)) {
            if (!word.empty() && e == G.reverse(word.back())) continue;
            const double d = dist + G.edge(e).length;
            if (d > max_dist + 1e-12) continue;
            word.push_back(e);
            self(self, G.edge(e).terminus, d);
            word.pop_back();
        }
    };
    dfs(dfs, G.base_vertex(), 0.0);
    return out;
}

std::vector<int> connector_word(const QuotientGraph& G, int qvertex, int first_letter) {
    // BFS over (vertex, last edge) states
    struct State {
        int vertex;
        int last;  // -1 at the start
    };
    std::map<std::pair<int, int>, std::pair<int, int>> parent;  // state -> (prev state key, edge)
    std::vector<State> queue{{G.base_vertex(), -1}};
    parent[{G.base_vertex(), -1}] = {-1, -1};
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        const State st = queue[qi];
        const bool ok_end =
            st.vertex == qvertex && (first_letter < 0 || st.last < 0 ||
                                     st.last != G.reverse(first_letter));
        if (ok_end) {
            std::vector<int> w;
            std::pair<int, int> key{st.vertex, st.last};
            while (parent[key].second >= 0) {
                w.push_back(parent[key].second);
                const int e = parent[key].second;
                key = {G.edge(e).origin, parent[key].first};
            }
            std::reverse(w.begin(), w.end());
            return w;
        }
        for (int e : G.out_edges(st.vertex)) {
            if (st.last >= 0 && e == G.reverse(st.last)) continue;
            const std::pair<int, int> key{G.edge(e).terminus, e};
            if (parent.count(key)) continue;
            parent[key] = {st.last, e};
            queue.push_back({G.edge(e).terminus, e});
        }
    }
    throw ValidationError("no connector word found (graph not connected?)");
}

BoundaryRay deterministic_ray(const QuotientGraph& G, const std::vector<int>& word,
                              const std::vector<int>& preferred_period) {
    if (word.empty()) throw ValidationError("deterministic_ray needs a nonempty word");
    const int last = word.back();
    if (!preferred_period.empty()) {
        const int pf = preferred_period.front();
        const int pl = preferred_period.back();
        const bool seam_ok = G.edge(last).terminus == G.edge(pf).origin && pf != G.reverse(last);
        const bool cyclic_ok =
            G.edge(pl).terminus == G.edge(pf).origin && pf != G.reverse(pl);
        bool inner_ok = true;
        for (std::size_t i = 0; i + 1 < preferred_period.size(); ++i) {
            const int a = preferred_period[i], b = preferred_period[i + 1];
            if (G.edge(a).terminus != G.edge(b).origin || b == G.reverse(a)) inner_ok = false;
        }
        if (seam_ok && cyclic_ok && inner_ok) return make_ray(G, word, preferred_period);
    }
    // greedy: follow the smallest admissible successor until a letter repeats
    std::vector<int> tail;
    std::vector<int> seen_at(G.num_oriented_edges(), -1);
    int cur = last;
    while (true) {
        const int nxt = G.successors(cur).front();
        if (seen_at[nxt] >= 0) {
            std::vector<int> prefix = word;
            prefix.insert(prefix.end(), tail.begin(), tail.begin() + seen_at[nxt]);
            std::vector<int> period(tail.begin() + seen_at[nxt], tail.end());
            return make_ray(G, std::move(prefix), std::move(period));
        }
        seen_at[nxt] = static_cast<int>(tail.size());
        tail.push_back(nxt);
        cur = nxt;
    }
}

namespace {

std::vector<int> canonical_rotation(const std::vector<int>& w) {
    std::vector<int> best = w;
    std::vector<int> rot = w;
    for (std::size_t i = 1; i < w.size(); ++i) {
        std::rotate(rot.begin(), rot.begin() + 1, rot.end());
        if (rot < best) best = rot;
    }
    return best;
}

// Best rational approximations of x by continued fractions; returns the
// smallest q^beta * |x - p/q| over convergents with q <= q_max.
double cf_quality(double x, double beta, long q_max) {
    double best = std::numeric_limits<double>::infinity();
    double v = x;
    long p0 = 1, q0 = 0, p1 = 0, q1 = 1;  // p1/q1 trails p/q
    for (int it = 0; it < 48; ++it) {
        const double a = std::floor(v);
        const long ai = static_cast<long>(a);
        const long p = ai * p0 + p1;
        const long q = ai * q0 + q1;
        if (q > q_max || q < 0) break;
        if (q > 0) {
            const double err = std::abs(x - static_cast<double>(p) / static_cast<double>(q));
            best = std::min(best, std::pow(static_cast<double>(q), beta) * err);
            if (err < 1e-15) break;
        }
        p1 = p0; q1 = q0; p0 = p; q0 = q;
        const double frac = v - a;
        if (frac < 1e-15) break;
        v = 1.0 / frac;
    }
    return best;
}

double float_gcd(double a, double b, double tol) {
    a = std::abs(a);
    b = std::abs(b);
    while (b > tol) {
        const double r = std::fmod(a, b);
        a = b;
        b = r;
    }
    return a;
}

}  // namespace

LengthSpectrumReport length_spectrum(const QuotientGraph& G, int max_word_length, double beta,
                                     long q_max) {
    std::set<std::vector<int>> seen;
    LengthSpectrumReport rep;
    rep.beta = beta;

    std::vector<int> word;
    // DFS over non-backtracking paths; record when the path closes cyclically.
    auto dfs = [&](auto&& self, int at) -> void {
        if (!word.empty() && at == G.edge(word.front()).origin &&
            word.front() != G.reverse(word.back())) {
            auto canon = canonical_rotation(word);
            if (seen.insert(canon).second) {
                double l = 0.0;
                for (int e : canon) l += G.edge(e).length;
                rep.cycles.push_back({std::move(canon), l});
            }
        }
        if (static_cast<int>(word.size()) == max_word_length) return;
        for (int e : G.out_edges(at)) {
            if (!word.empty() && e == G.reverse(word.back())) continue;
            word.push_back(e);
            self(self, G.edge(e).terminus);
            word.pop_back();
        }
    };
    for (int e = 0; e < G.num_oriented_edges(); ++e) {
        word.assign(1, e);
        dfs(dfs, G.edge(e).terminus);
    }
    word.clear();

    std::vector<double> lengths;
    for (const auto& c : rep.cycles) lengths.push_back(c.translation_length);
    std::sort(lengths.begin(), lengths.end());
    lengths.erase(std::unique(lengths.begin(), lengths.end(),
                              [](double a, double b) { return std::abs(a - b) < 1e-9; }),
                  lengths.end());

    if (!lengths.empty()) {
        double g = lengths[0];
        for (double l : lengths) g = float_gcd(g, l, 1e-9);
        rep.lattice = g > 1e-6;
        rep.lattice_generator = rep.lattice ? g : 0.0;
    }

    // Evidence for the Diophantine property: the best (largest) over pairs of
    // the worst rational approximation quality of the length ratio.
    double best_pair = 0.0;
    const std::size_t cap = std::min<std::size_t>(lengths.size(), 24);
    for (std::size_t i = 0; i < cap; ++i)
        for (std::size_t j = i + 1; j < cap; ++j)
            best_pair = std::max(best_pair, cf_quality(lengths[j] / lengths[i], beta, q_max));
    rep.diophantine_quality = best_pair;
    return rep;
}

}  // namespace treelab
