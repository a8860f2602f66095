#include "treelab/measures.hpp"

#include <algorithm>
#include <cmath>

#include "treelab/util.hpp"

namespace treelab {

namespace {

bool has_prefix(const std::vector<int>& word, const std::vector<int>& prefix) {
    return word.size() >= prefix.size() &&
           std::equal(prefix.begin(), prefix.end(), word.begin());
}

// Append a letter to a root-based word, folding a backtrack onto the parent.
void fold_append(const QuotientGraph& G, std::vector<int>& word, int letter) {
    if (!word.empty() && letter == G.reverse(word.back()))
        word.pop_back();
    else
        word.push_back(letter);
}

// Letters of the tree geodesic from the vertex `from` to the vertex `to`
// (both root-based words).
std::vector<int> path_letters(const QuotientGraph& G, const std::vector<int>& from,
                              const std::vector<int>& to) {
    std::size_t c = 0;
    while (c < from.size() && c < to.size() && from[c] == to[c]) ++c;
    std::vector<int> path;
    for (std::size_t i = from.size(); i > c; --i) path.push_back(G.reverse(from[i - 1]));
    path.insert(path.end(), to.begin() + c, to.end());
    return path;
}

}  // namespace

PsDensityApprox ps_density(const QuotientGraph& G, const WeylTable& W, const TreePoint& base,
                           double s, double N) {
    if (!W.usable()) throw NotConverged("PS density needs a usable Weyl table");
    PsDensityApprox a;
    a.lambda = W.lambda;
    a.s = s;
    a.N = N;
    a.base = base;
    a.atom_words = lift_words(G, G.base_vertex(), N);
    const std::size_t n = a.atom_words.size();
    a.atom_dist.assign(n, 0.0);
    a.weight.assign(n, 0.0);
    std::vector<double> root_weight(n, 0.0);
    const TreePoint root = make_vertex_point({});
    parallel_for(n, [&](std::size_t i) {
        const TreePoint z = make_vertex_point(a.atom_words[i]);
        double d = 0.0;
        for (int e : a.atom_words[i]) d += G.edge(e).length;
        a.atom_dist[i] = d;
        const double gr = green(G, W, root, z);
        root_weight[i] = gr * gr * std::exp(-s * d);
        const double gx = green(G, W, base, z);
        const double dx = tree_distance(G, base, z);
        a.weight[i] = gx * gx * std::exp(-s * dx);
    });
    a.normalizer = 0.0;
    for (double w : root_weight) a.normalizer += w;
    for (auto& w : a.weight) w /= a.normalizer;
    a.total_mass = 0.0;
    for (double w : a.weight) a.total_mass += w;
    return a;
}

ShadowMass ps_shadow_mass(const QuotientGraph& G, const PsDensityApprox& approx,
                          const TreePoint& y) {
    // annuli (in root distance) over the outer two shells of the truncation;
    // width 2 max_length so every shell holds at least one full vertex layer
    // (base-vertex lifts can be spaced almost two edges apart)
    const double lM = 2.0 * G.max_length();
    double shell0 = 0.0, shell1 = 0.0, shadow_shell0 = 0.0;
    ShadowMass out;
    for (std::size_t i = 0; i < approx.atom_words.size(); ++i) {
        const double d = approx.atom_dist[i];
        const bool in_shell0 = d > approx.N - lM;
        const bool in_shell1 = !in_shell0 && d > approx.N - 2 * lM;
        if (in_shell0) shell0 += approx.weight[i];
        if (in_shell1) shell1 += approx.weight[i];
        if (point_on_segment(G, y, approx.base, make_vertex_point(approx.atom_words[i]))) {
            out.mass += approx.weight[i];
            if (in_shell0) shadow_shell0 += approx.weight[i];
        }
    }
    const double q = shell1 > 0.0 ? shell0 / shell1 : 0.0;
    if (q >= 0.999)
        throw TailNotControlled("Poincare tail not geometric at the truncation radius");
    out.band = shadow_shell0 * q / (1.0 - q);
    return out;
}

ConformalityReport conformality_check(const QuotientGraph& G, const WeylTable& W, double delta,
                                      const PsDensityApprox& mu_x, const PsDensityApprox& mu_y,
                                      const TreePoint& anchor) {
    if (!anchor.is_vertex()) throw ValidationError("conformality anchor must be a tree vertex");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < mu_x.atom_words.size(); ++i) {
        if (!has_prefix(mu_x.atom_words[i], anchor.word)) continue;
        mx += mu_x.weight[i];
        my += mu_y.weight[i];
    }
    ConformalityReport rep;
    rep.ratio = my / mx;
    const BoundaryRay xi = deterministic_ray(G, anchor.word);
    const int depth = static_cast<int>(anchor.word.size()) + 6;
    const double k = martin_kernel(G, W, mu_x.base, mu_y.base, xi, depth).value;
    rep.factor = k * k * std::exp(delta * busemann(G, xi, mu_x.base, mu_y.base));
    rep.deviation = std::abs(rep.ratio / rep.factor - 1.0);
    return rep;
}

namespace {

GibbsCylinderMeasure gibbs_route(const QuotientGraph& G, const WeylTable& W, double delta,
                                 const CylinderSet& cyl) {
    GibbsCylinderMeasure m;
    m.lambda = W.lambda;
    m.cylinder = cyl;
    m.route = CylinderRoute::gibbs_formula;
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < cyl.word.size(); ++i) {
        const int e = cyl.word[i];
        s += 2.0 * std::log(W.F[e]) - delta * G.edge(e).length;
    }
    m.value = std::exp(s);
    m.band = 0.0;  // memory-1 closed form, exact at the table's accuracy
    return m;
}

GibbsCylinderMeasure shadow_route(const QuotientGraph& G, const WeylTable& W,
                                  const CylinderSet& cyl, double s, double N, int subdepth,
                                  int ray_depth) {
    const auto& w = cyl.word;
    const std::vector<int> conn = connector_word(G, G.edge(w[0]).origin, w[0]);
    std::vector<int> wq = conn;  // root-based word of x_q
    wq.insert(wq.end(), w.begin(), w.end());
    const TreePoint xp = make_vertex_point(conn);
    const PsDensityApprox mu = ps_density(G, W, xp, s, N);

    // classify atoms by their first subdepth letters from x_p (backward side,
    // first letter != w_1) or from x_q (forward side, atoms through the word)
    std::vector<std::vector<int>> back_keys, fwd_keys;
    std::vector<double> back_mass, fwd_mass;
    double near_mass = 0.0;
    auto cell_index = [](std::vector<std::vector<int>>& keys, std::vector<double>& masses,
                         const std::vector<int>& key) {
        auto it = std::find(keys.begin(), keys.end(), key);
        if (it == keys.end()) {
            keys.push_back(key);
            masses.push_back(0.0);
            return keys.size() - 1;
        }
        return static_cast<std::size_t>(it - keys.begin());
    };
    for (std::size_t i = 0; i < mu.atom_words.size(); ++i) {
        const auto path = path_letters(G, conn, mu.atom_words[i]);
        if (path.empty()) {
            near_mass += mu.weight[i];  // the atom at x_p: direction undetermined
            continue;
        }
        if (path[0] == w[0]) {
            const std::size_t common = std::min(path.size(), w.size());
            if (!std::equal(w.begin(), w.begin() + common, path.begin()))
                continue;  // diverges inside the word: outside both shadows
            if (path.size() <= w.size()) {
                near_mass += mu.weight[i];  // on the spine [x_p, x_q]
                continue;
            }
            // cell keyed by up to subdepth letters past x_q (shorter atoms
            // keep their full available extension)
            const std::size_t len =
                std::min<std::size_t>(subdepth, path.size() - w.size());
            const std::vector<int> key(path.begin() + w.size(),
                                       path.begin() + w.size() + len);
            fwd_mass[cell_index(fwd_keys, fwd_mass, key)] += mu.weight[i];
        } else {
            const std::size_t len = std::min<std::size_t>(subdepth, path.size());
            const std::vector<int> key(path.begin(), path.begin() + len);
            back_mass[cell_index(back_keys, back_mass, key)] += mu.weight[i];
        }
    }

    // central rays of the sub-shadows (root-based words, folding backtracks)
    auto cell_ray = [&](const std::vector<int>& start, const std::vector<int>& key) {
        std::vector<int> word = start;
        for (int e : key) fold_append(G, word, e);
        if (word.empty()) {
            // the cell path folds back onto the root: its ends continue away
            // from the direction it arrived from (the reverse of the last
            // traversed letter)
            const int banned = G.reverse(key.back());
            for (int a : G.out_edges(G.base_vertex()))
                if (a != banned) return deterministic_ray(G, {a});
        }
        return deterministic_ray(G, word);
    };
    std::vector<BoundaryRay> back_rays, fwd_rays;
    for (const auto& k : back_keys) back_rays.push_back(cell_ray(conn, k));
    for (const auto& k : fwd_keys) fwd_rays.push_back(cell_ray(wq, k));

    GibbsCylinderMeasure m;
    m.lambda = W.lambda;
    m.cylinder = cyl;
    m.route = CylinderRoute::shadow_product;
    double theta_max = 0.0;
    for (std::size_t i = 0; i < back_keys.size(); ++i) {
        for (std::size_t j = 0; j < fwd_keys.size(); ++j) {
            // deepen the rays as needed: long cylinders push the sub-shadow
            // prefixes past the caller's default depth
            const int need = static_cast<int>(
                xp.word.size() +
                std::max(back_rays[i].prefix.size(), fwd_rays[j].prefix.size()) + 2);
            const BandValue th =
                naim_kernel(G, W, xp, back_rays[i], fwd_rays[j], std::max(ray_depth, need));
            // base x_p lies on (xi-, xi+), so the Gromov term vanishes
            m.value += th.value * th.value * back_mass[i] * fwd_mass[j];
            m.band += 2.0 * th.value * th.band * back_mass[i] * fwd_mass[j];
            theta_max = std::max(theta_max, th.value);
        }
    }
    m.band += theta_max * theta_max * near_mass;
    return m;
}

}  // namespace

GibbsCylinderMeasure cylinder_measure(const QuotientGraph& G, const WeylTable& W, double delta,
                                      const CylinderSet& cyl, CylinderRoute route, double s,
                                      double N, int subdepth, int ray_depth) {
    if (cyl.word.size() < 2) throw ValidationError("cylinder needs length >= 2");
    if (!W.usable()) throw NotConverged("cylinder measure needs a usable Weyl table");
    if (route == CylinderRoute::gibbs_formula) return gibbs_route(G, W, delta, cyl);
    return shadow_route(G, W, cyl, s, N, subdepth, ray_depth);
}

BandValue c_kernel(const QuotientGraph& G, const WeylTable& W, const PsDensityApprox& approx,
                   const TreePoint& x, const TreePoint& y, int depth) {
    // depth-n shadow partition of the boundary, seen from the root; atoms
    // shallower than the partition keep their own (coarser) cell
    std::vector<std::vector<int>> cells;
    std::vector<double> cell_mass;
    double shallow_mass = 0.0;  // the root atom: no direction information
    for (std::size_t i = 0; i < approx.atom_words.size(); ++i) {
        const auto& zw = approx.atom_words[i];
        if (zw.empty()) {
            shallow_mass += approx.weight[i];
            continue;
        }
        const std::size_t len = std::min<std::size_t>(depth, zw.size());
        const std::vector<int> key(zw.begin(), zw.begin() + len);
        const auto it = std::find(cells.begin(), cells.end(), key);
        if (it == cells.end()) {
            cells.push_back(key);
            cell_mass.push_back(approx.weight[i]);
        } else {
            cell_mass[it - cells.begin()] += approx.weight[i];
        }
    }
    std::vector<double> kv(cells.size(), 0.0), kb(cells.size(), 0.0);
    parallel_for(cells.size(), [&](std::size_t i) {
        if (cell_mass[i] <= 0.0) return;
        const BoundaryRay xi = deterministic_ray(G, cells[i]);
        const BandValue k = martin_kernel(G, W, x, y, xi, depth + 4);
        kv[i] = k.value;
        kb[i] = k.band;
    });
    BandValue out;
    double kmin = kv.empty() ? 1.0 : kv[0], kmax = kmin, resolved = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        out.value += kv[i] * cell_mass[i];
        out.band += kb[i] * cell_mass[i];
        resolved += cell_mass[i];
        kmin = std::min(kmin, kv[i]);
        kmax = std::max(kmax, kv[i]);
    }
    // the root atom has no direction yet: spread it over the cells in
    // proportion to their masses, with the kernel oscillation as its band
    if (resolved > 0.0) {
        out.value += shallow_mass * out.value / resolved;
        out.band += shallow_mass * (kmax - kmin);
    }
    return out;
}

}  // namespace treelab
