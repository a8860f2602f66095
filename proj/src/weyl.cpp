#include "treelab/weyl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "treelab/util.hpp"

namespace treelab {

double trig_c(double lambda, double t) { return std::cos(std::sqrt(lambda) * t); }

double trig_s(double lambda, double t) {
    if (lambda <= 0.0) return t;
    const double w = std::sqrt(lambda);
    const double x = w * t;
    if (x < 1e-4) return t * (1.0 - x * x / 6.0 * (1.0 - x * x / 20.0));
    return std::sin(x) / w;
}

namespace {

double u_val(double S, double lambda, double t) {
    return trig_c(lambda, t) + S * trig_s(lambda, t);
}

// Riccati coefficient after transporting branch data S across length t.
double m_transfer(double S, double lambda, double t) {
    return (-lambda * trig_s(lambda, t) + S * trig_c(lambda, t)) / u_val(S, lambda, t);
}

constexpr double kBlowupF = 1e6;
constexpr double kBlowupM = 1e8;

}  // namespace

WeylTable solve_weyl(const QuotientGraph& G, double lambda, double tol, long max_iter) {
    if (lambda < 0.0) throw NegativeLambda("solve_weyl requires lambda >= 0");
    const int E = G.num_oriented_edges();
    const int V = G.num_vertices();
    WeylTable W;
    W.lambda = lambda;
    W.m.resize(E);
    W.F.assign(E, 0.0);
    W.S.assign(E, 0.0);

    // depth-1 Dirichlet truncation: branch = the edge alone, absorbing at i(e)
    for (int e = 0; e < E; ++e) {
        const double l = G.edge(e).length;
        W.m[e] = trig_c(lambda, l) / trig_s(lambda, l);
    }

    std::vector<double> s_in(V), mn(E);
    for (long it = 0; it < max_iter; ++it) {
        std::fill(s_in.begin(), s_in.end(), 0.0);
        for (int e = 0; e < E; ++e) s_in[G.edge(e).terminus] += W.m[e];
        double res = 0.0;
        bool bad = false;
        for (int e = 0; e < E; ++e) {
            const auto& ed = G.edge(e);
            const double S = s_in[ed.origin] - W.m[ed.reverse];
            const double u = u_val(S, lambda, ed.length);
            if (!(u > 1e-12) || 1.0 / u > kBlowupF) {
                bad = true;
                break;
            }
            mn[e] = (-lambda * trig_s(lambda, ed.length) + S * trig_c(lambda, ed.length)) / u;
            if (!std::isfinite(mn[e]) || std::abs(mn[e]) > kBlowupM) {
                bad = true;
                break;
            }
            res = std::max(res, std::abs(mn[e] - W.m[e]));
        }
        W.iterations = it + 1;
        if (bad) {
            W.diverged = true;
            return W;
        }
        W.m.swap(mn);
        W.residual = res;
        if (res < tol) {
            W.converged = true;
            break;
        }
    }

    std::fill(s_in.begin(), s_in.end(), 0.0);
    for (int e = 0; e < E; ++e) s_in[G.edge(e).terminus] += W.m[e];
    for (int e = 0; e < E; ++e) {
        const auto& ed = G.edge(e);
        W.S[e] = s_in[ed.origin] - W.m[ed.reverse];
        W.F[e] = 1.0 / u_val(W.S[e], lambda, ed.length);
    }
    return W;
}

double edge_factor_log([[maybe_unused]] const QuotientGraph& G, const WeylTable& W, int e,
                       double a, double b) {
    const double S = W.S[e];
    return std::log(u_val(S, W.lambda, a)) - std::log(u_val(S, W.lambda, b));
}

double log_hitting(const QuotientGraph& G, const WeylTable& W, const TreePoint& x,
                   const TreePoint& y) {
    if (!W.usable()) throw NotConverged("Weyl table not usable");
    double s = 0.0;
    for (const auto& st : geodesic(G, x, y).steps) s += edge_factor_log(G, W, st.edge, st.a, st.b);
    return s;
}

double hitting_transform(const QuotientGraph& G, const WeylTable& W, const TreePoint& x,
                         const TreePoint& y) {
    return std::exp(log_hitting(G, W, x, y));
}

double green_diag(const QuotientGraph& G, const WeylTable& W, const TreePoint& y) {
    if (!W.usable()) throw NotConverged("Weyl table not usable");
    if (y.is_vertex()) {
        const int q = project(G, y);
        double s = 0.0;
        for (int a : G.out_edges(q)) s += W.m[G.reverse(a)];
        return 1.0 / s;
    }
    const double l = G.edge(y.edge).length;
    const double ml = m_transfer(W.S[y.edge], W.lambda, y.offset);
    const double mr = m_transfer(W.S[G.reverse(y.edge)], W.lambda, l - y.offset);
    return 1.0 / (ml + mr);
}

double log_green(const QuotientGraph& G, const WeylTable& W, const TreePoint& x,
                 const TreePoint& y) {
    return log_hitting(G, W, x, y) + std::log(green_diag(G, W, y));
}

double green(const QuotientGraph& G, const WeylTable& W, const TreePoint& x, const TreePoint& y) {
    return std::exp(log_green(G, W, x, y));
}

BandValue martin_kernel(const QuotientGraph& G, const WeylTable& W, const TreePoint& x0,
                        const TreePoint& x, const BoundaryRay& xi, int depth) {
    const std::size_t need = std::max(x0.word.size(), x.word.size()) + 2;
    if (static_cast<std::size_t>(depth) < need)
        throw DepthTooSmall("martin_kernel depth below the median of its arguments");
    auto value_at = [&](int d) {
        const TreePoint z = make_vertex_point(ray_word(xi, d));
        return std::exp(log_green(G, W, x, z) - log_green(G, W, x0, z));
    };
    const double v1 = value_at(depth);
    const double v2 = value_at(depth + std::max<int>(2, xi.period.size()));
    return {v2, std::abs(v2 - v1)};
}

BandValue naim_kernel(const QuotientGraph& G, const WeylTable& W, const TreePoint& x,
                      const BoundaryRay& xi, const BoundaryRay& zeta, int depth) {
    if (same_boundary_point(xi, zeta)) throw EqualBoundaryPoints("naim_kernel needs xi != zeta");
    const std::size_t need =
        x.word.size() + std::max(xi.prefix.size(), zeta.prefix.size()) + 2;
    if (static_cast<std::size_t>(depth) < need)
        throw DepthTooSmall("naim_kernel depth below the median triangle");
    auto value_at = [&](int d) {
        const TreePoint z1 = make_vertex_point(ray_word(xi, d));
        const TreePoint z2 = make_vertex_point(ray_word(zeta, d));
        return std::exp(log_green(G, W, z1, z2) - log_green(G, W, z1, x) -
                        log_green(G, W, x, z2));
    };
    const double v1 = value_at(depth);
    const double v2 = value_at(depth + 2);
    return {v2, std::abs(v2 - v1)};
}

Lambda0Bracket lambda0_resolvent(const QuotientGraph& G, double tol) {
    auto diverged = [&](double lam) {
        return solve_weyl(G, lam, 1e-11, 2'000'000).diverged;
    };
    Lambda0Bracket b;
    b.lo = 0.0;
    b.hi = 0.1;
    while (!diverged(b.hi)) {
        b.lo = b.hi;
        b.hi *= 2.0;
        if (b.hi > 1e4) throw NotConverged("no spectral bottom found below 1e4");
    }
    while (b.hi - b.lo > tol) {
        const double mid = 0.5 * (b.lo + b.hi);
        if (diverged(mid))
            b.hi = mid;
        else
            b.lo = mid;
    }
    return b;
}

namespace {

// Solves the per-oriented-edge branch integrals
//   I_e = a_e + F_e^2 sum_{e' in succ(e)} I_{e'},
// a_e = int_0^l (1/u_e)^2 G(z,z)^2, giving int over the full subtree behind e
// of Phi(entry, z)^2 G(z,z)^2 with no radius truncation.
struct BranchIntegrals {
    std::vector<double> I;
};

double gdiag_edge(const QuotientGraph& G, const WeylTable& W, int e, double tau) {
    const double l = G.edge(e).length;
    const double ml = m_transfer(W.S[e], W.lambda, tau);
    const double mr = m_transfer(W.S[G.reverse(e)], W.lambda, l - tau);
    return 1.0 / (ml + mr);
}

BranchIntegrals branch_integrals(const QuotientGraph& G, const WeylTable& W) {
    const int E = G.num_oriented_edges();
    Eigen::VectorXd a(E);
    for (int e = 0; e < E; ++e) {
        const double l = G.edge(e).length;
        a(e) = gauss16(
            [&](double tau) {
                const double phi = 1.0 / u_val(W.S[e], W.lambda, tau);
                const double g = gdiag_edge(G, W, e, tau);
                return phi * phi * g * g;
            },
            0.0, l);
    }
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(E, E);
    for (int e = 0; e < E; ++e) {
        const double F2 = W.F[e] * W.F[e];
        for (int ep : G.successors(e)) M(e, ep) -= F2;
    }
    Eigen::VectorXd I = M.partialPivLu().solve(a);
    BranchIntegrals out;
    out.I.assign(I.data(), I.data() + E);
    return out;
}

// Integral over the region strictly behind a point sitting at parameter tau0
// on oriented edge e (the region reached by moving along e), of
// Phi(point, z)^2 G(z,z)^2.
double behind_integral(const QuotientGraph& G, const WeylTable& W, const BranchIntegrals& bi,
                       int e, double tau0) {
    const double l = G.edge(e).length;
    const double u0 = u_val(W.S[e], W.lambda, tau0);
    double val = gauss16(
        [&](double tau) {
            const double phi = u0 / u_val(W.S[e], W.lambda, tau);
            const double g = gdiag_edge(G, W, e, tau);
            return phi * phi * g * g;
        },
        tau0, l);
    const double phi_end = u0 / u_val(W.S[e], W.lambda, l);
    double tail = 0.0;
    for (int ep : G.successors(e)) tail += bi.I[ep];
    return val + phi_end * phi_end * tail;
}

double derivative_order1(const QuotientGraph& G, const WeylTable& W, const TreePoint& x,
                         const TreePoint& y) {
    const BranchIntegrals bi = branch_integrals(G, W);
    if (x == y) {
        if (x.is_vertex()) {
            double s = 0.0;
            for (int e : G.out_edges(project(G, x))) s += bi.I[e];
            return s;
        }
        const double l = G.edge(x.edge).length;
        return behind_integral(G, W, bi, x.edge, x.offset) +
               behind_integral(G, W, bi, G.reverse(x.edge), l - x.offset);
    }

    const auto seg = geodesic(G, x, y);
    const std::size_t K = seg.steps.size();
    std::vector<double> f(K), g(K);
    for (std::size_t k = 0; k < K; ++k) {
        const auto& st = seg.steps[k];
        const double l = G.edge(st.edge).length;
        f[k] = edge_factor_log(G, W, st.edge, st.a, st.b);
        g[k] = edge_factor_log(G, W, G.reverse(st.edge), l - st.b, l - st.a);
    }
    std::vector<double> pref(K + 1, 0.0), suf(K + 1, 0.0);
    for (std::size_t k = 0; k < K; ++k) pref[k + 1] = pref[k] + f[k];
    for (std::size_t k = K; k-- > 0;) suf[k] = suf[k + 1] + g[k];

    double total = 0.0;
    // along the geodesic itself
    for (std::size_t k = 0; k < K; ++k) {
        const auto& st = seg.steps[k];
        const int r = G.reverse(st.edge);
        const double l = G.edge(st.edge).length;
        const double lua = std::log(u_val(W.S[st.edge], W.lambda, st.a));
        const double lub = std::log(u_val(W.S[r], W.lambda, l - st.b));
        total += gauss16(
            [&](double tau) {
                const double lphix =
                    pref[k] + lua - std::log(u_val(W.S[st.edge], W.lambda, tau));
                const double lphiy =
                    suf[k + 1] + lub - std::log(u_val(W.S[r], W.lambda, l - tau));
                const double gd = gdiag_edge(G, W, st.edge, tau);
                return std::exp(lphix + lphiy) * gd * gd;
            },
            st.a, st.b);
    }
    // subtrees hanging at interior vertices of the geodesic
    for (std::size_t k = 0; k + 1 < K; ++k) {
        const int q = G.edge(seg.steps[k].edge).terminus;
        double hang = 0.0;
        for (int e : G.out_edges(q)) {
            if (e == seg.steps[k + 1].edge || e == G.reverse(seg.steps[k].edge)) continue;
            hang += bi.I[e];
        }
        total += std::exp(pref[k + 1] + suf[k + 1]) * hang;
    }
    // region behind x and behind y
    {
        const auto& st = seg.steps.front();
        const int eb = G.reverse(st.edge);
        const double l = G.edge(st.edge).length;
        total += std::exp(suf[0]) * behind_integral(G, W, bi, eb, l - st.a);
    }
    {
        const auto& st = seg.steps.back();
        total += std::exp(pref[K]) * behind_integral(G, W, bi, st.edge, st.b);
    }
    return total;
}

}  // namespace

double green_lambda_derivative(const QuotientGraph& G, double lambda, const TreePoint& x,
                               const TreePoint& y, int order, double h) {
    if (order == 1) {
        const WeylTable W = solve_weyl(G, lambda);
        if (!W.usable()) throw NotConverged("lambda at or above the spectral bottom");
        return derivative_order1(G, W, x, y);
    }
    if (order != 2) throw std::invalid_argument("order must be 1 or 2");
    const WeylTable Wp = solve_weyl(G, lambda + h);
    if (!Wp.usable()) throw NotConverged("lambda + h at or above the spectral bottom");
    const double dp = derivative_order1(G, Wp, x, y);
    const WeylTable Wm = solve_weyl(G, lambda - h);
    const double dm = derivative_order1(G, Wm, x, y);
    return (dp - dm) / (2.0 * h);
}

namespace {

std::vector<int> random_word(const QuotientGraph& G, std::mt19937_64& rng, int len,
                             const std::vector<int>& base = {}) {
    std::vector<int> w = base;
    int at = w.empty() ? G.base_vertex() : G.edge(w.back()).terminus;
    for (int i = 0; i < len; ++i) {
        std::vector<int> opts;
        for (int e : G.out_edges(at))
            if (w.empty() || e != G.reverse(w.back())) opts.push_back(e);
        const int e = opts[rng() % opts.size()];
        w.push_back(e);
        at = G.edge(e).terminus;
    }
    return w;
}

// Two distinct non-backtracking continuations from the end of `w`.
std::pair<int, int> two_branches(const QuotientGraph& G, std::mt19937_64& rng,
                                 const std::vector<int>& w, int avoid = -1) {
    const int at = w.empty() ? G.base_vertex() : G.edge(w.back()).terminus;
    std::vector<int> opts;
    for (int e : G.out_edges(at)) {
        if (!w.empty() && e == G.reverse(w.back())) continue;
        if (e == avoid) continue;
        opts.push_back(e);
    }
    std::shuffle(opts.begin(), opts.end(), rng);
    if (opts.size() < 2) {
        // fall back to allowing `avoid`
        for (int e : G.out_edges(at))
            if ((w.empty() || e != G.reverse(w.back())) &&
                std::find(opts.begin(), opts.end(), e) == opts.end())
                opts.push_back(e);
    }
    return {opts[0], opts[1]};
}

}  // namespace

AnconaReport ancona_diagnostics(const QuotientGraph& G, const WeylTable& W, int samples,
                                std::uint64_t seed) {
    if (!W.usable()) throw NotConverged("Weyl table not usable");
    std::mt19937_64 rng(splitmix64(seed));
    AnconaReport rep;

    // Ancona ratio on collinear triples: y constructed on [x, z].
    for (int i = 0; i < samples; ++i) {
        const auto wy = random_word(G, rng, static_cast<int>(rng() % 4));
        auto [e1, e2] = two_branches(G, rng, wy);
        auto wx = wy;
        wx.push_back(e1);
        wx = random_word(G, rng, static_cast<int>(rng() % 4), wx);
        auto wz = wy;
        wz.push_back(e2);
        wz = random_word(G, rng, static_cast<int>(rng() % 4), wz);
        const TreePoint x = make_vertex_point(wx), y = make_vertex_point(wy),
                        z = make_vertex_point(wz);
        const double r = std::exp(log_green(G, W, x, z) - log_green(G, W, x, y) -
                                  log_green(G, W, y, z));
        rep.C_ancona = std::max({rep.C_ancona, r, 1.0 / r});
    }

    // Strong-Ancona cross-ratios over fork configurations with growing overlap.
    const int max_overlap = 8;
    rep.deviation_by_overlap.assign(max_overlap + 1, 0.0);
    const int per_n = std::max(4, samples / max_overlap);
    for (int n = 1; n <= max_overlap; ++n) {
        for (int i = 0; i < per_n; ++i) {
            const auto w0 = random_word(G, rng, static_cast<int>(rng() % 3));
            const auto trunk = random_word(G, rng, n, w0);
            const int t0 = trunk[w0.size()];
            auto [ex, exp_] = two_branches(G, rng, w0, t0);
            auto wx = w0;
            wx.push_back(ex);
            auto wxp = w0;
            wxp.push_back(exp_);
            auto [ey, eyp] = two_branches(G, rng, trunk);
            auto wy = trunk;
            wy.push_back(ey);
            auto wyp = trunk;
            wyp.push_back(eyp);
            const TreePoint x = make_vertex_point(wx), xp = make_vertex_point(wxp),
                            y = make_vertex_point(wy), yp = make_vertex_point(wyp);
            const double lr = (log_green(G, W, x, y) - log_green(G, W, xp, y)) -
                              (log_green(G, W, x, yp) - log_green(G, W, xp, yp));
            const double dev = std::abs(std::expm1(lr));
            rep.C_strong = std::max(rep.C_strong, dev);
            rep.deviation_by_overlap[n] = std::max(rep.deviation_by_overlap[n], dev);
        }
    }
    if (rep.C_strong < 1e-10) {
        // On a tree the four geodesics share a trunk and the cross-ratio is
        // exactly 1 once they fork: stabilization is exact, the geometric
        // bound holds with rho = 0.
        rep.exact_stabilization = true;
        rep.rho = 0.0;
        rep.rho_r2 = 1.0;
    } else {
        std::vector<double> ns, ld;
        for (int n = 1; n <= max_overlap; ++n) {
            if (rep.deviation_by_overlap[n] > 0) {
                ns.push_back(n);
                ld.push_back(std::log(rep.deviation_by_overlap[n]));
            }
        }
        const LinearFit fit = linear_fit(ns, ld);
        rep.rho = std::exp(fit.slope);
        rep.rho_r2 = fit.r2;
    }

    // Harnack: ratios of the positive lambda-harmonic function G(x, .) over
    // pairs at distance <= l_m, away from the pole.
    for (int i = 0; i < samples; ++i) {
        const auto wx = random_word(G, rng, 1);
        auto wy = random_word(G, rng, 3 + static_cast<int>(rng() % 3));
        const TreePoint x = make_vertex_point(wx);
        const TreePoint y = make_vertex_point(wy);
        std::uniform_real_distribution<double> off(0.05, 0.95);
        const auto& last = G.edge(wy.back());
        auto wz = wy;
        wz.pop_back();
        const TreePoint z = make_point(G, wz, wy.back(), off(rng) * last.length);
        if (tree_distance(G, x, y) < 1.5 || tree_distance(G, x, z) < 1.5) continue;
        const double d = std::abs(log_green(G, W, x, y) - log_green(G, W, x, z));
        rep.D_harnack = std::max(rep.D_harnack, d);
    }
    return rep;
}

}  // namespace treelab
