#include "treelab/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "treelab/util.hpp"

namespace treelab {

bool CodingSystem::admissible(const std::vector<int>& word) const {
    for (std::size_t i = 0; i < word.size(); ++i) {
        if (word[i] < 0 || word[i] >= n_letters) return false;
        if (i > 0 && !transition[word[i - 1]][word[i]]) return false;
    }
    return true;
}

CodingSystem build_coding(const QuotientGraph& G) {
    CodingSystem C;
    C.n_letters = G.num_oriented_edges();
    C.transition.assign(C.n_letters, std::vector<char>(C.n_letters, 0));
    C.follow.resize(C.n_letters);
    C.roof.resize(C.n_letters);
    for (int e = 0; e < C.n_letters; ++e) {
        C.roof[e] = G.edge(e).length;
        for (int ep : G.successors(e)) {
            C.transition[e][ep] = 1;
            C.follow[e].push_back(ep);
        }
        std::sort(C.follow[e].begin(), C.follow[e].end());
    }
    // irreducibility: every letter reaches every letter
    auto reachable = [&](bool forward) {
        std::vector<char> seen(C.n_letters, 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            const int e = stack.back();
            stack.pop_back();
            for (int f = 0; f < C.n_letters; ++f) {
                const bool adj = forward ? C.transition[e][f] : C.transition[f][e];
                if (adj && !seen[f]) {
                    seen[f] = 1;
                    stack.push_back(f);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
    };
    if (!reachable(true) || !reachable(false))
        throw NotStronglyConnected("edge-shift transition graph is not strongly connected");
    return C;
}

std::vector<std::vector<int>> admissible_words(const CodingSystem& C, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> w;
    std::function<void()> rec = [&] {
        if (static_cast<int>(w.size()) == k) {
            out.push_back(w);
            return;
        }
        if (w.empty()) {
            for (int e = 0; e < C.n_letters; ++e) {
                w.push_back(e);
                rec();
                w.pop_back();
            }
        } else {
            for (int e : C.follow[w.back()]) {
                w.push_back(e);
                rec();
                w.pop_back();
            }
        }
    };
    rec();
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

// Leading eigenvalue and (optionally) left/right eigenvectors of a
// nonnegative irreducible matrix, by normalized power iteration.
double perron(const std::vector<std::vector<double>>& T, std::vector<double>* right,
              std::vector<double>* left, double tol = 1e-14, long max_iter = 200000) {
    const std::size_t n = T.size();
    auto iterate = [&](bool transpose, std::vector<double>* keep) {
        std::vector<double> v(n, 1.0), w(n);
        double rho = 0.0;
        for (long it = 0; it < max_iter; ++it) {
            double nrm = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < n; ++j)
                    s += transpose ? T[j][i] * v[j] : T[i][j] * v[j];
                w[i] = s;
                nrm = std::max(nrm, s);
            }
            if (!(nrm > 0.0) || !std::isfinite(nrm))
                throw PowerIterationStalled("power iteration left the positive cone");
            double diff = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                w[i] /= nrm;
                diff = std::max(diff, std::abs(w[i] - v[i]));
            }
            v.swap(w);
            if (diff < tol) {
                if (keep) *keep = v;
                rho = nrm;
                return rho;
            }
            rho = nrm;
        }
        throw PowerIterationStalled("power iteration did not settle");
    };
    const double rho = iterate(false, right);
    if (left) iterate(true, left);
    return rho;
}

double log_srad_B(const QuotientGraph& G, const WeylTable& W, double s) {
    const int n = G.num_oriented_edges();
    std::vector<std::vector<double>> B(n, std::vector<double>(n, 0.0));
    for (int e = 0; e < n; ++e)
        for (int ep : G.successors(e))
            B[e][ep] = W.F[ep] * W.F[ep] * std::exp(-s * G.edge(ep).length);
    return std::log(perron(B, nullptr, nullptr));
}

// Root of a strictly decreasing function by bracket expansion + bisection.
double decreasing_root(const std::function<double(double)>& f, double lo, double hi,
                       double tol) {
    double flo = f(lo), fhi = f(hi);
    for (int i = 0; i < 80 && flo < 0.0; ++i) {
        hi = lo;
        lo -= std::max(1.0, hi - lo);
        flo = f(lo);
    }
    for (int i = 0; i < 80 && fhi > 0.0; ++i) {
        lo = hi;
        hi += std::max(1.0, hi - lo);
        fhi = f(hi);
    }
    if (flo < 0.0 || fhi > 0.0) throw NotConverged("could not bracket the pressure root");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) >= 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<std::vector<double>> word_operator(const QuotientGraph& G, const PotentialGrid& grid,
                                               double s) {
    const std::size_t n = grid.words.size();
    std::vector<std::vector<double>> T(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        const auto& w = grid.words[i];
        for (std::size_t j = 0; j < n; ++j) {
            const auto& wp = grid.words[j];
            if (!std::equal(w.begin() + 1, w.end(), wp.begin())) continue;
            T[i][j] = std::exp(grid.value[j] - s * G.edge(wp[0]).length);
        }
    }
    return T;
}

}  // namespace

double delta_lambda(const QuotientGraph& G, const WeylTable& W) {
    if (!W.usable()) throw NotConverged("delta_lambda needs a usable Weyl table");
    return decreasing_root([&](double s) { return log_srad_B(G, W, s); }, -1.0, 0.5, 1e-12);
}

int PotentialGrid::word_index(const std::vector<int>& w) const {
    const auto it = std::lower_bound(words.begin(), words.end(), w);
    if (it == words.end() || *it != w) return -1;
    return static_cast<int>(it - words.begin());
}

double PotentialGrid::sup_band() const {
    double b = 0.0;
    for (double v : band) b = std::max(b, v);
    return b;
}

PotentialGrid potential_grid(const QuotientGraph& G, const WeylTable& W, int k) {
    if (k < 2) throw ValidationError("potential grid needs memory k >= 2");
    if (!W.usable()) throw NotConverged("potential grid needs a usable Weyl table");
    const CodingSystem C = build_coding(G);
    PotentialGrid grid;
    grid.lambda = W.lambda;
    grid.k = k;
    grid.words = admissible_words(C, k);
    grid.value.assign(grid.words.size(), 0.0);
    grid.band.assign(grid.words.size(), 0.0);
    parallel_for(grid.words.size(), [&](std::size_t i) {
        const auto& w = grid.words[i];
        const std::vector<int> conn = connector_word(G, G.edge(w[0]).origin, w[0]);
        std::vector<int> path = conn;
        path.insert(path.end(), w.begin(), w.end());
        const BoundaryRay xi = deterministic_ray(G, path, w);
        const TreePoint x0 = make_vertex_point(conn);
        std::vector<int> conn1 = conn;
        conn1.push_back(w[0]);
        const TreePoint x1 = make_vertex_point(conn1);
        const BandValue kv = martin_kernel(G, W, x1, x0, xi, k + 4);
        grid.value[i] = 2.0 * std::log(kv.value);
        grid.band[i] = 2.0 * kv.band / kv.value;
    });
    return grid;
}

double pressure(const QuotientGraph& G, const PotentialGrid& grid, double s) {
    return std::log(perron(word_operator(G, grid, s), nullptr, nullptr));
}

PressureRoot pressure_root(const QuotientGraph& G, const PotentialGrid& grid) {
    PressureRoot r;
    r.s_star = decreasing_root([&](double s) { return pressure(G, grid, s); }, -1.0, 0.5, 1e-12);
    // a uniform potential shift of size b moves the root by at most b / l_m
    r.band = grid.sup_band() / G.min_length();
    return r;
}

TreePoint ray_point_at(const QuotientGraph& G, const BoundaryRay& xi, double t) {
    std::vector<int> word;
    std::size_t n = 0;
    double acc = 0.0;
    while (true) {
        const int e = ray_word(xi, n + 1)[n];
        const double l = G.edge(e).length;
        if (acc + l >= t) return make_point(G, word, e, t - acc);
        acc += l;
        word.push_back(e);
        ++n;
    }
}

double f_lambda_pointwise(const QuotientGraph& G, const WeylTable& W, const BoundaryRay& xi,
                          double t, double dt) {
    if (dt > 1e-3) throw ValidationError("f_lambda difference step must be <= 1e-3");
    const TreePoint p0 = ray_point_at(G, xi, t);
    auto quotient = [&](double h) {
        const TreePoint ph = ray_point_at(G, xi, t + h);
        // k_lambda(g(t), g(t+h), xi) = 1 / (hitting factor g(t) -> g(t+h))
        return 2.0 * log_hitting(G, W, p0, ph) / h;
    };
    const double d1 = quotient(dt);
    const double d2 = quotient(dt / 2);
    return (4.0 * d2 - d1) / 3.0;
}

AbramovReport abramov_check(const QuotientGraph& G, const PotentialGrid& grid, double s) {
    const auto T = word_operator(G, grid, s);
    std::vector<double> R, L;
    AbramovReport rep;
    const double rho = perron(T, &R, &L);
    rep.log_rho = std::log(rho);
    const std::size_t n = T.size();
    std::vector<double> pi(n);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        pi[i] = L[i] * R[i];
        z += pi[i];
    }
    for (auto& p : pi) p /= z;
    double h = 0.0, roof = 0.0, pot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (T[i][j] <= 0.0) continue;
            const double P = T[i][j] * R[j] / (rho * R[i]);
            h -= pi[i] * P * std::log(P);
        }
        const double r = G.edge(grid.words[i][0]).length;
        roof += pi[i] * r;
        pot += pi[i] * (grid.value[i] - s * r);
    }
    rep.entropy = h;
    rep.roof_integral = roof;
    rep.potential_integral = pot;
    rep.defect = h + pot - rep.log_rho;
    rep.flow_entropy = h / roof;
    rep.stationary = std::move(pi);
    return rep;
}

}  // namespace treelab
