#include "treelab/heat.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseCholesky>

#include "treelab/util.hpp"
#include "treelab/weyl.hpp"

namespace treelab {

namespace {

std::uint64_t hash_scalar(double x) {
    return splitmix64(static_cast<std::uint64_t>(std::llround(x * 1e9)) + 0x51ed2701);
}

// Structural hash of the truncated subtree entered along oriented edge e with
// remaining radius r. Equal hashes <=> isometric Dirichlet-truncated branches.
struct BranchHasher {
    const QuotientGraph& G;
    double R;
    std::unordered_map<std::uint64_t, std::uint64_t> memo;

    std::uint64_t operator()(int e, double r) {
        const std::uint64_t key =
            splitmix64(static_cast<std::uint64_t>(e) * 0x100000001b3ULL ^
                       static_cast<std::uint64_t>(std::llround(r * 1e9)));
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        const double le = G.edge(e).length;
        std::uint64_t h;
        if (le >= r - 1e-12) {
            h = splitmix64(hash_scalar(r) ^ 0xabcdef12);
        } else {
            std::vector<std::uint64_t> kids;
            for (int ep : G.successors(e)) kids.push_back((*this)(ep, r - le));
            std::sort(kids.begin(), kids.end());
            h = hash_scalar(le);
            for (std::uint64_t k : kids) h = splitmix64(h ^ (k + 0x9e3779b9));
        }
        memo.emplace(key, h);
        return h;
    }
};

}  // namespace

TruncatedBall build_ball(const QuotientGraph& G, double R, double h, bool reduce) {
    TruncatedBall B;
    B.G = &G;
    B.radius = R;
    B.h = h;
    B.reduced = reduce;
    B.center_node = 0;
    B.n_nodes = 1;
    B.node_dist.push_back(0.0);
    const long long EW = G.num_oriented_edges();

    BranchHasher hasher{G, R, {}};

    // (vertex node, incoming oriented edge or -1, distance, multiplicity)
    struct Frame {
        int vnode;
        int in_edge;
        double dist;
        double mult;
    };
    std::vector<Frame> stack{{0, -1, 0.0, 1.0}};
    while (!stack.empty()) {
        const Frame fr = stack.back();
        stack.pop_back();
        const double rem = R - fr.dist;
        if (rem < 1e-9) continue;
        std::vector<int> children;
        if (fr.in_edge < 0)
            children = G.out_edges(G.base_vertex());
        else
            children = G.successors(fr.in_edge);

        // group isomorphic siblings
        std::vector<std::pair<std::uint64_t, int>> tagged;
        for (int e : children)
            tagged.push_back({reduce ? hasher(e, rem) : static_cast<std::uint64_t>(e), e});
        std::sort(tagged.begin(), tagged.end());
        std::size_t i = 0;
        while (i < tagged.size()) {
            std::size_t j = i;
            while (j < tagged.size() && tagged[j].first == tagged[i].first) ++j;
            const int rep = tagged[i].second;
            const double group = static_cast<double>(j - i);
            const double le_full = G.edge(rep).length;
            const bool trunc = le_full >= rem - 1e-12;
            const double le = trunc ? rem : le_full;
            TruncatedBall::Inst inst;
            inst.qedge = rep;
            inst.length = le;
            inst.truncated = trunc;
            inst.mult = fr.mult * group;
            inst.vnode_from = fr.vnode;
            inst.n_seg = std::max(1, static_cast<int>(std::ceil(le / h - 1e-9)));
            inst.h_seg = le / inst.n_seg;
            inst.dist_from = fr.dist;
            inst.first_node = B.n_nodes;
            for (int k = 1; k < inst.n_seg; ++k) {
                B.node_dist.push_back(fr.dist + k * inst.h_seg);
                ++B.n_nodes;
            }
            if (!trunc) {
                inst.vnode_to = B.n_nodes++;
                B.node_dist.push_back(fr.dist + le);
            }
            const int inst_id = static_cast<int>(B.insts.size());
            for (std::size_t k = i; k < j; ++k)
                B.child_of[static_cast<long long>(fr.vnode) * EW + tagged[k].second] = inst_id;
            B.insts.push_back(inst);
            if (!trunc) stack.push_back({inst.vnode_to, rep, fr.dist + le, inst.mult});
            i = j;
        }
    }

    B.mass.assign(B.n_nodes, 0.0);
    std::vector<Eigen::Triplet<double>> trip;
    for (const auto& inst : B.insts) {
        const double w = inst.mult / inst.h_seg;
        const double mh = inst.mult * inst.h_seg / 2.0;
        auto node_at = [&](int k) -> int {
            if (k == 0) return inst.vnode_from;
            if (k == inst.n_seg) return inst.vnode_to;  // -1 when truncated
            return inst.first_node + k - 1;
        };
        for (int k = 0; k < inst.n_seg; ++k) {
            const int a = node_at(k), b = node_at(k + 1);
            B.mass[a] += mh;
            trip.emplace_back(a, a, w);
            if (b >= 0) {
                B.mass[b] += mh;
                trip.emplace_back(b, b, w);
                trip.emplace_back(a, b, -w);
                trip.emplace_back(b, a, -w);
            }
        }
    }
    B.K.resize(B.n_nodes, B.n_nodes);
    B.K.setFromTriplets(trip.begin(), trip.end());
    return B;
}

TruncatedBall::Probe TruncatedBall::locate(const TreePoint& y) const {
    const long long EW = G->num_oriented_edges();
    int v = center_node;
    auto follow = [&](int e) -> const Inst* {
        auto it = child_of.find(static_cast<long long>(v) * EW + e);
        return it == child_of.end() ? nullptr : &insts[it->second];
    };
    for (std::size_t i = 0; i < y.word.size(); ++i) {
        const Inst* inst = follow(y.word[i]);
        if (!inst || inst->truncated) return {};
        v = inst->vnode_to;
    }
    if (y.is_vertex()) return {v, -1, 1.0, 0.0};
    const Inst* inst = follow(y.edge);
    if (!inst || y.offset > inst->length + 1e-12) return {};
    const double pos = y.offset / inst->h_seg;
    int k = static_cast<int>(std::floor(pos));
    k = std::min(k, inst->n_seg - 1);
    const double frac = pos - k;
    auto node_at = [&](int kk) -> int {
        if (kk == 0) return inst->vnode_from;
        if (kk == inst->n_seg) return inst->vnode_to;
        return inst->first_node + kk - 1;
    };
    TruncatedBall::Probe p;
    p.n1 = node_at(k);
    p.n2 = node_at(k + 1);
    p.w1 = 1.0 - frac;
    p.w2 = frac;
    if (p.n2 < 0) p.w2 = 0.0;
    return p;
}

int TruncatedBall::vertex_node(const TreeVertex& v) const {
    const auto pr = locate(make_vertex_point(v.word));
    return (pr.valid() && pr.w1 == 1.0) ? pr.n1 : -1;
}

double TruncatedBall::total_mass(const Eigen::VectorXd& u) const {
    double s = 0.0;
    for (int i = 0; i < n_nodes; ++i) s += mass[i] * u[i];
    return s;
}

HeatField heat_solve(const TruncatedBall& ball, const TreePoint& source,
                     std::vector<double> times, double dt, const std::vector<TreePoint>& probes,
                     double probe_stride) {
    if (dt > 0.05) throw StepTooLarge("dt > 0.05 rejected");
    if (ball.reduced && !(source.is_vertex() && source.word.empty()))
        throw ValidationError("reduced grids only support a center source");
    const auto src = ball.locate(source);
    if (!src.valid() || src.w1 != 1.0)
        throw ValidationError("source must be a grid vertex inside the ball");
    if (ball.node_dist[src.n1] > ball.radius - ball.G->min_length() - 1e-9)
        throw SourceTooCloseToBoundary("source within one edge of the Dirichlet sphere");

    HeatField f;
    f.ball = &ball;
    f.source = source;
    f.dt = dt;
    std::sort(times.begin(), times.end());
    f.times = times;
    f.probes = probes;
    f.probe_values.assign(probes.size(), {});

    const int N = ball.n_nodes;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(N);
    u[src.n1] = 1.0 / ball.mass[src.n1];

    Eigen::SparseMatrix<double> A = ball.K * (dt / 2.0);
    for (int i = 0; i < N; ++i) A.coeffRef(i, i) += ball.mass[i];
    A.makeCompressed();
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(A);
    if (llt.info() != Eigen::Success) throw IterationStalled("heat operator factorization failed");

    const Eigen::Map<const Eigen::VectorXd> M(ball.mass.data(), N);
    std::vector<TruncatedBall::Probe> plocs;
    for (const auto& p : probes) {
        plocs.push_back(ball.locate(p));
        if (!plocs.back().valid()) throw ValidationError("probe outside the ball");
    }
    auto probe_val = [&](const TruncatedBall::Probe& p) {
        double s = p.w1 * u[p.n1];
        if (p.n2 >= 0) s += p.w2 * u[p.n2];
        return s;
    };

    const long total_steps = times.empty() ? 0 : std::llround(times.back() / dt);
    const long pstride = std::max<long>(1, std::llround(probe_stride / dt));
    std::size_t next_snap = 0;
    auto maybe_record = [&](long step) {
        const double t = step * dt;
        if (step % pstride == 0) {
            f.probe_times.push_back(t);
            for (std::size_t i = 0; i < plocs.size(); ++i)
                f.probe_values[i].push_back(probe_val(plocs[i]));
        }
        while (next_snap < f.times.size() && std::llround(f.times[next_snap] / dt) == step) {
            f.values.push_back(u);
            f.mass_deficit.push_back(1.0 - ball.total_mass(u));
            ++next_snap;
        }
    };
    maybe_record(0);
    for (long step = 1; step <= total_steps; ++step) {
        const Eigen::VectorXd rhs = M.cwiseProduct(u) - (dt / 2.0) * (ball.K * u);
        u = llt.solve(rhs);
        maybe_record(step);
    }
    return f;
}

double field_value(const HeatField& f, std::size_t time_idx, const TreePoint& y) {
    const auto p = f.ball->locate(y);
    if (!p.valid()) return 0.0;
    const auto& u = f.values.at(time_idx);
    double s = p.w1 * u[p.n1];
    if (p.n2 >= 0) s += p.w2 * u[p.n2];
    return s;
}

double lambda0_ball(const TruncatedBall& ball, double tol, int max_iter) {
    const int N = ball.n_nodes;
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(ball.K);
    if (llt.info() != Eigen::Success)
        throw IterationStalled("stiffness factorization failed");
    const Eigen::Map<const Eigen::VectorXd> M(ball.mass.data(), N);
    Eigen::VectorXd v = Eigen::VectorXd::Ones(N);
    v /= std::sqrt(v.dot(M.cwiseProduct(v)));
    double lam = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        Eigen::VectorXd w = llt.solve(M.cwiseProduct(v));
        w /= std::sqrt(w.dot(M.cwiseProduct(w)));
        const double lam_new = w.dot(ball.K * w) / w.dot(M.cwiseProduct(w));
        v.swap(w);
        if (it > 2 && std::abs(lam_new - lam) < tol * std::max(1.0, std::abs(lam_new)))
            return lam_new;
        lam = lam_new;
    }
    throw IterationStalled("inverse power iteration did not settle");
}

PowerLawLimit power_law_extrapolate(const std::vector<double>& radii,
                                    const std::vector<double>& values) {
    if (radii.size() != 3 || values.size() != 3)
        throw ValidationError("power-law extrapolation needs exactly 3 points");
    const double l1 = values[0], l2 = values[1], l3 = values[2];
    const double d1 = l1 - l2, d2 = l2 - l3;
    const double R1 = radii[0], R2 = radii[1], R3 = radii[2];
    auto ratio_at = [&](double p) {
        return (std::pow(R1, -p) - std::pow(R2, -p)) / (std::pow(R2, -p) - std::pow(R3, -p));
    };
    PowerLawLimit out;
    out.limit = l3;
    out.exponent = 0.0;
    if (d1 > 0 && d2 > 0) {
        const double target = d1 / d2;
        double lo = 0.2, hi = 8.0;
        if ((ratio_at(lo) - target) * (ratio_at(hi) - target) < 0) {
            for (int i = 0; i < 80; ++i) {
                const double mid = 0.5 * (lo + hi);
                if ((ratio_at(lo) - target) * (ratio_at(mid) - target) <= 0)
                    hi = mid;
                else
                    lo = mid;
            }
            const double p = 0.5 * (lo + hi);
            const double c = d2 / (std::pow(R2, -p) - std::pow(R3, -p));
            out.exponent = p;
            out.limit = l3 - c * std::pow(R3, -p);
        } else if (d1 > d2) {
            // geometric (Aitken) fallback
            out.limit = l3 - d2 * d2 / (d1 - d2);
        }
    }
    return out;
}

SpectralEstimate lambda0_spectral(const QuotientGraph& G, double R, double h, bool reduce) {
    SpectralEstimate est;
    est.radii = {R / 2.0, 0.75 * R, R};
    for (double r : est.radii) {
        const TruncatedBall b = build_ball(G, r, h, reduce);
        est.sequence.push_back(lambda0_ball(b));
    }
    est.lambda_R = est.sequence[2];
    const PowerLawLimit lim = power_law_extrapolate(est.radii, est.sequence);
    est.extrapolated = lim.limit;
    est.exponent = lim.exponent;
    return est;
}

double green_from_heat(const HeatField& f, double lambda, std::size_t probe_idx) {
    const auto& t = f.probe_times;
    const auto& p = f.probe_values.at(probe_idx);
    if (t.size() < 8) throw TailNotControlled("time series too short");
    double integral = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) {
        const double fa = std::exp(lambda * t[i - 1]) * p[i - 1];
        const double fb = std::exp(lambda * t[i]) * p[i];
        integral += 0.5 * (fa + fb) * (t[i] - t[i - 1]);
    }
    // long-time model log p = a - b t - c log t fitted on the last half,
    // integrated numerically far past the horizon
    std::vector<double> ts, lts, lp;
    for (std::size_t i = t.size() / 2; i < t.size(); ++i) {
        if (p[i] > 0 && t[i] > 0) {
            ts.push_back(t[i]);
            lts.push_back(std::log(t[i]));
            lp.push_back(std::log(p[i]));
        }
    }
    if (ts.size() < 8) throw TailNotControlled("decay window empty");
    const PlaneFit fit = plane_fit(ts, lts, lp);
    const double b = -fit.b1;
    if (b <= lambda + 1e-4) throw TailNotControlled("lambda too close to the decay rate");
    auto model = [&](double tt) { return std::exp(fit.b0 + fit.b1 * tt + fit.b2 * std::log(tt)); };
    // extend until e^{lambda t} model(t) is negligible
    const double T = t.back();
    const double span = 30.0 / (b - lambda);
    const int n = 4000;
    const double dt = span / n;
    double tail = 0.0;
    for (int i = 0; i < n; ++i) {
        const double ta = T + i * dt, tb = ta + dt;
        tail += 0.5 * (std::exp(lambda * ta) * model(ta) + std::exp(lambda * tb) * model(tb)) * dt;
    }
    // splice the model level to the last sample to remove fit offset
    const double scale = p.back() / model(T);
    return integral + tail * scale;
}

}  // namespace treelab
