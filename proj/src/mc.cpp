#include "treelab/mc.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "treelab/util.hpp"

namespace treelab {

void McStats::record(int degree, int choice) {
    if (static_cast<int>(counts.size()) <= degree) counts.resize(degree + 1);
    if (static_cast<int>(counts[degree].size()) < degree) counts[degree].resize(degree, 0);
    ++counts[degree][choice];
}

void McStats::merge(const McStats& other) {
    if (counts.size() < other.counts.size()) counts.resize(other.counts.size());
    for (std::size_t d = 0; d < other.counts.size(); ++d) {
        if (counts[d].size() < other.counts[d].size()) counts[d].resize(other.counts[d].size(), 0);
        for (std::size_t k = 0; k < other.counts[d].size(); ++k)
            counts[d][k] += other.counts[d][k];
    }
}

namespace {

// One Brownian path on the tree. Position: anchor vertex word + current
// oriented edge + offset from the anchor. The word pops when the walk heads
// back toward the base so its length tracks the excursion depth only.
class Walker {
public:
    Walker(const QuotientGraph& G, const TreePoint& start, double delta, std::uint64_t seed)
        : G_(G), rng_(seed), delta_(delta), sigma_(std::sqrt(2.0 * delta)) {
        // generator is the full Laplacian d^2/dx^2, so Var = 2 dt
        word_ = start.word;
        if (start.is_vertex()) {
            edge_ = G.out_edges(word_.empty() ? G.base_vertex() : G.edge(word_.back()).terminus)[0];
            offset_ = 0.0;
        } else {
            edge_ = start.edge;
            offset_ = start.offset;
        }
    }

    void set_target(const std::vector<int>* target_word) { target_ = target_word; }
    void set_stats(McStats* s) { stats_ = s; }

    bool hit() const { return hit_; }
    double hit_time() const { return hit_time_; }
    double time() const { return t_; }

    TreePoint position() const { return make_point(G_, word_, edge_, offset_); }

    void step() {
        move(gauss_(rng_) * sigma_);
        t_ += delta_;
    }

    void run_until(double t_end) {
        while (t_ + delta_ / 2 < t_end) step();
    }

    // true when the target got hit before t_end
    bool run_until_hit(double t_end) {
        while (t_ + delta_ / 2 < t_end && !hit_) step();
        return hit_;
    }

private:
    void check_target_near() {
        if (!hit_ && target_ && word_ == *target_) {
            hit_ = true;
            hit_time_ = t_ + delta_;
        }
    }
    void check_target_far() {
        if (!hit_ && target_ && word_.size() + 1 == target_->size() && target_->back() == edge_ &&
            std::equal(word_.begin(), word_.end(), target_->begin())) {
            hit_ = true;
            hit_time_ = t_ + delta_;
        }
    }

    void move(double disp) {
        double rem = disp;
        while (true) {
            const double l = G_.edge(edge_).length;
            const double no = offset_ + rem;
            if (no >= 0.0 && no <= l) {
                offset_ = no;
                return;
            }
            if (no > l) {  // crossed the far vertex
                rem = no - l;
                check_target_far();
                const int q = G_.edge(edge_).terminus;
                const auto& outs = G_.out_edges(q);
                const int k = static_cast<int>(rng_() % outs.size());
                if (stats_) stats_->record(static_cast<int>(outs.size()), k);
                const int f = outs[k];
                if (f == G_.reverse(edge_)) {
                    offset_ = l;
                    rem = -rem;
                } else {
                    word_.push_back(edge_);
                    edge_ = f;
                    offset_ = 0.0;
                }
            } else {  // crossed the anchor vertex
                rem = no;  // negative magnitude
                check_target_near();
                const int q = word_.empty() ? G_.base_vertex() : G_.edge(word_.back()).terminus;
                const auto& outs = G_.out_edges(q);
                const int k = static_cast<int>(rng_() % outs.size());
                if (stats_) stats_->record(static_cast<int>(outs.size()), k);
                const int f = outs[k];
                if (f == edge_) {
                    offset_ = 0.0;
                    rem = -rem;
                } else if (!word_.empty() && f == G_.reverse(word_.back())) {
                    edge_ = word_.back();
                    word_.pop_back();
                    offset_ = G_.edge(edge_).length;
                } else {
                    edge_ = f;
                    offset_ = 0.0;
                    rem = -rem;
                }
            }
        }
    }

    const QuotientGraph& G_;
    mutable std::mt19937_64 rng_;
    mutable std::normal_distribution<double> gauss_;
    double delta_, sigma_;
    std::vector<int> word_;
    int edge_ = 0;
    double offset_ = 0.0;
    const std::vector<int>* target_ = nullptr;
    McStats* stats_ = nullptr;
    bool hit_ = false;
    double hit_time_ = -1.0;
    double t_ = 0.0;
};

}  // namespace

std::vector<std::vector<TreePoint>> simulate_paths(const QuotientGraph& G, const TreePoint& x,
                                                   const std::vector<double>& times,
                                                   const McConfig& cfg, McStats* stats) {
    std::vector<double> ts = times;
    std::sort(ts.begin(), ts.end());
    std::vector<std::vector<TreePoint>> out(cfg.n_paths);
    const int nb = thread_count();
    std::vector<McStats> local(nb);
    parallel_for(nb, [&](std::size_t b) {
        for (long i = static_cast<long>(b); i < cfg.n_paths; i += nb) {
            Walker w(G, x, cfg.delta, stream_seed(cfg.seed, i));
            if (stats) w.set_stats(&local[b]);
            auto& rec = out[i];
            rec.reserve(ts.size());
            for (double t : ts) {
                w.run_until(t);
                rec.push_back(w.position());
            }
        }
    });
    if (stats)
        for (const auto& s : local) stats->merge(s);
    return out;
}

McEstimate estimate_hitting_transform(const QuotientGraph& G, const TreePoint& x,
                                      const TreePoint& y, double lambda, const McConfig& cfg) {
    if (!y.is_vertex()) throw ValidationError("hitting target must be a tree vertex");
    if (x == y) return {1.0, 0.0, cfg.n_paths};
    std::vector<double> vals(cfg.n_paths, 0.0);
    const int nb = thread_count();
    parallel_for(nb, [&](std::size_t b) {
        for (long i = static_cast<long>(b); i < cfg.n_paths; i += nb) {
            Walker w(G, x, cfg.delta, stream_seed(cfg.seed, i));
            w.set_target(&y.word);
            if (w.run_until_hit(cfg.horizon)) vals[i] = std::exp(lambda * w.hit_time());
        }
    });
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= cfg.n_paths;
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var /= std::max<long>(1, cfg.n_paths - 1);
    McEstimate est{mean, std::sqrt(var / cfg.n_paths), cfg.n_paths};
    if (!std::isfinite(est.value) || !std::isfinite(est.stderr_))
        throw VarianceExplosion("hitting-transform estimator variance not finite");
    return est;
}

namespace {

double epan(double d, double bw) {
    const double u = d / bw;
    return u >= 1.0 ? 0.0 : 0.75 / bw * (1.0 - u * u);
}

// integral of the Epanechnikov kernel over arc distance [a, b], 0<=a<=b<=bw
double epan_int(double a, double b, double bw) {
    a = std::min(a, bw);
    b = std::min(b, bw);
    auto anti = [&](double u) { return 0.75 / bw * (u - u * u * u / (3.0 * bw * bw)); };
    return anti(b) - anti(a);
}

double kernel_mass_branch(const QuotientGraph& G, int e, double d0, double bw) {
    const double l = G.edge(e).length;
    double m = epan_int(d0, d0 + l, bw);
    if (d0 + l < bw)
        for (int ep : G.successors(e)) m += kernel_mass_branch(G, ep, d0 + l, bw);
    return m;
}

}  // namespace

double kernel_mass(const QuotientGraph& G, const TreePoint& y, double bandwidth) {
    const double bw = bandwidth;
    if (y.is_vertex()) {
        double m = 0.0;
        const int q = y.word.empty() ? G.base_vertex() : G.edge(y.word.back()).terminus;
        for (int e : G.out_edges(q)) m += kernel_mass_branch(G, e, 0.0, bw);
        return m;
    }
    const double l = G.edge(y.edge).length;
    double m = epan_int(0.0, std::min(l - y.offset, bw), bw) +
               epan_int(0.0, std::min(y.offset, bw), bw);
    if (l - y.offset < bw)
        for (int ep : G.successors(y.edge)) m += kernel_mass_branch(G, ep, l - y.offset, bw);
    if (y.offset < bw) {
        const int r = G.reverse(y.edge);
        for (int ep : G.successors(r)) m += kernel_mass_branch(G, ep, y.offset, bw);
    }
    return m;
}

McEstimate estimate_density(const QuotientGraph& G, const TreePoint& x, const TreePoint& y,
                            double t, const McConfig& cfg, double bandwidth) {
    const double C = kernel_mass(G, y, bandwidth);
    std::vector<double> vals(cfg.n_paths, 0.0);
    const int nb = thread_count();
    parallel_for(nb, [&](std::size_t b) {
        for (long i = static_cast<long>(b); i < cfg.n_paths; i += nb) {
            Walker w(G, x, cfg.delta, stream_seed(cfg.seed, i));
            w.run_until(t);
            vals[i] = epan(tree_distance(G, w.position(), y), bandwidth);
        }
    });
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= cfg.n_paths;
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var /= std::max<long>(1, cfg.n_paths - 1);
    return {mean / C, std::sqrt(var / cfg.n_paths) / C, cfg.n_paths};
}

double SpliceReport::threshold() const {
    // c(0.01) = 1.628 for the two-sample KS statistic
    return 1.628 * std::sqrt(static_cast<double>(n1 + n2) / (static_cast<double>(n1) * n2));
}

SpliceReport splice_test(const QuotientGraph& G, const TreePoint& x, const TreePoint& y, double s,
                         const McConfig& cfg) {
    if (!y.is_vertex()) throw ValidationError("splice target must be a tree vertex");
    std::vector<double> spliced(cfg.n_paths, -1.0), fresh(cfg.n_paths, -1.0);
    const int nb = thread_count();
    parallel_for(nb, [&](std::size_t b) {
        for (long i = static_cast<long>(b); i < cfg.n_paths; i += nb) {
            Walker w(G, x, cfg.delta, stream_seed(cfg.seed, i));
            w.set_target(&y.word);
            if (w.run_until_hit(cfg.horizon - s)) {
                w.run_until(w.hit_time() + s);
                spliced[i] = tree_distance(G, w.position(), y);
            }
            Walker wf(G, y, cfg.delta, stream_seed(cfg.seed ^ 0x5eed5eedULL, i));
            wf.run_until(s);
            fresh[i] = tree_distance(G, wf.position(), y);
        }
    });
    std::vector<double> a, b2;
    for (double v : spliced)
        if (v >= 0) a.push_back(v);
    for (double v : fresh)
        if (v >= 0) b2.push_back(v);
    std::sort(a.begin(), a.end());
    std::sort(b2.begin(), b2.end());
    SpliceReport rep;
    rep.n1 = static_cast<long>(a.size());
    rep.n2 = static_cast<long>(b2.size());
    double ks = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b2.size()) {
        if (a[i] <= b2[j])
            ++i;
        else
            ++j;
        ks = std::max(ks, std::abs(static_cast<double>(i) / a.size() -
                                   static_cast<double>(j) / b2.size()));
    }
    rep.ks = ks;
    return rep;
}

}  // namespace treelab
