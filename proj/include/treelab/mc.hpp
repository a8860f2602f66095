#pragma once

#include <cstdint>
#include <vector>

#include "treelab/graph.hpp"
#include "treelab/tree.hpp"

namespace treelab {

class VarianceExplosion : public std::runtime_error {
public:
    explicit VarianceExplosion(const std::string& what) : std::runtime_error(what) {}
};

struct McConfig {
    double delta = 1e-3;  // time step
    long n_paths = 10000;
    std::uint64_t seed = 1;
    double horizon = 50.0;
};

// Exit-direction tallies at vertex crossings, keyed by vertex degree.
struct McStats {
    // counts[d][k]: crossings of a degree-d vertex that exited through the
    // k-th incident direction (in out_edges order)
    std::vector<std::vector<long>> counts;
    void record(int degree, int choice);
    void merge(const McStats& other);
};

// Gaussian increments along the current edge; a crossed vertex redirects the
// excess displacement uniformly over all incident directions (including the
// incoming one), iterated until the displacement is spent.
std::vector<std::vector<TreePoint>> simulate_paths(const QuotientGraph& G, const TreePoint& x,
                                                   const std::vector<double>& times,
                                                   const McConfig& cfg,
                                                   McStats* stats = nullptr);

struct McEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    long n = 0;
};

// E_x[ 1_{t_y < horizon} e^{lambda t_y} ] for a vertex target y.
McEstimate estimate_hitting_transform(const QuotientGraph& G, const TreePoint& x,
                                      const TreePoint& y, double lambda, const McConfig& cfg);

// Kernel-density estimate of p(t, x, .) at y (Epanechnikov along the tree
// metric, normalized by the exact kernel mass around y).
McEstimate estimate_density(const QuotientGraph& G, const TreePoint& x, const TreePoint& y,
                            double t, const McConfig& cfg, double bandwidth);

// Exact integral of the Epanechnikov kernel of the given bandwidth centered
// at y over the tree (handles vertices within the bandwidth).
double kernel_mass(const QuotientGraph& G, const TreePoint& y, double bandwidth);

// Two-sample Kolmogorov-Smirnov statistic between d(y, path(t_hit + s)) for
// paths from x spliced at their first hit of y, and d(y, path(s)) for fresh
// paths from y (strong Markov check). Returns the KS statistic and the
// effective sample sizes.
struct SpliceReport {
    double ks = 0.0;
    long n1 = 0, n2 = 0;
    // 1% significance threshold for the two-sample statistic
    double threshold() const;
};
SpliceReport splice_test(const QuotientGraph& G, const TreePoint& x, const TreePoint& y, double s,
                         const McConfig& cfg);

}  // namespace treelab
