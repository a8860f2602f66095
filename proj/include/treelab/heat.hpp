#pragma once

#include <unordered_map>
#include <vector>

#include <Eigen/Sparse>

#include "treelab/graph.hpp"
#include "treelab/tree.hpp"

namespace treelab {

class SourceTooCloseToBoundary : public std::runtime_error {
public:
    explicit SourceTooCloseToBoundary(const std::string& what) : std::runtime_error(what) {}
};
class StepTooLarge : public std::runtime_error {
public:
    explicit StepTooLarge(const std::string& what) : std::runtime_error(what) {}
};
class IterationStalled : public std::runtime_error {
public:
    explicit IterationStalled(const std::string& what) : std::runtime_error(what) {}
};

// P1 grid on the tree ball B(center, R) with Dirichlet truncation. When
// `reduced`, isomorphic sibling branches (equal structural hash of quotient
// edge + remaining radius) are merged and carried with a multiplicity weight;
// this is exact for fields that are symmetric across the merged branches,
// i.e. center-sourced solves and the ground state.
class TruncatedBall {
public:
    struct Inst {
        int qedge = -1;          // representative oriented quotient edge
        double length = 0.0;     // possibly truncated at the sphere
        bool truncated = false;  // far end is a Dirichlet boundary point
        double mult = 1.0;
        int vnode_from = -1;
        int vnode_to = -1;       // -1 when truncated
        int first_node = -1;     // first interior grid node (n_seg - 1 of them)
        int n_seg = 0;
        double h_seg = 0.0;
        double dist_from = 0.0;  // distance of vnode_from to the center
    };

    const QuotientGraph* G = nullptr;
    double radius = 0.0;
    double h = 0.0;
    bool reduced = true;

    std::vector<Inst> insts;
    int n_nodes = 0;
    int center_node = 0;
    std::vector<double> mass;       // lumped, multiplicity-weighted
    std::vector<double> node_dist;  // distance to the center
    Eigen::SparseMatrix<double> K;  // stiffness, multiplicity-weighted

    // vertex node -> (quotient edge -> child inst); merged edges share an inst
    std::unordered_map<long long, int> child_of;

    struct Probe {
        int n1 = -1, n2 = -1;
        double w1 = 0.0, w2 = 0.0;
        bool valid() const { return n1 >= 0 || n2 >= 0; }
    };
    // Locates a tree point (word rooted at the ball center) on the grid with
    // linear interpolation. Points outside the ball yield an invalid probe.
    Probe locate(const TreePoint& y) const;
    int vertex_node(const TreeVertex& v) const;
    double total_mass(const Eigen::VectorXd& u) const;
};

// center is the base-vertex lift (empty word).
TruncatedBall build_ball(const QuotientGraph& G, double R, double h, bool reduce = true);

struct HeatField {
    const TruncatedBall* ball = nullptr;
    TreePoint source;
    double dt = 0.0;
    std::vector<double> times;  // snapshot times
    std::vector<Eigen::VectorXd> values;
    std::vector<double> mass_deficit;
    std::vector<TreePoint> probes;
    std::vector<double> probe_times;  // dense
    std::vector<std::vector<double>> probe_values;  // [probe][time index]
};

// Crank-Nicolson in time; the source must be the center on reduced grids.
HeatField heat_solve(const TruncatedBall& ball, const TreePoint& source,
                     std::vector<double> times, double dt,
                     const std::vector<TreePoint>& probes = {}, double probe_stride = 0.05);

double field_value(const HeatField& f, std::size_t time_idx, const TreePoint& y);

// Smallest Dirichlet eigenvalue of the ball via inverse power iteration.
double lambda0_ball(const TruncatedBall& ball, double tol = 1e-12, int max_iter = 20000);

struct SpectralEstimate {
    std::vector<double> radii;
    std::vector<double> sequence;  // eigenvalue per radius (monotone decreasing)
    double lambda_R = 0.0;         // value at the largest radius
    double extrapolated = 0.0;     // power-law extrapolation in R
    double exponent = 0.0;         // fitted decay exponent
};

SpectralEstimate lambda0_spectral(const QuotientGraph& G, double R, double h, bool reduce = true);

// Free-exponent power-law limit v(R) = v_inf + c R^-p from exactly three
// (radius, value) samples; falls back to geometric (Aitken) extrapolation
// when no consistent exponent exists.
struct PowerLawLimit {
    double limit = 0.0;
    double exponent = 0.0;
};
PowerLawLimit power_law_extrapolate(const std::vector<double>& radii,
                                    const std::vector<double>& values);

// Integral of e^{lambda t} p(t, source, probe) over the simulated horizon plus
// a fitted exponential tail.
double green_from_heat(const HeatField& f, double lambda, std::size_t probe_idx);

}  // namespace treelab
