#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "treelab/graph.hpp"
#include "treelab/tree.hpp"
#include "treelab/weyl.hpp"

namespace treelab {

class NotStronglyConnected : public std::runtime_error {
public:
    explicit NotStronglyConnected(const std::string& what) : std::runtime_error(what) {}
};
class PowerIterationStalled : public std::runtime_error {
public:
    explicit PowerIterationStalled(const std::string& what) : std::runtime_error(what) {}
};

// Finite Markov shift coding the geodesic flow across vertices: alphabet =
// oriented quotient edges, transitions = non-backtracking concatenation, roof
// = length of the entered edge.
struct CodingSystem {
    int n_letters = 0;
    std::vector<std::vector<char>> transition;  // transition[e][e'] = 1 iff e' may follow e
    std::vector<std::vector<int>> follow;       // successor lists
    std::vector<double> roof;                   // edge lengths per letter

    bool admissible(const std::vector<int>& word) const;
};

CodingSystem build_coding(const QuotientGraph& G);

// All admissible words of the given length, in lexicographic order.
std::vector<std::vector<int>> admissible_words(const CodingSystem& C, int k);

// Cylinder [word, p, q] with q = p + len - 1.
struct CylinderSet {
    std::vector<int> word;
    int position = 0;
};

// The unique s with spectral radius of B(lambda, s)[e][e'] =
// A[e][e'] F_{e'}^2 e^{-s l_{e'}} equal to 1: the critical exponent of the
// Green-squared orbit sums.
double delta_lambda(const QuotientGraph& G, const WeylTable& W);

// Memory-k approximation of the Sigma-potential: per admissible k-word w the
// value 2 log k_lambda(x1, x0, xi_w) on the lifted path, with a depth band.
// (s-dependent part -s l is supplied per use.)
struct PotentialGrid {
    double lambda = 0.0;
    int k = 0;
    std::vector<std::vector<int>> words;  // lexicographically sorted
    std::vector<double> value;
    std::vector<double> band;

    int word_index(const std::vector<int>& w) const;  // -1 when absent
    double sup_band() const;
};

PotentialGrid potential_grid(const QuotientGraph& G, const WeylTable& W, int k);

// Shift pressure of the k-cylinder potential value(w) - s * roof(first letter
// of w): log of the leading eigenvalue of the weighted word-transition
// operator.
double pressure(const QuotientGraph& G, const PotentialGrid& grid, double s);

struct PressureRoot {
    double s_star = 0.0;
    double band = 0.0;  // propagated potential band
};
PressureRoot pressure_root(const QuotientGraph& G, const PotentialGrid& grid);

// f_lambda at the point of arc parameter t along the ray xi (from the base):
// Richardson-extrapolated one-sided difference quotient of
// -2 log k_lambda(g(t), g(t+h), xi) in h.
double f_lambda_pointwise(const QuotientGraph& G, const WeylTable& W, const BoundaryRay& xi,
                          double t, double dt = 1e-3);

// Point at arc-length t along the ray from the base.
TreePoint ray_point_at(const QuotientGraph& G, const BoundaryRay& xi, double t);

// Markov measure from the leading eigendata of the pressure operator, and the
// variational bookkeeping around it.
struct AbramovReport {
    double log_rho = 0.0;            // pressure of the k-potential at s
    double entropy = 0.0;            // h_m(sigma) of the Markov measure
    double roof_integral = 0.0;      // mean return time
    double potential_integral = 0.0;  // int (value - s*roof) dm
    double defect = 0.0;             // entropy + potential_integral - log_rho
    double flow_entropy = 0.0;       // Abramov ratio entropy / roof_integral
    std::vector<double> stationary;  // pi over grid.words
};

AbramovReport abramov_check(const QuotientGraph& G, const PotentialGrid& grid, double s);

}  // namespace treelab
