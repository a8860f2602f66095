#pragma once

#include <vector>

#include "treelab/graph.hpp"
#include "treelab/thermo.hpp"
#include "treelab/tree.hpp"
#include "treelab/weyl.hpp"

namespace treelab {

// Truncated Poincare-series approximation of the Patterson-Sullivan density
// of base point `base` at exponent s (> delta_lambda). Atoms sit at the lifts
// of the quotient base vertex within metric radius N of the root lift; the
// normalizer is the root-based series, shared by every base point so that
// the family stays conformal.
struct PsDensityApprox {
    double lambda = 0.0;
    double s = 0.0;
    double N = 0.0;
    TreePoint base;
    std::vector<std::vector<int>> atom_words;
    std::vector<double> atom_dist;  // distance from the root lift
    std::vector<double> weight;     // G^2(base, z) e^{-s d(base,z)} / normalizer
    double normalizer = 0.0;
    double total_mass = 0.0;
};

PsDensityApprox ps_density(const QuotientGraph& G, const WeylTable& W, const TreePoint& base,
                           double s, double N);

struct ShadowMass {
    double mass = 0.0;
    double band = 0.0;  // geometric tail estimate beyond the truncation radius
};

// Mass of the shadow O_base(y): atoms z with y on [base, z].
ShadowMass ps_shadow_mass(const QuotientGraph& G, const PsDensityApprox& approx,
                          const TreePoint& y);

struct ConformalityReport {
    double ratio = 0.0;      // mass_y(S) / mass_x(S) on the anchor shadow
    double factor = 0.0;     // k_lambda^2(x,y,xi_c) e^{delta beta_{xi_c}(x,y)}
    double deviation = 0.0;  // |ratio/factor - 1|
};

// Radon-Nikodym check on the shadow of `anchor` (ends through anchor seen
// from the root), at its deterministic central ray. mu_x and mu_y must share
// lambda, s and N.
ConformalityReport conformality_check(const QuotientGraph& G, const WeylTable& W, double delta,
                                      const PsDensityApprox& mu_x, const PsDensityApprox& mu_y,
                                      const TreePoint& anchor);

enum class CylinderRoute { shadow_product, gibbs_formula };

struct GibbsCylinderMeasure {
    double lambda = 0.0;
    CylinderSet cylinder;
    double value = 0.0;
    double band = 0.0;
    CylinderRoute route = CylinderRoute::gibbs_formula;
};

// Measure of the cylinder through the lifted path of cyl.word. Route
// shadow_product evaluates the Naim-kernel double integral over the two
// facing shadows, piecewise-constant on sub-shadows `subdepth` letters past
// the endpoints, against a Poincare approximation at exponent s, radius N.
// Route gibbs_formula exponentiates the Birkhoff sum of 2 log F - delta l
// along the word.
GibbsCylinderMeasure cylinder_measure(const QuotientGraph& G, const WeylTable& W, double delta,
                                      const CylinderSet& cyl, CylinderRoute route, double s,
                                      double N, int subdepth = 4, int ray_depth = 12);

// c(x, y) = int k_lambda(x, y, xi) d mu_x(xi), by piecewise-constant
// quadrature over the depth-n shadow partition of the boundary.
BandValue c_kernel(const QuotientGraph& G, const WeylTable& W, const PsDensityApprox& approx,
                   const TreePoint& x, const TreePoint& y, int depth);

}  // namespace treelab
