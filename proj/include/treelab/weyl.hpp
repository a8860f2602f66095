#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "treelab/graph.hpp"
#include "treelab/tree.hpp"

namespace treelab {

class NegativeLambda : public std::runtime_error {
public:
    explicit NegativeLambda(const std::string& what) : std::runtime_error(what) {}
};
class NotConverged : public std::runtime_error {
public:
    explicit NotConverged(const std::string& what) : std::runtime_error(what) {}
};
class DepthTooSmall : public std::runtime_error {
public:
    explicit DepthTooSmall(const std::string& what) : std::runtime_error(what) {}
};
class TailNotControlled : public std::runtime_error {
public:
    explicit TailNotControlled(const std::string& what) : std::runtime_error(what) {}
};

// Per-oriented-edge branch data at a fixed lambda. m[e] is the Riccati (Weyl)
// coefficient of the branch behind e, taken at t(e); F[e] the branch hitting
// transform from i(e) to t(e); S[e] the sum of Riccati coefficients feeding
// into i(e) from behind (excluding the reverse edge).
struct WeylTable {
    double lambda = 0.0;
    std::vector<double> m;
    std::vector<double> F;
    std::vector<double> S;
    bool converged = false;
    bool diverged = false;  // blow-up guard tripped: lambda above the spectral bottom
    double residual = 0.0;
    long iterations = 0;

    // Good enough for kernel assembly even when the strict tolerance was not
    // reached (critical slowing just below lambda0).
    bool usable() const { return !diverged && residual < 1e-6; }
};

WeylTable solve_weyl(const QuotientGraph& G, double lambda, double tol = 1e-13,
                     long max_iter = 5'000'000);

// cos(w t) and sin(w t)/w for w = sqrt(lambda), with the lambda -> 0 limit.
double trig_c(double lambda, double t);
double trig_s(double lambda, double t);

// log of the hitting factor along oriented edge e from arc parameter a to b
// (0 <= a < b <= length); (0, length) gives log F_e.
double edge_factor_log(const QuotientGraph& G, const WeylTable& W, int e, double a, double b);

double log_hitting(const QuotientGraph& G, const WeylTable& W, const TreePoint& x,
                   const TreePoint& y);
double hitting_transform(const QuotientGraph& G, const WeylTable& W, const TreePoint& x,
                         const TreePoint& y);

// On-diagonal Green value G_lambda(y, y); interior points split the host edge.
double green_diag(const QuotientGraph& G, const WeylTable& W, const TreePoint& y);
double log_green(const QuotientGraph& G, const WeylTable& W, const TreePoint& x,
                 const TreePoint& y);
double green(const QuotientGraph& G, const WeylTable& W, const TreePoint& x, const TreePoint& y);

struct BandValue {
    double value = 0.0;
    double band = 0.0;  // multiplicative error estimate from depth refinement
};

BandValue martin_kernel(const QuotientGraph& G, const WeylTable& W, const TreePoint& x0,
                        const TreePoint& x, const BoundaryRay& xi, int depth);
BandValue naim_kernel(const QuotientGraph& G, const WeylTable& W, const TreePoint& x,
                      const BoundaryRay& xi, const BoundaryRay& zeta, int depth);

struct Lambda0Bracket {
    double lo = 0.0;  // largest lambda observed to converge
    double hi = 0.0;  // smallest lambda observed to blow up
    double value() const { return 0.5 * (lo + hi); }
};

Lambda0Bracket lambda0_resolvent(const QuotientGraph& G, double tol);

// d^order/dlambda^order G_lambda(x, y). Order 1 is evaluated in closed form:
// the integral of Phi(x,z) Phi(y,z) G(z,z)^2 decomposes into per-edge branch
// integrals solved as a small linear system over oriented quotient edges (no
// radius truncation). Order 2 is a central difference of the exact order-1
// value with step h.
double green_lambda_derivative(const QuotientGraph& G, double lambda, const TreePoint& x,
                               const TreePoint& y, int order = 1, double h = 1e-5);

struct AnconaReport {
    double C_ancona = 1.0;       // sup over triples of max(r, 1/r), r the Ancona ratio
    double C_strong = 0.0;       // sup over fork configs of |cross-ratio - 1|
    double rho = 0.0;            // fitted decay rate of the cross-ratio deviation
    double rho_r2 = 0.0;         // fit quality; 1 when stabilization is exact
    bool exact_stabilization = false;  // deviations at rounding level for all overlaps
    double D_harnack = 0.0;      // empirical sup of |log f(y)/f(z)| over Harnack samples
    std::vector<double> deviation_by_overlap;  // max |cross-ratio - 1| per overlap length
};

AnconaReport ancona_diagnostics(const QuotientGraph& G, const WeylTable& W, int samples,
                                std::uint64_t seed = 7);

}  // namespace treelab
