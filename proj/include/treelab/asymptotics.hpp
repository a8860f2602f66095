#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "treelab/graph.hpp"
#include "treelab/tree.hpp"
#include "treelab/weyl.hpp"

namespace treelab {

class FitRejected : public std::runtime_error {
public:
    explicit FitRejected(const std::string& what) : std::runtime_error(what) {}
};
class WindowContaminated : public std::runtime_error {
public:
    explicit WindowContaminated(const std::string& what) : std::runtime_error(what) {}
};

// 1/(d/dlambda G)^2 regressed against (lambda0 - lambda): the slope recovers
// the Tauberian limit L = lim sqrt(lambda0-lambda) dG/dlambda.
struct TauberianReport {
    double lambda0 = 0.0;
    double L_fit = 0.0;
    double r2 = 0.0;
    double band = 0.0;  // spread of L over the two half-windows
    // mean of (lambda0-lambda)^{3/2} d2G/dlambda2 / (L_fit/2) near lambda0
    double second_deriv_ratio = 0.0;
    std::vector<double> lambdas, d1, d2;
};

TauberianReport tauberian_limit(const QuotientGraph& G, const TreePoint& x, const TreePoint& y,
                                double lambda0, const std::vector<double>& lambda_grid,
                                bool reject_bad_fit = true);

// Least squares of log p + lambda0 t against -alpha log t + log C over the
// requested window, both with alpha free and alpha pinned to 3/2.
struct FitReport {
    double lambda0_used = 0.0;
    double alpha_fit = 0.0;
    double C_fit_free = 0.0;
    double C_fit = 0.0;      // alpha pinned to 1.5
    double L_fit = 0.0;      // filled by the caller when chaining to Tauberian data
    double predicted_C = 0.0;  // L_fit / sqrt(pi), under C0 = C1
    double r2 = 0.0;
    double t_min = 0.0, t_max = 0.0;
    bool residual_white = false;  // runs test on the free-fit residuals, 5%
    std::vector<double> times, residuals;
};

// times/values: heat-kernel samples p(t, x, y); truncation_tail: bound on the
// relative truncation error at t_max (window rejected at >= 1%).
FitReport llt_fit(const std::vector<double>& times, const std::vector<double>& values,
                  double lambda0, double t_min, double t_max, double truncation_tail = 0.0);

// Residual oscillation of t^{3/2} e^{lambda0 t} p(t) around its fitted level:
// relative amplitude and dominant period (coarse periodogram scan).
struct OscillationReport {
    double residual_amplitude = 0.0;  // max |residual| / mean level
    double dominant_period = 0.0;
    bool lattice = false;  // filled by the caller from length_spectrum
};

OscillationReport oscillation_analysis(const std::vector<double>& times,
                                       const std::vector<double>& values, double lambda0,
                                       double t_min, double t_max);

}  // namespace treelab
