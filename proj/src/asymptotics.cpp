#include "treelab/asymptotics.hpp"

#include <algorithm>
#include <cmath>

#include "treelab/util.hpp"

namespace treelab {

TauberianReport tauberian_limit(const QuotientGraph& G, const TreePoint& x, const TreePoint& y,
                                double lambda0, const std::vector<double>& lambda_grid,
                                bool reject_bad_fit) {
    if (lambda_grid.size() < 12)
        throw ValidationError("Tauberian fit needs at least 12 grid points");
    TauberianReport rep;
    rep.lambda0 = lambda0;
    rep.lambdas = lambda_grid;
    std::sort(rep.lambdas.begin(), rep.lambdas.end());
    const std::size_t n = rep.lambdas.size();
    rep.d1.assign(n, 0.0);
    rep.d2.assign(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        const double lam = rep.lambdas[i];
        const double h = std::min(1e-5, 0.1 * (lambda0 - lam));
        rep.d1[i] = green_lambda_derivative(G, lam, x, y, 1);
        rep.d2[i] = green_lambda_derivative(G, lam, x, y, 2, h);
    });
    std::vector<double> gap(n), inv2(n);
    for (std::size_t i = 0; i < n; ++i) {
        gap[i] = lambda0 - rep.lambdas[i];
        inv2[i] = 1.0 / (rep.d1[i] * rep.d1[i]);
    }
    const LinearFit fit = linear_fit(gap, inv2);
    rep.r2 = fit.r2;

    // the sub-leading behaviour is dG/dlambda = L/sqrt(gap) - b + ..., so
    // 1/(dG)^2 = gap/L^2 + (2b/L^3) gap^{3/2} + ...; fitting the correction
    // term removes the dominant window bias in L
    std::vector<double> gap32(n);
    for (std::size_t i = 0; i < n; ++i) gap32[i] = std::pow(gap[i], 1.5);
    auto corrected_L = [&](std::size_t a, std::size_t b) {
        const std::vector<double> g1(gap.begin() + a, gap.begin() + b);
        const std::vector<double> g2(gap32.begin() + a, gap32.begin() + b);
        const std::vector<double> gy(inv2.begin() + a, inv2.begin() + b);
        return 1.0 / std::sqrt(plane_fit(g1, g2, gy).b1);
    };
    rep.L_fit = corrected_L(0, n);

    const double L_lo = corrected_L(0, n / 2), L_hi = corrected_L(n / 2, n);
    rep.band = std::abs(L_hi - L_lo);

    // closest-to-lambda0 third of the grid: the limit (lambda0-lambda)^{3/2} d2
    double acc = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = 2 * n / 3; i < n; ++i) {
        acc += std::pow(gap[i], 1.5) * rep.d2[i];
        ++cnt;
    }
    rep.second_deriv_ratio = (acc / cnt) / (rep.L_fit / 2.0);

    if (reject_bad_fit && rep.r2 < 0.99)
        throw FitRejected("Tauberian regression not linear enough (R^2 < 0.99)");
    return rep;
}

namespace {

bool runs_test_white(const std::vector<double>& res) {
    long np = 0, nm = 0, runs = 0;
    int prev = 0;
    for (double r : res) {
        const int s = r >= 0 ? 1 : -1;
        (s > 0 ? np : nm)++;
        if (s != prev) ++runs;
        prev = s;
    }
    if (np == 0 || nm == 0) return false;
    const double nn = static_cast<double>(np + nm);
    const double mu = 2.0 * np * nm / nn + 1.0;
    const double var = (mu - 1.0) * (mu - 2.0) / (nn - 1.0);
    const double z = (runs - mu) / std::sqrt(std::max(var, 1e-30));
    return std::abs(z) < 1.96;
}

}  // namespace

FitReport llt_fit(const std::vector<double>& times, const std::vector<double>& values,
                  double lambda0, double t_min, double t_max, double truncation_tail) {
    if (truncation_tail >= 0.01)
        throw WindowContaminated("truncation tail above 1% of the signal on the window");
    std::vector<double> one, lt, it, it2, yv, tv;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t_min || times[i] > t_max) continue;
        if (!(values[i] > 0.0)) continue;
        tv.push_back(times[i]);
        one.push_back(1.0);
        lt.push_back(std::log(times[i]));
        it.push_back(1.0 / times[i]);
        it2.push_back(1.0 / (times[i] * times[i]));
        yv.push_back(std::log(values[i]) + lambda0 * times[i]);
    }
    if (lt.size() < 8) throw WindowContaminated("too few usable samples in the fit window");
    FitReport rep;
    rep.lambda0_used = lambda0;
    rep.t_min = t_min;
    rep.t_max = t_max;
    // the prefactor approaches C t^{-alpha} through a 1/t expansion; carrying
    // the first two correction terms as regressors removes the finite-window
    // bias in both the exponent and the constant
    const LeastSquaresFit fit = least_squares({one, lt, it, it2}, yv);
    rep.alpha_fit = -fit.coeff[1];
    rep.C_fit_free = std::exp(fit.coeff[0]);
    rep.r2 = fit.r2;
    std::vector<double> yv_pin(lt.size());
    for (std::size_t i = 0; i < lt.size(); ++i) yv_pin[i] = yv[i] + 1.5 * lt[i];
    rep.C_fit = std::exp(least_squares({one, it, it2}, yv_pin).coeff[0]);
    rep.times = tv;
    rep.residuals.resize(lt.size());
    for (std::size_t i = 0; i < lt.size(); ++i)
        rep.residuals[i] =
            yv[i] - (fit.coeff[0] + fit.coeff[1] * lt[i] + fit.coeff[2] * it[i] +
                     fit.coeff[3] * it2[i]);
    rep.residual_white = runs_test_white(rep.residuals);
    return rep;
}

OscillationReport oscillation_analysis(const std::vector<double>& times,
                                       const std::vector<double>& values, double lambda0,
                                       double t_min, double t_max) {
    std::vector<double> tv, sv;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t_min || times[i] > t_max || !(values[i] > 0.0)) continue;
        tv.push_back(times[i]);
        sv.push_back(std::pow(times[i], 1.5) * std::exp(lambda0 * times[i]) * values[i]);
    }
    OscillationReport rep;
    if (tv.size() < 8) return rep;
    // detrend with the Tauberian-corrected model level a + b/t
    std::vector<double> inv_t(tv.size());
    for (std::size_t i = 0; i < tv.size(); ++i) inv_t[i] = 1.0 / tv[i];
    const LinearFit trend = linear_fit(inv_t, sv);
    double mean = 0.0;
    std::vector<double> res(tv.size());
    for (std::size_t i = 0; i < tv.size(); ++i) {
        res[i] = sv[i] - (trend.intercept + trend.slope * inv_t[i]);
        mean += sv[i];
    }
    mean /= tv.size();
    double amp = 0.0;
    for (double r : res) amp = std::max(amp, std::abs(r));
    rep.residual_amplitude = amp / mean;
    // coarse periodogram over periods spanning the window
    double best = 0.0;
    const double span = tv.back() - tv.front();
    for (double period = 0.5; period <= span; period *= 1.02) {
        const double w = 2.0 * M_PI / period;
        double cs = 0.0, sn = 0.0;
        for (std::size_t i = 0; i < tv.size(); ++i) {
            cs += res[i] * std::cos(w * tv[i]);
            sn += res[i] * std::sin(w * tv[i]);
        }
        const double power = cs * cs + sn * sn;
        if (power > best) {
            best = power;
            rep.dominant_period = period;
        }
    }
    return rep;
}

}  // namespace treelab
