#include "treelab/util.hpp"

#include <atomic>
#include <cmath>

#include <Eigen/Dense>

namespace treelab {

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    LinearFit fit;
    if (n < 2) return fit;
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

PlaneFit plane_fit(const std::vector<double>& x1, const std::vector<double>& x2,
                   const std::vector<double>& y) {
    const std::size_t n = y.size();
    PlaneFit fit;
    if (n < 3) return fit;
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd Y(n);
    for (std::size_t i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = x1[i];
        X(i, 2) = x2[i];
        Y(i) = y[i];
    }
    Eigen::Vector3d b = (X.transpose() * X).ldlt().solve(X.transpose() * Y);
    fit.b0 = b(0);
    fit.b1 = b(1);
    fit.b2 = b(2);
    double my = Y.mean();
    const double ss_res = (Y - X * b).squaredNorm();
    const double ss_tot = (Y.array() - my).matrix().squaredNorm();
    fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

LeastSquaresFit least_squares(const std::vector<std::vector<double>>& cols,
                              const std::vector<double>& y) {
    const std::size_t n = y.size(), k = cols.size();
    LeastSquaresFit fit;
    if (k == 0 || n < k) return fit;
    Eigen::MatrixXd X(n, k);
    Eigen::VectorXd Y(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) X(i, j) = cols[j][i];
        Y(i) = y[i];
    }
    const Eigen::VectorXd b = X.colPivHouseholderQr().solve(Y);
    fit.coeff.assign(b.data(), b.data() + k);
    const double my = Y.mean();
    const double ss_res = (Y - X * b).squaredNorm();
    const double ss_tot = (Y.array() - my).matrix().squaredNorm();
    fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

namespace {
std::atomic<int> g_threads{0};
}

void set_thread_count(int n) { g_threads.store(n > 0 ? n : 0); }

int thread_count() {
    const int n = g_threads.load();
    if (n > 0) return n;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f) {
    const int nt = std::min<std::size_t>(thread_count(), n);
    if (nt <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (int t = 0; t < nt; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) f(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace treelab
