#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace treelab {

// 16-point Gauss-Legendre rule on [-1, 1].
inline constexpr std::array<double, 16> kGL16Nodes = {
    -0.9894009349916499, -0.9445750230732326, -0.8656312023878318, -0.7554044083550030,
    -0.6178762444026438, -0.4580167776572274, -0.2816035507792589, -0.0950125098376374,
    0.0950125098376374,  0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
    0.7554044083550030,  0.8656312023878318,  0.9445750230732326,  0.9894009349916499};
inline constexpr std::array<double, 16> kGL16Weights = {
    0.0271524594117541, 0.0622535239386479, 0.0951585116824928, 0.1246289712555339,
    0.1495959888165767, 0.1691565193950025, 0.1826034150449236, 0.1894506104550685,
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

// Integrates f over [a, b] with the 16-point rule.
template <typename F>
double gauss16(F&& f, double a, double b) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < kGL16Nodes.size(); ++i)
        s += kGL16Weights[i] * f(mid + half * kGL16Nodes[i]);
    return s * half;
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// Two-regressor least squares y ~ b0 + b1*x1 + b2*x2, with R^2.
struct PlaneFit {
    double b0 = 0.0, b1 = 0.0, b2 = 0.0;
    double r2 = 0.0;
};
PlaneFit plane_fit(const std::vector<double>& x1, const std::vector<double>& x2,
                   const std::vector<double>& y);

// General least squares y ~ sum_k coeff[k] * cols[k], with R^2 about the mean.
// An all-ones column must be supplied explicitly when an intercept is wanted.
struct LeastSquaresFit {
    std::vector<double> coeff;
    double r2 = 0.0;
};
LeastSquaresFit least_squares(const std::vector<std::vector<double>>& cols,
                              const std::vector<double>& y);

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d4a2f49b54cd25ULL;
    return z ^ (z >> 31);
}

// Derives a stream seed from (seed, index) so parallel ensembles are
// order-independent.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index * 0x9e3779b97f4a7c15ULL + 1));
}

void set_thread_count(int n);
int thread_count();

// Runs f(i) for i in [0, n) across the configured number of threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f);

}  // namespace treelab
