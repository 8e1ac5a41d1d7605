#pragma once

// Independent reference computations used only by tests: randomized
// quasi-Monte Carlo (Roberts' R_d additive recurrence with Cranley-Patterson
// shifts), brute-force enumeration helpers, and finite sums.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>

namespace silt::test {

struct McEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
};

/// Generalized golden ratio phi_d: the positive root of x^{d+1} = x + 1.
inline double phi_d(int d)
{
    double x = 2.0;
    for (int i = 0; i < 100; ++i) x = std::pow(1.0 + x, 1.0 / (d + 1));
    return x;
}

/// Randomized R_d estimate of the mean of f over [0,1)^D; `replicas`
/// independent shifts give the standard error.
template <int D, class F>
McEstimate rqmc_cube(F&& f, std::int64_t points, int replicas, std::uint64_t seed = 12345)
{
    std::array<double, D> alpha{};
    const double g = phi_d(D);
    for (int j = 0; j < D; ++j) alpha[j] = std::fmod(std::pow(1.0 / g, j + 1), 1.0);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const std::int64_t per = points / replicas;
    double sum = 0.0, sum2 = 0.0;
    for (int r = 0; r < replicas; ++r) {
        std::array<double, D> shift{};
        for (auto& s : shift) s = U(rng);
        double acc = 0.0;
        std::array<double, D> x{};
        for (std::int64_t n = 1; n <= per; ++n) {
            for (int j = 0; j < D; ++j) {
                double v = shift[j] + static_cast<double>(n) * alpha[j];
                x[j] = v - std::floor(v);
            }
            acc += f(x);
        }
        acc /= static_cast<double>(per);
        sum += acc;
        sum2 += acc * acc;
    }
    const double mean = sum / replicas;
    const double var = (sum2 / replicas - mean * mean) * replicas / (replicas - 1.0);
    return {mean, std::sqrt(std::max(var, 0.0) / replicas)};
}

/// Integral over the 2-simplex of f(alpha, beta, gamma) by folding the unit square.
template <class F>
McEstimate qmc_simplex2(F&& f, std::int64_t points, int replicas)
{
    auto est = rqmc_cube<2>(
        [&](const std::array<double, 2>& u) {
            double a = u[0], b = u[1];
            if (a + b > 1.0) {
                a = 1.0 - a;
                b = 1.0 - b;
            }
            const double c = 1.0 - a - b;
            if (!(a > 0.0 && b > 0.0 && c > 0.0)) return 0.0;
            return f(std::array<double, 3>{a, b, c});
        },
        points, replicas);
    est.mean *= 0.5;
    est.stderr_ *= 0.5;
    return est;
}

/// Integral over {a,b,c > 0, a+b+c < T} of f(a,b,c) via sorted-uniform map.
template <class F>
McEstimate qmc_simplex3(F&& f, double T, std::int64_t points, int replicas)
{
    auto est = rqmc_cube<3>(
        [&](const std::array<double, 3>& u) {
            std::array<double, 3> s = u;
            if (s[0] > s[1]) std::swap(s[0], s[1]);
            if (s[1] > s[2]) std::swap(s[1], s[2]);
            if (s[0] > s[1]) std::swap(s[0], s[1]);
            const double a = s[0] * T, b = (s[1] - s[0]) * T, c = (s[2] - s[1]) * T;
            if (!(a > 0.0 && b > 0.0 && c > 0.0)) return 0.0;
            return f(a, b, c);
        },
        points, replicas);
    const double vol = T * T * T / 6.0;
    est.mean *= vol;
    est.stderr_ *= vol;
    return est;
}

}  // namespace silt::test
