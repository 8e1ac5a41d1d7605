#pragma once

// Wiener-chaos combinatorics, pathwise chaos projections of the discrete
// I_eps, and the exact chaos variances.

#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "silt/fbm.hpp"
#include "silt/quadrature.hpp"

namespace silt::chaos {

using BigInt = boost::multiprecision::cpp_int;

inline constexpr int kMaxAlphaOrder = 60;

/// Probabilists' Hermite polynomial He_n(x): He_{n+1} = x He_n - n He_{n-1}.
double hermite(int n, double x);

/// prod_k (2 m_k)! / (m_k! 2^{m_k}) = E[prod_k X_k^{2 m_k}] for iid N(0,1).
double alpha_multi(std::span<const int> counts);

/// alpha_m = sum_{m_1+...+m_d = m} prod_k (2 m_k)! / (m_k!)^2, exactly.
/// Equals the x^m coefficient of (1 - 4x)^{-d/2}. Requires m <= 60.
BigInt alpha_m_exact(int d, int m);
double alpha_m(int d, int m);

/// Pathwise projections of the discrete estimator onto chaoses 0, 2, ..., 2M:
/// out[m] for m = 0..M. out[0] is discrete_mean_ie; the sum over all m is
/// estimate_ie on the same path.
std::vector<double> project_chaos_all(const FbmPath& path, double eps, int M, bool allow_under_resolved = false);
double project_chaos(const FbmPath& path, double eps, int m, bool allow_under_resolved = false);

/// Per-lag tables for the pair kernel; see kernels::chaos_pair_sums.
struct ChaosTables {
    std::vector<double> lambda;
    std::vector<double> coef;
    double diag0 = 0;  // diagonal cells, chaos 0 only
};
ChaosTables chaos_tables(const GridSpec& grid, double H, double eps, int M);

/// E[(I_{2m})^2] = alpha_m / ((2 pi)^d 4^m) int (eps+lambda)^{-d/2-m} (eps+rho)^{-d/2-m} mu^{2m}
/// over the pair domain; m = 0 gives E[I_eps]^2.
quad::QuadResult chaos_variance(double H, int d, double eps, int m, double T, double rel_tol = 1e-6);

/// E[I_eps^2] = (2 pi)^{-d} int ((lambda+eps)(rho+eps) - mu^2)^{-d/2}.
quad::QuadResult second_moment_ie(double H, int d, double eps, double T, double rel_tol = 1e-6);

/// Var(I_eps) = (2 pi)^{-d} int [((lambda+eps)(rho+eps) - mu^2)^{-d/2} - ((lambda+eps)(rho+eps))^{-d/2}],
/// evaluated without the cancellation of E[I^2] - E[I]^2.
quad::QuadResult variance_ie(double H, int d, double eps, double T, double rel_tol = 1e-6);

/// Cov(I_eps, I_eta): the variance integrand with lambda + eps on one interval
/// and rho + eta on the other, symmetrised over the two assignments.
quad::QuadResult covariance_ie(double H, int d, double eps, double eta, double T, double rel_tol = 1e-6);

}  // namespace silt::chaos
