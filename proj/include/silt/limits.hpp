#pragma once

// Limit constants: Xi_T, per-chaos limit variances, and the CLT variances
// sigma^2 at H = 3/(2d) (log scaling) and 3/(2d) < H < 3/4 (power scaling).
// Limit variances are per unit horizon: the CLT limit is N(0, T sigma^2).

#include <ostream>
#include <string>
#include <vector>

#include "silt/hurst.hpp"
#include "silt/quadrature.hpp"

namespace silt::limits {

/// Xi_T = int [(lambda rho - mu^2)^{-d/2} - (lambda rho)^{-d/2}] over the pair
/// domain; finite iff Hd < 3/2 (DivergenceError otherwise).
quad::QuadResult xi_t(double H, int d, double T, double rel_tol = 1e-6);

/// Limit of Var(I_eps) in the L2 regimes: (2 pi)^{-d} Xi_T.
quad::QuadResult variance_limit(double H, int d, double T, double rel_tol = 1e-6);

/// Per-chaos limit variance for m >= 1, per unit T. CLT-Power:
/// lim eps^{d - 3/(2H)} E[I_2m^2] / T; CLT-Log: lim E[I_2m^2] / (T log(1/eps)).
quad::QuadResult chaos_limit_variance(const Hurst& H, int d, int m, double rel_tol = 1e-6);

/// sum_{m=1}^{M} chaos_limit_variance(H, d, m) as one quadrature of the summed
/// integrand (identical by linearity, one pass instead of M). M <= 60.
quad::QuadResult chaos_limit_partial_sum(const Hurst& H, int d, int M, double rel_tol = 1e-6);

/// sigma^2 for 3/(2d) < H < 3/4, d > 2, from the three region integrals of
/// Theta-hat over the orthant. H within 1e-6 of 3/(2d) is refused.
quad::QuadResult sigma2_power(const Hurst& H, int d, double rel_tol = 1e-5);

/// The same constant from the single integral over interval lengths x, y and
/// offset z, with K1 written out; an independent cross-check.
quad::QuadResult sigma2_power_direct(const Hurst& H, int d, double rel_tol = 1e-5);

/// sigma^2 at H = 3/(2d) exactly (rational H required), H < 3/4.
quad::QuadResult sigma2_log(const Hurst& H, int d, double rel_tol = 1e-6);

/// sigma2_power or sigma2_log by regime.
quad::QuadResult sigma2(const Hurst& H, int d, double rel_tol = 1e-5);

/// Result or NonConvergence.
double value_or_throw(const quad::QuadResult& r, const std::string& what);

struct ConstantRow {
    std::string H;
    int d = 0;
    std::string quantity;
    double value = 0.0;
    double err_estimate = 0.0;
    std::int64_t evals = 0;
};

/// CSV with header H,d,quantity,value,err_estimate,evals; 17 significant digits.
void write_constants_csv(std::ostream& os, const std::vector<ConstantRow>& rows);

}  // namespace silt::limits
