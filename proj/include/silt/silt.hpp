#pragma once

// The heat-kernel approximation I_eps of the self-intersection local time:
// regime classification, exact means, renormalizers, CLT scalings and the
// pathwise discrete estimator.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "silt/fbm.hpp"
#include "silt/hurst.hpp"
#include "silt/kernels.hpp"
#include "silt/quadrature.hpp"

namespace silt {

enum class RegimeTag { L2Convergent, PowerRenorm, LogRenorm, CltPower, CltLog, Unsupported };

struct Regime {
    RegimeTag tag;
    Hurst H;
    int d;

    std::string_view name() const;
    /// Condition on (H, d) that defines this regime, e.g. "1/d < H < 3/(2d)".
    std::string_view condition() const;
    /// Human-readable CLT normalization r(eps); empty outside CLT regimes.
    std::string scaling() const;
    bool is_clt() const { return tag == RegimeTag::CltPower || tag == RegimeTag::CltLog; }
    bool is_l2() const
    {
        return tag == RegimeTag::L2Convergent || tag == RegimeTag::PowerRenorm || tag == RegimeTag::LogRenorm;
    }
};

std::string_view regime_name(RegimeTag tag);

/// Exact classification. Boundaries H = 1/d, 3/(2d), 3/4 are decided on the
/// rational form; a float H within 1e-12 of a boundary is rejected.
Regime classify(const Hurst& H, int d);

/// C_{H,d} = (2 pi)^{-d/2} int_0^inf (z^{2H} + 1)^{-d/2} dz, Hd > 1.
quad::QuadResult chd_quad(double H, int d);
double chd(double H, int d);

/// E[I_eps] = (2 pi)^{-d/2} int_0^T (T - s)(eps + s^{2H})^{-d/2} ds.
/// eps = 0 is accepted only when Hd < 1.
quad::QuadResult mean_ie_quad(double H, int d, double eps, double T);
double mean_ie(double H, int d, double eps, double T);

/// Quantity subtracted from I_eps in each regime: 0 (L2-Convergent),
/// T C_{H,d} eps^{1/(2H)-d/2} (PowerRenorm), T log(1/eps) / (2H (2 pi)^{d/2})
/// (LogRenorm), E[I_eps] (CLT regimes).
double renorm_subtractor(const Regime& r, double eps, double T);

/// CLT normalization: (log(1/eps))^{-1/2} (CLT-Log), eps^{d/2 - 3/(4H)} (CLT-Power).
double scaling_r(const Regime& r, double eps);

/// Trapezoid weights dt (1/2, 1, ..., 1, 1/2) on the n+1 grid points.
std::vector<double> trapezoid_weights(const GridSpec& grid);

/// Throws InvalidArgument when eps < dt^{2H} (kernel narrower than a grid step).
void check_eps_resolution(const GridSpec& grid, double H, double eps);

/// Triangle product trapezoid rule for I_eps on the path grid, diagonal cells
/// weighted by p_eps(0):
///   sum_{i<j} w_i w_j p_eps(B_j - B_i) + 1/2 sum_i w_i^2 p_eps(0).
double estimate_ie(const FbmPath& path, double eps, bool allow_under_resolved = false);
/// Same for several eps values on one path (one pair sweep).
std::vector<double> estimate_ie_ladder(const FbmPath& path, std::span<const double> eps,
                                       bool allow_under_resolved = false);

/// Exact expectation of estimate_ie under the fBm law: the same weights applied
/// to (2 pi (eps + (t_j - t_i)^{2H}))^{-d/2}. O(n) via lag multiplicities.
double discrete_mean_ie(const GridSpec& grid, double H, double eps);

/// sum_{i<j} w_i w_j over pairs at lag L (L >= 1), and 1/2 sum w_i^2 for L = 0.
double lag_weight(const GridSpec& grid, std::int64_t L);

/// Row-major path values -> component-major layout used by the pair kernels.
void to_soa(const FbmPath& path, std::vector<double>& out);
void to_soa(std::span<const double> rowmajor, std::int64_t np, int d, std::vector<double>& out);

/// estimate_ie on a component-major path; no resolution check.
void estimate_ie_soa(const kernels::PathSoA& path, double dt, std::span<const double> w,
                     std::span<const double> eps, std::span<double> out);

}  // namespace silt
