#pragma once

#include <utility>

namespace silt::geometry {

/// |x|^{2H}, evaluated as exp(2H ln|x|) with 0 -> 0.
double pow2h(double x, double H);

/// Two time intervals (s,t) and (s',t') with s < t and s' < t'.
struct Tau {
    double s, t, sp, tp;
};

/// Variances of the two increments and their covariance (one fBm component).
struct GeomValues {
    double lambda;
    double rho;
    double mu;
};

/// Interleaving pattern of two intervals with s < s':
///   1: s < s' < t < t'  (a, b, c) = (s'-s, t-s', t'-t)
///   2: s < s' < t' < t  (a, b, c) = (s'-s, t'-s', t-t')
///      here lambda is the variance of the inner interval (s',t')
///   3: s < t < s' < t'  (a, b, c) = (t-s, s'-t, t'-s')
struct RegionCoords {
    int region;
    double a, b, c;
};

GeomValues lambda_rho_mu(double H, const Tau& tau);

/// Requires tau.s < tau.sp (callers swap the intervals otherwise). Ties
/// between patterns go to the lower region index.
RegionCoords region_decompose(const Tau& tau);

GeomValues region_lrm(double H, const RegionCoords& rc);

struct DeltaTheta {
    double delta;
    double theta;
};

/// (delta, Theta) = (lambda rho - mu^2, delta^{-d/2} - (lambda rho)^{-d/2});
/// the hatted variant replaces lambda, rho by lambda + 1, rho + 1.
/// Throws InvalidArgument when delta <= 0 (degenerate configuration).
DeltaTheta delta_theta(double H, int d, const RegionCoords& rc, bool hatted);

/// Theta from (lambda, rho, mu) in the cancellation-free form
/// (lambda rho)^{-d/2} expm1(-(d/2) log1p(-gamma)), gamma = mu^2/(lambda rho).
/// Returns +inf when gamma >= 1 in floating point.
double theta_from(double lambda, double rho, double mu, int d);

/// (lambda, rho, mu) together with 1 - gamma = delta / (lambda rho) at full
/// relative precision, including the corner a, c -> 0 of regions 1 and 2
/// where the two intervals coincide and delta cancels to leading order.
struct StableGeom {
    double lambda;
    double rho;
    double mu;
    double gamma;  // mu^2 / (lambda rho)
    double one_minus_gamma;
};

StableGeom stable_lrm(double H, const RegionCoords& rc);

/// Theta_i from stable_lrm: (lambda rho)^{-d/2} expm1(-(d/2) log(1 - gamma)).
/// +inf when 1 - gamma underflows to 0.
double theta_stable(double H, int d, const RegionCoords& rc);

/// Theta with lambda, rho shifted by s > 0 (s = 1 gives Theta-hat, s = eps the
/// smoothed kernel): delta_s = s^2 + s (lambda + rho) + lambda rho (1 - gamma),
/// so far-field corners, where mu^2 ~ lambda rho, keep full precision.
double theta_shifted(double H, int d, const RegionCoords& rc, double shift);
/// Unequal shifts: lambda + shift_l, rho + shift_r.
double theta_shifted(double H, int d, const RegionCoords& rc, double shift_l, double shift_r);

/// Region coordinates of the interval pair [0, x], [z, z + y] (x, y > 0, z >= 0).
RegionCoords interval_pair_coords(double x, double y, double z);

/// K1(x,y,z) = |z+y|^{2H} + |z-x|^{2H} - |z+y-x|^{2H} - z^{2H}.
double k1(double H, double x, double y, double z);
/// K2(x,z) = K1(x,x,z).
double k2(double H, double x, double z);

/// Psi_m = sum_i [(1+lambda_i)(1+rho_i)]^{-d/2-m} mu_i^{2m}.
double psi_m(double H, int d, int m, double a, double b, double c);

}  // namespace silt::geometry
