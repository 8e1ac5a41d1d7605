#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <utility>

namespace silt::quad {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Integration axis [lo, hi]; hi = kInf selects the semi-infinite map u/(1-u).
struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

struct QuadSpec {
    double rel_tol = 1e-8;
    double abs_tol = 1e-15;
    std::int64_t max_evals = 20'000'000;
    /// Panels touching an interval end (or a breakpoint) get the tanh-sinh
    /// substitution. Disable only for integrands known to be smooth.
    bool singular_ends = true;
};

struct QuadResult {
    double value = 0.0;
    double err_estimate = 0.0;
    std::int64_t evals = 0;
    bool converged = false;

    QuadResult& operator+=(const QuadResult& o);
};

/// Abscissa seen by the integrand. For finite axes x = lo + from_lo = hi - to_hi,
/// with both distances carried at full relative precision so integrands can
/// resolve singular behaviour at either end. For semi-infinite axes to_hi = kInf.
struct Point {
    double x;
    double from_lo;
    double to_hi;
};

/// Value with an attached absolute error bound (from an inner integration).
struct Estimate {
    double value = 0.0;
    double err = 0.0;
    std::int64_t evals = 1;
    bool converged = true;
};

using Integrand1 = std::function<double(double)>;
using PointIntegrand = std::function<Estimate(const Point&)>;

/// Adaptive 1-D integration. Interior breakpoints split the domain into
/// independent starting panels (e.g. at kinks of |x - x0|^{2H}).
QuadResult integrate_1d(const Integrand1& f, Interval domain, const QuadSpec& spec,
                        std::span<const double> breakpoints = {});

/// Point-level variant: the integrand sees both end distances and may return
/// a nested estimate whose error is propagated into the result.
QuadResult integrate_1d(const PointIntegrand& f, Interval domain, const QuadSpec& spec,
                        std::span<const double> breakpoints = {});

/// Spec for an integral nested inside an outer one: rel_tol / 10 and a
/// proportionally smaller evaluation budget.
QuadSpec inner_spec(const QuadSpec& outer);

/// Iterated integration over a k-dimensional region whose axis-j limits may
/// depend on the outer coordinates 0..j-1 (k <= 3). `limits(j, outer)`
/// returns the interval of axis j; `f(points)` sees all k abscissae.
using LimitFn = std::function<Interval(int axis, std::span<const Point> outer)>;
using PointIntegrandN = std::function<double(std::span<const Point>)>;

QuadResult integrate_iterated(int k, const PointIntegrandN& f, const LimitFn& limits, const QuadSpec& spec);

/// Box integration for k in {2,3}; semi-infinite axes mapped via u/(1-u).
QuadResult integrate_box(const std::function<double(std::span<const double>)>& f,
                         std::span<const Interval> axes, const QuadSpec& spec);

/// Point in the closed unit 2-simplex as barycentric coordinates
/// (alpha, beta, gamma = 1 - alpha - beta), each at full relative precision.
using Barycentric = std::array<double, 3>;

/// Integral over {alpha, beta > 0, alpha + beta < 1} (area 1/2). The simplex is
/// split into six Duffy triangles, each collapsed at one original vertex, so
/// vertex power singularities gain a linear Jacobian factor and edge
/// singularities sit on panel ends.
QuadResult integrate_simplex2(const std::function<double(const Barycentric&)>& f, const QuadSpec& spec);

/// Product tanh-sinh rule over k <= 3 axes, each [0,1] or [0,inf) (exp-sinh),
/// with the step halved until two successive levels agree to tolerance; the
/// reported error is that difference. Suited to integrands analytic inside
/// the box whose singularities all sit on faces, where the convergence is
/// exponential. Points from coarser levels are reused.
QuadResult integrate_product_de(int k, const PointIntegrandN& f, std::span<const bool> semi_infinite,
                                const QuadSpec& spec);

/// The six Duffy triangles of integrate_simplex2 as a map from the unit
/// square: returns the barycentric point and the Jacobian (area included)
/// for triangle `tri` in [0, 6).
inline constexpr int kDuffyTriangles = 6;
Barycentric duffy_point(int tri, const Point& u, const Point& v, double& jacobian);

}  // namespace silt::quad
