#pragma once

// Integrals in region coordinates (a, b, c). On the bounded pair domain points
// are written (a, b, c) = s * (alpha, beta, 1 - alpha - beta): a radial
// integral over s (Jacobian s^2) and an integral over the unit 2-simplex,
// whose vertex/edge singularities the Duffy split absorbs. The orthant uses
// a per-axis semi-infinite product rule.

#include <functional>

#include "silt/geometry.hpp"
#include "silt/quadrature.hpp"

namespace silt::regions {

/// Sum over the three regions of the integrand at (a, b, c).
using RegionSum = std::function<double(double a, double b, double c)>;

/// 2 * int_{a,b,c > 0, a+b+c < T} (T - a - b - c) f(a, b, c) da db dc.
quad::QuadResult pair_domain(double T, const RegionSum& f, const quad::QuadSpec& spec);

/// int_{R_+^3} f(a, b, c) da db dc.
quad::QuadResult orthant(const RegionSum& f, const quad::QuadSpec& spec);

/// int_{0 < alpha + beta < 1} f(alpha, beta, 1 - alpha - beta) d alpha d beta.
quad::QuadResult simplex(const RegionSum& f, const quad::QuadSpec& spec);

}  // namespace silt::regions
