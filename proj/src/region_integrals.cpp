#include "silt/region_integrals.hpp"

#include <array>

namespace silt::regions {

namespace {

// sum over the Duffy triangles of f(s * e) * jacobian at square point (u, v).
double simplex_sum(const RegionSum& f, double s, const quad::Point& u, const quad::Point& v)
{
    double total = 0.0;
    for (int tri = 0; tri < quad::kDuffyTriangles; ++tri) {
        double jac;
        const auto e = quad::duffy_point(tri, u, v, jac);
        total += f(s * e[0], s * e[1], s * e[2]) * jac;
    }
    return total;
}

}  // namespace

quad::QuadResult pair_domain(double T, const RegionSum& f, const quad::QuadSpec& spec)
{
    // (a,b,c) = s e, da db dc = s^2 ds de; s = T x.
    quad::PointIntegrandN g = [&](std::span<const quad::Point> p) {
        const double s = T * p[0].x;
        return T * p[0].to_hi * s * s * T * simplex_sum(f, s, p[1], p[2]);
    };
    const std::array<bool, 3> semi{false, false, false};
    auto r = quad::integrate_product_de(3, g, semi, spec);
    r.value *= 2.0;
    r.err_estimate *= 2.0;
    return r;
}

quad::QuadResult orthant(const RegionSum& f, const quad::QuadSpec& spec)
{
    // Per-axis exp-sinh: far-field mass sits near the faces (one coordinate
    // large, the others O(1)), which a radial split would push into a
    // vanishing neighbourhood of a simplex vertex.
    quad::PointIntegrandN g = [&](std::span<const quad::Point> p) { return f(p[0].x, p[1].x, p[2].x); };
    const std::array<bool, 3> semi{true, true, true};
    return quad::integrate_product_de(3, g, semi, spec);
}

quad::QuadResult simplex(const RegionSum& f, const quad::QuadSpec& spec)
{
    quad::PointIntegrandN g = [&](std::span<const quad::Point> p) { return simplex_sum(f, 1.0, p[0], p[1]); };
    const std::array<bool, 2> semi{false, false};
    return quad::integrate_product_de(2, g, semi, spec);
}

}  // namespace silt::regions
