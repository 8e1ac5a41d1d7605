#include "silt/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <vector>

#include "silt/error.hpp"
#include "silt/parallel.hpp"

namespace silt::quad {

QuadResult& QuadResult::operator+=(const QuadResult& o)
{
    value += o.value;
    err_estimate += o.err_estimate;
    evals += o.evals;
    converged = converged && o.converged;
    return *this;
}

namespace {

// Gauss-Kronrod 7/15 (QUADPACK qk15). Kronrod abscissae, positive half.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for abscissae kXgk[1], kXgk[3], kXgk[5] and the centre.
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// tanh-sinh parameter range; at |t| = 5.5 the distance to an end is ~1e-167.
constexpr double kDeTMax = 5.5;
constexpr int kDeStartPanels = 4;
constexpr double kDeTailStart = 3.0;
constexpr int kMaxDepth = 50;

struct Segment {
    double lo;
    double hi;
    bool at_axis_lo;
    bool at_axis_hi;
};

struct Panel {
    double a;
    double b;
    int segment;
    int depth;
    std::int64_t index;
    double value;
    double err;
};

struct WorstFirst {
    bool operator()(const Panel& x, const Panel& y) const
    {
        if (x.err != y.err) return x.err < y.err;
        return x.index > y.index;  // ties: lowest panel index first
    }
};

class Adaptive {
public:
    Adaptive(const PointIntegrand& f, Interval domain, const QuadSpec& spec, std::span<const double> breakpoints)
        : f_(f), spec_(spec), lo_(domain.lo), hi_(domain.hi), semi_infinite_(std::isinf(domain.hi))
    {
        if (!(domain.hi > domain.lo) || std::isinf(domain.lo))
            throw InvalidArgument("integration interval must satisfy finite lo < hi");
        if (!(spec.rel_tol > 0.0) || !(spec.abs_tol > 0.0) || spec.max_evals <= 0)
            throw InvalidArgument("quadrature tolerances and evaluation budget must be positive");

        // Working variable: x itself, or u in (0,1) with x = lo + u/(1-u).
        const double ulo = semi_infinite_ ? 0.0 : lo_;
        const double uhi = semi_infinite_ ? 1.0 : hi_;
        std::vector<double> cuts{ulo, uhi};
        for (double b : breakpoints) {
            if (!(b > lo_ && b < hi_)) continue;
            cuts.push_back(semi_infinite_ ? (b - lo_) / (1.0 + (b - lo_)) : b);
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
            segments_.push_back({cuts[i], cuts[i + 1], i == 0, i + 2 == cuts.size()});
    }

    QuadResult run()
    {
        std::priority_queue<Panel, std::vector<Panel>, WorstFirst> queue;
        for (int s = 0; s < static_cast<int>(segments_.size()); ++s) {
            if (spec_.singular_ends) {
                for (int i = 0; i < kDeStartPanels; ++i) {
                    const double a = -kDeTMax + 2.0 * kDeTMax * i / kDeStartPanels;
                    const double b = -kDeTMax + 2.0 * kDeTMax * (i + 1) / kDeStartPanels;
                    push(queue, evaluate(a, b, s, 0));
                }
            } else {
                push(queue, evaluate(segments_[s].lo, segments_[s].hi, s, 0));
            }
        }

        while (!queue.empty()) {
            if (running_err_ <= tolerance(running_value_)) break;
            if (evals_ >= spec_.max_evals) break;
            const Panel worst = queue.top();
            queue.pop();
            running_value_ -= worst.value;
            running_err_ -= worst.err;
            const double mid = 0.5 * (worst.a + worst.b);
            if (worst.depth >= kMaxDepth || !(mid > worst.a && mid < worst.b)) {
                // Cannot be refined further; its error stays in the final estimate.
                finished_.push_back(worst);
                continue;
            }
            push(queue, evaluate(worst.a, mid, worst.segment, worst.depth + 1));
            push(queue, evaluate(mid, worst.b, worst.segment, worst.depth + 1));
        }
        for (; !queue.empty(); queue.pop()) finished_.push_back(queue.top());

        std::sort(finished_.begin(), finished_.end(),
                  [](const Panel& x, const Panel& y) { return x.index < y.index; });
        QuadResult r;
        double carry = 0.0;
        for (const auto& p : finished_) {
            const double t = r.value + p.value;
            carry += std::fabs(r.value) >= std::fabs(p.value) ? (r.value - t) + p.value : (p.value - t) + r.value;
            r.value = t;
            r.err_estimate += p.err;
        }
        r.value += carry;
        r.evals = evals_;
        r.converged = inner_converged_ && r.err_estimate <= tolerance(r.value);
        return r;
    }

private:
    double tolerance(double value) const { return std::max(spec_.abs_tol, spec_.rel_tol * std::fabs(value)); }

    template <class Queue>
    void push(Queue& q, const Panel& p)
    {
        running_value_ += p.value;
        running_err_ += p.err;
        q.push(p);
    }

    // Segment coordinate t -> user point; false when the point collapses onto
    // an end in floating point (its weight is negligible there).
    bool map_point(const Segment& seg, double t, Point& p, double& jac) const
    {
        double from_lo, to_hi;
        if (spec_.singular_ends) {
            const double half = 0.5 * (seg.hi - seg.lo);
            const double s = 0.5 * std::numbers::pi * std::sinh(t);
            const double e = std::exp(-2.0 * std::fabs(s));
            const double near = half * 2.0 * e / (1.0 + e);
            const double far = half * 2.0 / (1.0 + e);
            from_lo = s < 0 ? near : far;
            to_hi = s < 0 ? far : near;
            jac = half * 0.5 * std::numbers::pi * std::cosh(t) * 4.0 * e / ((1.0 + e) * (1.0 + e));
        } else {
            from_lo = t - seg.lo;
            to_hi = seg.hi - t;
            jac = 1.0;
        }
        if (!(from_lo > 0.0) || !(to_hi > 0.0) || !(jac > 0.0) || !std::isfinite(jac)) return false;
        const double u = from_lo <= to_hi ? seg.lo + from_lo : seg.hi - to_hi;

        // Distances to the axis ends, exact when this segment touches them.
        const double ufrom = seg.at_axis_lo && from_lo <= to_hi ? from_lo : u - (semi_infinite_ ? 0.0 : lo_);
        const double uto = seg.at_axis_hi && to_hi < from_lo ? to_hi : (semi_infinite_ ? 1.0 : hi_) - u;
        if (!semi_infinite_) {
            p = {u, ufrom, uto};
            return ufrom > 0.0 && uto > 0.0;
        }
        if (!(uto > 0.0)) return false;
        const double dist = ufrom / uto;
        jac /= uto * uto;
        if (!std::isfinite(dist) || !std::isfinite(jac)) return false;
        p = {lo_ + dist, dist, kInf};
        return true;
    }

    Panel evaluate(double a, double b, int segment, int depth)
    {
        const double centre = 0.5 * (a + b);
        const double half = 0.5 * (b - a);
        double propagated = 0.0;
        auto eval = [&](double t, double w) {
            Point p;
            double jac;
            if (!map_point(segments_[segment], t, p, jac)) return 0.0;
            const Estimate e = f_(p);
            evals_ += e.evals;
            // Deep in the tanh-sinh tail (weight below ~1e-13 of the panel)
            // coordinates underflow onto an integrable singular end. Failures
            // there are dropped; anywhere else they void convergence.
            const bool tail = spec_.singular_ends && std::fabs(t) > kDeTailStart;
            if (!tail) inner_converged_ = inner_converged_ && e.converged;
            if (!std::isfinite(e.value)) {
                if (!tail) inner_converged_ = false;
                return 0.0;
            }
            propagated += w * half * jac * e.err;
            return e.value * jac;
        };
        double fv[15];
        fv[7] = eval(centre, kWgk[7]);
        for (int j = 0; j < 7; ++j) {
            const double dx = half * kXgk[j];
            fv[j] = eval(centre - dx, kWgk[j]);
            fv[14 - j] = eval(centre + dx, kWgk[j]);
        }
        double resk = kWgk[7] * fv[7];
        double resg = kWg[3] * fv[7];
        double resabs = std::fabs(resk);
        for (int j = 0; j < 7; ++j) {
            resk += kWgk[j] * (fv[j] + fv[14 - j]);
            resabs += kWgk[j] * (std::fabs(fv[j]) + std::fabs(fv[14 - j]));
            if (j % 2 == 1) resg += kWg[j / 2] * (fv[j] + fv[14 - j]);
        }
        const double reskh = 0.5 * resk;
        double resasc = kWgk[7] * std::fabs(fv[7] - reskh);
        for (int j = 0; j < 7; ++j) resasc += kWgk[j] * (std::fabs(fv[j] - reskh) + std::fabs(fv[14 - j] - reskh));
        resk *= half;
        resg *= half;
        resabs *= half;
        resasc *= half;
        double err = std::fabs(resk - resg);
        if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
        constexpr double eps = std::numeric_limits<double>::epsilon();
        if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
        return {a, b, segment, depth, next_index_++, resk, err + propagated};
    }

    const PointIntegrand& f_;
    QuadSpec spec_;
    double lo_;
    double hi_;
    bool semi_infinite_;
    std::vector<Segment> segments_;
    std::vector<Panel> finished_;
    std::int64_t next_index_ = 0;
    std::int64_t evals_ = 0;
    bool inner_converged_ = true;
    double running_value_ = 0.0;
    double running_err_ = 0.0;
};

}  // namespace

QuadSpec inner_spec(const QuadSpec& outer)
{
    QuadSpec s = outer;
    s.rel_tol = outer.rel_tol * 0.1;
    s.max_evals = std::max<std::int64_t>(1000, std::min<std::int64_t>(outer.max_evals / 50, 2'000'000));
    return s;
}

namespace {

struct IteratedState {
    int k;
    const PointIntegrandN& f;
    const LimitFn& limits;
    std::array<Point, 3> points{};
    std::array<QuadSpec, 3> specs{};
};

QuadResult integrate_level(IteratedState& st, int level)
{
    const Interval iv = st.limits(level, std::span<const Point>(st.points.data(), level));
    if (!(iv.hi > iv.lo)) return {0.0, 0.0, 0, true};
    PointIntegrand g = [&st, level](const Point& p) -> Estimate {
        st.points[level] = p;
        if (level + 1 == st.k) return {st.f(std::span<const Point>(st.points.data(), st.k)), 0.0, 1, true};
        const QuadResult inner = integrate_level(st, level + 1);
        return {inner.value, inner.err_estimate, inner.evals, inner.converged};
    };
    return Adaptive(g, iv, st.specs[level], {}).run();
}

}  // namespace

QuadResult integrate_1d(const PointIntegrand& f, Interval domain, const QuadSpec& spec,
                        std::span<const double> breakpoints)
{
    return Adaptive(f, domain, spec, breakpoints).run();
}

QuadResult integrate_1d(const Integrand1& f, Interval domain, const QuadSpec& spec,
                        std::span<const double> breakpoints)
{
    // Points that round onto an end carry negligible weight; skip them so a
    // singular end is never evaluated.
    PointIntegrand g = [&f, domain](const Point& p) {
        if (!(p.x > domain.lo) || !(p.x < domain.hi)) return Estimate{0.0, 0.0, 1, true};
        return Estimate{f(p.x), 0.0, 1, true};
    };
    return Adaptive(g, domain, spec, breakpoints).run();
}

QuadResult integrate_iterated(int k, const PointIntegrandN& f, const LimitFn& limits, const QuadSpec& spec)
{
    if (k < 1 || k > 3) throw InvalidArgument("iterated integration supports 1 to 3 axes");
    IteratedState st{k, f, limits};
    st.specs[0] = spec;
    for (int j = 1; j < k; ++j) st.specs[j] = inner_spec(st.specs[j - 1]);
    return integrate_level(st, 0);
}

QuadResult integrate_box(const std::function<double(std::span<const double>)>& f,
                         std::span<const Interval> axes, const QuadSpec& spec)
{
    const int k = static_cast<int>(axes.size());
    if (k != 2 && k != 3) throw InvalidArgument("integrate_box supports k = 2 or 3");
    std::vector<Interval> ax(axes.begin(), axes.end());
    LimitFn limits = [&ax](int axis, std::span<const Point>) { return ax[axis]; };
    PointIntegrandN g = [&f, k](std::span<const Point> p) {
        std::array<double, 3> x{};
        for (int j = 0; j < k; ++j) x[j] = p[j].x;
        return f(std::span<const double>(x.data(), k));
    };
    return integrate_iterated(k, g, limits, spec);
}

namespace {

constexpr double kThird = 1.0 / 3.0;
constexpr std::array<Barycentric, 3> kVertex = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
constexpr Barycentric kCentroid = {kThird, kThird, kThird};

Barycentric midpoint(int i, int j)
{
    Barycentric m{};
    for (int c = 0; c < 3; ++c) m[c] = 0.5 * (kVertex[i][c] + kVertex[j][c]);
    return m;
}

}  // namespace

Barycentric duffy_point(int tri, const Point& u, const Point& v, double& jacobian)
{
    // Triangle (V, P, Q): V an original vertex, P/Q an adjacent edge midpoint
    // and the centroid. Point = (1-u) V + u (1-v) P + u v Q; each triangle has
    // area 1/12 and Duffy Jacobian 2 * area * u.
    const int i = tri / 2;
    const bool second = tri % 2 == 1;
    const Barycentric m = midpoint(i, second ? (i + 2) % 3 : (i + 1) % 3);
    const Barycentric& p = second ? kCentroid : m;
    const Barycentric& q = second ? m : kCentroid;
    Barycentric b{};
    for (int c = 0; c < 3; ++c) b[c] = u.to_hi * kVertex[i][c] + u.x * v.to_hi * p[c] + u.x * v.from_lo * q[c];
    jacobian = u.x / 6.0;
    return b;
}

QuadResult integrate_simplex2(const std::function<double(const Barycentric&)>& f, const QuadSpec& spec)
{
    QuadResult total{0.0, 0.0, 0, true};
    QuadSpec per = spec;
    per.abs_tol = spec.abs_tol / kDuffyTriangles;
    per.max_evals = std::max<std::int64_t>(1, spec.max_evals / kDuffyTriangles);
    for (int tri = 0; tri < kDuffyTriangles; ++tri) {
        LimitFn limits = [](int, std::span<const Point>) { return Interval{0.0, 1.0}; };
        PointIntegrandN g = [&](std::span<const Point> pt) {
            double jac;
            const Barycentric b = duffy_point(tri, pt[0], pt[1], jac);
            return f(b) * jac;
        };
        total += integrate_iterated(2, g, limits, per);
    }
    total.converged = total.converged && total.err_estimate <= std::max(spec.abs_tol, spec.rel_tol * std::fabs(total.value));
    return total;
}

namespace {

// Finite axes: distance to either end ~1e-100 at |t| = 5. Semi-infinite
// axes span exp(+-pi/2 sinh 5) ~ 1e+-50.
constexpr double kProductTMax = 5.0;
constexpr int kProductMaxLevel = 7;
constexpr std::int64_t kProductChunk = 4096;

struct DeNode {
    Point p;
    double w;     // dx/dt (the step h is applied per level)
    bool coarse;  // present at the previous level
    bool tail;
};

std::vector<DeNode> de_nodes(bool semi_infinite, int level)
{
    const double h = std::ldexp(1.0, -level);
    const int K = static_cast<int>(kProductTMax / h);
    std::vector<DeNode> nodes;
    for (int k = -K; k <= K; ++k) {
        const double t = k * h;
        const double s = 0.5 * std::numbers::pi * std::sinh(t);
        const double ds = 0.5 * std::numbers::pi * std::cosh(t);
        DeNode n{};
        if (semi_infinite) {
            const double x = std::exp(s);
            n.p = {x, x, kInf};
            n.w = x * ds;
        } else {
            const double e = std::exp(-2.0 * std::fabs(s));
            const double near = e / (1.0 + e), far = 1.0 / (1.0 + e);
            const double lo = s < 0 ? near : far, hi = s < 0 ? far : near;
            n.p = {lo <= hi ? lo : 1.0 - hi, lo, hi};
            n.w = ds * 4.0 * e / ((1.0 + e) * (1.0 + e)) * 0.5;
        }
        if (!(n.p.from_lo > 0.0) || !(n.p.to_hi > 0.0) || !(n.w > 0.0) || !std::isfinite(n.w) ||
            !std::isfinite(n.p.x))
            continue;
        n.coarse = level > 1 && k % 2 == 0;
        n.tail = std::fabs(t) > kDeTailStart;
        nodes.push_back(n);
    }
    return nodes;
}

}  // namespace

QuadResult integrate_product_de(int k, const PointIntegrandN& f, std::span<const bool> semi_infinite,
                                const QuadSpec& spec)
{
    if (k < 1 || k > 3 || semi_infinite.size() != static_cast<std::size_t>(k))
        throw InvalidArgument("product rule supports 1 to 3 axes, one flag per axis");
    if (!(spec.rel_tol > 0.0) || !(spec.abs_tol > 0.0) || spec.max_evals <= 0)
        throw InvalidArgument("quadrature tolerances and evaluation budget must be positive");

    double sum = 0.0, carry = 0.0;  // unscaled weighted sum over all levels so far
    double previous = 0.0;
    QuadResult r;
    bool interior_ok = true;
    for (int level = 1; level <= kProductMaxLevel; ++level) {
        std::array<std::vector<DeNode>, 3> axes;
        std::int64_t count = 1;
        for (int j = 0; j < k; ++j) {
            axes[j] = de_nodes(semi_infinite[j], level);
            count *= static_cast<std::int64_t>(axes[j].size());
        }
        if (level > 1 && r.evals + count > spec.max_evals) break;

        // Fixed chunks reduced by tree_sum: the association order depends on
        // count only, so the result is the same for any thread count.
        const std::int64_t chunks = (count + kProductChunk - 1) / kProductChunk;
        std::vector<double> part(chunks);
        std::vector<std::int64_t> part_evals(chunks);
        std::vector<char> part_bad(chunks);
        parallel_for(static_cast<std::size_t>(chunks), [&](std::size_t c) {
            std::array<std::size_t, 3> idx{};
            std::array<Point, 3> pts{};
            double s = 0.0, cs = 0.0;
            const std::int64_t lo = static_cast<std::int64_t>(c) * kProductChunk;
            const std::int64_t hi = std::min(count, lo + kProductChunk);
            for (std::int64_t n = lo; n < hi; ++n) {
                std::int64_t rem = n;
                bool all_coarse = true, tail = false;
                double w = 1.0;
                for (int j = k - 1; j >= 0; --j) {
                    idx[j] = static_cast<std::size_t>(rem % static_cast<std::int64_t>(axes[j].size()));
                    rem /= static_cast<std::int64_t>(axes[j].size());
                    const DeNode& node = axes[j][idx[j]];
                    pts[j] = node.p;
                    w *= node.w;
                    all_coarse = all_coarse && node.coarse;
                    tail = tail || node.tail;
                }
                if (all_coarse) continue;
                ++part_evals[c];
                const double v = f(std::span<const Point>(pts.data(), k)) * w;
                if (!std::isfinite(v)) {
                    if (!tail) part_bad[c] = 1;
                    continue;
                }
                const double t = s + v;
                cs += std::fabs(s) >= std::fabs(v) ? (s - t) + v : (v - t) + s;
                s = t;
            }
            part[c] = s + cs;
        });
        for (std::int64_t c = 0; c < chunks; ++c) {
            r.evals += part_evals[c];
            if (part_bad[c]) interior_ok = false;
        }
        const double v = tree_sum(part);
        const double t = sum + v;
        carry += std::fabs(sum) >= std::fabs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
        const double value = std::ldexp(sum + carry, -level * k);
        if (level > 1) {
            r.value = value;
            r.err_estimate = std::fabs(value - previous);
            if (r.err_estimate <= std::max(spec.abs_tol, spec.rel_tol * std::fabs(value))) {
                r.converged = interior_ok;
                return r;
            }
        }
        previous = value;
        r.value = value;
    }
    if (r.err_estimate == 0.0) r.err_estimate = std::fabs(r.value);
    r.converged = false;
    return r;
}

}  // namespace silt::quad
