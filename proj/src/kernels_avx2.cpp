// Compiled with -mavx2 -mfma; only reached after runtime CPU detection.

#include <immintrin.h>

#include <algorithm>
#include <vector>

#include "silt/kernels.hpp"

namespace silt::kernels::avx2 {

namespace {

// exp(x) for x <= 0. Cody-Waite reduction x = k ln2 + r, |r| <= ln2/2, then a
// degree-13 Taylor polynomial (truncation < 1e-17 relative). Inputs below
// -708 flush to zero; the callers only need the sum of many such terms.
inline __m256d exp_nonpos(__m256d x)
{
    const __m256d lo = _mm256_set1_pd(-708.0);
    const __m256d under = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
    x = _mm256_max_pd(x, lo);
    const __m256d k =
        _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634)), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(k, _mm256_set1_pd(6.93147180369123816490e-01), x);
    r = _mm256_fnmadd_pd(k, _mm256_set1_pd(1.90821492927058770002e-10), r);

    static constexpr double c[] = {1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0,
                                   1.0 / 362880.0,     1.0 / 40320.0,     1.0 / 5040.0,     1.0 / 720.0,
                                   1.0 / 120.0,        1.0 / 24.0,        1.0 / 6.0,        0.5,
                                   1.0,                1.0};
    __m256d p = _mm256_set1_pd(c[0]);
    for (int i = 1; i < 14; ++i) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(c[i]));

    const __m128i k32 = _mm256_cvtpd_epi32(k);
    __m256i bits = _mm256_cvtepi32_epi64(k32);
    bits = _mm256_slli_epi64(_mm256_add_epi64(bits, _mm256_set1_epi64x(1023)), 52);
    const __m256d res = _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
    return _mm256_andnot_pd(under, res);
}

inline double hsum(__m256d v)
{
    const __m128d lo = _mm256_castpd256_pd128(v), hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Lane mask for the final partial block of `remaining` (< 4) lanes.
inline __m256i tail_mask(std::int64_t remaining)
{
    return _mm256_setr_epi64x(remaining > 0 ? -1 : 0, remaining > 1 ? -1 : 0, remaining > 2 ? -1 : 0, 0);
}

}  // namespace

void heat_pair_sums(const PathSoA& p, std::span<const double> w, std::span<const double> inv2eps,
                    std::span<double> out)
{
    constexpr std::size_t kChunk = 8;  // eps values per sweep (register budget)
    for (std::size_t e0 = 0; e0 < inv2eps.size(); e0 += kChunk) {
        const std::size_t ne = std::min(kChunk, inv2eps.size() - e0);
        double total[kChunk] = {};
        __m256d acc[kChunk];
        for (std::int64_t i = 0; i + 1 < p.np; ++i) {
            for (std::size_t e = 0; e < ne; ++e) acc[e] = _mm256_setzero_pd();
            for (std::int64_t j = i + 1; j < p.np; j += 4) {
                const std::int64_t left = p.np - j;
                const bool full = left >= 4;
                const __m256i mask = full ? _mm256_set1_epi64x(-1) : tail_mask(left);
                __m256d r2 = _mm256_setzero_pd();
                for (int c = 0; c < p.d; ++c) {
                    const double* xc = p.x.data() + c * p.np;
                    const __m256d xj = full ? _mm256_loadu_pd(xc + j) : _mm256_maskload_pd(xc + j, mask);
                    const __m256d dx = _mm256_sub_pd(xj, _mm256_set1_pd(xc[i]));
                    r2 = _mm256_fmadd_pd(dx, dx, r2);
                }
                const __m256d wj = full ? _mm256_loadu_pd(w.data() + j) : _mm256_maskload_pd(w.data() + j, mask);
                for (std::size_t e = 0; e < ne; ++e) {
                    const __m256d ex = exp_nonpos(_mm256_mul_pd(r2, _mm256_set1_pd(-inv2eps[e0 + e])));
                    acc[e] = _mm256_fmadd_pd(wj, ex, acc[e]);
                }
            }
            for (std::size_t e = 0; e < ne; ++e) total[e] += w[i] * hsum(acc[e]);
        }
        for (std::size_t e = 0; e < ne; ++e) out[e0 + e] = total[e];
    }
}

void chaos_pair_sums(const PathSoA& p, std::span<const double> w, std::span<const double> lambda,
                     std::span<const double> coef, int M, std::span<double> out)
{
    double inv_norm[kMaxChaosOrder + 1];
    inv_norm[0] = 1.0;
    for (int j = 1; j <= M; ++j) inv_norm[j] = inv_norm[j - 1] / (2.0 * j);

    std::vector<double> total(M + 1, 0.0);
    __m256d acc[kMaxChaosOrder + 1], h[2 * kMaxChaosOrder + 1], g[kMaxChaosOrder + 1], poly[kMaxChaosOrder + 1],
        next[kMaxChaosOrder + 1];
    for (std::int64_t i = 0; i + 1 < p.np; ++i) {
        for (int m = 0; m <= M; ++m) acc[m] = _mm256_setzero_pd();
        for (std::int64_t j = i + 1; j < p.np; j += 4) {
            const std::int64_t left = p.np - j, L = j - i;
            const bool full = left >= 4;
            const __m256i mask = full ? _mm256_set1_epi64x(-1) : tail_mask(left);
            auto load = [&](const double* ptr) { return full ? _mm256_loadu_pd(ptr) : _mm256_maskload_pd(ptr, mask); };
            const __m256d lam = load(lambda.data() + L);
            poly[0] = _mm256_set1_pd(1.0);
            for (int m = 1; m <= M; ++m) poly[m] = _mm256_setzero_pd();
            for (int c = 0; c < p.d; ++c) {
                const double* xc = p.x.data() + c * p.np;
                const __m256d x = _mm256_sub_pd(load(xc + j), _mm256_set1_pd(xc[i]));
                h[0] = _mm256_set1_pd(1.0);
                if (M > 0) h[1] = x;
                for (int n = 1; n < 2 * M; ++n)
                    h[n + 1] = _mm256_fnmadd_pd(_mm256_mul_pd(_mm256_set1_pd(n), lam), h[n - 1], _mm256_mul_pd(x, h[n]));
                for (int q = 0; q <= M; ++q) g[q] = _mm256_mul_pd(h[2 * q], _mm256_set1_pd(inv_norm[q]));
                for (int m = 0; m <= M; ++m) {
                    __m256d s = _mm256_setzero_pd();
                    for (int q = 0; q <= m; ++q) s = _mm256_fmadd_pd(poly[m - q], g[q], s);
                    next[m] = s;
                }
                for (int m = 0; m <= M; ++m) poly[m] = next[m];
            }
            const __m256d wj = load(w.data() + j);
            for (int m = 0; m <= M; ++m) {
                const __m256d cm = load(coef.data() + m * p.np + L);
                __m256d term = _mm256_mul_pd(cm, poly[m]);
                if (m % 2) term = _mm256_sub_pd(_mm256_setzero_pd(), term);
                acc[m] = _mm256_fmadd_pd(wj, term, acc[m]);
            }
        }
        for (int m = 0; m <= M; ++m) total[m] += w[i] * hsum(acc[m]);
    }
    std::copy(total.begin(), total.end(), out.begin());
}

}  // namespace silt::kernels::avx2
