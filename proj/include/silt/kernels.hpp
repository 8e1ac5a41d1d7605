#pragma once

// O(n^2) pair-sum kernels over one sampled path. Scalar reference versions
// plus AVX2/FMA variants chosen at runtime; results agree to rounding
// (about 1e-13 relative), and each variant is deterministic on its own.
//
// Path layout is component-major: x[c * np + k] is component c at grid
// point k, np = n + 1 points.

#include <cstdint>
#include <span>
#include <string_view>

namespace silt::kernels {

enum class Isa { Scalar, Avx2 };

/// Highest usable ISA on this CPU (AVX2 needs FMA too).
Isa detect_isa();
/// ISA in use: detect_isa() unless SILT_KERNEL=scalar or force_isa() says otherwise.
Isa active_isa();
void force_isa(Isa isa);
std::string_view isa_name(Isa isa);

inline constexpr int kMaxChaosOrder = 10;

struct PathSoA {
    std::span<const double> x;
    std::int64_t np;
    int d;
};

/// out[e] = sum_{i<j} w_i w_j exp(-|B_j - B_i|^2 * inv2eps[e]).
void heat_pair_sums(const PathSoA& path, std::span<const double> w, std::span<const double> inv2eps,
                    std::span<double> out);

/// Per-lag tables for chaos projections: lambda[L] for L = 0..n and
/// coef[m * np + L] for m = 0..M. The kernel is
///   out[m] = sum_{i<j} w_i w_j coef[m][j-i] Q_m(B_j - B_i, lambda[j-i]),
///   Q_m(x, l) = (-1)^m sum_{|m|=m} prod_k h_{2 m_k}(x_k; l) / (2^{m_k} m_k!),
/// with h_{n+1} = x h_n - n l h_{n-1} (scaled Hermite, h_n = l^{n/2} He_n(x/sqrt l)).
void chaos_pair_sums(const PathSoA& path, std::span<const double> w, std::span<const double> lambda,
                     std::span<const double> coef, int M, std::span<double> out);

namespace scalar {
void heat_pair_sums(const PathSoA&, std::span<const double>, std::span<const double>, std::span<double>);
void chaos_pair_sums(const PathSoA&, std::span<const double>, std::span<const double>, std::span<const double>,
                     int, std::span<double>);
}  // namespace scalar

namespace avx2 {
void heat_pair_sums(const PathSoA&, std::span<const double>, std::span<const double>, std::span<double>);
void chaos_pair_sums(const PathSoA&, std::span<const double>, std::span<const double>, std::span<const double>,
                     int, std::span<double>);
}  // namespace avx2

}  // namespace silt::kernels
