#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "silt/hurst.hpp"

namespace silt {

/// Uniform grid on [0, T] with n steps in dimension d.
struct GridSpec {
    std::int64_t n = 1;
    double T = 1.0;
    int d = 2;

    double dt() const { return T / static_cast<double>(n); }
    /// Throws InvalidArgument unless n >= 1, T > 0 and d >= 2.
    void validate() const;
};

/// One sampled d-dimensional fBm trajectory: (n+1) x d values, row-major,
/// row k is B at time k*dt, row 0 is the origin.
struct FbmPath {
    GridSpec grid;
    double H = 0.5;
    std::uint64_t seed = 0;
    /// "cholesky", "circulant", or "cholesky (circulant fallback)".
    std::string method;
    std::vector<double> values;

    double at(std::int64_t k, int component) const { return values[k * grid.d + component]; }
};

/// Per-component covariance 1/2 (t^{2H} + s^{2H} - |t-s|^{2H}).
double fbm_cov(double H, double s, double t);

/// Autocovariance of the increments of step dt at the given lag:
/// 1/2 dt^{2H} (|k+1|^{2H} + |k-1|^{2H} - 2|k|^{2H}).
double fgn_cov(double H, std::int64_t lag, double dt);

/// Exact sampler by Cholesky factorization of the n x n increment covariance.
/// The factor is computed once; sample() is const and thread-safe.
class CholeskySampler {
public:
    static constexpr std::int64_t kMaxSteps = 4096;

    CholeskySampler(double H, const GridSpec& grid);
    ~CholeskySampler();
    CholeskySampler(CholeskySampler&&) noexcept;

    FbmPath sample(std::uint64_t seed) const;
    /// Writes (n+1)*d values into `out` (row-major, origin first).
    void sample_into(std::uint64_t seed, std::span<double> out) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Davies-Harte circulant embedding of the increment sequence (FFT size 2n).
/// When the embedded spectrum has an eigenvalue below -1e-10 * max, every
/// sample is delegated to CholeskySampler and `fell_back()` reports it.
class CirculantSampler {
public:
    static constexpr double kNegativityTolerance = 1e-10;

    CirculantSampler(double H, const GridSpec& grid);
    ~CirculantSampler();
    CirculantSampler(CirculantSampler&&) noexcept;

    FbmPath sample(std::uint64_t seed) const;
    void sample_into(std::uint64_t seed, std::span<double> out) const;

    bool fell_back() const;
    /// Spectrum of the embedded circulant for unit step (length 2n).
    const std::vector<double>& eigenvalues() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

FbmPath gen_cholesky(const Hurst& H, const GridSpec& grid, std::uint64_t seed);
FbmPath gen_circulant(const Hurst& H, const GridSpec& grid, std::uint64_t seed);

/// Spectrum of the circulant embedding of unit-step fGn autocovariances.
std::vector<double> circulant_eigenvalues(double H, std::int64_t n);

// Path files. CSV: header `t,b1,...,bd`, 17 significant digits, LF endings.
// Binary: 32-byte little-endian header (magic "FBMP", u32 version, u64 n,
// u32 d, f64 H, 4 reserved zero bytes) then (n+1)*d f64 row-major. The binary
// header carries no horizon, so readers take T from the caller.
void write_path_csv(std::ostream& os, const FbmPath& path);
void write_path_binary(std::ostream& os, const FbmPath& path);
FbmPath read_path_csv(std::istream& is, double H);
FbmPath read_path_binary(std::istream& is, double T);

/// Dispatch on file extension (".csv" -> CSV, otherwise binary); IoError on failure.
void save_path(const std::string& file, const FbmPath& path);
FbmPath load_path(const std::string& file, double H, double T);

}  // namespace silt
