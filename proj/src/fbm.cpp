#include "silt/fbm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <fftw3.h>
#include <fmt/format.h>

#include "silt/error.hpp"
#include "silt/geometry.hpp"
#include "silt/rng.hpp"

static_assert(std::endian::native == std::endian::little, "path binary I/O assumes a little-endian host");

namespace silt {

namespace {

// FFTW planning is not thread-safe; execution with the new-array API is.
std::mutex& fftw_plan_mutex()
{
    static std::mutex m;
    return m;
}

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n) : data(fftw_alloc_complex(n))
    {
        if (!data) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    fftw_complex* data;
};

struct FftwPlan {
    FftwPlan(int n, fftw_complex* in, fftw_complex* out)
    {
        std::lock_guard lock(fftw_plan_mutex());
        plan = fftw_plan_dft_1d(n, in, out, FFTW_FORWARD, FFTW_ESTIMATE);
        if (!plan) throw std::runtime_error("FFTW planning failed");
    }
    ~FftwPlan()
    {
        std::lock_guard lock(fftw_plan_mutex());
        fftw_destroy_plan(plan);
    }
    FftwPlan(const FftwPlan&) = delete;
    FftwPlan& operator=(const FftwPlan&) = delete;
    fftw_plan plan;
};

void check_sampler_args(double H, const GridSpec& grid)
{
    if (!(H > 0.0 && H < 1.0)) throw InvalidArgument(fmt::format("Hurst parameter must lie in (0,1), got {}", H));
    grid.validate();
}

// Integrates unit-step increments (component-major in `incr`) into the
// row-major path layout.
void integrate_increments(const GridSpec& grid, double H, int c, const double* incr, std::span<double> out)
{
    const double scale = std::pow(grid.dt(), H);
    const int d = grid.d;
    double b = 0.0;
    out[c] = 0.0;
    for (std::int64_t k = 0; k < grid.n; ++k) {
        b += scale * incr[k];
        out[(k + 1) * d + c] = b;
    }
}

FbmPath make_path(const GridSpec& grid, double H, std::uint64_t seed, std::string method)
{
    FbmPath p;
    p.grid = grid;
    p.H = H;
    p.seed = seed;
    p.method = std::move(method);
    p.values.assign(static_cast<std::size_t>((grid.n + 1) * grid.d), 0.0);
    return p;
}

}  // namespace

void GridSpec::validate() const
{
    if (n < 1) throw InvalidArgument(fmt::format("grid needs n >= 1 steps, got {}", n));
    if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument(fmt::format("horizon T must be positive, got {}", T));
    if (d < 2) throw InvalidArgument(fmt::format("dimension d must be at least 2, got {}", d));
}

double fbm_cov(double H, double s, double t)
{
    using geometry::pow2h;
    if (s == t) return pow2h(t, H);
    return 0.5 * (pow2h(t, H) + pow2h(s, H) - pow2h(t - s, H));
}

double fgn_cov(double H, std::int64_t lag, double dt)
{
    using geometry::pow2h;
    const double k = static_cast<double>(lag < 0 ? -lag : lag);
    const double unit = k == 0.0 ? 1.0 : 0.5 * (pow2h(k + 1.0, H) + pow2h(k - 1.0, H) - 2.0 * pow2h(k, H));
    return pow2h(dt, H) * unit;
}

// ---------------------------------------------------------------- Cholesky

struct CholeskySampler::Impl {
    double H;
    GridSpec grid;
    Eigen::MatrixXd L;
};

CholeskySampler::CholeskySampler(double H, const GridSpec& grid) : impl_(std::make_unique<Impl>())
{
    check_sampler_args(H, grid);
    if (grid.n > kMaxSteps)
        throw InvalidArgument(fmt::format("Cholesky sampling is limited to n <= {}, got {}", kMaxSteps, grid.n));
    const auto n = static_cast<Eigen::Index>(grid.n);
    std::vector<double> gamma(grid.n);
    for (std::int64_t k = 0; k < grid.n; ++k) gamma[k] = fgn_cov(H, k, 1.0);
    Eigen::MatrixXd cov(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) cov(i, j) = gamma[std::abs(i - j)];
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error(fmt::format("increment covariance not positive definite (H={}, n={})", H, grid.n));
    impl_->H = H;
    impl_->grid = grid;
    impl_->L = llt.matrixL();
}

CholeskySampler::~CholeskySampler() = default;
CholeskySampler::CholeskySampler(CholeskySampler&&) noexcept = default;

void CholeskySampler::sample_into(std::uint64_t seed, std::span<double> out) const
{
    const auto& g = impl_->grid;
    const auto n = static_cast<Eigen::Index>(g.n);
    Eigen::VectorXd z(n), x(n);
    for (int c = 0; c < g.d; ++c) {
        Xoshiro256 rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
        for (Eigen::Index k = 0; k < n; ++k) z[k] = rng.normal();
        x.noalias() = impl_->L.triangularView<Eigen::Lower>() * z;
        integrate_increments(g, impl_->H, c, x.data(), out);
    }
}

FbmPath CholeskySampler::sample(std::uint64_t seed) const
{
    auto p = make_path(impl_->grid, impl_->H, seed, "cholesky");
    sample_into(seed, p.values);
    return p;
}

// --------------------------------------------------------------- Circulant

std::vector<double> circulant_eigenvalues(double H, std::int64_t n)
{
    if (n < 1) throw InvalidArgument("circulant embedding needs n >= 1");
    const std::int64_t N = 2 * n;
    FftwBuffer in(N), out(N);
    for (std::int64_t j = 0; j < N; ++j) {
        const std::int64_t lag = j <= n ? j : N - j;
        in.data[j][0] = fgn_cov(H, lag, 1.0);
        in.data[j][1] = 0.0;
    }
    FftwPlan plan(static_cast<int>(N), in.data, out.data);
    fftw_execute(plan.plan);
    std::vector<double> lambda(N);
    for (std::int64_t k = 0; k < N; ++k) lambda[k] = out.data[k][0];
    return lambda;
}

struct CirculantSampler::Impl {
    double H;
    GridSpec grid;
    std::vector<double> eigen;
    std::vector<double> amplitude;  // sqrt(lambda_k / N)
    std::unique_ptr<FftwBuffer> plan_in, plan_out;
    std::unique_ptr<FftwPlan> plan;
    std::unique_ptr<CholeskySampler> fallback;
};

CirculantSampler::CirculantSampler(double H, const GridSpec& grid) : impl_(std::make_unique<Impl>())
{
    check_sampler_args(H, grid);
    impl_->H = H;
    impl_->grid = grid;
    impl_->eigen = circulant_eigenvalues(H, grid.n);
    const double top = *std::max_element(impl_->eigen.begin(), impl_->eigen.end());
    const double bottom = *std::min_element(impl_->eigen.begin(), impl_->eigen.end());
    if (bottom < -kNegativityTolerance * top) {
        impl_->fallback = std::make_unique<CholeskySampler>(H, grid);
        return;
    }
    const auto N = static_cast<std::size_t>(2 * grid.n);
    impl_->amplitude.resize(N);
    for (std::size_t k = 0; k < N; ++k)
        impl_->amplitude[k] = std::sqrt(std::max(impl_->eigen[k], 0.0) / static_cast<double>(N));
    impl_->plan_in = std::make_unique<FftwBuffer>(N);
    impl_->plan_out = std::make_unique<FftwBuffer>(N);
    impl_->plan = std::make_unique<FftwPlan>(static_cast<int>(N), impl_->plan_in->data, impl_->plan_out->data);
}

CirculantSampler::~CirculantSampler() = default;
CirculantSampler::CirculantSampler(CirculantSampler&&) noexcept = default;

bool CirculantSampler::fell_back() const { return impl_->fallback != nullptr; }
const std::vector<double>& CirculantSampler::eigenvalues() const { return impl_->eigen; }

void CirculantSampler::sample_into(std::uint64_t seed, std::span<double> out) const
{
    if (impl_->fallback) {
        impl_->fallback->sample_into(seed, out);
        return;
    }
    const auto& g = impl_->grid;
    const std::size_t N = impl_->amplitude.size();
    FftwBuffer in(N), spec(N);
    std::vector<double> incr(g.n);
    for (int c = 0; c < g.d; ++c) {
        Xoshiro256 rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
        for (std::size_t k = 0; k < N; ++k) {
            const double re = rng.normal();
            const double im = rng.normal();
            in.data[k][0] = impl_->amplitude[k] * re;
            in.data[k][1] = impl_->amplitude[k] * im;
        }
        fftw_execute_dft(impl_->plan->plan, in.data, spec.data);
        for (std::int64_t k = 0; k < g.n; ++k) incr[k] = spec.data[k][0];
        integrate_increments(g, impl_->H, c, incr.data(), out);
    }
}

FbmPath CirculantSampler::sample(std::uint64_t seed) const
{
    auto p = make_path(impl_->grid, impl_->H, seed, fell_back() ? "cholesky (circulant fallback)" : "circulant");
    sample_into(seed, p.values);
    return p;
}

FbmPath gen_cholesky(const Hurst& H, const GridSpec& grid, std::uint64_t seed)
{
    return CholeskySampler(H.value(), grid).sample(seed);
}

FbmPath gen_circulant(const Hurst& H, const GridSpec& grid, std::uint64_t seed)
{
    return CirculantSampler(H.value(), grid).sample(seed);
}

// --------------------------------------------------------------------- I/O

namespace {

constexpr char kMagic[4] = {'F', 'B', 'M', 'P'};
constexpr std::uint32_t kBinaryVersion = 1;

template <class T>
void put(std::ostream& os, T v)
{
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is)
{
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw IoError("truncated path file");
    return v;
}

void check_path_shape(const FbmPath& p)
{
    if (p.values.size() != static_cast<std::size_t>((p.grid.n + 1) * p.grid.d))
        throw IoError("path value count does not match its grid");
    for (int c = 0; c < p.grid.d; ++c)
        if (p.values[c] != 0.0) throw IoError("path does not start at the origin");
    for (double v : p.values)
        if (!std::isfinite(v)) throw IoError("path contains non-finite values");
}

}  // namespace

void write_path_csv(std::ostream& os, const FbmPath& path)
{
    const auto& g = path.grid;
    std::string line = "t";
    for (int c = 1; c <= g.d; ++c) line += fmt::format(",b{}", c);
    os << line << '\n';
    for (std::int64_t k = 0; k <= g.n; ++k) {
        line = fmt::format("{:.17g}", g.T * static_cast<double>(k) / static_cast<double>(g.n));
        for (int c = 0; c < g.d; ++c) line += fmt::format(",{:.17g}", path.at(k, c));
        os << line << '\n';
    }
    if (!os) throw IoError("failed writing path CSV");
}

void write_path_binary(std::ostream& os, const FbmPath& path)
{
    os.write(kMagic, 4);
    put<std::uint32_t>(os, kBinaryVersion);
    put<std::uint64_t>(os, static_cast<std::uint64_t>(path.grid.n));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(path.grid.d));
    put<double>(os, path.H);
    put<std::uint32_t>(os, 0);
    os.write(reinterpret_cast<const char*>(path.values.data()),
             static_cast<std::streamsize>(path.values.size() * sizeof(double)));
    if (!os) throw IoError("failed writing binary path");
}

FbmPath read_path_csv(std::istream& is, double H)
{
    std::string line;
    if (!std::getline(is, line)) throw IoError("empty path CSV");
    int cols = 1;
    for (char ch : line) cols += ch == ',';
    if (line.rfind("t,", 0) != 0 || cols < 3) throw IoError("path CSV header must be t,b1,...,bd");
    FbmPath p;
    p.H = H;
    p.method = "file";
    p.grid.d = cols - 1;
    std::vector<double> times;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        int col = 0;
        while (std::getline(row, cell, ',')) {
            double v;
            try {
                std::size_t used = 0;
                v = std::stod(cell, &used);
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw IoError(fmt::format("bad number '{}' in path CSV", cell));
            }
            if (col == 0)
                times.push_back(v);
            else
                p.values.push_back(v);
            ++col;
        }
        if (col != cols) throw IoError("ragged row in path CSV");
    }
    if (times.size() < 2) throw IoError("path CSV needs at least two rows");
    p.grid.n = static_cast<std::int64_t>(times.size()) - 1;
    p.grid.T = times.back();
    const double dt = p.grid.dt();
    for (std::size_t k = 0; k < times.size(); ++k)
        if (std::fabs(times[k] - dt * static_cast<double>(k)) > 1e-9 * p.grid.T)
            throw IoError("path CSV time column is not a uniform grid from 0");
    check_path_shape(p);
    return p;
}

FbmPath read_path_binary(std::istream& is, double T)
{
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw IoError("not an FBMP path file");
    if (get<std::uint32_t>(is) != kBinaryVersion) throw IoError("unsupported FBMP version");
    FbmPath p;
    p.grid.n = static_cast<std::int64_t>(get<std::uint64_t>(is));
    p.grid.d = static_cast<int>(get<std::uint32_t>(is));
    p.H = get<double>(is);
    (void)get<std::uint32_t>(is);
    p.grid.T = T;
    p.method = "file";
    if (p.grid.n < 1 || p.grid.d < 1 || p.grid.n > (std::int64_t{1} << 40)) throw IoError("corrupt FBMP header");
    p.values.resize(static_cast<std::size_t>((p.grid.n + 1) * p.grid.d));
    if (!is.read(reinterpret_cast<char*>(p.values.data()),
                 static_cast<std::streamsize>(p.values.size() * sizeof(double))))
        throw IoError("truncated FBMP payload");
    check_path_shape(p);
    return p;
}

namespace {
bool is_csv(const std::string& file) { return file.size() >= 4 && file.compare(file.size() - 4, 4, ".csv") == 0; }
}  // namespace

void save_path(const std::string& file, const FbmPath& path)
{
    std::ofstream os(file, std::ios::binary);
    if (!os) throw IoError(fmt::format("cannot open '{}' for writing", file));
    if (is_csv(file))
        write_path_csv(os, path);
    else
        write_path_binary(os, path);
}

FbmPath load_path(const std::string& file, double H, double T)
{
    std::ifstream is(file, std::ios::binary);
    if (!is) throw IoError(fmt::format("cannot open '{}'", file));
    return is_csv(file) ? read_path_csv(is, H) : read_path_binary(is, T);
}

}  // namespace silt
