#include <xpcs/grid.hpp>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include <xpcs/error.hpp>

namespace xpcs {

namespace {

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

} // namespace

ForwardFft3d::ForwardFft3d(std::size_t n, FftPlanning planning)
  : n_(n)
{
    if (n == 0) throw ArgumentError("FFT size must be positive");
    // planning buffers stay untouched under FFTW_ESTIMATE, so skip zero-filling them
    FftwAllocator<double> ra;
    FftwAllocator<std::complex<double>> ca;
    double* in = ra.allocate(n * n * n);
    std::complex<double>* out = ca.allocate(half_size());
    unsigned flags = FFTW_PRESERVE_INPUT | (planning == FftPlanning::Measure ? FFTW_MEASURE : FFTW_ESTIMATE);
    {
        std::lock_guard lock(planner_mutex());
        int const dim = static_cast<int>(n);
        plan_ = fftw_plan_dft_r2c_3d(dim, dim, dim, in, reinterpret_cast<fftw_complex*>(out), flags);
    }
    ra.deallocate(in, n * n * n);
    ca.deallocate(out, half_size());
    if (!plan_) throw Error("FFTW failed to create a plan");
}

ForwardFft3d::~ForwardFft3d()
{
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
}

void ForwardFft3d::execute(RealBuffer const& in, ComplexBuffer& out) const
{
    if (in.size() != n_ * n_ * n_) throw GridMismatch("FFT input size does not match plan");
    out.resize(half_size());
    fftw_execute_dft_r2c(plan_, const_cast<double*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()));
}

// ---- params and lattice -----------------------------------------------------

std::size_t auto_kernel_width(double eta, double spacing)
{
    if (!(eta > 0.0) || !(spacing > 0.0)) throw ArgumentError("auto kernel: eta and spacing must be positive");
    double ratio = 10.0 * eta / spacing;
    // absorb rounding so that eta == spacing gives exactly ceil(10) = 10
    auto k = static_cast<std::size_t>(std::ceil(ratio * (1.0 - 1e-12))) + 1;
    if (k % 2 == 0) ++k;
    return k;
}

GridParams GridParams::with_auto_kernel(std::size_t n_grid, double box_length, double eta)
{
    GridParams p{n_grid, box_length, eta, 0};
    if (n_grid == 0 || !(box_length > 0.0)) throw ArgumentError("grid: n_grid and box length must be positive");
    p.kernel = auto_kernel_width(eta, p.spacing());
    return p;
}

GridParams GridParams::matched(std::size_t n_grid, double box_length)
{
    if (n_grid == 0) throw ArgumentError("grid: n_grid must be positive");
    return with_auto_kernel(n_grid, box_length, box_length / double(n_grid));
}

void GridParams::validate() const
{
    if (n_grid == 0 || !(box_length > 0.0)) throw ArgumentError("grid: spacing L/N_grid must be positive");
    if (!(eta > 0.0)) throw ArgumentError("grid: eta must be positive");
    if (kernel % 2 == 0) throw ArgumentError("grid: kernel width k must be odd (got " + std::to_string(kernel) + ")");
    if (kernel < 3 || kernel > n_grid)
        throw ArgumentError("grid: kernel width k must satisfy 3 <= k <= N_grid (got k=" + std::to_string(kernel) +
                            ", N_grid=" + std::to_string(n_grid) + ")");
}

ReciprocalLattice::ReciprocalLattice(std::size_t n_grid, double box_length)
  : n_(n_grid)
  , L_(box_length)
  , dq_(2.0 * std::numbers::pi / box_length)
{
    if (n_grid == 0 || !(box_length > 0.0)) throw ArgumentError("reciprocal lattice: invalid grid");
}

std::size_t ReciprocalLattice::index_of_frequency(long m) const
{
    long n = long(n_);
    long r = ((m % n) + n) % n;
    return std::size_t(r);
}

bool ReciprocalLattice::contains(std::array<long, 3> const& m) const
{
    long lo = -long(n_ / 2);
    long hi = long((n_ - 1) / 2);
    return std::all_of(m.begin(), m.end(), [&](long v) { return v >= lo && v <= hi; });
}

ReciprocalLattice reciprocal_lattice(GridParams const& params)
{
    params.validate();
    return ReciprocalLattice(params);
}

std::array<long, 3> lattice_coordinates(Vec3 const& q, double box_length)
{
    double const dq = 2.0 * std::numbers::pi / box_length;
    std::array<long, 3> m{};
    for (int d = 0; d < 3; ++d) {
        double x = q[d] / dq;
        double r = std::round(x);
        if (std::abs(x - r) > 1e-9 * std::max(1.0, std::abs(x)))
            throw LatticeError("q component " + std::to_string(q[d]) +
                               " is not an integer multiple of 2π/L = " + std::to_string(dq) +
                               " (periodic boxes scatter only on the reciprocal lattice)");
        m[d] = long(r);
    }
    return m;
}

Vec3 lattice_vector(std::array<long, 3> const& m, double box_length)
{
    double const dq = 2.0 * std::numbers::pi / box_length;
    return {dq * double(m[0]), dq * double(m[1]), dq * double(m[2])};
}

// ---- density ---------------------------------------------------------------

double DensityGrid::sum() const
{
    double s = 0.0;
    for (double v : values) s += v;
    return s;
}

double DensityGrid::mass() const
{
    double d = params.spacing();
    return sum() * d * d * d;
}

DensityGrid make_density_grid(GridParams const& params)
{
    params.validate();
    DensityGrid g;
    g.params = params;
    g.values.assign(params.n_grid * params.n_grid * params.n_grid, 0.0);
    return g;
}

namespace {

struct AxisStencil
{
    std::vector<std::size_t> index;
    std::vector<double> weight;
};

void fill_stencil(AxisStencil& s, double r, GridParams const& p)
{
    double const delta = p.spacing();
    long const n = long(p.n_grid);
    long const h = long(p.half_width());
    long const c = std::lround(r / delta);
    double const inv = 1.0 / (2.0 * p.eta * p.eta);
    for (long o = -h, j = 0; o <= h; ++o, ++j) {
        double d = double(c + o) * delta - r;
        s.weight[j] = std::exp(-d * d * inv);
        s.index[j] = std::size_t((((c + o) % n) + n) % n);
    }
}

} // namespace

void accumulate_density(DensityGrid& grid, Frame const& frame, std::vector<std::size_t> const& indices)
{
    GridParams const& p = grid.params;
    p.validate();
    if (std::abs(frame.box_length - p.box_length) > 1e-9 * p.box_length)
        throw GridMismatch("deposit_density: frame box length differs from grid box length");
    std::size_t const n = p.n_grid;
    std::size_t const k = p.kernel;
    double const norm = std::pow(1.0 / (std::sqrt(2.0 * std::numbers::pi) * p.eta), 3);

    AxisStencil sx{std::vector<std::size_t>(k), std::vector<double>(k)};
    AxisStencil sy = sx, sz = sx;
    auto deposit = [&](std::size_t atom) {
        Vec3 const r = wrap(frame.positions[atom], p.box_length);
        fill_stencil(sx, r[0], p);
        fill_stencil(sy, r[1], p);
        fill_stencil(sz, r[2], p);
        for (std::size_t c = 0; c < k; ++c) {
            double const wz = norm * sz.weight[c];
            std::size_t const zoff = sz.index[c] * n;
            for (std::size_t b = 0; b < k; ++b) {
                double const wyz = wz * sy.weight[b];
                double* row = grid.values.data() + (zoff + sy.index[b]) * n;
                for (std::size_t a = 0; a < k; ++a) row[sx.index[a]] += wyz * sx.weight[a];
            }
        }
    };
    if (indices.empty()) {
        for (std::size_t i = 0; i < frame.size(); ++i) deposit(i);
    } else {
        for (std::size_t i : indices) deposit(i);
    }
}

DensityGrid deposit_density(Frame const& frame, GridParams const& params)
{
    DensityGrid g = make_density_grid(params);
    g.time = frame.time;
    accumulate_density(g, frame);
    return g;
}

// ---- kernel spectrum ---------------------------------------------------------

namespace {

/// Truncated, normalized per-axis kernel weights wrapped onto n points, times δ/(√(2π)η).
std::vector<double> axis_kernel(GridParams const& p)
{
    std::size_t const n = p.n_grid;
    long const h = long(p.half_width());
    double const delta = p.spacing();
    double const scale = delta / (std::sqrt(2.0 * std::numbers::pi) * p.eta);
    std::vector<double> w(n, 0.0);
    for (long o = -h; o <= h; ++o) {
        double d = double(o) * delta;
        w[std::size_t(((o % long(n)) + long(n)) % long(n))] += scale * std::exp(-d * d / (2.0 * p.eta * p.eta));
    }
    return w;
}

} // namespace

KernelSpectrum::KernelSpectrum(GridParams const& params)
  : params_(params)
{
    params.validate();
    std::size_t const n = params.n_grid;
    std::vector<double> w = axis_kernel(params);
    std::vector<std::complex<double>> out(n / 2 + 1);
    {
        std::lock_guard lock(planner_mutex());
        fftw_plan plan = fftw_plan_dft_r2c_1d(int(n), w.data(), reinterpret_cast<fftw_complex*>(out.data()),
                                              FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }
    axis_.resize(n);
    for (std::size_t m = 0; m < n; ++m) {
        std::size_t j = m <= n / 2 ? m : n - m;
        // even kernel: the transform is real up to rounding
        axis_[m] = std::max(out[j].real(), 1e-300);
    }
}

bool KernelSpectrum::resolved(std::size_t ix, std::size_t iy, std::size_t iz) const
{
    return normalized(ix, iy, iz) >= kResolvedFloor;
}

std::vector<double> KernelSpectrum::materialize() const
{
    std::size_t const n = params_.n_grid;
    std::vector<double> out(n * n * n);
    double const m = mass();
    for (std::size_t z = 0; z < n; ++z)
        for (std::size_t y = 0; y < n; ++y)
            for (std::size_t x = 0; x < n; ++x) out[(z * n + y) * n + x] = axis_[x] * axis_[y] * axis_[z] / m;
    return out;
}

KernelSpectrum gaussian_kernel_spectrum(GridParams const& params) { return KernelSpectrum(params); }

std::vector<double> kernel_spectrum_full_fft(GridParams const& params)
{
    params.validate();
    std::size_t const n = params.n_grid;
    DensityGrid g = make_density_grid(params);
    Frame origin;
    origin.box_length = params.box_length;
    origin.positions = {Vec3{0.0, 0.0, 0.0}};
    accumulate_density(g, origin);

    ForwardFft3d fft(n);
    ComplexBuffer spec;
    fft.execute(g.values, spec);
    double const d3 = std::pow(params.spacing(), 3);
    double const dc = spec[0].real() * d3;
    std::size_t const nh = n / 2 + 1;
    std::vector<double> out(n * n * n);
    for (std::size_t z = 0; z < n; ++z)
        for (std::size_t y = 0; y < n; ++y)
            for (std::size_t x = 0; x < n; ++x) {
                std::complex<double> v;
                if (x < nh) v = spec[(z * n + y) * nh + x];
                else v = std::conj(spec[(((n - z) % n) * n + (n - y) % n) * nh + (n - x)]);
                out[(z * n + y) * n + x] = v.real() * d3 / dc;
            }
    return out;
}

} // namespace xpcs
