#include <xpcs/grid_io.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>

#include <xpcs/error.hpp>

namespace xpcs {

static_assert(std::endian::native == std::endian::little, "binary grid I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'X', 'P', 'C', 'S', 'G', 'R', 'D', '1'};

template <typename T>
void put(std::ostream& out, T v)
{
    out.write(reinterpret_cast<char const*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in)
{
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw IoError("grid file: truncated header");
    return v;
}

void write_header(std::ostream& out, GridHeader const& h)
{
    out.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, GridHeader::kVersion);
    put<std::uint32_t>(out, std::uint32_t(h.kind));
    put<std::uint64_t>(out, h.n_grid);
    put<double>(out, h.box_length);
    put<double>(out, h.eta);
    put<std::uint64_t>(out, h.kernel);
    put<std::uint32_t>(out, std::uint32_t(h.method));
    put<std::uint32_t>(out, 0);
    put<double>(out, h.time);
}

GridHeader header_for(GridParams const& p, GridKind kind, Method method, double time)
{
    return {kind, p.n_grid, p.box_length, p.eta, p.kernel, method, time};
}

void write_values(std::ostream& out, double const* data, std::size_t count)
{
    out.write(reinterpret_cast<char const*>(data), std::streamsize(count * sizeof(double)));
    if (!out) throw IoError("grid file: write failed");
}

std::vector<double> read_values(std::istream& in, std::size_t count)
{
    std::vector<double> v(count);
    if (!in.read(reinterpret_cast<char*>(v.data()), std::streamsize(count * sizeof(double))))
        throw IoError("grid file: truncated payload");
    return v;
}

GridHeader expect(std::istream& in, GridKind kind)
{
    GridHeader h = read_grid_header(in);
    if (h.kind != kind)
        throw IoError("grid file: expected kind " + std::to_string(unsigned(kind)) + ", found " +
                      std::to_string(unsigned(h.kind)));
    return h;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

} // namespace

GridHeader read_grid_header(std::istream& in)
{
    char magic[8];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw IoError("grid file: bad magic");
    auto version = get<std::uint32_t>(in);
    if (version != GridHeader::kVersion) throw IoError("grid file: unsupported version " + std::to_string(version));
    GridHeader h;
    auto kind = get<std::uint32_t>(in);
    if (kind > 3) throw IoError("grid file: unknown kind " + std::to_string(kind));
    h.kind = GridKind(kind);
    h.n_grid = get<std::uint64_t>(in);
    h.box_length = get<double>(in);
    h.eta = get<double>(in);
    h.kernel = get<std::uint64_t>(in);
    auto method = get<std::uint32_t>(in);
    if (method > 1) throw IoError("grid file: unknown method tag " + std::to_string(method));
    h.method = Method(method);
    get<std::uint32_t>(in);
    h.time = get<double>(in);
    if (h.n_grid == 0 || h.n_grid > 4096) throw IoError("grid file: implausible n_grid " + std::to_string(h.n_grid));
    return h;
}

void write_density_grid(DensityGrid const& grid, std::ostream& out)
{
    write_header(out, header_for(grid.params, GridKind::Density, Method::Fft, grid.time));
    write_values(out, grid.values.data(), grid.values.size());
}

DensityGrid read_density_grid(std::istream& in)
{
    GridHeader h = expect(in, GridKind::Density);
    DensityGrid g;
    g.params = h.params();
    g.time = h.time;
    auto v = read_values(in, h.n_grid * h.n_grid * h.n_grid);
    g.values.assign(v.begin(), v.end());
    return g;
}

void write_kernel_spectrum(KernelSpectrum const& kernel, std::ostream& out)
{
    write_header(out, header_for(kernel.params(), GridKind::Kernel, Method::Fft, 0.0));
    auto v = kernel.materialize();
    write_values(out, v.data(), v.size());
}

void write_speckle_field(SpeckleField const& field, std::ostream& out)
{
    GridParams p = field.params();
    p.n_grid = field.lattice().n_grid();
    p.box_length = field.lattice().box_length();
    write_header(out, header_for(p, GridKind::Intensity, field.method(), field.time()));
    std::size_t const n = p.n_grid;
    std::vector<double> row(n);
    for (std::size_t iz = 0; iz < n; ++iz)
        for (std::size_t iy = 0; iy < n; ++iy) {
            for (std::size_t ix = 0; ix < n; ++ix)
                row[ix] = field.resolved(ix, iy, iz) ? field.at(ix, iy, iz) : kNaN;
            write_values(out, row.data(), n);
        }
}

SpeckleField read_speckle_field(std::istream& in)
{
    GridHeader h = expect(in, GridKind::Intensity);
    std::size_t const n = h.n_grid;
    SpeckleField f(ReciprocalLattice(n, h.box_length), h.method, h.time);
    f.set_params(h.params());
    std::size_t const nh = f.half_extent();
    auto v = read_values(in, n * n * n);
    for (std::size_t iz = 0; iz < n; ++iz)
        for (std::size_t iy = 0; iy < n; ++iy)
            for (std::size_t ix = 0; ix < nh; ++ix) {
                double x = v[(iz * n + iy) * n + ix];
                std::size_t const k = (iz * n + iy) * nh + ix;
                f.half_mask()[k] = std::isnan(x) ? 0 : 1;
                f.half_values()[k] = std::isnan(x) ? 0.0 : x;
            }
    return f;
}

void write_amplitude_field(AmplitudeField const& field, std::ostream& out)
{
    GridParams p = field.params();
    p.n_grid = field.lattice().n_grid();
    p.box_length = field.lattice().box_length();
    write_header(out, header_for(p, GridKind::Amplitude, field.method(), field.time()));
    std::size_t const n = p.n_grid;
    std::vector<double> row(2 * n);
    for (std::size_t iz = 0; iz < n; ++iz)
        for (std::size_t iy = 0; iy < n; ++iy) {
            for (std::size_t ix = 0; ix < n; ++ix) {
                bool ok = field.resolved(ix, iy, iz);
                Complex c = field.at(ix, iy, iz);
                row[2 * ix] = ok ? c.real() : kNaN;
                row[2 * ix + 1] = ok ? c.imag() : kNaN;
            }
            write_values(out, row.data(), row.size());
        }
}

AmplitudeField read_amplitude_field(std::istream& in)
{
    GridHeader h = expect(in, GridKind::Amplitude);
    std::size_t const n = h.n_grid;
    AmplitudeField f(ReciprocalLattice(n, h.box_length), h.method, h.time);
    f.set_params(h.params());
    std::size_t const nh = f.half_extent();
    auto v = read_values(in, 2 * n * n * n);
    for (std::size_t iz = 0; iz < n; ++iz)
        for (std::size_t iy = 0; iy < n; ++iy)
            for (std::size_t ix = 0; ix < nh; ++ix) {
                std::size_t const src = 2 * ((iz * n + iy) * n + ix);
                std::size_t const k = f.half_index(ix, iy, iz);
                bool nan = std::isnan(v[src]);
                f.half_mask()[k] = nan ? 0 : 1;
                f.half_values()[k] = nan ? Complex{} : Complex(v[src], v[src + 1]);
            }
    return f;
}

} // namespace xpcs
