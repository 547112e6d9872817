#pragma once

#include <cstdint>
#include <iosfwd>

#include <xpcs/grid.hpp>
#include <xpcs/scatter.hpp>

namespace xpcs {

/// Payload kind of a binary grid file.
enum class GridKind : std::uint32_t { Density = 0, Kernel = 1, Intensity = 2, Amplitude = 3 };

/**
 * Header of the binary grid format. Layout (little-endian):
 *   char[8] "XPCSGRD1", u32 version, u32 kind, u64 n_grid, f64 L, f64 eta,
 *   u64 k, u32 method, u32 reserved, f64 time
 * followed by n_grid^3 f64 values in x-fastest order (re, im pairs for
 * amplitudes). Unresolved reciprocal points are written as NaN.
 */
struct GridHeader
{
    static constexpr std::uint32_t kVersion = 1;

    GridKind kind = GridKind::Density;
    std::uint64_t n_grid = 0;
    double box_length = 0.0;
    double eta = 0.0;
    std::uint64_t kernel = 0;
    Method method = Method::Fft;
    double time = 0.0;

    GridParams params() const { return {std::size_t(n_grid), box_length, eta, std::size_t(kernel)}; }
};

GridHeader read_grid_header(std::istream& in);

void write_density_grid(DensityGrid const& grid, std::ostream& out);
DensityGrid read_density_grid(std::istream& in);

/// Normalized f^η on the full grid.
void write_kernel_spectrum(KernelSpectrum const& kernel, std::ostream& out);

void write_speckle_field(SpeckleField const& field, std::ostream& out);
SpeckleField read_speckle_field(std::istream& in);

void write_amplitude_field(AmplitudeField const& field, std::ostream& out);
AmplitudeField read_amplitude_field(std::istream& in);

} // namespace xpcs
