#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <xpcs/fftw.hpp>
#include <xpcs/trajectory.hpp>
#include <xpcs/vec3.hpp>

namespace xpcs {

/// Smallest odd k with k >= ceil(10·eta/spacing) + 1, i.e. the kernel covers ±5η.
std::size_t auto_kernel_width(double eta, double spacing);

struct GridParams
{
    std::size_t n_grid = 0;     // points per axis
    double box_length = 0.0;    // Å
    double eta = 0.0;           // Gaussian standard deviation, Å
    std::size_t kernel = 0;     // odd kernel width in grid points

    /// Builds params with the auto kernel rule.
    static GridParams with_auto_kernel(std::size_t n_grid, double box_length, double eta);
    /// eta equal to the grid spacing, auto kernel.
    static GridParams matched(std::size_t n_grid, double box_length);

    double spacing() const { return box_length / double(n_grid); }
    std::size_t half_width() const { return kernel / 2; }
    /// Throws ArgumentError unless spacing > 0, eta > 0, kernel odd and 3 <= kernel <= n_grid.
    void validate() const;

    bool operator==(GridParams const&) const = default;
};

/**
 * Reciprocal lattice of a cubic box sampled on an n_grid^3 FFT grid.
 *
 * Axis indices follow FFT order: index i maps to the signed frequency
 * i for i < (n+1)/2 and i - n otherwise (so the Nyquist index of an even
 * grid is negative). q components are integer multiples of 2π/L.
 */
class ReciprocalLattice
{
public:
    ReciprocalLattice() = default;
    ReciprocalLattice(std::size_t n_grid, double box_length);
    explicit ReciprocalLattice(GridParams const& p) : ReciprocalLattice(p.n_grid, p.box_length) {}

    std::size_t n_grid() const { return n_; }
    double box_length() const { return L_; }
    /// 2π/L in Å^-1.
    double spacing() const { return dq_; }
    /// Largest |component| that is resolved symmetrically, π·n/L.
    double band_edge() const { return dq_ * double(n_ / 2); }

    long frequency(std::size_t i) const { return i < (n_ + 1) / 2 ? long(i) : long(i) - long(n_); }
    std::size_t index_of_frequency(long m) const;
    double component(std::size_t i) const { return dq_ * double(frequency(i)); }
    Vec3 q(std::size_t ix, std::size_t iy, std::size_t iz) const
    {
        return {component(ix), component(iy), component(iz)};
    }
    double magnitude(std::size_t ix, std::size_t iy, std::size_t iz) const { return norm(q(ix, iy, iz)); }

    /// True when every frequency of m is representable on the grid.
    bool contains(std::array<long, 3> const& m) const;

    /// Flat index of an x-fastest n^3 array.
    std::size_t flat(std::size_t ix, std::size_t iy, std::size_t iz) const { return (iz * n_ + iy) * n_ + ix; }

    bool operator==(ReciprocalLattice const& o) const { return n_ == o.n_ && L_ == o.L_; }

private:
    std::size_t n_ = 0;
    double L_ = 0.0;
    double dq_ = 0.0;
};

/// Integer lattice coordinates of q (units of 2π/L). Throws LatticeError if
/// any component is off the lattice by more than 1e-9 relative.
std::array<long, 3> lattice_coordinates(Vec3 const& q, double box_length);
Vec3 lattice_vector(std::array<long, 3> const& m, double box_length);

/// Smeared atomic density on a periodic grid, x-fastest, Å^-3.
struct DensityGrid
{
    GridParams params;
    double time = 0.0;
    RealBuffer values;

    double sum() const;
    /// sum(values)·δ³, the deposited mass.
    double mass() const;
};

/// Zeroed grid for params.
DensityGrid make_density_grid(GridParams const& params);

/// Accumulate the normalized Gaussian of every atom in `indices` (all atoms
/// when empty) onto grid.values, evaluated at true distances on the nearest
/// k^3 nodes with periodic wraparound, in atom index order.
void accumulate_density(DensityGrid& grid, Frame const& frame, std::vector<std::size_t> const& indices = {});

/// Fresh grid with every atom of the frame deposited.
DensityGrid deposit_density(Frame const& frame, GridParams const& params);

/**
 * Discrete spectrum of one truncated Gaussian of unit analytic mass placed
 * at node (0,0,0), scaled by δ³.
 *
 * The truncated kernel is a product of identical per-axis weight vectors, so
 * its 3D transform factorizes into the product of one 1D transform per axis;
 * only that 1D factor is stored. `normalized(...)` is the spectrum divided
 * by its q=0 value (f^η(0) = 1); `raw(...)` is the undivided spectrum, which
 * is what a deposited atom actually produces and is what amplitude recovery
 * divides by.
 */
class KernelSpectrum
{
public:
    KernelSpectrum() = default;
    explicit KernelSpectrum(GridParams const& params);

    GridParams const& params() const { return params_; }
    /// Per-axis factor, length n_grid, FFT order.
    std::vector<double> const& axis_factor() const { return axis_; }
    /// Value at q = 0 before normalization (1 up to truncation/discretization).
    double mass() const { return axis_[0] * axis_[0] * axis_[0]; }

    double raw(std::size_t ix, std::size_t iy, std::size_t iz) const { return axis_[ix] * axis_[iy] * axis_[iz]; }
    double normalized(std::size_t ix, std::size_t iy, std::size_t iz) const { return raw(ix, iy, iz) / mass(); }
    /// normalized(...) >= kResolvedFloor.
    bool resolved(std::size_t ix, std::size_t iy, std::size_t iz) const;

    /// Full n^3 array of normalized values, x-fastest.
    std::vector<double> materialize() const;

    static constexpr double kResolvedFloor = 1e-6;

private:
    GridParams params_;
    std::vector<double> axis_;
};

KernelSpectrum gaussian_kernel_spectrum(GridParams const& params);
ReciprocalLattice reciprocal_lattice(GridParams const& params);

/// Same spectrum as KernelSpectrum, built by depositing the truncated kernel
/// on a full n^3 grid and transforming it in 3D. Normalized x-fastest values.
std::vector<double> kernel_spectrum_full_fft(GridParams const& params);

} // namespace xpcs
