#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <xpcs/fftw.hpp>
#include <xpcs/form_factor.hpp>
#include <xpcs/grid.hpp>
#include <xpcs/trajectory.hpp>

namespace xpcs {

using Complex = std::complex<double>;
using LatticePoint = std::array<long, 3>;

enum class Method : std::uint32_t { Direct = 0, Fft = 1 };
char const* to_string(Method m);

/// Species groups of a frame with their form factors; Σ_j f_j(q)² for S(q).
struct Composition
{
    std::vector<std::pair<FormFactor, std::size_t>> groups;

    static Composition of(Frame const& frame, FormFactorModel const& model);
    std::size_t atom_count() const;
    double sum_f_squared(double q) const;
    /// (Σ_j f_j(0))², the forward-scattered intensity.
    double forward_intensity() const;
};

/**
 * Complex amplitude p^e(q) on the full reciprocal grid of an FFT run.
 *
 * Only the non-redundant half (x frequency >= 0) is stored; the other half
 * follows from p^e(-q) = p^e(q)*. Points where the kernel spectrum is too
 * small to divide by are marked unresolved and hold zero.
 */
class AmplitudeField
{
public:
    AmplitudeField() = default;
    AmplitudeField(ReciprocalLattice lattice, Method method, double time);
    /// Takes over half-storage values and mask of matching size.
    AmplitudeField(ReciprocalLattice lattice, Method method, double time, ComplexBuffer values,
                   std::vector<std::uint8_t> mask);

    ReciprocalLattice const& lattice() const { return lattice_; }
    Method method() const { return method_; }
    double time() const { return time_; }
    GridParams const& params() const { return params_; }
    Composition const& composition() const { return composition_; }

    Complex at(std::size_t ix, std::size_t iy, std::size_t iz) const;
    bool resolved(std::size_t ix, std::size_t iy, std::size_t iz) const;
    Complex at(LatticePoint const& m) const;
    bool resolved(LatticePoint const& m) const;

    std::size_t half_extent() const { return lattice_.n_grid() / 2 + 1; }
    std::size_t half_index(std::size_t ix, std::size_t iy, std::size_t iz) const
    {
        return (iz * lattice_.n_grid() + iy) * half_extent() + ix;
    }
    ComplexBuffer& half_values() { return values_; }
    ComplexBuffer const& half_values() const { return values_; }
    std::vector<std::uint8_t>& half_mask() { return mask_; }
    std::vector<std::uint8_t> const& half_mask() const { return mask_; }

    void set_params(GridParams const& p) { params_ = p; }
    void set_composition(Composition c) { composition_ = std::move(c); }

private:
    ReciprocalLattice lattice_;
    Method method_ = Method::Fft;
    double time_ = 0.0;
    GridParams params_{};
    Composition composition_;
    ComplexBuffer values_;
    std::vector<std::uint8_t> mask_;
};

/// Real intensity I(q) = |p^e(q)|² on the reciprocal grid (half storage).
class SpeckleField
{
public:
    SpeckleField() = default;
    explicit SpeckleField(AmplitudeField const& amplitude);
    /// All-zero field with every point resolved.
    SpeckleField(ReciprocalLattice lattice, Method method, double time);

    ReciprocalLattice const& lattice() const { return lattice_; }
    Method method() const { return method_; }
    double time() const { return time_; }
    GridParams const& params() const { return params_; }
    Composition const& composition() const { return composition_; }

    double at(std::size_t ix, std::size_t iy, std::size_t iz) const;
    bool resolved(std::size_t ix, std::size_t iy, std::size_t iz) const;
    double at(LatticePoint const& m) const;
    bool resolved(LatticePoint const& m) const;

    std::size_t half_extent() const { return lattice_.n_grid() / 2 + 1; }
    std::vector<double>& half_values() { return values_; }
    std::vector<double> const& half_values() const { return values_; }
    std::vector<std::uint8_t>& half_mask() { return mask_; }
    std::vector<std::uint8_t> const& half_mask() const { return mask_; }

    void set_params(GridParams const& p) { params_ = p; }
    void set_composition(Composition c) { composition_ = std::move(c); }

private:
    std::size_t locate(std::size_t ix, std::size_t iy, std::size_t iz) const;

    ReciprocalLattice lattice_;
    Method method_ = Method::Fft;
    double time_ = 0.0;
    GridParams params_{};
    Composition composition_;
    std::vector<double> values_;
    std::vector<std::uint8_t> mask_;
};

// ---- direct method -----------------------------------------------------------

enum class DirectKernel
{
    /// Per-axis phase tables per atom; one complex product per (q, atom).
    Tabulated,
    /// exp(-i q.r) evaluated independently for every (q, atom) pair.
    PerPoint,
};

struct DirectOptions
{
    DirectKernel kernel = DirectKernel::Tabulated;
    unsigned threads = 1;
};

/// Amplitudes on an explicit list of lattice wavevectors.
struct AmplitudeList
{
    double box_length = 0.0;
    double time = 0.0;
    std::vector<LatticePoint> points;
    std::vector<Complex> values;
    Composition composition;

    Vec3 q(std::size_t i) const { return lattice_vector(points[i], box_length); }
};

struct IntensityList
{
    double box_length = 0.0;
    double time = 0.0;
    std::vector<LatticePoint> points;
    std::vector<double> values;
    Composition composition;

    Vec3 q(std::size_t i) const { return lattice_vector(points[i], box_length); }
};

/// p^e(q) = Σ_i f_i(q)·exp(-i q.r_i). Every q must be on the box's reciprocal
/// lattice (LatticeError otherwise).
AmplitudeList amplitude_direct(Frame const& frame, std::span<Vec3 const> q_list, FormFactorModel const& model,
                               DirectOptions const& options = {});
AmplitudeList amplitude_direct(Frame const& frame, std::span<LatticePoint const> points,
                               FormFactorModel const& model, DirectOptions const& options = {});

IntensityList intensity_direct(Frame const& frame, std::span<Vec3 const> q_list, FormFactorModel const& model,
                               DirectOptions const& options = {});
IntensityList intensity_direct(Frame const& frame, std::span<LatticePoint const> points,
                               FormFactorModel const& model, DirectOptions const& options = {});
IntensityList intensity_of(AmplitudeList const& amplitudes);

/// Direct-method intensities on every point of an FFT-sized reciprocal grid.
SpeckleField intensity_direct_grid(Frame const& frame, ReciprocalLattice const& lattice, FormFactorModel const& model,
                                   DirectOptions const& options = {});

// ---- FFT method ----------------------------------------------------------------

/**
 * Reusable FFT-path evaluator: grid params, kernel spectrum and FFT plan are
 * set up once and shared. `amplitude()` is safe to call concurrently.
 */
class FftScatterer
{
public:
    FftScatterer(GridParams const& params, FormFactorModel model, FftPlanning planning = FftPlanning::Estimate);

    GridParams const& params() const { return params_; }
    ReciprocalLattice const& lattice() const { return lattice_; }
    KernelSpectrum const& kernel() const { return kernel_; }

    AmplitudeField amplitude(Frame const& frame) const;
    SpeckleField intensity(Frame const& frame) const;

private:
    GridParams params_;
    ReciprocalLattice lattice_;
    KernelSpectrum kernel_;
    FormFactorModel model_;
    ForwardFft3d fft_;
};

/// p^e(q) = f(q)/f^η(q)·p^η(q) with p^η = δ³·FFT(ρ^η).
AmplitudeField amplitude_fft(Frame const& frame, GridParams const& params, FormFactorModel const& model);
/// I(q) = f(q)²/f^η(q)²·|p^η(q)|² over the whole grid.
SpeckleField intensity_fft(Frame const& frame, GridParams const& params, FormFactorModel const& model);

/// Per-frame fields computed in parallel over frames, returned in frame order.
std::vector<SpeckleField> intensity_fft_frames(Trajectory const& traj, FftScatterer const& scatterer,
                                               unsigned threads = 1);

// ---- rings ------------------------------------------------------------------

/// Grid points with q - dq/2 <= |q| < q + dq/2, q = 0 and Nyquist planes excluded.
struct QRing
{
    double q = 0.0;
    double dq = 0.0;
    double box_length = 0.0;
    std::vector<LatticePoint> points;

    std::size_t size() const { return points.size(); }
    double magnitude(std::size_t i) const { return norm(lattice_vector(points[i], box_length)); }
    /// One representative per ±q pair (first non-zero coordinate positive).
    QRing half() const;
};

QRing q_ring_mask(ReciprocalLattice const& lattice, double q, double dq);
/// Ring on an unbounded lattice of the box (no grid band limit), for direct sums.
QRing q_ring_mask(double box_length, double q, double dq);

// ---- Ewald slice ------------------------------------------------------------

/// Square angular detector centred on the forward beam.
struct DetectorGeometry
{
    std::size_t pixels = 81;      // per side
    double half_angle = 0.5;      // rad, from the beam axis to the edge pixel centre
};

struct DetectorImage
{
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> intensity;   // row-major
    std::vector<Vec3> q;             // exact elastic q per pixel
    std::vector<LatticePoint> lattice_point;
    std::vector<std::uint8_t> valid; // sampled point in band and resolved

    void write_csv(std::ostream& out) const;
};

/// Sample I at the reciprocal-lattice point nearest to q = k_f - k_i for
/// every pixel direction, |k_f| = |k_i| = 2π/λ.
DetectorImage ewald_slice(SpeckleField const& field, double wavelength, Vec3 const& beam_direction,
                          DetectorGeometry const& detector = {});

/// Pixel-wise mean of fields on the same grid.
SpeckleField average_fields(std::span<SpeckleField const> fields);

// ---- validation curves ---------------------------------------------------------

struct PairDistribution
{
    std::vector<double> r;   // bin centres, Å
    std::vector<double> g;
};

/// Minimum-image g(r) averaged over frames, i != j.
PairDistribution pair_distribution(Trajectory const& traj, double r_max, std::size_t n_bins);

struct StructureFactorCurve
{
    std::vector<double> q;        // bin centres
    std::vector<double> s;        // ring- and frame-averaged S(q); NaN for empty bins
    std::vector<std::size_t> count;
};

/// S(q) = I(q)/Σ_j f_j(q)² averaged over all grid points in each bin and over fields.
/// `edges` are n+1 increasing bin edges.
StructureFactorCurve structure_factor_angular_avg(std::span<SpeckleField const> fields,
                                                  std::span<double const> edges);

} // namespace xpcs
