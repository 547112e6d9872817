#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <xpcs/vec3.hpp>

namespace xpcs {

/// Conversion from the internal diffusivity unit (Å²/ps) to µm²/s.
inline constexpr double kAngstrom2PerPsToMicron2PerS = 1.0e4;

using SpeciesList = std::shared_ptr<std::vector<std::string> const>;

/**
 * One snapshot of atomic positions in a cubic periodic box.
 *
 * `positions` is the wrapped view, always inside [0, L)^3. `unwrapped` is
 * either empty or holds continuous coordinates (image flags applied), which
 * mean-square displacements require.
 */
struct Frame
{
    std::vector<Vec3> positions;
    std::vector<Vec3> unwrapped;
    SpeciesList species;
    double box_length = 0.0;
    double time = 0.0;

    std::size_t size() const { return positions.size(); }
    bool has_unwrapped() const { return !unwrapped.empty(); }
    std::string const& species_of(std::size_t i) const { return (*species)[i]; }
};

struct TrajectoryMetadata
{
    std::string source;
    std::optional<std::uint64_t> seed;
};

/**
 * Immutable ordered sequence of frames sharing box, atom count and species
 * ordering. Frame times are strictly increasing and uniformly spaced.
 */
class Trajectory
{
public:
    Trajectory() = default;

    /// Validates the invariants and throws ArgumentError on violation.
    explicit Trajectory(std::vector<Frame> frames, TrajectoryMetadata metadata = {});

    std::vector<Frame> const& frames() const { return frames_; }
    Frame const& frame(std::size_t i) const { return frames_.at(i); }
    std::size_t size() const { return frames_.size(); }
    bool empty() const { return frames_.empty(); }

    std::size_t atom_count() const { return frames_.empty() ? 0 : frames_.front().size(); }
    double box_length() const { return frames_.empty() ? 0.0 : frames_.front().box_length; }
    /// Spacing between consecutive frame times (ps); zero for a single frame.
    double frame_interval() const { return frame_interval_; }
    bool has_unwrapped() const { return !frames_.empty() && frames_.front().has_unwrapped(); }
    SpeciesList const& species() const { return frames_.front().species; }
    TrajectoryMetadata const& metadata() const { return metadata_; }

    /// Number density N / L^3 (Å^-3).
    double number_density() const;

private:
    std::vector<Frame> frames_;
    double frame_interval_ = 0.0;
    TrajectoryMetadata metadata_;
};

// ---- readers and writers -------------------------------------------------

/// Concatenated extended-XYZ frames. The comment line must carry a cubic
/// `Lattice="L 0 0 0 L 0 0 0 L"` (or `box_length=L`); `time=<ps>` is optional and
/// defaults to the frame index.
Trajectory parse_xyz(std::istream& in, std::string const& source = "xyz");
void write_xyz(Trajectory const& traj, std::ostream& out);

struct LammpsDumpOptions
{
    /// Duration of one MD timestep in ps (metal units default: 1 fs).
    double timestep_ps = 0.001;
};

/// LAMMPS text dump with orthogonal cubic bounds.
Trajectory parse_lammps_dump(std::istream& in, LammpsDumpOptions const& options = {},
                             std::string const& source = "lammps");

/// Native little-endian trajectory cache.
void write_binary_trajectory(Trajectory const& traj, std::ostream& out);
Trajectory read_binary_trajectory(std::istream& in);

Trajectory load_trajectory(std::string const& path, std::string const& format,
                           LammpsDumpOptions const& options = {});

// ---- synthetic oracles ---------------------------------------------------

/// Independent Gaussian random walks (per-step variance 2·D·dt per axis)
/// starting from uniform positions. Unwrapped coordinates are retained.
Trajectory generate_brownian(std::size_t n, double box_length, double diffusivity, double dt,
                             std::size_t n_frames, std::uint64_t seed);

/// Every frame an independent uniform draw of n positions in the box.
Trajectory generate_ideal_gas(std::size_t n, double box_length, std::size_t n_frames,
                              std::uint64_t seed, double dt = 1.0);

/// Simple-cubic crystal with `cells` unit cells of spacing `a` per axis,
/// repeated unchanged for n_frames.
Trajectory generate_simple_cubic(std::size_t cells, double a, std::size_t n_frames = 1,
                                 double dt = 1.0);

/// Uniform selection of `count` atoms without replacement, indices kept in
/// ascending order.
std::vector<std::size_t> choose_tracers(std::size_t n_atoms, std::size_t count, std::uint64_t seed);
Trajectory select_atoms(Trajectory const& traj, std::vector<std::size_t> const& indices);
Trajectory select_tracers(Trajectory const& traj, std::size_t count, std::uint64_t seed);

// ---- mean-square displacement --------------------------------------------

struct MsdCurve
{
    std::vector<double> lag_times;  // ps
    std::vector<double> msd;        // Å²
    double diffusivity = 0.0;       // Å²/ps
    double fit_lo = 0.0;            // fit window in ps
    double fit_hi = 0.0;

    double diffusivity_um2_per_s() const { return diffusivity * kAngstrom2PerPsToMicron2PerS; }
};

/// MSD averaged over atoms and time origins for lags 0..max_lag frames; D is
/// one sixth of the slope of a straight-line fit over the last
/// `fit_fraction` of the lags.
MsdCurve mean_square_displacement(Trajectory const& traj, std::size_t max_lag,
                                  double fit_fraction = 0.5);

} // namespace xpcs
