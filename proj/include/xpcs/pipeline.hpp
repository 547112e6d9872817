#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <xpcs/config.hpp>
#include <xpcs/stats.hpp>
#include <xpcs/trajectory.hpp>

namespace xpcs {

inline constexpr char kVersion[] = "1.0.0";

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view data);

/**
 * Single writer for one run directory. Every file goes through here so the
 * manifest can list it with its checksum; `finish` writes provenance.json
 * and manifest.json.
 */
class OutputCollector
{
public:
    OutputCollector(std::filesystem::path dir, std::string command);

    std::filesystem::path const& dir() const { return dir_; }
    void write(std::string const& name, std::string_view bytes);
    void warn(std::string message) { warnings_.push_back(std::move(message)); }
    std::vector<std::string> const& files() const { return files_; }
    std::vector<std::string> const& warnings() const { return warnings_; }
    void finish(PipelineConfig const& config);

private:
    std::filesystem::path dir_;
    std::string command_;
    std::vector<std::string> files_;
    std::vector<std::string> checksums_;
    std::vector<std::string> warnings_;
};

struct RunReport
{
    std::string output_dir;
    std::vector<std::string> files;
    std::vector<std::string> warnings;
    std::size_t flagged_fits = 0;
};

/// Trajectory described by the input section, reduced to tracers if asked.
Trajectory load_input(PipelineConfig const& config);

/// q rings of the config on the FFT grid of the trajectory box.
std::vector<QRing> config_rings(PipelineConfig const& config, double box_length);

RunReport cmd_speckle(PipelineConfig const& config);
RunReport cmd_correlate(PipelineConfig const& config);
RunReport cmd_contrast(PipelineConfig const& config);
RunReport cmd_fit(PipelineConfig const& config);
RunReport cmd_bench(PipelineConfig const& config);
RunReport cmd_generate(PipelineConfig const& config);
RunReport cmd_validate(PipelineConfig const& config);

// ---- benchmark building blocks ---------------------------------------------------

/// Uniform random frame of n atoms in a box of side L.
Frame random_frame(std::size_t n, double box_length, std::uint64_t seed);

/// `count` independent uniform frames.
std::vector<Frame> random_frames(std::size_t count, std::size_t n, double box_length, std::uint64_t seed);

/// Distinct frames cycled through by the single-point benchmark.
inline constexpr std::size_t kSinglePointFrames = 64;

/// Lattice points of the centred m x m x m grid (or m x m slice at qz = 0).
std::vector<LatticePoint> centred_grid_points(std::size_t m, bool slice);

struct BenchResult
{
    std::string label;
    std::size_t atoms = 0;
    std::size_t points = 0;
    double wall_seconds = 0.0;   // per frame
};

/// Mean wall time per call, cycling through `frames` over `repeats` calls.
BenchResult bench_direct(std::span<Frame const> frames, std::vector<LatticePoint> const& points, DirectKernel kernel,
                         unsigned threads, std::size_t repeats, std::string label);
BenchResult bench_direct(Frame const& frame, std::vector<LatticePoint> const& points, DirectKernel kernel,
                         unsigned threads, std::size_t repeats, std::string label);
BenchResult bench_fft(Frame const& frame, std::size_t n_grid, std::size_t repeats);

} // namespace xpcs
