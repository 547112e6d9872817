#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include <xpcs/fit.hpp>
#include <xpcs/grid.hpp>
#include <xpcs/scatter.hpp>

namespace xpcs {

struct GeneratorSpec
{
    std::string kind = "brownian";   // brownian | ideal_gas | simple_cubic
    std::size_t atoms = 1000;
    double box_length = 59.19;
    double diffusivity = 0.3;        // Å²/ps
    double dt = 0.1;                 // ps
    std::size_t frames = 100;
    std::size_t cells = 8;           // simple_cubic
    double lattice_constant = 3.0;   // simple_cubic
};

struct InputSpec
{
    std::optional<std::string> path;
    std::string format = "xyz";      // xyz | lammps | binary
    double timestep_ps = 0.001;      // LAMMPS steps to ps
    std::optional<GeneratorSpec> generator;
    std::optional<std::size_t> tracers;
};

struct RingSpec
{
    double q = 0.0;
    double dq = 0.0;
};

struct EwaldSpec
{
    double wavelength = 1.0;         // Å
    Vec3 beam{0.0, 0.0, 1.0};
    std::size_t pixels = 81;
    double half_angle = 0.5;         // rad
    std::size_t average_frames = 0;  // 0: single-frame images only
};

struct HistogramSpec
{
    std::size_t bins = 40;
    double kappa_max = 6.0;
};

struct FitSpec
{
    std::optional<double> tau_lo;
    std::optional<double> tau_hi;
    double value_lo = 0.05;
    double value_hi = 0.8;
    bool stretched = false;
    bool log_domain = false;
    std::string mode = "quartic";    // quartic | low_q
    std::optional<double> q_cutoff;
};

struct BenchSpec
{
    std::vector<std::size_t> atoms{4000};
    std::size_t fft_grid = 400;
    std::size_t direct_grid = 81;
    std::size_t repeats = 1;
    bool include_direct_grid = true;
};

struct ValidateSpec
{
    double r_max = 10.0;
    std::size_t r_bins = 50;
    std::vector<double> q_edges;     // empty: 40 bins up to the band edge
};

/// Every knob of a pipeline run. Loaded from a JSON document whose keys
/// mirror these field names; unknown keys are rejected.
struct PipelineConfig
{
    InputSpec input;
    std::size_t n_grid = 64;
    std::optional<double> eta;             // default: grid spacing
    std::optional<std::size_t> kernel;     // default: auto rule
    std::string form_factor = "unit";      // unit | tabulated | path to a table
    std::vector<RingSpec> rings;
    std::vector<double> tau;               // ps; empty: every lag up to max_lag
    std::size_t max_lag = 50;
    std::vector<double> exposures;         // ps
    std::vector<std::size_t> m{1};
    std::size_t separation = 1;            // frames between superposed configurations
    std::string method = "fft";            // fft | direct | both
    unsigned threads = 0;                  // 0: XPCS_THREADS or hardware
    std::string output = "xpcs_out";
    std::uint64_t seed = 1;
    bool lenient = false;
    bool write_fields = true;
    std::optional<EwaldSpec> ewald;
    HistogramSpec histogram;
    FitSpec fit;
    BenchSpec bench;
    ValidateSpec validate;

    /// Throws ConfigError on any inconsistency. Called before any compute.
    void validate_all() const;
    GridParams grid_params(double box_length) const;
    FormFactorModel form_factor_model() const;
};

PipelineConfig config_from_json(nlohmann::json const& j);
PipelineConfig load_config(std::string const& path);
nlohmann::json config_to_json(PipelineConfig const& c);

} // namespace xpcs
