#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace xpcs {

/// Which samples of a normalized correlation curve enter a decay fit.
struct FitWindow
{
    /// Explicit τ range (ps), inclusive. When unset, the window is the first
    /// contiguous run of points whose value lies in [value_lo, value_hi].
    std::optional<double> tau_lo;
    std::optional<double> tau_hi;
    double value_lo = 0.05;
    double value_hi = 0.8;
};

struct DecayFitOptions
{
    FitWindow window;
    bool free_amplitude = false;
    /// Fit log(y) linearly instead of y (simple exponential only).
    bool log_domain = false;
    std::size_t max_iterations = 200;
    double step_tolerance = 1e-10;
};

/// Fit of y(τ) = A·exp(-2(Γτ)^γ); γ = 1 for the simple exponential.
struct DecayFit
{
    double gamma = 0.0;        // Γ, ps^-1
    double stretch = 1.0;      // γ
    double amplitude = 1.0;    // A
    double gamma_err = 0.0;
    double stretch_err = 0.0;
    double tau_lo = 0.0;
    double tau_hi = 0.0;
    std::size_t points = 0;
    double residual_norm = 0.0;              // sqrt(Σ r²)
    std::vector<double> covariance;          // row-major over the free parameters (Γ[, γ][, A])
    std::size_t iterations = 0;
    bool converged = false;
    bool flagged = false;
    std::string message;
};

DecayFit fit_exponential(std::span<double const> tau, std::span<double const> value,
                         DecayFitOptions const& options = {});

/// Two-parameter (Γ, γ) damped least squares started from the simple fit and γ = 1.
DecayFit fit_stretched(std::span<double const> tau, std::span<double const> value,
                       DecayFitOptions const& options = {});

struct DispersionCurve
{
    std::vector<double> q;          // Å^-1, strictly increasing
    std::vector<double> gamma;      // ps^-1
    std::vector<double> gamma_err;
    std::vector<double> stretch;
    std::optional<double> gamma0;   // Γ at the first local minimum
    std::optional<double> q_min;
    std::vector<double> normalized; // Γ/Γ0, empty without a minimum
    std::string warning;

    /// Γ0/q_min², a rough diffusivity scale (Å²/ps).
    std::optional<double> rough_diffusivity() const;
};

/// Orders per-ring fits by q and locates the first interior local minimum
/// (a flat run counts once, at its smallest q).
DispersionCurve dispersion(std::span<double const> q, std::span<DecayFit const> fits);
DispersionCurve dispersion(std::span<double const> q, std::span<double const> gamma);

enum class DiffusivityMode { LowQ, Quartic };

struct DiffusivityFit
{
    DiffusivityMode mode = DiffusivityMode::Quartic;
    double d = 0.0;           // Å²/ps
    double d2 = 0.0;          // Å⁴/ps
    double d_err = 0.0;
    double d2_err = 0.0;
    std::vector<double> covariance;   // 1x1 or 2x2
    double q_lo = 0.0;
    double q_hi = 0.0;
    std::size_t points = 0;
    /// sqrt(mean r²)/sqrt(mean Γ²) over the fitted points.
    double relative_rms = 0.0;
    bool flagged = false;
    std::string message;

    double d_um2_per_s() const;
};

/**
 * Through-origin least squares of Γ = D q² (LowQ, points with q <= q_cutoff)
 * or Γ = D q² + D2 q⁴ (Quartic, all points, or D2 pinned to zero).
 */
DiffusivityFit fit_diffusivity(DispersionCurve const& curve, DiffusivityMode mode,
                               std::optional<double> q_cutoff = std::nullopt, bool pin_d2_to_zero = false);

} // namespace xpcs
