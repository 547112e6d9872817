#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <xpcs/scatter.hpp>

namespace xpcs {

/**
 * Per-frame samples on one q ring: intensities (frames x pixels, row-major)
 * and optionally the complex amplitudes they came from.
 */
struct RingIntensitySeries
{
    QRing ring;
    std::vector<double> times;          // ps, one per row
    double frame_interval = 0.0;        // ps
    std::vector<double> intensity;
    std::vector<Complex> amplitude;     // empty or same shape as intensity
    std::vector<double> sum_f_squared;  // Σ_j f_j(|q|)² per pixel
    std::size_t superposition = 1;      // M

    std::size_t frames() const { return times.size(); }
    std::size_t pixels() const { return ring.size(); }
    bool has_amplitudes() const { return !amplitude.empty(); }
    double at(std::size_t frame, std::size_t pixel) const { return intensity[frame * pixels() + pixel]; }
    std::span<double const> row(std::size_t frame) const
    {
        return {intensity.data() + frame * pixels(), pixels()};
    }
};

/// Gathers ring pixels from per-frame fields, keeping ring order.
RingIntensitySeries extract_ring_series(std::span<SpeckleField const> fields, QRing const& ring);
RingIntensitySeries extract_ring_series(std::span<AmplitudeField const> fields, QRing const& ring);

/// FFT-path amplitudes for every frame, gathered straight into ring series
/// without keeping whole fields. Frames are processed in parallel.
std::vector<RingIntensitySeries> ring_series_fft(Trajectory const& traj, FftScatterer const& scatterer,
                                                 std::span<QRing const> rings, bool keep_amplitudes = true,
                                                 unsigned threads = 1);

/// Same, with the direct sum evaluated only on the ring points.
std::vector<RingIntensitySeries> ring_series_direct(Trajectory const& traj, FormFactorModel const& model,
                                                    std::span<QRing const> rings, bool keep_amplitudes = true,
                                                    DirectOptions const& options = {});

/// First n frames of a series.
RingIntensitySeries truncate_series(RingIntensitySeries const& series, std::size_t n_frames);

/// Pixel-wise intensity sum of series recorded on the same ring and times
/// (e.g. independent atom groups). M adds up; amplitudes are dropped.
RingIntensitySeries superpose_series(std::span<RingIntensitySeries const> parts);

/**
 * Incoherent superposition of M frames taken `separation` frames apart within
 * a series. Frames are used at most once: block b of length M·separation
 * yields `separation` output rows, row j summing frames b·M·s + j + m·s.
 */
RingIntensitySeries superpose_frames(RingIntensitySeries const& series, std::size_t m, std::size_t separation = 1);

/// Splits the series into M consecutive segments of equal length and sums
/// them row by row, keeping the time axis (segments far apart in time act as
/// independent configurations).
RingIntensitySeries superpose_segments(RingIntensitySeries const& series, std::size_t m);

/// Pixel-wise intensity sum of fields on the same grid.
SpeckleField superpose_incoherent(std::span<SpeckleField const> fields);

/**
 * Exposure-integrated intensity I_Δ = dt·Σ I over windows of `exposure` ps
 * (a multiple of the frame interval), left-Riemann. Windows start every
 * `stride` ps; stride 0 means back to back.
 */
RingIntensitySeries integrate_exposure(RingIntensitySeries const& series, double exposure, double stride = 0.0);

/// Lags in frames for τ values in ps; each τ must be a multiple of the frame interval.
std::vector<std::size_t> lags_from_times(RingIntensitySeries const& series, std::span<double const> taus);

struct CorrelationResult
{
    std::vector<std::size_t> lags;   // frames
    std::vector<double> tau;         // ps
    std::vector<double> g2;
    std::vector<double> g2_norm;     // (g2 - 1)/β0
    std::vector<double> isf;         // Re F̂ (empty without amplitudes)
    std::vector<double> isf_imag;    // Im F̂
    std::vector<double> isf_sq;      // (Re F̂)²
    std::vector<std::size_t> n_samples;  // time pairs per pixel
    std::vector<std::uint8_t> flagged;   // fewer than two pairs
    double beta0 = 0.0;
    double f0 = 0.0;                 // F(q, 0), ring-averaged
    double max_imag_residual = 0.0;  // max |Im F|/F(0)

    bool has_isf() const { return !isf.empty(); }
};

/// g2(τ) per pixel with the full-time mean, then averaged over the ring.
CorrelationResult g2(RingIntensitySeries const& series, std::span<std::size_t const> lags);

struct IsfResult
{
    std::vector<std::size_t> lags;
    std::vector<double> tau;
    std::vector<Complex> f;        // F(q, τ) = ⟨p(t) p*(t+τ)⟩ / Σf², ring-averaged
    std::vector<Complex> f_hat;    // F / F(0)
    double max_imag_residual = 0.0;
};

IsfResult intermediate_scattering(RingIntensitySeries const& series, std::span<std::size_t const> lags);

/// g2 plus F̂ when the series carries amplitudes. Lag 0 is always evaluated.
CorrelationResult correlate(RingIntensitySeries const& series, std::span<std::size_t const> lags);

struct ContrastEstimate
{
    double value = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;   // snapshots (ring) or pixels (time)
};

/// Population variance over mean² of one snapshot.
double contrast_ring(std::span<double const> pixels);
/// contrast_ring of every frame, averaged.
ContrastEstimate contrast_ring(RingIntensitySeries const& series);
/// β0 = g2(0) - 1 per pixel, averaged over the ring.
ContrastEstimate contrast_time(RingIntensitySeries const& series);

/// κ = I/⟨I⟩_ring, frame by frame.
std::vector<double> normalized_intensities(RingIntensitySeries const& series);

struct HistogramFit
{
    std::vector<double> edges;       // κ bin edges; the last bin is open-ended above kappa_max
    std::vector<double> density;     // per closed bin
    std::vector<std::size_t> counts; // closed bins followed by the overflow count
    std::size_t samples = 0;
    double mean = 0.0;
    double variance = 0.0;
    double m_hat = 0.0;              // mean²/variance
    std::size_t m_rounded = 0;
    double m_reference = 0.0;        // Erlang order used for the chi-square test
    double chi_square = 0.0;
    std::size_t dof = 0;
    double p_value = 0.0;

    double erlang_density(double kappa) const;
};

/**
 * Histogram of normalized intensities with moment-matched Erlang order and a
 * chi-square test against Erlang(m_reference) (default: M̂ rounded). Bins
 * with expected count below 5 are pooled with their neighbours.
 */
HistogramFit intensity_histogram(std::span<double const> kappa, std::size_t n_bins, double kappa_max,
                                 std::optional<double> m_reference = std::nullopt);

/// Erlang(M) density of κ with unit mean.
double erlang_pdf(double kappa, double m);
double erlang_cdf(double kappa, double m);

struct SiegertReport
{
    std::vector<double> tau;
    std::vector<double> deviation;   // |(g2-1)/β0 - |F̂|²|
    double max_deviation = 0.0;
    double rms_deviation = 0.0;
};

/// Deviations for τ <= max_tau (all lags by default).
SiegertReport siegert_check(CorrelationResult const& result, double max_tau = -1.0);

struct SiegertConvergence
{
    std::vector<std::size_t> frames;
    std::vector<double> max_deviation;
};

/// Siegert max deviation using the first n frames, for each n in frame_counts.
SiegertConvergence siegert_convergence(RingIntensitySeries const& series, std::span<std::size_t const> lags,
                                       std::span<std::size_t const> frame_counts, double max_tau = -1.0);

struct ContrastCurve
{
    enum class Source { Intensity, Isf };

    Source source = Source::Intensity;
    std::size_t m = 1;
    double beta0 = 0.0;
    std::vector<double> exposure;    // Δt, ps
    std::vector<double> beta;
    std::vector<double> beta_err;
    std::vector<double> beta_norm;   // β_Δ/β0
};

/// β_Δ from exposure-integrated snapshots; β0 is the single-frame ring contrast.
ContrastCurve contrast_vs_exposure(RingIntensitySeries const& series, std::span<double const> exposures);

/// β_Δ = 2β0 ∫_0^Δt (1 - t/Δt)|F̂(t)|² dt/Δt by the trapezoid rule on the
/// uniform τ grid of f_hat_sq (τ = i·step).
double contrast_from_isf(std::span<double const> f_hat_sq, double step, double beta0, double exposure);
ContrastCurve contrast_from_isf(CorrelationResult const& result, std::span<double const> exposures);

/// β_Δ/β0 for F̂ = exp(-Γτ): 2(e^{-x} - 1 + x)/x² with x = 2ΓΔt.
double exposure_contrast_ratio(double gamma, double exposure);

} // namespace xpcs
