#include <xpcs/stats.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <xpcs/error.hpp>
#include <xpcs/parallel.hpp>

namespace xpcs {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

RingIntensitySeries empty_like(RingIntensitySeries const& s)
{
    RingIntensitySeries out;
    out.ring = s.ring;
    out.frame_interval = s.frame_interval;
    out.sum_f_squared = s.sum_f_squared;
    out.superposition = s.superposition;
    return out;
}

double uniform_interval(std::vector<double> const& times)
{
    return times.size() > 1 ? times[1] - times[0] : 0.0;
}

std::size_t frames_in(double duration, double interval, char const* what)
{
    if (!(interval > 0.0)) throw InsufficientData(std::string(what) + ": series has no frame interval");
    double const r = duration / interval;
    double const k = std::round(r);
    if (k < 1.0 || std::abs(r - k) > 1e-9 * std::max(1.0, r))
        throw ArgumentError(std::string(what) + ": " + std::to_string(duration) +
                            " ps is not a positive multiple of the frame interval " + std::to_string(interval) +
                            " ps");
    return std::size_t(k);
}

void ring_sum_f(RingIntensitySeries& s, Composition const& c)
{
    s.sum_f_squared.resize(s.pixels());
    for (std::size_t p = 0; p < s.pixels(); ++p) s.sum_f_squared[p] = c.sum_f_squared(s.ring.magnitude(p));
}

} // namespace

// ---- series construction ---------------------------------------------------------

RingIntensitySeries extract_ring_series(std::span<SpeckleField const> fields, QRing const& ring)
{
    if (fields.empty()) throw InsufficientData("extract_ring_series: no fields");
    RingIntensitySeries s;
    s.ring = ring;
    std::size_t const np = ring.size();
    for (SpeckleField const& f : fields) {
        if (!(f.lattice() == fields.front().lattice()))
            throw GridMismatch("extract_ring_series: fields on different grids");
        if (std::abs(f.lattice().box_length() - ring.box_length) > 1e-9 * ring.box_length)
            throw GridMismatch("extract_ring_series: ring built for a different box");
        s.times.push_back(f.time());
        for (std::size_t p = 0; p < np; ++p) {
            if (!f.resolved(ring.points[p])) throw GridMismatch("extract_ring_series: ring point not resolved");
            s.intensity.push_back(f.at(ring.points[p]));
        }
    }
    s.frame_interval = uniform_interval(s.times);
    ring_sum_f(s, fields.front().composition());
    return s;
}

RingIntensitySeries extract_ring_series(std::span<AmplitudeField const> fields, QRing const& ring)
{
    if (fields.empty()) throw InsufficientData("extract_ring_series: no fields");
    RingIntensitySeries s;
    s.ring = ring;
    std::size_t const np = ring.size();
    for (AmplitudeField const& f : fields) {
        if (!(f.lattice() == fields.front().lattice()))
            throw GridMismatch("extract_ring_series: fields on different grids");
        if (std::abs(f.lattice().box_length() - ring.box_length) > 1e-9 * ring.box_length)
            throw GridMismatch("extract_ring_series: ring built for a different box");
        s.times.push_back(f.time());
        for (std::size_t p = 0; p < np; ++p) {
            if (!f.resolved(ring.points[p])) throw GridMismatch("extract_ring_series: ring point not resolved");
            Complex a = f.at(ring.points[p]);
            s.amplitude.push_back(a);
            s.intensity.push_back(std::norm(a));
        }
    }
    s.frame_interval = uniform_interval(s.times);
    ring_sum_f(s, fields.front().composition());
    return s;
}

namespace {

std::vector<RingIntensitySeries> allocate_series(Trajectory const& traj, std::span<QRing const> rings,
                                                 bool keep_amplitudes)
{
    std::vector<RingIntensitySeries> out(rings.size());
    for (std::size_t r = 0; r < rings.size(); ++r) {
        if (std::abs(rings[r].box_length - traj.box_length()) > 1e-9 * traj.box_length())
            throw GridMismatch("ring built for a different box");
        auto& s = out[r];
        s.ring = rings[r];
        s.frame_interval = traj.frame_interval();
        for (Frame const& f : traj.frames()) s.times.push_back(f.time);
        s.intensity.assign(traj.size() * s.pixels(), 0.0);
        if (keep_amplitudes) s.amplitude.assign(traj.size() * s.pixels(), Complex{});
    }
    return out;
}

} // namespace

std::vector<RingIntensitySeries> ring_series_fft(Trajectory const& traj, FftScatterer const& scatterer,
                                                 std::span<QRing const> rings, bool keep_amplitudes, unsigned threads)
{
    if (traj.empty()) throw InsufficientData("ring_series_fft: empty trajectory");
    auto out = allocate_series(traj, rings, keep_amplitudes);
    // resolve grid indices once
    auto const& lat = scatterer.lattice();
    std::vector<std::vector<std::array<std::size_t, 3>>> index(rings.size());
    for (std::size_t r = 0; r < rings.size(); ++r)
        for (auto const& m : rings[r].points) {
            if (!lat.contains(m)) throw LatticeError("ring point outside the FFT grid band");
            index[r].push_back({lat.index_of_frequency(m[0]), lat.index_of_frequency(m[1]),
                                lat.index_of_frequency(m[2])});
        }
    std::vector<Composition> first(1);
    parallel_for(traj.size(), threads, [&](std::size_t t) {
        AmplitudeField const field = scatterer.amplitude(traj.frame(t));
        if (t == 0) first[0] = field.composition();
        for (std::size_t r = 0; r < rings.size(); ++r) {
            auto& s = out[r];
            std::size_t const np = s.pixels();
            for (std::size_t p = 0; p < np; ++p) {
                auto const& i = index[r][p];
                if (!field.resolved(i[0], i[1], i[2]))
                    throw GridMismatch("ring point at |q| = " + std::to_string(s.ring.magnitude(p)) +
                                       " is not resolved by the kernel spectrum");
                Complex const a = field.at(i[0], i[1], i[2]);
                s.intensity[t * np + p] = std::norm(a);
                if (keep_amplitudes) s.amplitude[t * np + p] = a;
            }
        }
    });
    for (auto& s : out) ring_sum_f(s, first[0]);
    return out;
}

std::vector<RingIntensitySeries> ring_series_direct(Trajectory const& traj, FormFactorModel const& model,
                                                    std::span<QRing const> rings, bool keep_amplitudes,
                                                    DirectOptions const& options)
{
    if (traj.empty()) throw InsufficientData("ring_series_direct: empty trajectory");
    auto out = allocate_series(traj, rings, keep_amplitudes);
    std::vector<LatticePoint> all;
    for (auto const& ring : rings) all.insert(all.end(), ring.points.begin(), ring.points.end());
    DirectOptions inner = options;
    inner.threads = 1;
    std::vector<Composition> first(1);
    parallel_for(traj.size(), options.threads, [&](std::size_t t) {
        AmplitudeList const a = amplitude_direct(traj.frame(t), std::span<LatticePoint const>(all), model, inner);
        if (t == 0) first[0] = a.composition;
        std::size_t offset = 0;
        for (auto& s : out) {
            std::size_t const np = s.pixels();
            for (std::size_t p = 0; p < np; ++p) {
                s.intensity[t * np + p] = std::norm(a.values[offset + p]);
                if (keep_amplitudes) s.amplitude[t * np + p] = a.values[offset + p];
            }
            offset += np;
        }
    });
    for (auto& s : out) ring_sum_f(s, first[0]);
    return out;
}

RingIntensitySeries truncate_series(RingIntensitySeries const& series, std::size_t n_frames)
{
    if (n_frames > series.frames()) throw ArgumentError("truncate_series: more frames requested than available");
    RingIntensitySeries out = empty_like(series);
    std::size_t const np = series.pixels();
    out.times.assign(series.times.begin(), series.times.begin() + long(n_frames));
    out.intensity.assign(series.intensity.begin(), series.intensity.begin() + long(n_frames * np));
    if (series.has_amplitudes())
        out.amplitude.assign(series.amplitude.begin(), series.amplitude.begin() + long(n_frames * np));
    return out;
}

RingIntensitySeries superpose_series(std::span<RingIntensitySeries const> parts)
{
    if (parts.empty()) throw ArgumentError("superpose_series: nothing to superpose");
    RingIntensitySeries out = empty_like(parts.front());
    out.times = parts.front().times;
    out.intensity = parts.front().intensity;
    out.superposition = 0;
    std::fill(out.sum_f_squared.begin(), out.sum_f_squared.end(), 0.0);
    for (auto const& s : parts) {
        if (s.ring.points != out.ring.points || s.frames() != out.frames())
            throw GridMismatch("superpose_series: series differ in ring or frame count");
        out.superposition += s.superposition;
        for (std::size_t p = 0; p < out.sum_f_squared.size(); ++p) out.sum_f_squared[p] += s.sum_f_squared[p];
    }
    for (std::size_t k = 1; k < parts.size(); ++k)
        for (std::size_t i = 0; i < out.intensity.size(); ++i) out.intensity[i] += parts[k].intensity[i];
    return out;
}

RingIntensitySeries superpose_frames(RingIntensitySeries const& series, std::size_t m, std::size_t separation)
{
    if (m == 0 || separation == 0) throw ArgumentError("superpose_frames: M and separation must be positive");
    std::size_t const block = m * separation;
    std::size_t const blocks = series.frames() / block;
    if (blocks == 0) throw InsufficientData("superpose_frames: fewer frames than one block of M·separation");
    std::size_t const np = series.pixels();
    RingIntensitySeries out = empty_like(series);
    out.superposition = series.superposition * m;
    out.frame_interval = 0.0;   // rows are not a time series
    for (std::size_t b = 0; b < blocks; ++b)
        for (std::size_t j = 0; j < separation; ++j) {
            std::size_t const first = b * block + j;
            out.times.push_back(series.times[first]);
            std::size_t const row = out.intensity.size();
            out.intensity.resize(row + np, 0.0);
            for (std::size_t k = 0; k < m; ++k) {
                auto src = series.row(first + k * separation);
                for (std::size_t p = 0; p < np; ++p) out.intensity[row + p] += src[p];
            }
        }
    return out;
}

RingIntensitySeries superpose_segments(RingIntensitySeries const& series, std::size_t m)
{
    if (m == 0) throw ArgumentError("superpose_segments: M must be positive");
    std::size_t const len = series.frames() / m;
    if (len < 2) throw InsufficientData("superpose_segments: segments shorter than two frames");
    std::size_t const np = series.pixels();
    RingIntensitySeries out = empty_like(series);
    out.superposition = series.superposition * m;
    out.times.assign(series.times.begin(), series.times.begin() + long(len));
    out.intensity.assign(len * np, 0.0);
    for (std::size_t k = 0; k < m; ++k)
        for (std::size_t t = 0; t < len; ++t) {
            auto src = series.row(k * len + t);
            for (std::size_t p = 0; p < np; ++p) out.intensity[t * np + p] += src[p];
        }
    return out;
}

SpeckleField superpose_incoherent(std::span<SpeckleField const> fields)
{
    if (fields.empty()) throw ArgumentError("superpose_incoherent: no fields");
    SpeckleField out = average_fields(fields);
    double const m = double(fields.size());
    for (double& v : out.half_values()) v *= m;
    return out;
}

RingIntensitySeries integrate_exposure(RingIntensitySeries const& series, double exposure, double stride)
{
    double const dt = series.frame_interval;
    std::size_t const w = frames_in(exposure, dt, "integrate_exposure");
    std::size_t const step = stride == 0.0 ? w : frames_in(stride, dt, "integrate_exposure stride");
    if (w > series.frames()) throw InsufficientData("integrate_exposure: exposure longer than the series");
    std::size_t const np = series.pixels();
    RingIntensitySeries out = empty_like(series);
    out.frame_interval = step * dt;
    for (std::size_t start = 0; start + w <= series.frames(); start += step) {
        out.times.push_back(series.times[start]);
        std::size_t const row = out.intensity.size();
        out.intensity.resize(row + np, 0.0);
        for (std::size_t j = 0; j < w; ++j) {
            auto src = series.row(start + j);
            for (std::size_t p = 0; p < np; ++p) out.intensity[row + p] += dt * src[p];
        }
    }
    return out;
}

std::vector<std::size_t> lags_from_times(RingIntensitySeries const& series, std::span<double const> taus)
{
    std::vector<std::size_t> lags;
    for (double tau : taus) lags.push_back(tau == 0.0 ? 0 : frames_in(tau, series.frame_interval, "lag"));
    return lags;
}

// ---- correlation -------------------------------------------------------------

CorrelationResult g2(RingIntensitySeries const& series, std::span<std::size_t const> lags)
{
    std::size_t const T = series.frames();
    std::size_t const np = series.pixels();
    if (T < 2) throw InsufficientData("g2: need at least two frames");

    std::vector<double> mean(np, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        auto r = series.row(t);
        for (std::size_t p = 0; p < np; ++p) mean[p] += r[p];
    }
    for (double& m : mean) m /= double(T);

    CorrelationResult out;
    auto lag_value = [&](std::size_t lag) {
        if (T <= lag || T - lag < 2) return kNaN;
        std::vector<double> acc(np, 0.0);
        for (std::size_t t = 0; t + lag < T; ++t) {
            auto a = series.row(t);
            auto b = series.row(t + lag);
            for (std::size_t p = 0; p < np; ++p) acc[p] += a[p] * b[p];
        }
        double sum = 0.0;
        std::size_t used = 0;
        for (std::size_t p = 0; p < np; ++p) {
            if (!(mean[p] > 0.0)) continue;
            sum += acc[p] / double(T - lag) / (mean[p] * mean[p]);
            ++used;
        }
        return used ? sum / double(used) : kNaN;
    };
    double const g0 = lag_value(0);
    out.beta0 = g0 - 1.0;
    for (std::size_t lag : lags) {
        double const v = lag == 0 ? g0 : lag_value(lag);
        out.lags.push_back(lag);
        out.tau.push_back(double(lag) * series.frame_interval);
        out.g2.push_back(v);
        out.g2_norm.push_back((v - 1.0) / out.beta0);
        out.n_samples.push_back(T > lag ? T - lag : 0);
        out.flagged.push_back(std::isnan(v) ? 1 : 0);
    }
    return out;
}

IsfResult intermediate_scattering(RingIntensitySeries const& series, std::span<std::size_t const> lags)
{
    if (!series.has_amplitudes()) throw InsufficientData("intermediate_scattering: series carries no amplitudes");
    std::size_t const T = series.frames();
    std::size_t const np = series.pixels();
    auto lag_value = [&](std::size_t lag) -> Complex {
        if (T <= lag) return {kNaN, kNaN};
        std::vector<Complex> acc(np);
        for (std::size_t t = 0; t + lag < T; ++t) {
            Complex const* a = series.amplitude.data() + t * np;
            Complex const* b = series.amplitude.data() + (t + lag) * np;
            for (std::size_t p = 0; p < np; ++p) acc[p] += a[p] * std::conj(b[p]);
        }
        Complex sum{};
        for (std::size_t p = 0; p < np; ++p) sum += acc[p] / (double(T - lag) * series.sum_f_squared[p]);
        return sum / double(np);
    };
    IsfResult out;
    Complex const f0 = lag_value(0);
    for (std::size_t lag : lags) {
        Complex const f = lag == 0 ? f0 : lag_value(lag);
        out.lags.push_back(lag);
        out.tau.push_back(double(lag) * series.frame_interval);
        out.f.push_back(f);
        out.f_hat.push_back(f / f0.real());
        if (!std::isnan(f.imag()))
            out.max_imag_residual = std::max(out.max_imag_residual, std::abs(f.imag()) / f0.real());
    }
    return out;
}

CorrelationResult correlate(RingIntensitySeries const& series, std::span<std::size_t const> lags)
{
    CorrelationResult out = g2(series, lags);
    if (!series.has_amplitudes()) return out;
    std::size_t zero = 0;
    IsfResult const isf = intermediate_scattering(series, std::span<std::size_t const>(&zero, 1));
    IsfResult const full = intermediate_scattering(series, lags);
    out.f0 = isf.f[0].real();
    out.max_imag_residual = full.max_imag_residual;
    for (Complex const& fh : full.f_hat) {
        out.isf.push_back(fh.real());
        out.isf_imag.push_back(fh.imag());
        out.isf_sq.push_back(fh.real() * fh.real());
    }
    return out;
}

// ---- contrast ------------------------------------------------------------------

double contrast_ring(std::span<double const> pixels)
{
    if (pixels.size() < 2) throw InsufficientData("contrast_ring: need at least two pixels");
    double mean = 0.0;
    for (double v : pixels) mean += v;
    mean /= double(pixels.size());
    if (!(mean > 0.0)) throw InsufficientData("contrast_ring: ring mean intensity is zero");
    double var = 0.0;
    for (double v : pixels) var += (v - mean) * (v - mean);
    var /= double(pixels.size());
    return var / (mean * mean);
}

namespace {

ContrastEstimate mean_and_error(std::vector<double> const& values)
{
    ContrastEstimate e;
    e.samples = values.size();
    double m = 0.0;
    for (double v : values) m += v;
    m /= double(values.size());
    e.value = m;
    if (values.size() > 1) {
        double var = 0.0;
        for (double v : values) var += (v - m) * (v - m);
        var /= double(values.size() - 1);
        e.std_error = std::sqrt(var / double(values.size()));
    }
    return e;
}

} // namespace

ContrastEstimate contrast_ring(RingIntensitySeries const& series)
{
    if (series.frames() == 0) throw InsufficientData("contrast_ring: empty series");
    std::vector<double> beta;
    for (std::size_t t = 0; t < series.frames(); ++t) beta.push_back(contrast_ring(series.row(t)));
    return mean_and_error(beta);
}

ContrastEstimate contrast_time(RingIntensitySeries const& series)
{
    std::size_t const T = series.frames();
    std::size_t const np = series.pixels();
    if (T < 2) throw InsufficientData("contrast_time: need at least two frames");
    std::vector<double> mean(np, 0.0), sq(np, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        auto r = series.row(t);
        for (std::size_t p = 0; p < np; ++p) {
            mean[p] += r[p];
            sq[p] += r[p] * r[p];
        }
    }
    std::vector<double> beta;
    for (std::size_t p = 0; p < np; ++p) {
        double const m = mean[p] / double(T);
        if (!(m > 0.0)) continue;
        beta.push_back(sq[p] / double(T) / (m * m) - 1.0);
    }
    if (beta.empty()) throw InsufficientData("contrast_time: every pixel has zero mean intensity");
    return mean_and_error(beta);
}

// ---- histograms -------------------------------------------------------------

std::vector<double> normalized_intensities(RingIntensitySeries const& series)
{
    std::vector<double> kappa;
    kappa.reserve(series.intensity.size());
    for (std::size_t t = 0; t < series.frames(); ++t) {
        auto r = series.row(t);
        double mean = 0.0;
        for (double v : r) mean += v;
        mean /= double(r.size());
        if (!(mean > 0.0)) throw InsufficientData("normalized_intensities: zero ring mean");
        for (double v : r) kappa.push_back(v / mean);
    }
    return kappa;
}

double erlang_pdf(double kappa, double m)
{
    if (kappa < 0.0) return 0.0;
    // unit-mean Erlang: rate m
    return std::exp(m * std::log(m) + (m - 1.0) * std::log(kappa) - m * kappa - std::lgamma(m));
}

double erlang_cdf(double kappa, double m)
{
    return kappa <= 0.0 ? 0.0 : boost::math::gamma_p(m, m * kappa);
}

double HistogramFit::erlang_density(double kappa) const
{
    return erlang_pdf(kappa, m_reference);
}

HistogramFit intensity_histogram(std::span<double const> kappa, std::size_t n_bins, double kappa_max,
                                 std::optional<double> m_reference)
{
    if (kappa.size() < 100) throw InsufficientData("intensity_histogram: need at least 100 samples");
    if (n_bins < 2 || !(kappa_max > 0.0)) throw ArgumentError("intensity_histogram: bad binning");
    HistogramFit h;
    h.samples = kappa.size();
    double const n = double(kappa.size());
    for (double k : kappa) h.mean += k;
    h.mean /= n;
    for (double k : kappa) h.variance += (k - h.mean) * (k - h.mean);
    h.variance /= n;
    h.m_hat = h.mean * h.mean / h.variance;
    h.m_rounded = std::max<std::size_t>(1, std::size_t(std::lround(h.m_hat)));
    h.m_reference = m_reference ? *m_reference : double(h.m_rounded);

    double const width = kappa_max / double(n_bins);
    for (std::size_t b = 0; b <= n_bins; ++b) h.edges.push_back(width * double(b));
    h.counts.assign(n_bins + 1, 0);
    for (double k : kappa) {
        auto b = k >= kappa_max ? n_bins : std::size_t(std::max(0.0, k) / width);
        ++h.counts[std::min(b, n_bins)];
    }
    for (std::size_t b = 0; b < n_bins; ++b) h.density.push_back(double(h.counts[b]) / (n * width));

    // expected counts per bin including the open tail, then pool until each group expects >= 5
    std::vector<double> expected(n_bins + 1);
    for (std::size_t b = 0; b < n_bins; ++b)
        expected[b] = n * (erlang_cdf(h.edges[b + 1], h.m_reference) - erlang_cdf(h.edges[b], h.m_reference));
    expected[n_bins] = n * (1.0 - erlang_cdf(kappa_max, h.m_reference));

    std::vector<double> obs_groups, exp_groups;
    double o = 0.0, e = 0.0;
    for (std::size_t b = 0; b <= n_bins; ++b) {
        o += double(h.counts[b]);
        e += expected[b];
        if (e >= 5.0) {
            obs_groups.push_back(o);
            exp_groups.push_back(e);
            o = e = 0.0;
        }
    }
    if (e > 0.0 || o > 0.0) {
        if (exp_groups.empty()) {
            obs_groups.push_back(o);
            exp_groups.push_back(e);
        } else {
            obs_groups.back() += o;
            exp_groups.back() += e;
        }
    }
    for (std::size_t g = 0; g < obs_groups.size(); ++g) {
        double const d = obs_groups[g] - exp_groups[g];
        h.chi_square += d * d / exp_groups[g];
    }
    // one constraint from the total, one from normalizing κ by its mean, one more if M was estimated
    std::size_t const constraints = m_reference ? 2 : 3;
    h.dof = obs_groups.size() > constraints ? obs_groups.size() - constraints : 0;
    h.p_value = h.dof ? boost::math::cdf(boost::math::complement(boost::math::chi_squared(double(h.dof)),
                                                                 h.chi_square))
                      : kNaN;
    return h;
}

// ---- Siegert ------------------------------------------------------------------

SiegertReport siegert_check(CorrelationResult const& result, double max_tau)
{
    if (!result.has_isf()) throw InsufficientData("siegert_check: correlation carries no F̂");
    SiegertReport r;
    double sq = 0.0;
    for (std::size_t i = 0; i < result.tau.size(); ++i) {
        if (max_tau >= 0.0 && result.tau[i] > max_tau * (1.0 + 1e-12)) continue;
        if (result.flagged[i]) continue;
        double const d = std::abs(result.g2_norm[i] - result.isf_sq[i]);
        r.tau.push_back(result.tau[i]);
        r.deviation.push_back(d);
        r.max_deviation = std::max(r.max_deviation, d);
        sq += d * d;
    }
    if (!r.deviation.empty()) r.rms_deviation = std::sqrt(sq / double(r.deviation.size()));
    return r;
}

SiegertConvergence siegert_convergence(RingIntensitySeries const& series, std::span<std::size_t const> lags,
                                       std::span<std::size_t const> frame_counts, double max_tau)
{
    SiegertConvergence c;
    for (std::size_t n : frame_counts) {
        RingIntensitySeries const part = truncate_series(series, n);
        c.frames.push_back(n);
        c.max_deviation.push_back(siegert_check(correlate(part, lags), max_tau).max_deviation);
    }
    return c;
}

// ---- exposure -----------------------------------------------------------------

ContrastCurve contrast_vs_exposure(RingIntensitySeries const& series, std::span<double const> exposures)
{
    ContrastCurve c;
    c.source = ContrastCurve::Source::Intensity;
    c.m = series.superposition;
    c.beta0 = contrast_ring(series).value;
    for (double dt : exposures) {
        ContrastEstimate const b = contrast_ring(integrate_exposure(series, dt));
        c.exposure.push_back(dt);
        c.beta.push_back(b.value);
        c.beta_err.push_back(b.std_error);
        c.beta_norm.push_back(b.value / c.beta0);
    }
    return c;
}

double contrast_from_isf(std::span<double const> f_hat_sq, double step, double beta0, double exposure)
{
    if (!(step > 0.0) || !(exposure > 0.0)) throw ArgumentError("contrast_from_isf: step and Δt must be positive");
    if (f_hat_sq.empty() || double(f_hat_sq.size() - 1) * step < exposure * (1.0 - 1e-9))
        throw InsufficientData("contrast_from_isf: F̂ samples do not cover [0, Δt]");
    auto integrand = [&](double t, double v) { return (1.0 - t / exposure) * v; };
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < f_hat_sq.size(); ++i) {
        double const t0 = double(i) * step;
        if (t0 >= exposure * (1.0 - 1e-12)) break;
        double t1 = t0 + step;
        double v1 = f_hat_sq[i + 1];
        if (t1 > exposure) {
            // clip the last segment, interpolating |F̂|² linearly
            double const a = (exposure - t0) / step;
            v1 = (1.0 - a) * f_hat_sq[i] + a * f_hat_sq[i + 1];
            t1 = exposure;
        }
        integral += 0.5 * (t1 - t0) * (integrand(t0, f_hat_sq[i]) + integrand(t1, v1));
    }
    return 2.0 * beta0 * integral / exposure;
}

ContrastCurve contrast_from_isf(CorrelationResult const& result, std::span<double const> exposures)
{
    if (!result.has_isf()) throw InsufficientData("contrast_from_isf: correlation carries no F̂");
    for (std::size_t i = 0; i < result.lags.size(); ++i)
        if (result.lags[i] != i) throw ArgumentError("contrast_from_isf: lags must be 0, 1, 2, ... without gaps");
    double const step = result.tau.size() > 1 ? result.tau[1] : 0.0;
    ContrastCurve c;
    c.source = ContrastCurve::Source::Isf;
    c.beta0 = result.beta0;
    for (double dt : exposures) {
        double const b = contrast_from_isf(result.isf_sq, step, result.beta0, dt);
        c.exposure.push_back(dt);
        c.beta.push_back(b);
        c.beta_err.push_back(kNaN);
        c.beta_norm.push_back(b / result.beta0);
    }
    return c;
}

double exposure_contrast_ratio(double gamma, double exposure)
{
    double const x = 2.0 * gamma * exposure;
    if (x < 1e-4) return 1.0 - x / 3.0 + x * x / 12.0;
    return 2.0 * (std::expm1(-x) + x) / (x * x);
}

} // namespace xpcs
