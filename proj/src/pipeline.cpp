#include <xpcs/pipeline.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <locale>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include <boost/version.hpp>
#include <fftw3.h>
#include <json.hpp>
#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include <xpcs/error.hpp>
#include <xpcs/fit.hpp>
#include <xpcs/grid_io.hpp>
#include <xpcs/parallel.hpp>

namespace xpcs {

using nlohmann::json;
namespace fs = std::filesystem;

std::string sha256_hex(std::string_view data)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 computation failed");
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof(buf), "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

// ---- output collector -----------------------------------------------------------

OutputCollector::OutputCollector(fs::path dir, std::string command)
  : dir_(std::move(dir))
  , command_(std::move(command))
{
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory '" + dir_.string() + "': " + ec.message());
}

void OutputCollector::write(std::string const& name, std::string_view bytes)
{
    fs::path const path = dir_ / name;
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), std::streamsize(bytes.size()));
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    files_.push_back(name);
    checksums_.push_back(sha256_hex(bytes));
}

void OutputCollector::finish(PipelineConfig const& config)
{
    std::time_t const now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    json prov = {{"command", command_},
                 {"version", kVersion},
                 {"created", stamp},
                 {"seed", config.seed},
                 {"threads", config.threads ? config.threads : default_thread_count()},
                 {"hardware_threads", std::thread::hardware_concurrency()},
                 {"libraries",
                  {{"fftw", std::string(fftw_version)}, {"boost", BOOST_LIB_VERSION}, {"openssl", OPENSSL_VERSION_TEXT}}},
                 {"compiler", __VERSION__},
                 {"config", config_to_json(config)},
                 {"warnings", warnings_}};
    write("provenance.json", prov.dump(2) + "\n");

    json files = json::array();
    for (std::size_t i = 0; i < files_.size(); ++i) files.push_back({{"path", files_[i]}, {"sha256", checksums_[i]}});
    std::string const manifest = json{{"command", command_}, {"files", files}}.dump(2) + "\n";
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    out << manifest;
    if (!out) throw IoError("cannot write manifest");
}

namespace {

fs::path output_dir(PipelineConfig const& config)
{
    fs::path p(config.output);
    if (p.is_relative())
        if (char const* root = std::getenv("XPCS_OUTPUT_ROOT"); root && *root) p = fs::path(root) / p;
    return p;
}

RunReport report_of(OutputCollector const& out, std::size_t flagged = 0)
{
    RunReport r;
    r.output_dir = out.dir().string();
    r.files = out.files();
    r.files.push_back("manifest.json");
    r.warnings = out.warnings();
    r.flagged_fits = flagged;
    return r;
}

/// CSV stream with '.' decimals regardless of the global locale.
std::ostringstream csv_stream()
{
    std::ostringstream s;
    s.imbue(std::locale::classic());
    s << std::setprecision(12);
    return s;
}

unsigned threads_of(PipelineConfig const& c)
{
    return c.threads ? c.threads : default_thread_count();
}

std::vector<std::size_t> config_lags(PipelineConfig const& c, RingIntensitySeries const& s)
{
    if (!c.tau.empty()) {
        auto lags = lags_from_times(s, c.tau);
        if (std::find(lags.begin(), lags.end(), std::size_t{0}) == lags.end()) lags.insert(lags.begin(), 0);
        return lags;
    }
    std::size_t const top = std::min(c.max_lag, s.frames() >= 2 ? s.frames() - 2 : 0);
    std::vector<std::size_t> lags(top + 1);
    for (std::size_t i = 0; i <= top; ++i) lags[i] = i;
    return lags;
}

std::vector<RingIntensitySeries> config_series(PipelineConfig const& c, Trajectory const& traj,
                                               std::vector<QRing> const& rings, bool keep_amplitudes)
{
    FormFactorModel const model = c.form_factor_model();
    if (c.method == "direct") {
        DirectOptions opt;
        opt.threads = threads_of(c);
        return ring_series_direct(traj, model, rings, keep_amplitudes, opt);
    }
    FftScatterer const scatterer(c.grid_params(traj.box_length()), model);
    return ring_series_fft(traj, scatterer, rings, keep_amplitudes, threads_of(c));
}

std::string field_bytes(SpeckleField const& f)
{
    std::ostringstream s(std::ios::binary);
    write_speckle_field(f, s);
    return s.str();
}

std::string image_csv(DetectorImage const& img)
{
    auto s = csv_stream();
    img.write_csv(s);
    return s.str();
}

char const* frame_name_format() { return "fields/frame_%06zu.xgrd"; }

std::string frame_name(std::size_t i)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), frame_name_format(), i);
    return buf;
}

} // namespace

// ---- inputs -----------------------------------------------------------------

Trajectory load_input(PipelineConfig const& c)
{
    Trajectory traj;
    if (c.input.path) {
        LammpsDumpOptions opt;
        opt.timestep_ps = c.input.timestep_ps;
        traj = load_trajectory(*c.input.path, c.input.format, opt);
    } else {
        GeneratorSpec const& g = *c.input.generator;
        if (g.kind == "brownian")
            traj = generate_brownian(g.atoms, g.box_length, g.diffusivity, g.dt, g.frames, c.seed);
        else if (g.kind == "ideal_gas")
            traj = generate_ideal_gas(g.atoms, g.box_length, g.frames, c.seed, g.dt);
        else
            traj = generate_simple_cubic(g.cells, g.lattice_constant, g.frames, g.dt);
    }
    if (c.input.tracers) {
        if (*c.input.tracers > traj.atom_count())
            throw ConfigError("input.tracers exceeds the atom count " + std::to_string(traj.atom_count()));
        traj = select_tracers(traj, *c.input.tracers, c.seed);
    }
    return traj;
}

std::vector<QRing> config_rings(PipelineConfig const& c, double box_length)
{
    if (c.rings.empty()) throw ConfigError("rings: at least one q ring is required");
    ReciprocalLattice const lat(c.n_grid, box_length);
    std::vector<QRing> rings;
    for (auto const& r : c.rings) rings.push_back(q_ring_mask(lat, r.q, r.dq));
    return rings;
}

// ---- speckle ----------------------------------------------------------------

RunReport cmd_speckle(PipelineConfig const& c)
{
    c.validate_all();
    Trajectory const traj = load_input(c);
    OutputCollector out(output_dir(c), "speckle");
    GridParams const params = c.grid_params(traj.box_length());
    FormFactorModel const model = c.form_factor_model();
    ReciprocalLattice const lat(params);
    unsigned const threads = threads_of(c);
    std::optional<FftScatterer> scatterer;
    if (c.method != "direct") scatterer.emplace(params, model);

    auto compute = [&](Frame const& f) {
        if (scatterer) return scatterer->intensity(f);
        DirectOptions opt;
        opt.threads = 1;
        return intensity_direct_grid(f, lat, model, opt);
    };

    std::size_t const avg_frames = c.ewald ? std::min(c.ewald->average_frames, traj.size()) : 0;
    std::optional<SpeckleField> sum;
    json frames = json::array();
    // batches of `threads` frames are computed together and then written in order
    for (std::size_t start = 0; start < traj.size(); start += threads) {
        std::size_t const count = std::min<std::size_t>(threads, traj.size() - start);
        std::vector<SpeckleField> batch(count);
        parallel_for(count, threads, [&](std::size_t i) { batch[i] = compute(traj.frame(start + i)); });
        for (std::size_t i = 0; i < count; ++i) {
            std::size_t const t = start + i;
            if (c.write_fields) {
                out.write(frame_name(t), field_bytes(batch[i]));
                frames.push_back({{"frame", t}, {"time", batch[i].time()}, {"file", frame_name(t)}});
            }
            if (c.ewald && t == 0)
                out.write("ewald_frame0.csv",
                          image_csv(ewald_slice(batch[i], c.ewald->wavelength, c.ewald->beam,
                                                {c.ewald->pixels, c.ewald->half_angle})));
            if (t < avg_frames) {
                if (!sum) sum = batch[i];
                else
                    for (std::size_t k = 0; k < sum->half_values().size(); ++k) {
                        sum->half_values()[k] += batch[i].half_values()[k];
                        sum->half_mask()[k] = sum->half_mask()[k] && batch[i].half_mask()[k];
                    }
            }
        }
    }
    if (sum) {
        for (double& v : sum->half_values()) v /= double(avg_frames);
        out.write("ewald_average.csv", image_csv(ewald_slice(*sum, c.ewald->wavelength, c.ewald->beam,
                                                             {c.ewald->pixels, c.ewald->half_angle})));
    }
    if (c.method == "both") {
        // per-q comparison of the two methods on the first frame, inside the band sphere
        SpeckleField const fft = scatterer->intensity(traj.frame(0));
        DirectOptions opt;
        opt.threads = threads;
        SpeckleField const direct = intensity_direct_grid(traj.frame(0), lat, model, opt);
        auto s = csv_stream();
        s << "mx,my,mz,q,i_direct,i_fft,rel_err\n";
        std::size_t const n = lat.n_grid();
        for (std::size_t iz = 0; iz < n; ++iz)
            for (std::size_t iy = 0; iy < n; ++iy)
                for (std::size_t ix = 0; ix < n / 2 + 1; ++ix) {
                    double const q = lat.magnitude(ix, iy, iz);
                    if (q > lat.band_edge() || !fft.resolved(ix, iy, iz)) continue;
                    double const a = direct.at(ix, iy, iz);
                    double const b = fft.at(ix, iy, iz);
                    s << lat.frequency(ix) << ',' << lat.frequency(iy) << ',' << lat.frequency(iz) << ',' << q << ','
                      << a << ',' << b << ',' << (a > 0.0 ? std::abs(b - a) / a : 0.0) << '\n';
                }
        out.write("comparison.csv", s.str());
    }
    out.write("frames.json", json{{"n_grid", params.n_grid},
                                  {"box_length", params.box_length},
                                  {"eta", params.eta},
                                  {"kernel", params.kernel},
                                  {"method", c.method},
                                  {"frames", frames}}
                                 .dump(2) +
                                 "\n");
    out.finish(c);
    return report_of(out);
}

// ---- correlate ----------------------------------------------------------------

RunReport cmd_correlate(PipelineConfig const& c)
{
    c.validate_all();
    Trajectory const traj = load_input(c);
    if (traj.size() < 2) throw InsufficientData("correlate: need at least two frames");
    OutputCollector out(output_dir(c), "correlate");
    auto const rings = config_rings(c, traj.box_length());
    auto const series = config_series(c, traj, rings, true);

    auto summary = csv_stream();
    summary << "ring,q,dq,pixels,beta0,siegert_max,siegert_rms,isf_imag_max\n";
    auto conv = csv_stream();
    conv << "ring,frames,siegert_max\n";
    for (std::size_t r = 0; r < series.size(); ++r) {
        auto const lags = config_lags(c, series[r]);
        CorrelationResult const res = correlate(series[r], lags);
        auto s = csv_stream();
        s << "tau_ps,g2,g2_norm,isf_re,isf_im,isf_sq,n_samples,flagged\n";
        for (std::size_t i = 0; i < res.tau.size(); ++i)
            s << res.tau[i] << ',' << res.g2[i] << ',' << res.g2_norm[i] << ',' << res.isf[i] << ','
              << res.isf_imag[i] << ',' << res.isf_sq[i] << ',' << res.n_samples[i] << ',' << int(res.flagged[i])
              << '\n';
        out.write("g2_ring" + std::to_string(r) + ".csv", s.str());
        SiegertReport const sg = siegert_check(res);
        summary << r << ',' << rings[r].q << ',' << rings[r].dq << ',' << rings[r].size() << ',' << res.beta0 << ','
                << sg.max_deviation << ',' << sg.rms_deviation << ',' << res.max_imag_residual << '\n';
        if (res.max_imag_residual > 1e-3)
            out.warn("ring " + std::to_string(r) + ": imaginary part of F reaches " +
                     std::to_string(res.max_imag_residual) + " of F(0)");
        std::vector<std::size_t> counts;
        std::size_t const T = series[r].frames();
        for (std::size_t d : {8u, 4u, 2u, 1u})
            if (T / d > lags.back() + 1) counts.push_back(T / d);
        if (!counts.empty()) {
            SiegertConvergence const cv = siegert_convergence(series[r], lags, counts);
            for (std::size_t i = 0; i < cv.frames.size(); ++i)
                conv << r << ',' << cv.frames[i] << ',' << cv.max_deviation[i] << '\n';
        }
    }
    out.write("siegert.csv", summary.str());
    out.write("siegert_convergence.csv", conv.str());
    out.finish(c);
    return report_of(out);
}

// ---- contrast -------------------------------------------------------------------

RunReport cmd_contrast(PipelineConfig const& c)
{
    c.validate_all();
    Trajectory const traj = load_input(c);
    OutputCollector out(output_dir(c), "contrast");
    auto const rings = config_rings(c, traj.box_length());
    bool const want_isf = !c.exposures.empty();
    auto const series = config_series(c, traj, rings, want_isf);

    auto contrast = csv_stream();
    contrast << "ring,q,M,beta_ring,beta_ring_err,beta0_time,beta0_time_err,inverse_M\n";
    auto hist_summary = csv_stream();
    hist_summary << "ring,q,M,samples,m_hat,m_rounded,chi_square,dof,p_value\n";
    auto exposure = csv_stream();
    exposure << "ring,q,M,source,dt_ps,beta,beta_err,beta_norm\n";
    auto master = csv_stream();
    master << "ring,dt_ps";
    for (auto m : c.m) master << ",beta_norm_M" << m;
    master << ",spread\n";

    for (std::size_t r = 0; r < series.size(); ++r) {
        double const q = rings[r].q;
        for (std::size_t m : c.m) {
            RingIntensitySeries const sm = m == 1 ? series[r] : superpose_frames(series[r], m, c.separation);
            ContrastEstimate const br = contrast_ring(sm);
            contrast << r << ',' << q << ',' << m << ',' << br.value << ',' << br.std_error << ',';
            if (sm.frames() >= 2) {
                ContrastEstimate const bt = contrast_time(sm);
                contrast << bt.value << ',' << bt.std_error;
            } else {
                contrast << "nan,nan";
            }
            contrast << ',' << 1.0 / double(m) << '\n';

            auto const kappa = normalized_intensities(sm);
            if (kappa.size() < 100) {
                out.warn("ring " + std::to_string(r) + ", M=" + std::to_string(m) +
                         ": fewer than 100 samples, histogram skipped");
                continue;
            }
            HistogramFit const h = intensity_histogram(kappa, c.histogram.bins, c.histogram.kappa_max);
            hist_summary << r << ',' << q << ',' << m << ',' << h.samples << ',' << h.m_hat << ',' << h.m_rounded
                         << ',' << h.chi_square << ',' << h.dof << ',' << h.p_value << '\n';
            auto hs = csv_stream();
            hs << "kappa,density,erlang_fit\n";
            for (std::size_t b = 0; b < h.density.size(); ++b) {
                double const k = 0.5 * (h.edges[b] + h.edges[b + 1]);
                hs << k << ',' << h.density[b] << ',' << h.erlang_density(k) << '\n';
            }
            out.write("histogram_ring" + std::to_string(r) + "_M" + std::to_string(m) + ".csv", hs.str());
        }

        if (c.exposures.empty()) continue;
        std::vector<ContrastCurve> curves;
        for (std::size_t m : c.m) {
            RingIntensitySeries const sm = m == 1 ? series[r] : superpose_segments(series[r], m);
            curves.push_back(contrast_vs_exposure(sm, c.exposures));
            auto const& cv = curves.back();
            for (std::size_t i = 0; i < cv.exposure.size(); ++i)
                exposure << r << ',' << q << ',' << m << ",intensity," << cv.exposure[i] << ',' << cv.beta[i] << ','
                         << cv.beta_err[i] << ',' << cv.beta_norm[i] << '\n';
        }
        double const longest = *std::max_element(c.exposures.begin(), c.exposures.end());
        std::size_t const top = std::size_t(std::llround(longest / series[r].frame_interval));
        if (top + 2 <= series[r].frames()) {
            std::vector<std::size_t> lags(top + 1);
            for (std::size_t i = 0; i <= top; ++i) lags[i] = i;
            ContrastCurve const iso = contrast_from_isf(correlate(series[r], lags), c.exposures);
            for (std::size_t i = 0; i < iso.exposure.size(); ++i)
                exposure << r << ',' << q << ",1,isf," << iso.exposure[i] << ',' << iso.beta[i] << ",nan,"
                         << iso.beta_norm[i] << '\n';
        } else {
            out.warn("ring " + std::to_string(r) + ": series too short for the F̂-based contrast");
        }
        for (std::size_t i = 0; i < c.exposures.size(); ++i) {
            master << r << ',' << c.exposures[i];
            double lo = INFINITY, hi = -INFINITY, mean = 0.0;
            for (auto const& cv : curves) {
                master << ',' << cv.beta_norm[i];
                lo = std::min(lo, cv.beta_norm[i]);
                hi = std::max(hi, cv.beta_norm[i]);
                mean += cv.beta_norm[i] / double(curves.size());
            }
            master << ',' << (hi - lo) / mean << '\n';
        }
    }
    out.write("contrast.csv", contrast.str());
    out.write("histogram_summary.csv", hist_summary.str());
    if (!c.exposures.empty()) {
        out.write("exposure.csv", exposure.str());
        out.write("master_curve.csv", master.str());
    }
    out.finish(c);
    return report_of(out);
}

// ---- fit --------------------------------------------------------------------------

RunReport cmd_fit(PipelineConfig const& c)
{
    c.validate_all();
    Trajectory const traj = load_input(c);
    OutputCollector out(output_dir(c), "fit");
    auto const rings = config_rings(c, traj.box_length());
    auto const series = config_series(c, traj, rings, false);

    DecayFitOptions opt;
    opt.window.tau_lo = c.fit.tau_lo;
    opt.window.tau_hi = c.fit.tau_hi;
    opt.window.value_lo = c.fit.value_lo;
    opt.window.value_hi = c.fit.value_hi;
    opt.log_domain = c.fit.log_domain;

    std::size_t flagged = 0;
    std::vector<DecayFit> fits;
    std::vector<double> qs;
    auto table = csv_stream();
    table << "q,q2,gamma,gamma_err,stretch,tau_lo,tau_hi,points,flagged\n";
    for (std::size_t r = 0; r < series.size(); ++r) {
        auto const lags = config_lags(c, series[r]);
        CorrelationResult const res = g2(series[r], lags);
        DecayFit f = c.fit.stretched ? fit_stretched(res.tau, res.g2_norm, opt) : fit_exponential(res.tau, res.g2_norm, opt);
        if (f.flagged) {
            ++flagged;
            out.warn("ring q=" + std::to_string(rings[r].q) + ": " + f.message);
        }
        double const q = rings[r].q;
        table << q << ',' << q * q << ',' << f.gamma << ',' << f.gamma_err << ',' << f.stretch << ',' << f.tau_lo << ','
              << f.tau_hi << ',' << f.points << ',' << int(f.flagged) << '\n';
        fits.push_back(f);
        qs.push_back(q);
    }
    out.write("dispersion.csv", table.str());

    std::ostringstream summary;
    summary.imbue(std::locale::classic());
    summary << std::setprecision(8);
    summary << "fit window: value in [" << c.fit.value_lo << ", " << c.fit.value_hi << "]";
    if (c.fit.tau_lo || c.fit.tau_hi) summary << " (overridden by explicit tau range)";
    summary << "\nmodel: " << (c.fit.stretched ? "exp(-2 (Gamma tau)^gamma)" : "exp(-2 Gamma tau)") << "\n";
    if (qs.size() >= 3) {
        DispersionCurve const curve = dispersion(qs, fits);
        if (curve.gamma0) {
            summary << "Gamma0: " << *curve.gamma0 << " 1/ps at q_min = " << *curve.q_min << " 1/A\n";
            summary << "Gamma0/q_min^2: " << *curve.rough_diffusivity() << " A^2/ps\n";
        } else {
            summary << "Gamma0: unset (" << curve.warning << ")\n";
            out.warn(curve.warning);
        }
        DiffusivityMode const mode = c.fit.mode == "low_q" ? DiffusivityMode::LowQ : DiffusivityMode::Quartic;
        try {
            DiffusivityFit const d = fit_diffusivity(curve, mode, c.fit.q_cutoff);
            summary << "D: " << d.d << " +- " << d.d_err << " A^2/ps (" << d.d_um2_per_s() << " um^2/s)\n";
            summary << "D2: " << d.d2 << " +- " << d.d2_err << " A^4/ps\n";
            summary << "q range: [" << d.q_lo << ", " << d.q_hi << "], points " << d.points
                    << ", relative rms residual " << d.relative_rms << "\n";
            if (d.flagged) {
                ++flagged;
                out.warn(d.message);
            }
        } catch (InsufficientData const& e) {
            out.warn(e.what());
            summary << "D: not fitted (" << e.what() << ")\n";
        }
    } else {
        summary << "dispersion: needs at least 3 rings\n";
    }
    if (traj.has_unwrapped() && traj.size() >= 4) {
        MsdCurve const msd = mean_square_displacement(traj, traj.size() / 2);
        summary << "MSD D: " << msd.diffusivity << " A^2/ps (" << msd.diffusivity_um2_per_s() << " um^2/s)\n";
    }
    out.write("fit_summary.txt", summary.str());
    out.finish(c);
    return report_of(out, flagged);
}

// ---- bench ----------------------------------------------------------------------

Frame random_frame(std::size_t n, double box_length, std::uint64_t seed)
{
    Trajectory t = generate_ideal_gas(n, box_length, 1, seed);
    return t.frame(0);
}

std::vector<LatticePoint> centred_grid_points(std::size_t m, bool slice)
{
    long const h = long(m / 2);
    long const lo = -h, hi = long(m) - 1 - h;
    std::vector<LatticePoint> pts;
    for (long z = slice ? 0 : lo; z <= (slice ? 0 : hi); ++z)
        for (long y = lo; y <= hi; ++y)
            for (long x = lo; x <= hi; ++x) pts.push_back({x, y, z});
    return pts;
}

namespace {

template <typename Fn>
double seconds_per_call(Fn&& fn, std::size_t repeats)
{
    auto const t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < repeats; ++i) fn();
    auto const t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count() / double(repeats);
}

} // namespace

BenchResult bench_direct(std::span<Frame const> frames, std::vector<LatticePoint> const& points, DirectKernel kernel,
                         unsigned threads, std::size_t repeats, std::string label)
{
    if (frames.empty()) throw ArgumentError("bench_direct: no frames");
    DirectOptions opt{kernel, threads};
    FormFactorModel const model = FormFactorModel::unit();
    std::size_t next = 0;
    double const s = seconds_per_call(
        [&] {
            (void)intensity_direct(frames[next], std::span<LatticePoint const>(points), model, opt);
            next = (next + 1) % frames.size();
        },
        repeats);
    return {std::move(label), frames[0].size(), points.size(), s};
}

BenchResult bench_direct(Frame const& frame, std::vector<LatticePoint> const& points, DirectKernel kernel,
                         unsigned threads, std::size_t repeats, std::string label)
{
    return bench_direct(std::span<Frame const>(&frame, 1), points, kernel, threads, repeats, std::move(label));
}

std::vector<Frame> random_frames(std::size_t count, std::size_t n, double box_length, std::uint64_t seed)
{
    Trajectory const t = generate_ideal_gas(n, box_length, count, seed);
    return t.frames();
}

BenchResult bench_fft(Frame const& frame, std::size_t n_grid, std::size_t repeats)
{
    GridParams const p = GridParams::matched(n_grid, frame.box_length);
    FftScatterer const sc(p, FormFactorModel::unit());
    double const s = seconds_per_call([&] { (void)sc.intensity(frame); }, repeats);
    return {"fft_full_grid", frame.size(), n_grid * n_grid * n_grid, s};
}

RunReport cmd_bench(PipelineConfig const& c)
{
    c.validate_all();
    OutputCollector out(output_dir(c), "bench");
    unsigned const threads = threads_of(c);
    auto s = csv_stream();
    s << "label,atoms,points,seconds_per_frame\n";
    auto row = [&](BenchResult const& b) {
        s << b.label << ',' << b.atoms << ',' << b.points << ',' << b.wall_seconds << '\n';
    };
    for (std::size_t n : c.bench.atoms) {
        // same number density as 4000 atoms in a 59.19 Å box
        double const L = 59.19 * std::cbrt(double(n) / 4000.0);
        Frame const f = random_frame(n, L, c.seed);
        std::vector<LatticePoint> const single{{0, 14, -11}};
        // distinct frames: repeating one frame lets the branch predictor learn libm's
        // argument-range branches, which flatters small atom counts
        std::vector<Frame> const distinct = random_frames(kSinglePointFrames, n, L, c.seed);
        row(bench_direct(distinct, single, DirectKernel::PerPoint, 1, 200 * c.bench.repeats, "direct_single_point"));
        row(bench_direct(f, centred_grid_points(c.bench.direct_grid, true), DirectKernel::PerPoint, threads,
                         c.bench.repeats, "direct_2d_slice"));
        if (c.bench.include_direct_grid)
            row(bench_direct(f, centred_grid_points(c.bench.direct_grid, false), DirectKernel::PerPoint, threads,
                             c.bench.repeats, "direct_3d_grid"));
        row(bench_fft(f, c.bench.fft_grid, c.bench.repeats));
    }
    out.write("bench.csv", s.str());
    out.write("machine.json", json{{"threads", threads},
                                   {"hardware_threads", std::thread::hardware_concurrency()},
                                   {"compiler", __VERSION__},
                                   {"fftw", std::string(fftw_version)}}
                                      .dump(2) +
                                  "\n");
    out.finish(c);
    return report_of(out);
}

// ---- generate / validate --------------------------------------------------------------

RunReport cmd_generate(PipelineConfig const& c)
{
    c.validate_all();
    Trajectory const traj = load_input(c);
    OutputCollector out(output_dir(c), "generate");
    std::ostringstream xyz;
    xyz.imbue(std::locale::classic());
    write_xyz(traj, xyz);
    out.write("trajectory.xyz", xyz.str());
    std::ostringstream bin(std::ios::binary);
    write_binary_trajectory(traj, bin);
    out.write("trajectory.xtrj", bin.str());
    out.finish(c);
    return report_of(out);
}

RunReport cmd_validate(PipelineConfig const& c)
{
    c.validate_all();
    Trajectory const traj = load_input(c);
    OutputCollector out(output_dir(c), "validate");
    double const r_max = std::min(c.validate.r_max, 0.5 * traj.box_length());
    if (r_max < c.validate.r_max) out.warn("validate.r_max clipped to L/2");
    PairDistribution const g = pair_distribution(traj, r_max, c.validate.r_bins);
    auto gs = csv_stream();
    gs << "r,g\n";
    for (std::size_t i = 0; i < g.r.size(); ++i) gs << g.r[i] << ',' << g.g[i] << '\n';
    out.write("gr.csv", gs.str());

    GridParams const params = c.grid_params(traj.box_length());
    FftScatterer const sc(params, c.form_factor_model());
    std::vector<double> edges = c.validate.q_edges;
    if (edges.empty()) {
        double const top = sc.lattice().band_edge();
        for (std::size_t i = 0; i <= 40; ++i) edges.push_back(top * double(i) / 40.0);
    }
    std::vector<double> sum(edges.size() - 1, 0.0);
    std::vector<std::size_t> count(edges.size() - 1, 0);
    for (Frame const& f : traj.frames()) {
        SpeckleField const field = sc.intensity(f);
        StructureFactorCurve const s = structure_factor_angular_avg(std::span<SpeckleField const>(&field, 1), edges);
        for (std::size_t b = 0; b < sum.size(); ++b)
            if (s.count[b]) {
                sum[b] += s.s[b] * double(s.count[b]);
                count[b] += s.count[b];
            }
    }
    auto ss = csv_stream();
    ss << "q,s,points\n";
    for (std::size_t b = 0; b < sum.size(); ++b)
        ss << 0.5 * (edges[b] + edges[b + 1]) << ',' << (count[b] ? sum[b] / double(count[b]) : NAN) << ','
           << count[b] << '\n';
    out.write("sq.csv", ss.str());
    out.finish(c);
    return report_of(out);
}

} // namespace xpcs
