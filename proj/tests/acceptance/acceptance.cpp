// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.
//
//   xpcs_acceptance            run everything
//   xpcs_acceptance C3 C8      run a subset
//
// Exit status is nonzero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <xpcs/fit.hpp>
#include <xpcs/grid.hpp>
#include <xpcs/parallel.hpp>
#include <xpcs/pipeline.hpp>
#include <xpcs/scatter.hpp>
#include <xpcs/stats.hpp>
#include <xpcs/trajectory.hpp>

using namespace xpcs;

namespace {

// ---- pinned tolerances ----------------------------------------------------------

constexpr double kC1RelTol = 1e-10;          // relative to max(|I|, Σf²)
constexpr double kC2FinalTol = 1e-4;
constexpr double kC3ContrastTol = 0.05;
constexpr double kC3MinP = 0.01;
constexpr std::size_t kC3MinSamples = 10000;
constexpr double kC4RelTol = 0.10;
constexpr double kC5Sigmas = 3.0;
constexpr double kC6MaxDev = 0.05;
constexpr double kC6CorrelationTimes = 3.0;  // in units of 1/Γ
constexpr double kC7DTol = 0.10;
constexpr double kC7MsdTol = 0.03;
constexpr double kC7LinearRms = 0.10;        // relative rms of Γ = Dq² over q <= 1 Å⁻¹
constexpr double kC8Tol = 0.05;
constexpr unsigned kC9MinThreads = 8;
constexpr double kC9MinSpeedup = 50.0;
constexpr double kC9ScalingTol = 0.30;
constexpr double kC10Tol = 0.05;

// Ar-like number density, 4000 atoms in a 59.19 Å box
constexpr double kArBox = 59.19;
constexpr std::size_t kArAtoms = 4000;

struct Outcome
{
    bool pass = false;
    std::string detail;
};

std::string fmt(char const* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof(buf), f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<std::size_t> lag_range(std::size_t n)
{
    std::vector<std::size_t> l(n + 1);
    for (std::size_t i = 0; i <= n; ++i) l[i] = i;
    return l;
}

double mean_q2(QRing const& ring)
{
    double s = 0.0;
    for (std::size_t i = 0; i < ring.size(); ++i) s += ring.magnitude(i) * ring.magnitude(i);
    return s / double(ring.size());
}

// ---- C1: direct sum against the O(N²) pair sum ----------------------------------------

Outcome c1()
{
    auto const t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<std::size_t> count(2, 100);
    auto const tab = FormFactorModel::tabulated(FormFactorTable::bundled());
    double const L = 12.0;
    double const dq = 2 * std::numbers::pi / L;
    long const mmax = long(3.0 / dq);
    std::vector<LatticePoint> pts;
    for (long x = -mmax; x <= mmax; ++x)
        for (long y = -mmax; y <= mmax; ++y)
            for (long z = -mmax; z <= mmax; ++z)
                if (dq * std::sqrt(double(x * x + y * y + z * z)) <= 3.0) pts.push_back({x, y, z});

    double worst = 0.0;
    std::size_t compared = 0;
    for (int f = 0; f < 20; ++f) {
        std::size_t const n = count(rng);
        Frame frame = generate_ideal_gas(n, L, 1, 1000 + f).frame(0);
        bool const mixed = f % 2 == 1;
        if (mixed) {
            auto sp = std::make_shared<std::vector<std::string>>();
            for (std::size_t i = 0; i < n; ++i) sp->push_back(i % 3 == 0 ? "O" : "Ar");
            frame.species = sp;
        }
        FormFactorModel const model = mixed ? tab : FormFactorModel::unit();
        IntensityList const I = intensity_direct(frame, std::span<LatticePoint const>(pts), model);
        for (std::size_t k = 0; k < pts.size(); ++k) {
            Vec3 const q = I.q(k);
            double const qm = norm(q);
            std::vector<double> ff(n);
            for (std::size_t i = 0; i < n; ++i) ff[i] = mixed ? model.for_species(frame.species_of(i))(qm) : 1.0;
            double pair = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    Vec3 const d = frame.positions[i] - frame.positions[j];
                    pair += ff[i] * ff[j] * std::cos(q[0] * d[0] + q[1] * d[1] + q[2] * d[2]);
                }
            double const scale = std::max(std::abs(pair), I.composition.sum_f_squared(qm));
            worst = std::max(worst, std::abs(I.values[k] - pair) / scale);
            ++compared;
        }
    }
    double const secs = seconds_since(t0);
    return {worst <= kC1RelTol && secs < 60.0,
            fmt("20 frames, %zu (frame, q) pairs with |q|<=3, max rel err %.2e (tol %.0e), %.1f s", compared, worst,
                kC1RelTol, secs)};
}

// ---- C2: FFT convergence to the direct sum ---------------------------------------------

Outcome c2()
{
    auto const t0 = std::chrono::steady_clock::now();
    Frame const frame = random_frame(kArAtoms, kArBox, 202);
    Vec3 const q_nominal{0.0, 1.481, -1.164};
    double const dq = 2 * std::numbers::pi / kArBox;
    LatticePoint const m{std::lround(q_nominal[0] / dq), std::lround(q_nominal[1] / dq),
                         std::lround(q_nominal[2] / dq)};
    std::vector<LatticePoint> one{m};
    double const exact = intensity_direct(frame, std::span<LatticePoint const>(one), FormFactorModel::unit(),
                                          {DirectKernel::PerPoint, 1})
                             .values[0];
    std::vector<double> errs;
    std::string list;
    for (std::size_t n : {100u, 200u, 300u, 400u}) {
        double value;
        {
            FftScatterer const sc(GridParams::matched(n, kArBox), FormFactorModel::unit());
            value = std::norm(sc.amplitude(frame).at(m));
        }
        errs.push_back(std::abs(value - exact) / exact);
        list += fmt("%s%zu:%.2e", list.empty() ? "" : " ", n, errs.back());
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < errs.size(); ++i) decreasing = decreasing && errs[i] < errs[i - 1];
    double const secs = seconds_since(t0);
    return {decreasing && errs.back() < kC2FinalTol && secs < 300.0,
            fmt("q=(%ld,%ld,%ld)·2π/L, I=%.4g; rel err by N_grid [%s]; strictly decreasing=%s, final tol %.0e, %.0f s",
                m[0], m[1], m[2], exact, list.c_str(), decreasing ? "yes" : "no", kC2FinalTol, secs)};
}

// ---- C3-C5: ideal-gas speckle statistics --------------------------------------------------

struct GasData
{
    QRing ring_c3;
    std::vector<RingIntensitySeries> series;   // [0] C3 ring, then the C5 rings
};

GasData const& gas_data()
{
    static GasData const data = [] {
        Trajectory const traj = generate_ideal_gas(kArAtoms, kArBox, 400, 303);
        FftScatterer const sc(GridParams::matched(64, kArBox), FormFactorModel::unit());
        std::vector<QRing> rings{q_ring_mask(sc.lattice(), 1.844, 0.058).half()};
        for (double q : {1.0, 1.4, 1.8, 2.2, 2.6}) rings.push_back(q_ring_mask(sc.lattice(), q, 0.058).half());
        GasData d;
        d.ring_c3 = rings[0];
        d.series = ring_series_fft(traj, sc, rings, false, 0);
        return d;
    }();
    return data;
}

Outcome c3()
{
    RingIntensitySeries const s = truncate_series(gas_data().series[0], 40);
    auto const kappa = normalized_intensities(s);
    HistogramFit const h = intensity_histogram(kappa, 40, 6.0, 1.0);
    ContrastEstimate const beta = contrast_ring(s);
    bool const ok = kappa.size() >= kC3MinSamples && h.p_value > kC3MinP &&
                    std::abs(beta.value - 1.0) <= kC3ContrastTol;
    return {ok, fmt("ring 1.844±0.029 (half ring, %zu px) x 40 frames = %zu samples; chi2=%.1f dof=%zu p=%.3f "
                    "(need >%.2f); beta=%.4f±%.4f (need 1±%.2f)",
                    s.pixels(), kappa.size(), h.chi_square, h.dof, h.p_value, kC3MinP, beta.value, beta.std_error,
                    kC3ContrastTol)};
}

Outcome c4()
{
    RingIntensitySeries const& s = gas_data().series[0];
    bool ok = true;
    std::string detail;
    for (std::size_t m : {5u, 10u, 20u}) {
        RingIntensitySeries const sm = superpose_frames(s, m, 1);
        auto const kappa = normalized_intensities(sm);
        HistogramFit const h = intensity_histogram(kappa, 40, 3.0);
        double const beta = contrast_ring(sm).value;
        double const em = std::abs(h.m_hat / double(m) - 1.0);
        double const eb = std::abs(beta * double(m) - 1.0);
        ok = ok && em <= kC4RelTol && eb <= kC4RelTol;
        detail += fmt("%sM=%zu: M_hat=%.2f (%.1f%%), beta=%.4f vs %.4f (%.1f%%), %zu samples", detail.empty() ? "" : "; ",
                      m, h.m_hat, 100 * em, beta, 1.0 / double(m), 100 * eb, kappa.size());
    }
    return {ok, detail + fmt(" (tol %.0f%%)", 100 * kC4RelTol)};
}

Outcome c5()
{
    auto const& all = gas_data().series;
    bool ok = true;
    std::string detail;
    double worst = 0.0;
    for (std::size_t r = 1; r < all.size(); ++r) {
        ContrastEstimate const ring = contrast_ring(all[r]);
        ContrastEstimate const time = contrast_time(all[r]);
        double const se = std::hypot(ring.std_error, time.std_error);
        double const z = std::abs(ring.value - time.value) / se;
        worst = std::max(worst, z);
        ok = ok && z <= kC5Sigmas;
        detail += fmt("%sq=%.1f: %.4f vs %.4f (%.1fσ)", detail.empty() ? "" : "; ", all[r].ring.q, ring.value,
                      time.value, z);
    }
    return {ok, fmt("%zu rings, 400 frames, ring beta vs time beta0: ", all.size() - 1) + detail +
                    fmt("; worst %.2fσ (tol %.0fσ)", worst, kC5Sigmas)};
}

// ---- C6-C7: Brownian dynamics -------------------------------------------------------------

constexpr double kBrownD = 0.3;
constexpr double kBrownDt = 0.1;

Trajectory const& brownian()
{
    // 2000 atoms at the Ar-like density
    static Trajectory const t = generate_brownian(2000, kArBox * std::cbrt(2000.0 / double(kArAtoms)), kBrownD,
                                                  kBrownDt, 2000, 606);
    return t;
}

Outcome c6()
{
    auto const t0 = std::chrono::steady_clock::now();
    Trajectory const& traj = brownian();
    FftScatterer const sc(GridParams::matched(64, traj.box_length()), FormFactorModel::unit());
    std::vector<QRing> rings{q_ring_mask(sc.lattice(), 1.5, 0.05)};
    auto const series = ring_series_fft(traj, sc, rings, true, 0);
    double const gamma = kBrownD * mean_q2(rings[0]);
    std::size_t const top = std::size_t(std::ceil(kC6CorrelationTimes / (gamma * kBrownDt)));
    CorrelationResult const r = correlate(series[0], lag_range(top));
    SiegertReport const s = siegert_check(r);
    return {s.max_deviation < kC6MaxDev,
            fmt("n=2000, D=0.3, 2000 frames, ring q=1.5 (%zu px); lags 0..%zu (%.0f/Gamma); beta0=%.3f; "
                "max |(g2-1)/beta0 - F^2| = %.4f, rms %.4f (tol %.2f); %.0f s",
                rings[0].size(), top, kC6CorrelationTimes, r.beta0, s.max_deviation, s.rms_deviation, kC6MaxDev,
                seconds_since(t0))};
}

Outcome c7()
{
    auto const t0 = std::chrono::steady_clock::now();
    Trajectory const& traj = brownian();
    Trajectory const tracers = select_tracers(traj, 45, 707);
    std::vector<QRing> rings;
    for (double q = 0.3; q < 2.0 + 1e-9; q += 0.1) rings.push_back(q_ring_mask(traj.box_length(), q, 0.1).half());
    DirectOptions opt;
    opt.threads = 0;
    auto const series = ring_series_direct(tracers, FormFactorModel::unit(), rings, false, opt);

    // every lag up to 100 frames, then every 10th up to 1000
    std::vector<std::size_t> lags = lag_range(100);
    for (std::size_t l = 110; l <= 1000; l += 10) lags.push_back(l);

    std::vector<double> qs;
    std::vector<DecayFit> fits;
    std::size_t flagged = 0;
    for (auto const& s : series) {
        CorrelationResult const r = g2(s, lags);
        fits.push_back(fit_exponential(r.tau, r.g2_norm));
        flagged += fits.back().flagged;
        qs.push_back(s.ring.q);
    }
    DispersionCurve const curve = dispersion(qs, fits);
    DiffusivityFit const quartic = fit_diffusivity(curve, DiffusivityMode::Quartic);
    DiffusivityFit const low = fit_diffusivity(curve, DiffusivityMode::LowQ, 1.0 + 1e-9);
    // MSD over every atom of the run; the 45-atom subset is reported alongside
    MsdCurve const msd = mean_square_displacement(traj, 100);
    MsdCurve const msd_tracers = mean_square_displacement(tracers, 100);
    double const ed = std::abs(quartic.d / kBrownD - 1.0);
    double const em = std::abs(msd.diffusivity / kBrownD - 1.0);
    bool const ok = ed <= kC7DTol && em <= kC7MsdTol && low.relative_rms <= kC7LinearRms && !quartic.flagged &&
                    seconds_since(t0) < 600.0;
    return {ok, fmt("45 tracers, %zu rings 0.3-2.0 (%zu flagged fits); low-q Gamma=Dq^2 rel rms %.3f (tol %.2f), "
                    "D_low=%.4f; quartic D=%.4f (%.1f%%, tol %.0f%%) D2=%.4f; MSD D=%.4f (%.2f%%, tol %.0f%%), "
                    "tracer-only MSD D=%.4f; %.0f s",
                    rings.size(), flagged, low.relative_rms, kC7LinearRms, low.d, quartic.d, 100 * ed, 100 * kC7DTol,
                    quartic.d2, msd.diffusivity, 100 * em, 100 * kC7MsdTol, msd_tracers.diffusivity,
                    seconds_since(t0))};
}

// ---- C8: exposure-time contrast -----------------------------------------------------------

Outcome c8()
{
    auto const t0 = std::chrono::steady_clock::now();
    // ten independent Brownian groups; M = 1, 5, 10 sum the first M of them
    constexpr std::size_t kGroups = 10, kAtoms = 200, kFrames = 12000;
    constexpr double dt = 0.04, L = 40.0;
    QRing const ring = q_ring_mask(L, 2.0, 0.1).half();
    double const gamma = kBrownD * mean_q2(ring);
    std::vector<std::size_t> const windows{3, 5, 10, 21, 42, 104, 208};
    std::vector<double> exposures;
    for (auto w : windows) exposures.push_back(double(w) * dt);

    std::vector<RingIntensitySeries> sums;   // M = 1, 5, 10
    CorrelationResult isf;
    DirectOptions opt;
    opt.threads = 0;
    std::vector<QRing> rings{ring};
    RingIntensitySeries acc;
    for (std::size_t g = 0; g < kGroups; ++g) {
        Trajectory const traj = generate_brownian(kAtoms, L, kBrownD, dt, kFrames, 800 + g);
        auto s = ring_series_direct(traj, FormFactorModel::unit(), rings, g == 0, opt);
        if (g == 0) {
            isf = correlate(s[0], lag_range(windows.back()));
            s[0].amplitude.clear();
            acc = s[0];
        } else {
            std::vector<RingIntensitySeries> parts{acc, s[0]};
            acc = superpose_series(parts);
        }
        if (g + 1 == 1 || g + 1 == 5 || g + 1 == 10) sums.push_back(acc);
    }

    std::vector<ContrastCurve> curves;
    for (auto const& s : sums) curves.push_back(contrast_vs_exposure(s, exposures));
    ContrastCurve const from_f = contrast_from_isf(isf, exposures);

    double worst_closed = 0.0, worst_collapse = 0.0, worst_isf = 0.0;
    std::string table;
    for (std::size_t i = 0; i < exposures.size(); ++i) {
        double const closed = exposure_contrast_ratio(gamma, exposures[i]);
        double const b1 = curves[0].beta_norm[i];
        worst_closed = std::max(worst_closed, std::abs(b1 / closed - 1.0));
        double lo = INFINITY, hi = -INFINITY, mean = 0.0;
        for (auto const& c : curves) {
            lo = std::min(lo, c.beta_norm[i]);
            hi = std::max(hi, c.beta_norm[i]);
            mean += c.beta_norm[i] / double(curves.size());
        }
        worst_collapse = std::max(worst_collapse, (hi - lo) / mean);
        worst_isf = std::max(worst_isf, std::abs(from_f.beta_norm[i] / b1 - 1.0));
        table += fmt("%s%.2f:%.4f/%.4f", table.empty() ? "" : " ", gamma * exposures[i], b1, closed);
    }
    bool const ok = worst_closed <= kC8Tol && worst_collapse <= kC8Tol && worst_isf <= kC8Tol;
    return {ok, fmt("ring q=2.0 (%zu px), Gamma=%.3f/ps, dt=%.2f ps, %zu frames; GammaDt:measured/closed [%s]; "
                    "max dev closed form %.1f%%, M=1,5,10 collapse spread %.1f%%, F-quadrature vs intensity %.1f%% "
                    "(tol %.0f%%); beta0(M)=%.3f,%.3f,%.3f; %.0f s",
                    ring.size(), gamma, dt, kFrames, table.c_str(), 100 * worst_closed, 100 * worst_collapse,
                    100 * worst_isf, 100 * kC8Tol, curves[0].beta0, curves[1].beta0, curves[2].beta0,
                    seconds_since(t0))};
}

// ---- C9: performance ----------------------------------------------------------------------

double best_of(int batches, std::function<double()> const& run)
{
    double best = INFINITY;
    for (int i = 0; i < batches; ++i) best = std::min(best, run());
    return best;
}

Outcome c9()
{
    unsigned const hw = std::max(1u, std::thread::hardware_concurrency());
    unsigned const threads = default_thread_count();
    Frame const frame = random_frame(kArAtoms, kArBox, 909);

    // best of three: the first touch of fresh full-grid buffers is slow on some VMs
    BenchResult fft = bench_fft(frame, 400, 1);
    for (int i = 0; i < 2; ++i) {
        BenchResult const again = bench_fft(frame, 400, 1);
        if (again.wall_seconds < fft.wall_seconds) fft = again;
    }
    auto const grid = centred_grid_points(81, false);
    BenchResult const tab = bench_direct(frame, grid, DirectKernel::Tabulated, threads, 1, "direct_grid_tabulated");
    BenchResult const per = bench_direct(frame, grid, DirectKernel::PerPoint, threads, 1, "direct_grid_per_point");
    double const direct = std::min(tab.wall_seconds, per.wall_seconds);
    double const speedup = direct / fft.wall_seconds;

    // per-frame time over distinct frames at fixed number density
    std::vector<LatticePoint> const single{{0, 14, -11}};
    auto const small = random_frames(kSinglePointFrames, kArAtoms, kArBox, 911);
    auto const large = random_frames(kSinglePointFrames, 2 * kArAtoms, kArBox * std::cbrt(2.0), 912);
    auto single_time = [&](std::vector<Frame> const& f) {
        return best_of(5, [&] {
            return bench_direct(f, single, DirectKernel::PerPoint, 1, 20 * f.size(), "single").wall_seconds;
        });
    };
    double const t1 = single_time(small);
    double const t2 = single_time(large);
    double const scaling = t2 / t1;
    bool const linear = std::abs(scaling / 2.0 - 1.0) <= kC9ScalingTol;
    bool const enough_threads = hw >= kC9MinThreads;
    bool const ok = enough_threads && speedup >= kC9MinSpeedup && linear;
    return {ok, fmt("%u hardware thread(s), %u used (need >= %u); FFT N_grid=400: %.2f s/frame; direct 81^3: "
                    "tabulated %.2f s, per-point %.2f s; speedup %.1fx (need >= %.0fx); single point 4000 -> 8000 "
                    "atoms: %.2e -> %.2e s, ratio %.2f (need 2±%.0f%%)",
                    hw, threads, kC9MinThreads, fft.wall_seconds, tab.wall_seconds, per.wall_seconds, speedup,
                    kC9MinSpeedup, t1, t2, scaling, 100 * kC9ScalingTol)};
}

// ---- C10: validation curves -------------------------------------------------------------

Outcome c10()
{
    // ideal gas: a small box keeps q <= 3 Å⁻¹ far below the grid band edge
    Trajectory const gas = generate_ideal_gas(1000, 20.0, 400, 1010);
    PairDistribution const g = pair_distribution(gas, 10.0, 50);
    double worst_g = 0.0;
    for (std::size_t i = 2; i < g.g.size(); ++i) worst_g = std::max(worst_g, std::abs(g.g[i] - 1.0));

    FftScatterer const sc(GridParams::matched(64, 20.0), FormFactorModel::unit());
    std::vector<double> edges;
    for (double q = 0.5; q < 3.0 + 1e-9; q += 0.25) edges.push_back(q);
    std::vector<double> sum(edges.size() - 1, 0.0);
    std::vector<std::size_t> cnt(edges.size() - 1, 0);
    for (Frame const& f : gas.frames()) {
        SpeckleField const field = sc.intensity(f);
        StructureFactorCurve const s = structure_factor_angular_avg(std::span<SpeckleField const>(&field, 1), edges);
        for (std::size_t b = 0; b < sum.size(); ++b) {
            sum[b] += s.s[b] * double(s.count[b]);
            cnt[b] += s.count[b];
        }
    }
    double worst_s = 0.0;
    for (std::size_t b = 0; b < sum.size(); ++b) worst_s = std::max(worst_s, std::abs(sum[b] / double(cnt[b]) - 1.0));

    // simple cubic: 8³ cells of a = 3 Å, atoms on grid nodes of a 64³ grid
    double const a = 3.0;
    Trajectory const xtal = generate_simple_cubic(8, a, 1);
    PairDistribution const gx = pair_distribution(xtal, 12.0, 50);
    // first local maximum of the non-zero part; the √2·a shell has the same height on this binning
    std::size_t peak = 0;
    while (peak + 1 < gx.g.size() && !(gx.g[peak] > 0.0 && gx.g[peak] > gx.g[peak + 1])) ++peak;
    double const width = 12.0 / 50.0;
    bool const peak_ok = std::abs(gx.r[peak] - a) <= 0.5 * width;

    SpeckleField const ix = FftScatterer(GridParams::matched(64, 8 * a), FormFactorModel::unit())
                                .intensity(xtal.frame(0));
    double const n = double(xtal.atom_count());
    ReciprocalLattice const& lat = ix.lattice();
    std::size_t bragg = 0, bragg_ok = 0;
    double worst_off = 0.0;
    for (std::size_t iz = 0; iz < 64; ++iz)
        for (std::size_t iy = 0; iy < 64; ++iy)
            for (std::size_t i = 0; i < 64; ++i) {
                LatticePoint const m{lat.frequency(i), lat.frequency(iy), lat.frequency(iz)};
                if (std::abs(m[0]) > 31 || std::abs(m[1]) > 31 || std::abs(m[2]) > 31) continue;
                double const s = ix.at(m) / n;
                bool const on = m[0] % 8 == 0 && m[1] % 8 == 0 && m[2] % 8 == 0;
                if (on) {
                    ++bragg;
                    bragg_ok += std::abs(s / n - 1.0) < 1e-6;
                } else {
                    worst_off = std::max(worst_off, s / n);
                }
            }
    bool const ok = worst_g <= kC10Tol && worst_s <= kC10Tol && peak_ok && bragg_ok == bragg && worst_off < 1e-6;
    return {ok, fmt("ideal gas (1000 atoms, 400 frames): max |g(r)-1| beyond 2 bins %.3f, max |S(q)-1| on "
                    "0.5<=q<=3 %.3f (tol %.2f); simple cubic a=%.1f: g(r) peak at %.2f (bin %.2f), S=N at %zu/%zu "
                    "Bragg points 2π/a·(h,k,l), max off-peak S/N %.1e",
                    worst_g, worst_s, kC10Tol, a, gx.r[peak], width, bragg_ok, bragg, worst_off)};
}

} // namespace

int main(int argc, char** argv)
{
    std::vector<std::pair<std::string, std::function<Outcome()>>> const all{
        {"C1", c1}, {"C2", c2}, {"C3", c3}, {"C4", c4}, {"C5", c5},
        {"C6", c6}, {"C7", c7}, {"C8", c8}, {"C9", c9}, {"C10", c10},
    };
    std::set<std::string> const pick(argv + 1, argv + argc);
    int failures = 0;
    for (auto const& [name, fn] : all) {
        if (!pick.empty() && !pick.count(name)) continue;
        Outcome o;
        try {
            o = fn();
        } catch (std::exception const& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("%-4s %s  %s\n", name.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
    }
    return failures ? 1 : 0;
}
