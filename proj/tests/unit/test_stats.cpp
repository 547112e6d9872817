#include <doctest.h>

#include <cmath>
#include <random>

#include <xpcs/error.hpp>
#include <xpcs/stats.hpp>

using namespace xpcs;

namespace {

RingIntensitySeries blank_series(std::size_t pixels, std::size_t frames, double dt)
{
    RingIntensitySeries s;
    s.ring.box_length = 10.0;
    s.ring.q = 1.0;
    s.ring.dq = 0.1;
    for (std::size_t p = 0; p < pixels; ++p) s.ring.points.push_back({long(p) + 1, 0, 0});
    for (std::size_t t = 0; t < frames; ++t) s.times.push_back(double(t) * dt);
    s.frame_interval = dt;
    s.sum_f_squared.assign(pixels, 1.0);
    return s;
}

/// Circular complex Gaussian amplitudes with ⟨p p*(t+k)⟩ = ρ^k per pixel, so
/// F̂(k) = ρ^k and, for Gaussian statistics, g2 - 1 = ρ^{2k}.
RingIntensitySeries ar1_series(std::size_t pixels, std::size_t frames, double rho, unsigned seed, double dt = 1.0)
{
    RingIntensitySeries s = blank_series(pixels, frames, dt);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, std::sqrt(0.5));
    double const c = std::sqrt(1.0 - rho * rho);
    std::vector<Complex> p(pixels);
    for (auto& v : p) v = {n(rng), n(rng)};
    for (std::size_t t = 0; t < frames; ++t) {
        for (std::size_t i = 0; i < pixels; ++i) {
            if (t) p[i] = rho * p[i] + c * Complex{n(rng), n(rng)};
            s.amplitude.push_back(p[i]);
            s.intensity.push_back(std::norm(p[i]));
        }
    }
    return s;
}

std::vector<std::size_t> lag_range(std::size_t n)
{
    std::vector<std::size_t> l(n + 1);
    for (std::size_t i = 0; i <= n; ++i) l[i] = i;
    return l;
}

} // namespace

TEST_CASE("static speckle gives g2 identically one")
{
    RingIntensitySeries s = blank_series(50, 20, 0.5);
    std::mt19937 rng(1);
    std::exponential_distribution<double> e(1.0);
    std::vector<double> frozen(50);
    for (auto& v : frozen) v = e(rng);
    for (std::size_t t = 0; t < 20; ++t) s.intensity.insert(s.intensity.end(), frozen.begin(), frozen.end());
    auto const lags = lag_range(10);
    CorrelationResult const r = g2(s, lags);
    for (double v : r.g2) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.tau[4] == doctest::Approx(2.0));
    CHECK(r.n_samples[10] == 10);
}

TEST_CASE("g2 and F follow the Gaussian process they were drawn from")
{
    double const rho = 0.9;
    RingIntensitySeries const s = ar1_series(400, 3000, rho, 7);
    auto const lags = lag_range(20);
    CorrelationResult const r = correlate(s, lags);
    REQUIRE(r.has_isf());
    CHECK(r.beta0 == doctest::Approx(1.0).epsilon(0.03));
    for (std::size_t k = 0; k <= 20; ++k) {
        CHECK(r.g2_norm[k] == doctest::Approx(std::pow(rho, 2.0 * double(k))).epsilon(0.03).scale(1.0));
        CHECK(r.isf[k] == doctest::Approx(std::pow(rho, double(k))).epsilon(0.02).scale(1.0));
        CHECK(std::abs(r.isf_imag[k]) < 0.02);
    }
    SiegertReport const sg = siegert_check(r);
    CHECK(sg.max_deviation < 0.03);
    auto const counts = std::vector<std::size_t>{300, 3000};
    SiegertConvergence const cv = siegert_convergence(s, lags, counts);
    CHECK(cv.max_deviation[1] < cv.max_deviation[0]);
}

TEST_CASE("g2 rejects series that are too short and flags empty lags")
{
    RingIntensitySeries const one = ar1_series(5, 1, 0.5, 1);
    auto const lags = lag_range(1);
    CHECK_THROWS_AS(g2(one, lags), InsufficientData);
    RingIntensitySeries const few = ar1_series(5, 4, 0.5, 1);
    std::vector<std::size_t> long_lags{0, 3};
    CorrelationResult const r = g2(few, long_lags);
    CHECK(r.flagged[1] == 1);
    CHECK(std::isnan(r.g2[1]));
}

TEST_CASE("fully developed speckle has unit contrast over the ring and in time")
{
    RingIntensitySeries const s = ar1_series(2000, 200, 0.0, 3);
    ContrastEstimate const ring = contrast_ring(s);
    ContrastEstimate const time = contrast_time(s);
    CHECK(ring.value == doctest::Approx(1.0).epsilon(4 * ring.std_error));
    CHECK(time.value == doctest::Approx(1.0).epsilon(4 * time.std_error + 0.01));
    CHECK(ring.samples == 200);
    CHECK(time.samples == 2000);
    std::vector<double> flat(10, 3.0);
    CHECK(contrast_ring(flat) == 0.0);
}

TEST_CASE("incoherent superposition divides the contrast by M")
{
    RingIntensitySeries const s = ar1_series(1000, 200, 0.0, 4);
    for (std::size_t m : {2u, 5u}) {
        RingIntensitySeries const sm = superpose_frames(s, m, 1);
        CHECK(sm.superposition == m);
        CHECK(sm.frames() == 200 / m);
        CHECK(contrast_ring(sm).value == doctest::Approx(1.0 / double(m)).epsilon(0.05));
        RingIntensitySeries const seg = superpose_segments(s, m);
        CHECK(seg.frames() == 200 / m);
        CHECK(seg.frame_interval == s.frame_interval);
        CHECK(contrast_ring(seg).value == doctest::Approx(1.0 / double(m)).epsilon(0.05));
    }
}

TEST_CASE("frame superposition sums the configured frames")
{
    RingIntensitySeries s = blank_series(1, 8, 1.0);
    for (int t = 0; t < 8; ++t) s.intensity.push_back(double(1 << t));
    RingIntensitySeries const a = superpose_frames(s, 2, 2);
    // block of 4: rows (0+2), (1+3); then (4+6), (5+7)
    REQUIRE(a.frames() == 4);
    CHECK(a.at(0, 0) == 1 + 4);
    CHECK(a.at(1, 0) == 2 + 8);
    CHECK(a.at(2, 0) == 16 + 64);
    CHECK(a.at(3, 0) == 32 + 128);
    RingIntensitySeries const b = superpose_segments(s, 2);
    REQUIRE(b.frames() == 4);
    CHECK(b.at(0, 0) == 1 + 16);
    CHECK(b.at(3, 0) == 8 + 128);
    CHECK_THROWS_AS(superpose_frames(s, 5, 2), InsufficientData);
    std::vector<RingIntensitySeries> parts{s, s, s};
    RingIntensitySeries const c = superpose_series(parts);
    CHECK(c.superposition == 3);
    CHECK(c.at(5, 0) == 3 * 32);
}

TEST_CASE("exposure integration is dt times the windowed sum")
{
    RingIntensitySeries s = blank_series(2, 10, 0.25);
    for (int t = 0; t < 10; ++t) {
        s.intensity.push_back(double(t));
        s.intensity.push_back(1.0);
    }
    RingIntensitySeries const w = integrate_exposure(s, 0.75);
    REQUIRE(w.frames() == 3);
    CHECK(w.at(0, 0) == doctest::Approx(0.25 * (0 + 1 + 2)));
    CHECK(w.at(2, 0) == doctest::Approx(0.25 * (6 + 7 + 8)));
    CHECK(w.at(1, 1) == doctest::Approx(0.75));
    CHECK(w.frame_interval == doctest::Approx(0.75));
    RingIntensitySeries const sliding = integrate_exposure(s, 0.5, 0.25);
    CHECK(sliding.frames() == 9);
    CHECK_THROWS_AS(integrate_exposure(s, 0.3), ArgumentError);
    std::vector<double> taus{0.5, 1.25};
    CHECK(lags_from_times(s, taus) == std::vector<std::size_t>{2, 5});
    std::vector<double> bad{0.1};
    CHECK_THROWS_AS(lags_from_times(s, bad), ArgumentError);
}

TEST_CASE("Erlang density is normalized with mean one and variance 1/M")
{
    for (double m : {1.0, 3.0, 10.0}) {
        double area = 0.0, mean = 0.0, second = 0.0;
        double const h = 1e-3;
        for (double k = 0.5 * h; k < 40.0; k += h) {
            double const p = erlang_pdf(k, m) * h;
            area += p;
            mean += k * p;
            second += k * k * p;
        }
        CHECK(area == doctest::Approx(1.0).epsilon(1e-5));
        CHECK(mean == doctest::Approx(1.0).epsilon(1e-5));
        CHECK(second - mean * mean == doctest::Approx(1.0 / m).epsilon(1e-4));
        CHECK(erlang_cdf(1.0, m) == doctest::Approx([&] {
                  double a = 0.0;
                  for (double k = 0.5 * h; k < 1.0; k += h) a += erlang_pdf(k, m) * h;
                  return a;
              }())
                  .epsilon(1e-5));
    }
    CHECK(erlang_pdf(0.7, 1.0) == doctest::Approx(std::exp(-0.7)));
}

TEST_CASE("histogram of Erlang samples recovers M and passes the chi-square test")
{
    std::mt19937_64 rng(99);
    for (std::size_t m : {1u, 4u}) {
        std::gamma_distribution<double> g(double(m), 1.0 / double(m));
        std::vector<double> k(20000);
        for (auto& v : k) v = g(rng);
        HistogramFit const h = intensity_histogram(k, 40, 6.0, double(m));
        CHECK(h.m_hat == doctest::Approx(double(m)).epsilon(0.05));
        CHECK(h.p_value > 0.001);
        CHECK(h.dof > 5);
        HistogramFit const est = intensity_histogram(k, 40, 6.0);
        CHECK(est.m_rounded == m);
        CHECK(est.dof + 1 == h.dof);
        // exponential data tested against M = 3 must fail
        if (m == 1) CHECK(intensity_histogram(k, 40, 6.0, 3.0).p_value < 1e-6);
    }
}

TEST_CASE("exposure contrast ratio matches direct quadrature")
{
    for (double x : {1e-5, 0.1, 1.0, 7.0}) {
        double const gamma = 0.5, dt = x / (2 * gamma);
        // 2/Δt ∫ (1 - t/Δt) exp(-2Γt) dt by midpoint rule
        std::size_t const n = 200000;
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double const t = (double(i) + 0.5) * dt / double(n);
            s += (1.0 - t / dt) * std::exp(-2.0 * gamma * t);
        }
        double const ref = 2.0 * s / double(n);
        CHECK(exposure_contrast_ratio(gamma, dt) == doctest::Approx(ref).epsilon(1e-8));
    }
}

TEST_CASE("trapezoid contrast equals the variance of a discrete window sum")
{
    // for an intensity autocovariance ⟨I⟩²ρ^{2|j-l|}, Var(Σ_{j<w} I_j)/(w⟨I⟩)² is an explicit double sum
    double const rho = 0.8;
    std::vector<double> fsq(30);
    for (std::size_t k = 0; k < fsq.size(); ++k) fsq[k] = std::pow(rho, 2.0 * double(k));
    for (std::size_t w : {1u, 2u, 5u, 17u}) {
        double ref = 0.0;
        for (std::size_t j = 0; j < w; ++j)
            for (std::size_t l = 0; l < w; ++l) ref += fsq[j > l ? j - l : l - j];
        ref /= double(w * w);
        CHECK(contrast_from_isf(fsq, 0.1, 1.0, 0.1 * double(w)) == doctest::Approx(ref).epsilon(1e-12));
    }
    CHECK_THROWS_AS(contrast_from_isf(fsq, 0.1, 1.0, 5.0), InsufficientData);
}

TEST_CASE("exposure contrast from snapshots agrees with the F-based estimate")
{
    RingIntensitySeries const s = ar1_series(800, 4000, 0.85, 21, 0.1);
    std::vector<double> exposures{0.1, 0.3, 0.8, 1.6};
    ContrastCurve const direct = contrast_vs_exposure(s, exposures);
    CorrelationResult const r = correlate(s, lag_range(16));
    ContrastCurve const from_f = contrast_from_isf(r, exposures);
    CHECK(direct.beta_norm[0] == doctest::Approx(1.0));
    for (std::size_t i = 0; i < exposures.size(); ++i) {
        CHECK(direct.beta_norm[i] == doctest::Approx(from_f.beta_norm[i]).epsilon(0.05));
        CHECK(direct.beta_norm[i] <= 1.0 + 1e-12);
    }
    CHECK(direct.beta_norm[3] < direct.beta_norm[2]);
}

TEST_CASE("normalized intensities have unit mean per frame")
{
    RingIntensitySeries const s = ar1_series(100, 10, 0.3, 2);
    auto const k = normalized_intensities(s);
    REQUIRE(k.size() == 1000);
    double m = 0.0;
    for (std::size_t i = 0; i < 100; ++i) m += k[300 + i];
    CHECK(m / 100.0 == doctest::Approx(1.0));
}
