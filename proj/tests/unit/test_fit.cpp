#include <doctest.h>

#include <cmath>
#include <random>

#include <xpcs/error.hpp>
#include <xpcs/fit.hpp>

using namespace xpcs;

namespace {

struct Curve
{
    std::vector<double> tau, y;
};

Curve decay(double gamma, double stretch, double step, std::size_t n, double amplitude = 1.0)
{
    Curve c;
    for (std::size_t i = 0; i < n; ++i) {
        double const t = step * double(i);
        c.tau.push_back(t);
        c.y.push_back(amplitude * std::exp(-2.0 * std::pow(gamma * t, stretch)));
    }
    return c;
}

} // namespace

TEST_CASE("exponential fit recovers the rate of exact data")
{
    Curve const c = decay(0.35, 1.0, 0.1, 80);
    DecayFit const f = fit_exponential(c.tau, c.y);
    CHECK_FALSE(f.flagged);
    CHECK(f.converged);
    CHECK(f.gamma == doctest::Approx(0.35).epsilon(1e-8));
    CHECK(f.amplitude == 1.0);
    // default window: first run of values inside [0.05, 0.8]
    CHECK(std::exp(-0.7 * f.tau_lo) <= 0.8 + 1e-12);
    CHECK(std::exp(-0.7 * f.tau_hi) >= 0.05 - 1e-12);
    CHECK(f.points >= 4);
}

TEST_CASE("free amplitude and log-domain variants agree on exact data")
{
    Curve const c = decay(1.2, 1.0, 0.02, 100, 0.9);
    DecayFitOptions o;
    o.free_amplitude = true;
    DecayFit const f = fit_exponential(c.tau, c.y, o);
    CHECK(f.gamma == doctest::Approx(1.2).epsilon(1e-8));
    CHECK(f.amplitude == doctest::Approx(0.9).epsilon(1e-8));
    DecayFitOptions lo;
    lo.log_domain = true;
    lo.free_amplitude = true;
    DecayFit const g = fit_exponential(c.tau, c.y, lo);
    CHECK(g.gamma == doctest::Approx(1.2).epsilon(1e-10));
}

TEST_CASE("explicit tau window overrides the value window")
{
    Curve const c = decay(0.5, 1.0, 0.1, 60);
    DecayFitOptions o;
    o.window.tau_lo = 0.0;
    o.window.tau_hi = 0.5;
    DecayFit const f = fit_exponential(c.tau, c.y, o);
    CHECK(f.points == 6);
    CHECK(f.tau_hi == doctest::Approx(0.5));
    CHECK(f.gamma == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("noisy exponential gives a rate within its error bar")
{
    std::mt19937 rng(5);
    std::normal_distribution<double> n(0.0, 0.01);
    Curve c = decay(0.8, 1.0, 0.05, 80);
    for (double& v : c.y) v += n(rng);
    DecayFit const f = fit_exponential(c.tau, c.y);
    CHECK(f.gamma_err > 0.0);
    CHECK(std::abs(f.gamma - 0.8) < 4.0 * f.gamma_err);
}

TEST_CASE("non-decaying or too short curves are flagged")
{
    std::vector<double> tau{0, 1, 2, 3, 4, 5};
    std::vector<double> flat(6, 1.0);
    DecayFit const f = fit_exponential(tau, flat);
    CHECK(f.flagged);
    CHECK(f.message.find("non-decaying") != std::string::npos);
    Curve const fast = decay(5.0, 1.0, 0.1, 10);
    CHECK(fit_exponential(fast.tau, fast.y).flagged);
}

TEST_CASE("stretched fit recovers the stretching exponent")
{
    for (double s : {0.6, 1.0, 1.5}) {
        Curve const c = decay(0.4, s, 0.05, 200);
        DecayFit const f = fit_stretched(c.tau, c.y);
        CHECK_FALSE(f.flagged);
        CHECK(f.gamma == doctest::Approx(0.4).epsilon(1e-6));
        CHECK(f.stretch == doctest::Approx(s).epsilon(1e-6));
    }
}

TEST_CASE("dispersion finds the first interior minimum")
{
    std::vector<double> q{0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    std::vector<double> g{0.2, 0.6, 0.3, 0.1, 0.5, 0.05};
    DispersionCurve const d = dispersion(q, g);
    REQUIRE(d.gamma0);
    CHECK(*d.gamma0 == 0.1);
    CHECK(*d.q_min == 2.0);
    CHECK(d.normalized[1] == doctest::Approx(6.0));
    CHECK(*d.rough_diffusivity() == doctest::Approx(0.1 / 4.0));

    std::vector<double> plateau{0.9, 0.4, 0.4, 0.4, 0.7};
    std::vector<double> q5{1, 2, 3, 4, 5};
    DispersionCurve const p = dispersion(q5, plateau);
    REQUIRE(p.q_min);
    CHECK(*p.q_min == 2.0);

    std::vector<double> rising{0.1, 0.2, 0.3, 0.4, 0.5};
    DispersionCurve const r = dispersion(q5, rising);
    CHECK_FALSE(r.gamma0);
    CHECK_FALSE(r.warning.empty());
}

TEST_CASE("dispersion sorts by q and rejects duplicates")
{
    std::vector<double> q{2, 1, 3};
    std::vector<double> g{0.2, 0.5, 0.4};
    DispersionCurve const d = dispersion(q, g);
    CHECK(d.q == std::vector<double>{1, 2, 3});
    CHECK(d.gamma == std::vector<double>{0.5, 0.2, 0.4});
    std::vector<double> dup{1, 1, 3};
    CHECK_THROWS_AS(dispersion(dup, g), ArgumentError);
}

TEST_CASE("diffusivity fits recover D and D2 of exact dispersions")
{
    std::vector<double> q, g;
    for (double x = 0.2; x < 1.6; x += 0.1) {
        q.push_back(x);
        g.push_back(0.3 * x * x - 0.02 * x * x * x * x);
    }
    DispersionCurve const c = dispersion(q, g);
    DiffusivityFit const quart = fit_diffusivity(c, DiffusivityMode::Quartic);
    CHECK(quart.d == doctest::Approx(0.3).epsilon(1e-10));
    CHECK(quart.d2 == doctest::Approx(-0.02).epsilon(1e-8));
    CHECK(quart.relative_rms < 1e-12);
    CHECK(quart.d_um2_per_s() == doctest::Approx(3000.0).epsilon(1e-10));

    DiffusivityFit const low = fit_diffusivity(c, DiffusivityMode::LowQ, 0.5);
    CHECK(low.points == 4);
    CHECK(low.d == doctest::Approx(0.3).epsilon(0.01));
    CHECK(low.relative_rms > 0.0);

    DiffusivityFit const pinned = fit_diffusivity(c, DiffusivityMode::Quartic, std::nullopt, true);
    CHECK(pinned.d2 == 0.0);
    CHECK_THROWS_AS(fit_diffusivity(c, DiffusivityMode::LowQ, 0.25), InsufficientData);
}

TEST_CASE("negative diffusivity is flagged")
{
    std::vector<double> q{0.5, 1.0, 1.5};
    std::vector<double> g{-0.1, -0.4, -0.9};
    DiffusivityFit const f = fit_diffusivity(dispersion(q, g), DiffusivityMode::LowQ);
    CHECK(f.flagged);
}
