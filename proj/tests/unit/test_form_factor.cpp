#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include <xpcs/error.hpp>
#include <xpcs/form_factor.hpp>

using namespace xpcs;

TEST_CASE("unit form factor is one everywhere")
{
    FormFactor const f = FormFactor::unit();
    CHECK(f.is_unit());
    CHECK(f(0.0) == 1.0);
    CHECK(f(7.3) == 1.0);
    CHECK(f.at_zero() == 1.0);
}

TEST_CASE("Gaussian-sum form factor evaluates the coefficient formula")
{
    FormFactorCoefficients c;
    c.a = {1.0, 2.0, 0.5, 0.25};
    c.b = {10.0, 1.0, 0.1, 0.0};
    c.c = 0.125;
    FormFactor const f("Xx", c);
    double const q = 3.0;
    double const s2 = std::pow(q / (4 * std::numbers::pi), 2);
    double const expected =
        1.0 * std::exp(-10.0 * s2) + 2.0 * std::exp(-1.0 * s2) + 0.5 * std::exp(-0.1 * s2) + 0.25 + 0.125;
    CHECK(f(q) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(f.at_zero() == doctest::Approx(3.875));
}

TEST_CASE("bundled table gives f(0) close to the electron count")
{
    auto const& t = FormFactorTable::bundled();
    CHECK(t.at("Ar").at_zero() == doctest::Approx(18.0).epsilon(2e-3));
    CHECK(t.at("O").at_zero() == doctest::Approx(8.0).epsilon(2e-3));
    CHECK(t.at("H").at_zero() == doctest::Approx(1.0).epsilon(2e-3));
    // decreasing with q
    CHECK(t.at("Ar")(2.0) < t.at("Ar")(1.0));
    CHECK_THROWS_AS(t.at("Unobtainium"), ArgumentError);
}

TEST_CASE("table parsing skips comments and reports bad rows")
{
    std::istringstream ok("# comment\nZz 1 0 0 0 0 0 0 0 0.5\n\n");
    FormFactorTable const t = FormFactorTable::parse(ok);
    CHECK(t.contains("Zz"));
    CHECK(t.at("Zz")(1.0) == doctest::Approx(1.5));
    std::istringstream bad("Zz 1 2 3\n");
    CHECK_THROWS_AS(FormFactorTable::parse(bad), ParseError);
}

TEST_CASE("model maps species to form factors")
{
    FormFactorModel const unit = FormFactorModel::unit();
    CHECK(unit.for_species("Ar").is_unit());
    FormFactorModel const tab = FormFactorModel::tabulated(FormFactorTable::bundled());
    CHECK(form_factor(tab, "Ar", 0.0) == doctest::Approx(18.0).epsilon(2e-3));
}
