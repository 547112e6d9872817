#include <doctest.h>

#include <xpcs/config.hpp>
#include <xpcs/error.hpp>

using namespace xpcs;
using nlohmann::json;

namespace {

json minimal()
{
    return json::parse(R"({
        "input": {"generator": {"kind": "ideal_gas", "atoms": 10, "box_length": 8, "frames": 2}},
        "rings": [{"q": 1.0, "dq": 0.2}]
    })");
}

} // namespace

TEST_CASE("minimal config takes documented defaults")
{
    PipelineConfig const c = config_from_json(minimal());
    CHECK_NOTHROW(c.validate_all());
    CHECK(c.n_grid == 64);
    CHECK(c.method == "fft");
    CHECK(c.m == std::vector<std::size_t>{1});
    CHECK(c.input.generator->atoms == 10);
    CHECK(c.rings.size() == 1);
    GridParams const p = c.grid_params(8.0);
    CHECK(p.eta == doctest::Approx(8.0 / 64));
    CHECK(p.kernel == 11);
}

TEST_CASE("unknown keys are rejected at every level")
{
    json j = minimal();
    j["colour"] = "blue";
    CHECK_THROWS_AS(config_from_json(j), ConfigError);
    j = minimal();
    j["input"]["generator"]["temperature"] = 300;
    CHECK_THROWS_AS(config_from_json(j), ConfigError);
    j = minimal();
    j["rings"][0]["width"] = 1;
    CHECK_THROWS_AS(config_from_json(j), ConfigError);
}

TEST_CASE("type errors and inconsistent values are config errors")
{
    json j = minimal();
    j["n_grid"] = "many";
    CHECK_THROWS_AS(config_from_json(j), ConfigError);
    j = minimal();
    j["grid"] = {{"n_grid", 32}, {"kernel", 8}};
    CHECK_THROWS_AS(config_from_json(j).validate_all(), ConfigError);
    j = minimal();
    j["method"] = "magic";
    CHECK_THROWS_AS(config_from_json(j).validate_all(), ConfigError);
    j = minimal();
    j["input"]["path"] = "x.xyz";
    CHECK_THROWS_AS(config_from_json(j).validate_all(), ConfigError);
    j = minimal();
    j["exposures"] = {0.1, -1.0};
    CHECK_THROWS_AS(config_from_json(j).validate_all(), ConfigError);
}

TEST_CASE("grid section sets eta and kernel")
{
    json j = minimal();
    j["grid"] = {{"n_grid", 32}, {"eta", 0.5}, {"kernel", 9}};
    PipelineConfig const c = config_from_json(j);
    GridParams const p = c.grid_params(8.0);
    CHECK(p.n_grid == 32);
    CHECK(p.eta == 0.5);
    CHECK(p.kernel == 9);
    j["grid"]["kernel"] = "auto";
    CHECK_FALSE(config_from_json(j).kernel);
}

TEST_CASE("serialized config reads back to the same settings")
{
    json j = minimal();
    j["tau"] = {0.0, 1.0, 2.0};
    j["m"] = {1, 5, 10};
    j["exposures"] = {0.5};
    j["ewald"] = {{"wavelength", 1.2}, {"pixels", 41}};
    j["fit"] = {{"mode", "low_q"}, {"q_cutoff", 0.8}};
    PipelineConfig const a = config_from_json(j);
    json const out = config_to_json(a);
    PipelineConfig const b = config_from_json(out);
    CHECK(config_to_json(b) == out);
    CHECK(b.m == a.m);
    CHECK(b.ewald->pixels == 41);
    CHECK(*b.fit.q_cutoff == 0.8);
}

TEST_CASE("missing config file is a config error")
{
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}
