#include <xpcs/config.hpp>

#include <fstream>
#include <set>

#include <xpcs/error.hpp>

namespace xpcs {

using nlohmann::json;

namespace {

/// Walks one JSON object, remembering which keys were consumed so that
/// leftovers can be reported as unknown.
class ObjectReader
{
public:
    ObjectReader(json const& j, std::string path)
      : j_(j)
      , path_(std::move(path))
    {
        if (!j.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    template <typename T>
    void get(char const* key, T& out)
    {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end() || it->is_null()) return;
        try {
            out = it->template get<T>();
        } catch (json::exception const& e) {
            throw ConfigError(path_ + "." + key + ": " + e.what());
        }
    }

    template <typename T>
    void get(char const* key, std::optional<T>& out)
    {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end() || it->is_null()) return;
        try {
            out = it->template get<T>();
        } catch (json::exception const& e) {
            throw ConfigError(path_ + "." + key + ": " + e.what());
        }
    }

    json const* child(char const* key)
    {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() || it->is_null() ? nullptr : &*it;
    }

    std::string path(char const* key) const { return path_ + "." + key; }

    void finish() const
    {
        for (auto const& [key, value] : j_.items())
            if (!seen_.count(key)) throw ConfigError(path_ + ": unknown key '" + key + "'");
    }

private:
    json const& j_;
    std::string path_;
    std::set<std::string> seen_;
};

} // namespace

PipelineConfig config_from_json(json const& j)
{
    PipelineConfig c;
    ObjectReader root(j, "config");

    if (json const* in = root.child("input")) {
        ObjectReader r(*in, root.path("input"));
        r.get("path", c.input.path);
        r.get("format", c.input.format);
        r.get("timestep_ps", c.input.timestep_ps);
        r.get("tracers", c.input.tracers);
        if (json const* gen = r.child("generator")) {
            GeneratorSpec g;
            ObjectReader gr(*gen, r.path("generator"));
            gr.get("kind", g.kind);
            gr.get("atoms", g.atoms);
            gr.get("box_length", g.box_length);
            gr.get("diffusivity", g.diffusivity);
            gr.get("dt", g.dt);
            gr.get("frames", g.frames);
            gr.get("cells", g.cells);
            gr.get("lattice_constant", g.lattice_constant);
            gr.finish();
            c.input.generator = g;
        }
        r.finish();
    }
    if (json const* grid = root.child("grid")) {
        ObjectReader r(*grid, root.path("grid"));
        r.get("n_grid", c.n_grid);
        r.get("eta", c.eta);
        if (json const* k = r.child("kernel")) {
            if (k->is_string()) {
                if (k->get<std::string>() != "auto") throw ConfigError("config.grid.kernel: expected an odd integer or \"auto\"");
            } else if (k->is_number_integer() && k->get<long long>() > 0) {
                c.kernel = k->get<std::size_t>();
            } else {
                throw ConfigError("config.grid.kernel: expected an odd integer or \"auto\"");
            }
        }
        r.finish();
    }
    root.get("form_factor", c.form_factor);
    if (json const* rings = root.child("rings")) {
        if (!rings->is_array()) throw ConfigError("config.rings: expected an array");
        for (std::size_t i = 0; i < rings->size(); ++i) {
            ObjectReader r((*rings)[i], "config.rings[" + std::to_string(i) + "]");
            RingSpec s;
            r.get("q", s.q);
            r.get("dq", s.dq);
            r.finish();
            c.rings.push_back(s);
        }
    }
    root.get("tau", c.tau);
    root.get("max_lag", c.max_lag);
    root.get("exposures", c.exposures);
    root.get("m", c.m);
    root.get("separation", c.separation);
    root.get("method", c.method);
    root.get("threads", c.threads);
    root.get("output", c.output);
    root.get("seed", c.seed);
    root.get("lenient", c.lenient);
    root.get("write_fields", c.write_fields);
    if (json const* e = root.child("ewald")) {
        EwaldSpec s;
        ObjectReader r(*e, root.path("ewald"));
        r.get("wavelength", s.wavelength);
        std::vector<double> beam;
        r.get("beam", beam);
        if (!beam.empty()) {
            if (beam.size() != 3) throw ConfigError("config.ewald.beam: expected 3 components");
            s.beam = {beam[0], beam[1], beam[2]};
        }
        r.get("pixels", s.pixels);
        r.get("half_angle", s.half_angle);
        r.get("average_frames", s.average_frames);
        r.finish();
        c.ewald = s;
    }
    if (json const* h = root.child("histogram")) {
        ObjectReader r(*h, root.path("histogram"));
        r.get("bins", c.histogram.bins);
        r.get("kappa_max", c.histogram.kappa_max);
        r.finish();
    }
    if (json const* f = root.child("fit")) {
        ObjectReader r(*f, root.path("fit"));
        r.get("tau_lo", c.fit.tau_lo);
        r.get("tau_hi", c.fit.tau_hi);
        r.get("value_lo", c.fit.value_lo);
        r.get("value_hi", c.fit.value_hi);
        r.get("stretched", c.fit.stretched);
        r.get("log_domain", c.fit.log_domain);
        r.get("mode", c.fit.mode);
        r.get("q_cutoff", c.fit.q_cutoff);
        r.finish();
    }
    if (json const* b = root.child("bench")) {
        ObjectReader r(*b, root.path("bench"));
        r.get("atoms", c.bench.atoms);
        r.get("fft_grid", c.bench.fft_grid);
        r.get("direct_grid", c.bench.direct_grid);
        r.get("repeats", c.bench.repeats);
        r.get("include_direct_grid", c.bench.include_direct_grid);
        r.finish();
    }
    if (json const* v = root.child("validate")) {
        ObjectReader r(*v, root.path("validate"));
        r.get("r_max", c.validate.r_max);
        r.get("r_bins", c.validate.r_bins);
        r.get("q_edges", c.validate.q_edges);
        r.finish();
    }
    root.finish();
    return c;
}

PipelineConfig load_config(std::string const& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (json::parse_error const& e) {
        throw ConfigError("config file '" + path + "': " + e.what());
    }
    return config_from_json(j);
}

json config_to_json(PipelineConfig const& c)
{
    json in = {{"format", c.input.format}, {"timestep_ps", c.input.timestep_ps}};
    if (c.input.path) in["path"] = *c.input.path;
    if (c.input.tracers) in["tracers"] = *c.input.tracers;
    if (auto const& g = c.input.generator)
        in["generator"] = {{"kind", g->kind},   {"atoms", g->atoms},       {"box_length", g->box_length},
                           {"diffusivity", g->diffusivity}, {"dt", g->dt}, {"frames", g->frames},
                           {"cells", g->cells}, {"lattice_constant", g->lattice_constant}};
    json grid = {{"n_grid", c.n_grid}};
    grid["eta"] = c.eta ? json(*c.eta) : json(nullptr);
    grid["kernel"] = c.kernel ? json(*c.kernel) : json("auto");
    json rings = json::array();
    for (auto const& r : c.rings) rings.push_back({{"q", r.q}, {"dq", r.dq}});
    json fit = {{"value_lo", c.fit.value_lo}, {"value_hi", c.fit.value_hi}, {"stretched", c.fit.stretched},
                {"log_domain", c.fit.log_domain}, {"mode", c.fit.mode}};
    if (c.fit.tau_lo) fit["tau_lo"] = *c.fit.tau_lo;
    if (c.fit.tau_hi) fit["tau_hi"] = *c.fit.tau_hi;
    if (c.fit.q_cutoff) fit["q_cutoff"] = *c.fit.q_cutoff;
    json out = {{"input", in},
                {"grid", grid},
                {"form_factor", c.form_factor},
                {"rings", rings},
                {"tau", c.tau},
                {"max_lag", c.max_lag},
                {"exposures", c.exposures},
                {"m", c.m},
                {"separation", c.separation},
                {"method", c.method},
                {"threads", c.threads},
                {"output", c.output},
                {"seed", c.seed},
                {"lenient", c.lenient},
                {"write_fields", c.write_fields},
                {"histogram", {{"bins", c.histogram.bins}, {"kappa_max", c.histogram.kappa_max}}},
                {"fit", fit},
                {"bench",
                 {{"atoms", c.bench.atoms},
                  {"fft_grid", c.bench.fft_grid},
                  {"direct_grid", c.bench.direct_grid},
                  {"repeats", c.bench.repeats},
                  {"include_direct_grid", c.bench.include_direct_grid}}},
                {"validate", {{"r_max", c.validate.r_max}, {"r_bins", c.validate.r_bins}, {"q_edges", c.validate.q_edges}}}};
    if (c.ewald)
        out["ewald"] = {{"wavelength", c.ewald->wavelength},
                        {"beam", {c.ewald->beam[0], c.ewald->beam[1], c.ewald->beam[2]}},
                        {"pixels", c.ewald->pixels},
                        {"half_angle", c.ewald->half_angle},
                        {"average_frames", c.ewald->average_frames}};
    return out;
}

void PipelineConfig::validate_all() const
{
    auto fail = [](std::string const& m) { throw ConfigError(m); };
    if (input.path && input.generator) fail("input: give either a path or a generator, not both");
    if (!input.path && !input.generator) fail("input: a path or a generator is required");
    if (input.path && input.format != "xyz" && input.format != "lammps" && input.format != "binary")
        fail("input.format must be xyz, lammps or binary");
    if (!(input.timestep_ps > 0.0)) fail("input.timestep_ps must be positive");
    if (auto const& g = input.generator) {
        if (g->kind != "brownian" && g->kind != "ideal_gas" && g->kind != "simple_cubic")
            fail("input.generator.kind must be brownian, ideal_gas or simple_cubic");
        if (g->frames == 0) fail("input.generator.frames must be positive");
        if (g->kind != "simple_cubic") {
            if (g->atoms == 0) fail("input.generator.atoms must be positive");
            if (!(g->box_length > 0.0)) fail("input.generator.box_length must be positive");
            if (!(g->dt > 0.0)) fail("input.generator.dt must be positive");
        } else if (g->cells == 0 || !(g->lattice_constant > 0.0)) {
            fail("input.generator: simple_cubic needs positive cells and lattice_constant");
        }
        if (g->kind == "brownian" && g->diffusivity < 0.0) fail("input.generator.diffusivity must be >= 0");
    }
    if (input.tracers && *input.tracers == 0) fail("input.tracers must be positive");
    if (n_grid < 3) fail("grid.n_grid must be at least 3");
    if (eta && !(*eta > 0.0)) fail("grid.eta must be positive");
    if (kernel && (*kernel % 2 == 0 || *kernel < 3 || *kernel > n_grid))
        fail("grid.kernel must be odd with 3 <= k <= n_grid");
    if (form_factor.empty()) fail("form_factor must be unit, tabulated or a table path");
    for (auto const& r : rings)
        if (!(r.q > 0.0) || !(r.dq > 0.0)) fail("rings: q and dq must be positive");
    for (double t : tau)
        if (t < 0.0) fail("tau values must be non-negative");
    for (double e : exposures)
        if (!(e > 0.0)) fail("exposures must be positive");
    if (m.empty()) fail("m must list at least one superposition count");
    for (auto v : m)
        if (v == 0) fail("m values must be positive");
    if (separation == 0) fail("separation must be positive");
    if (method != "fft" && method != "direct" && method != "both") fail("method must be fft, direct or both");
    if (output.empty()) fail("output directory must be set");
    if (ewald) {
        if (!(ewald->wavelength > 0.0)) fail("ewald.wavelength must be positive");
        if (ewald->pixels == 0) fail("ewald.pixels must be positive");
    }
    if (histogram.bins < 2 || !(histogram.kappa_max > 0.0)) fail("histogram: need >= 2 bins and kappa_max > 0");
    if (!(fit.value_lo > 0.0) || !(fit.value_hi > fit.value_lo) || fit.value_hi > 1.0)
        fail("fit: need 0 < value_lo < value_hi <= 1");
    if (fit.mode != "quartic" && fit.mode != "low_q") fail("fit.mode must be quartic or low_q");
    if (bench.atoms.empty() || bench.repeats == 0) fail("bench: atoms and repeats must be non-empty/positive");
    if (!(validate.r_max > 0.0) || validate.r_bins == 0) fail("validate: r_max and r_bins must be positive");
}

GridParams PipelineConfig::grid_params(double box_length) const
{
    double const spacing = box_length / double(n_grid);
    double const e = eta.value_or(spacing);
    GridParams p = kernel ? GridParams{n_grid, box_length, e, *kernel} : GridParams::with_auto_kernel(n_grid, box_length, e);
    try {
        p.validate();
    } catch (ArgumentError const& err) {
        throw ConfigError(err.what());
    }
    return p;
}

FormFactorModel PipelineConfig::form_factor_model() const
{
    if (form_factor == "unit") return FormFactorModel::unit();
    if (form_factor == "tabulated") return FormFactorModel::tabulated(FormFactorTable::bundled());
    return FormFactorModel::tabulated(FormFactorTable::load(form_factor));
}

} // namespace xpcs
