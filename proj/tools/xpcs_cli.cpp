// Command-line front end: one subcommand per pipeline stage.
//
// Exit codes: 0 success, 1 unexpected failure, 2 configuration error,
// 3 data error, 4 outputs written but fits flagged (0 with --lenient).

#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <xpcs/error.hpp>
#include <xpcs/pipeline.hpp>

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kData = 3, kFlagged = 4 };

struct Overrides
{
    std::string config_path;
    std::optional<unsigned> threads;
    std::optional<std::string> method;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    bool lenient = false;
};

xpcs::PipelineConfig resolve(Overrides const& o)
{
    xpcs::PipelineConfig c = o.config_path.empty() ? xpcs::PipelineConfig{} : xpcs::load_config(o.config_path);
    if (char const* env = std::getenv("XPCS_THREADS")) {
        int const n = std::atoi(env);
        if (n > 0) c.threads = unsigned(n);
    }
    if (o.threads) c.threads = *o.threads;
    if (o.method) c.method = *o.method;
    if (o.out) c.output = *o.out;
    if (o.seed) c.seed = *o.seed;
    if (o.lenient) c.lenient = true;
    return c;
}

int run(std::function<xpcs::RunReport(xpcs::PipelineConfig const&)> const& cmd, Overrides const& o)
{
    try {
        xpcs::PipelineConfig const c = resolve(o);
        xpcs::RunReport const r = cmd(c);
        for (auto const& w : r.warnings) std::cerr << "warning: " << w << "\n";
        std::cout << r.output_dir << ": " << r.files.size() << " files\n";
        if (r.flagged_fits && !c.lenient) {
            std::cerr << "error: " << r.flagged_fits << " flagged fit(s); rerun with --lenient to accept\n";
            return kFlagged;
        }
        return kOk;
    } catch (xpcs::ConfigError const& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (xpcs::ArgumentError const& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (xpcs::EmptyRingError const& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (xpcs::Error const& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kData;
    } catch (std::exception const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Simulated XPCS from atomistic trajectories"};
    app.set_version_flag("--version", std::string(xpcs::kVersion));
    app.require_subcommand(1);

    Overrides o;
    std::map<std::string, std::function<xpcs::RunReport(xpcs::PipelineConfig const&)>> const commands{
        {"speckle", xpcs::cmd_speckle},   {"correlate", xpcs::cmd_correlate}, {"contrast", xpcs::cmd_contrast},
        {"fit", xpcs::cmd_fit},           {"bench", xpcs::cmd_bench},         {"generate", xpcs::cmd_generate},
        {"validate", xpcs::cmd_validate},
    };
    std::map<std::string, std::string> const help{
        {"speckle", "per-frame speckle fields and optional detector images"},
        {"correlate", "g2, F and Siegert check per q ring"},
        {"contrast", "contrast, intensity histograms and exposure curves"},
        {"fit", "decay rates, dispersion and diffusivity"},
        {"bench", "per-frame timings of the direct and FFT methods"},
        {"generate", "write a synthetic trajectory"},
        {"validate", "g(r) and S(q) curves"},
    };

    for (auto const& [name, fn] : commands) {
        CLI::App* sub = app.add_subcommand(name, help.at(name));
        sub->add_option("--config,-c", o.config_path, "JSON pipeline config")->check(CLI::ExistingFile);
        sub->add_option("--threads,-j", o.threads, "worker threads (overrides XPCS_THREADS)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--method", o.method, "scattering method")->check(CLI::IsMember({"fft", "direct", "both"}));
        sub->add_option("--out,-o", o.out, "output directory (relative paths go under XPCS_OUTPUT_ROOT)");
        sub->add_option("--seed", o.seed, "random seed");
        sub->add_flag("--lenient", o.lenient, "report flagged fits as warnings");
    }

    try {
        app.parse(argc, argv);
    } catch (CLI::ParseError const& e) {
        int const rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }
    for (auto const& [name, fn] : commands)
        if (app.got_subcommand(name)) return run(fn, o);
    return kFailure;
}
