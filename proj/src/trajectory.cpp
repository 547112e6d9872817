#include <xpcs/trajectory.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <xpcs/error.hpp>

namespace xpcs {

Trajectory::Trajectory(std::vector<Frame> frames, TrajectoryMetadata metadata)
  : frames_(std::move(frames))
  , metadata_(std::move(metadata))
{
    if (frames_.empty()) return;
    Frame const& first = frames_.front();
    if (!(first.box_length > 0.0)) throw ArgumentError("trajectory: box length must be positive");
    if (!first.species || first.species->size() != first.size())
        throw ArgumentError("trajectory: species list length differs from atom count");
    for (std::size_t f = 0; f < frames_.size(); ++f) {
        Frame const& fr = frames_[f];
        std::string tag = "frame " + std::to_string(f + 1) + ": ";
        if (fr.size() != first.size()) throw ArgumentError(tag + "atom count mismatch");
        if (std::abs(fr.box_length - first.box_length) > 1e-9 * first.box_length)
            throw ArgumentError(tag + "box length differs from first frame");
        if (!fr.species || (fr.species != first.species && *fr.species != *first.species))
            throw ArgumentError(tag + "species ordering differs from first frame");
        if (fr.has_unwrapped() != first.has_unwrapped() || (fr.has_unwrapped() && fr.unwrapped.size() != fr.size()))
            throw ArgumentError(tag + "unwrapped view inconsistent with first frame");
        for (auto const& r : fr.positions)
            for (double c : r)
                if (!(c >= 0.0 && c < fr.box_length)) throw ArgumentError(tag + "position outside [0, L)");
    }
    if (frames_.size() > 1) {
        frame_interval_ = (frames_.back().time - frames_.front().time) / double(frames_.size() - 1);
        if (!(frame_interval_ > 0.0)) throw ArgumentError("trajectory: frame times must be strictly increasing");
        for (std::size_t f = 1; f < frames_.size(); ++f) {
            double step = frames_[f].time - frames_[f - 1].time;
            if (!(step > 0.0)) throw ArgumentError("trajectory: frame times must be strictly increasing");
            if (std::abs(step - frame_interval_) > 1e-9 * std::max(frame_interval_, std::abs(frames_[f].time)))
                throw ArgumentError("frame " + std::to_string(f + 1) + ": frame times are not uniformly spaced");
        }
    }
}

double Trajectory::number_density() const
{
    double L = box_length();
    return L > 0.0 ? double(atom_count()) / (L * L * L) : 0.0;
}

namespace {

SpeciesList uniform_species(std::size_t n, std::string const& label)
{
    return std::make_shared<std::vector<std::string> const>(n, label);
}

void require_positive(double value, char const* what)
{
    if (!(value > 0.0)) throw ArgumentError(std::string(what) + " must be positive");
}

} // namespace

Trajectory generate_brownian(std::size_t n, double box_length, double diffusivity, double dt,
                             std::size_t n_frames, std::uint64_t seed)
{
    if (n == 0 || n_frames == 0) throw ArgumentError("generate_brownian: n and n_frames must be >= 1");
    require_positive(box_length, "box length");
    require_positive(dt, "dt");
    if (!(diffusivity >= 0.0)) throw ArgumentError("generate_brownian: diffusivity must be non-negative");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, box_length);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double const sigma = std::sqrt(2.0 * diffusivity * dt);

    auto species = uniform_species(n, "X");
    std::vector<Vec3> current(n);
    for (auto& r : current) r = {uniform(rng), uniform(rng), uniform(rng)};

    std::vector<Frame> frames;
    frames.reserve(n_frames);
    for (std::size_t f = 0; f < n_frames; ++f) {
        if (f > 0) {
            for (auto& r : current)
                for (double& c : r) c += sigma * gauss(rng);
        }
        Frame fr;
        fr.box_length = box_length;
        fr.time = double(f) * dt;
        fr.species = species;
        fr.unwrapped = current;
        fr.positions.resize(n);
        for (std::size_t i = 0; i < n; ++i) fr.positions[i] = wrap(current[i], box_length);
        frames.push_back(std::move(fr));
    }
    return Trajectory(std::move(frames), {"brownian", seed});
}

Trajectory generate_ideal_gas(std::size_t n, double box_length, std::size_t n_frames, std::uint64_t seed,
                              double dt)
{
    if (n == 0 || n_frames == 0) throw ArgumentError("generate_ideal_gas: n and n_frames must be >= 1");
    require_positive(box_length, "box length");
    require_positive(dt, "dt");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, box_length);
    auto species = uniform_species(n, "X");
    std::vector<Frame> frames;
    frames.reserve(n_frames);
    for (std::size_t f = 0; f < n_frames; ++f) {
        Frame fr;
        fr.box_length = box_length;
        fr.time = double(f) * dt;
        fr.species = species;
        fr.positions.resize(n);
        for (auto& r : fr.positions) r = wrap(Vec3{uniform(rng), uniform(rng), uniform(rng)}, box_length);
        frames.push_back(std::move(fr));
    }
    return Trajectory(std::move(frames), {"ideal_gas", seed});
}

Trajectory generate_simple_cubic(std::size_t cells, double a, std::size_t n_frames, double dt)
{
    if (cells == 0 || n_frames == 0) throw ArgumentError("generate_simple_cubic: cells and n_frames must be >= 1");
    require_positive(a, "lattice constant");
    double const L = double(cells) * a;
    std::vector<Vec3> sites;
    sites.reserve(cells * cells * cells);
    for (std::size_t i = 0; i < cells; ++i)
        for (std::size_t j = 0; j < cells; ++j)
            for (std::size_t k = 0; k < cells; ++k) sites.push_back({double(i) * a, double(j) * a, double(k) * a});
    auto species = uniform_species(sites.size(), "X");
    std::vector<Frame> frames(n_frames);
    for (std::size_t f = 0; f < n_frames; ++f) {
        frames[f].box_length = L;
        frames[f].time = double(f) * dt;
        frames[f].species = species;
        frames[f].positions = sites;
        frames[f].unwrapped = sites;
    }
    return Trajectory(std::move(frames), {"simple_cubic", std::nullopt});
}

std::vector<std::size_t> choose_tracers(std::size_t n_atoms, std::size_t count, std::uint64_t seed)
{
    if (count > n_atoms)
        throw ArgumentError("select_tracers: requested " + std::to_string(count) + " tracers from " +
                            std::to_string(n_atoms) + " atoms");
    std::vector<std::size_t> pool(n_atoms);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    // partial Fisher-Yates
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n_atoms - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(count);
    std::sort(pool.begin(), pool.end());
    return pool;
}

Trajectory select_atoms(Trajectory const& traj, std::vector<std::size_t> const& indices)
{
    if (traj.empty()) return traj;
    for (auto i : indices)
        if (i >= traj.atom_count()) throw ArgumentError("select_atoms: index out of range");
    auto names = std::make_shared<std::vector<std::string>>();
    names->reserve(indices.size());
    for (auto i : indices) names->push_back((*traj.species())[i]);
    SpeciesList species = names;

    std::vector<Frame> frames;
    frames.reserve(traj.size());
    for (auto const& src : traj.frames()) {
        Frame fr;
        fr.box_length = src.box_length;
        fr.time = src.time;
        fr.species = species;
        fr.positions.reserve(indices.size());
        for (auto i : indices) fr.positions.push_back(src.positions[i]);
        if (src.has_unwrapped()) {
            fr.unwrapped.reserve(indices.size());
            for (auto i : indices) fr.unwrapped.push_back(src.unwrapped[i]);
        }
        frames.push_back(std::move(fr));
    }
    return Trajectory(std::move(frames), traj.metadata());
}

Trajectory select_tracers(Trajectory const& traj, std::size_t count, std::uint64_t seed)
{
    return select_atoms(traj, choose_tracers(traj.atom_count(), count, seed));
}

MsdCurve mean_square_displacement(Trajectory const& traj, std::size_t max_lag, double fit_fraction)
{
    if (traj.empty()) throw ArgumentError("mean_square_displacement: empty trajectory");
    if (!traj.has_unwrapped())
        throw ArgumentError("mean_square_displacement: trajectory has no unwrapped coordinates "
                            "(need xu/yu/zu columns, image flags, or a generator)");
    if (max_lag >= traj.size()) throw ArgumentError("mean_square_displacement: max_lag must be < n_frames");
    if (!(fit_fraction > 0.0 && fit_fraction <= 1.0))
        throw ArgumentError("mean_square_displacement: fit fraction must be in (0, 1]");

    double const dt = traj.frame_interval();
    std::size_t const n = traj.atom_count();
    MsdCurve curve;
    curve.lag_times.resize(max_lag + 1);
    curve.msd.assign(max_lag + 1, 0.0);
    for (std::size_t lag = 0; lag <= max_lag; ++lag) {
        curve.lag_times[lag] = double(lag) * dt;
        if (lag == 0) continue;
        double sum = 0.0;
        std::size_t origins = traj.size() - lag;
        for (std::size_t t = 0; t < origins; ++t) {
            auto const& a = traj.frame(t).unwrapped;
            auto const& b = traj.frame(t + lag).unwrapped;
            for (std::size_t i = 0; i < n; ++i) {
                Vec3 d = b[i] - a[i];
                sum += dot(d, d);
            }
        }
        curve.msd[lag] = sum / double(origins * n);
    }

    if (max_lag == 0) return curve;
    std::size_t count = std::max<std::size_t>(2, std::size_t(std::ceil(fit_fraction * double(max_lag))));
    count = std::min(count, max_lag + 1);
    std::size_t lo = max_lag + 1 - count;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = lo; i <= max_lag; ++i) {
        double x = curve.lag_times[i], y = curve.msd[i];
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    double m = double(count);
    double denom = m * sxx - sx * sx;
    double slope = denom > 0.0 ? (m * sxy - sx * sy) / denom : 0.0;
    curve.diffusivity = slope / 6.0;
    curve.fit_lo = curve.lag_times[lo];
    curve.fit_hi = curve.lag_times[max_lag];
    return curve;
}

} // namespace xpcs
