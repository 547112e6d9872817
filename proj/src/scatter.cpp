#include <xpcs/scatter.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>

#include <xpcs/error.hpp>
#include <xpcs/parallel.hpp>

namespace xpcs {

char const* to_string(Method m)
{
    return m == Method::Direct ? "direct" : "fft";
}

namespace {

struct Classified
{
    Composition composition;
    std::vector<std::uint32_t> group_of;                // per atom
    std::vector<std::vector<std::size_t>> members;      // per group, ascending
};

Classified classify(Frame const& frame, FormFactorModel const& model)
{
    Classified c;
    std::size_t const n = frame.size();
    if (model.is_unit()) {
        c.composition.groups.emplace_back(FormFactor::unit(), n);
        c.group_of.assign(n, 0);
        c.members.emplace_back();
        return c;
    }
    if (!frame.species) throw ArgumentError("tabulated form factors need species labels");
    std::map<std::string, std::uint32_t> index;
    c.group_of.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::string const& s = frame.species_of(i);
        auto it = index.find(s);
        if (it == index.end()) {
            it = index.emplace(s, std::uint32_t(c.composition.groups.size())).first;
            c.composition.groups.emplace_back(model.for_species(s), 0);
            c.members.emplace_back();
        }
        c.group_of[i] = it->second;
        ++c.composition.groups[it->second].second;
        c.members[it->second].push_back(i);
    }
    return c;
}

void check_box(Frame const& frame, double box_length)
{
    if (std::abs(frame.box_length - box_length) > 1e-9 * box_length)
        throw GridMismatch("frame box length " + std::to_string(frame.box_length) +
                           " differs from grid box length " + std::to_string(box_length));
}

std::size_t mirror(std::size_t i, std::size_t n) { return (n - i) % n; }

} // namespace

// ---- composition ------------------------------------------------------------

Composition Composition::of(Frame const& frame, FormFactorModel const& model)
{
    return classify(frame, model).composition;
}

std::size_t Composition::atom_count() const
{
    std::size_t n = 0;
    for (auto const& [ff, count] : groups) n += count;
    return n;
}

double Composition::sum_f_squared(double q) const
{
    double s = 0.0;
    for (auto const& [ff, count] : groups) {
        double f = ff(q);
        s += double(count) * f * f;
    }
    return s;
}

double Composition::forward_intensity() const
{
    double s = 0.0;
    for (auto const& [ff, count] : groups) s += double(count) * ff.at_zero();
    return s * s;
}

// ---- fields -----------------------------------------------------------------

AmplitudeField::AmplitudeField(ReciprocalLattice lattice, Method method, double time)
  : lattice_(lattice)
  , method_(method)
  , time_(time)
{
    std::size_t const n = lattice_.n_grid();
    values_.assign(n * n * half_extent(), Complex{});
    mask_.assign(values_.size(), 1);
}

AmplitudeField::AmplitudeField(ReciprocalLattice lattice, Method method, double time, ComplexBuffer values,
                               std::vector<std::uint8_t> mask)
  : lattice_(lattice)
  , method_(method)
  , time_(time)
  , values_(std::move(values))
  , mask_(std::move(mask))
{
    std::size_t const n = lattice_.n_grid();
    if (values_.size() != n * n * half_extent() || mask_.size() != values_.size())
        throw GridMismatch("amplitude field: storage does not match the lattice");
}

Complex AmplitudeField::at(std::size_t ix, std::size_t iy, std::size_t iz) const
{
    std::size_t const n = lattice_.n_grid();
    if (ix < half_extent()) return values_[half_index(ix, iy, iz)];
    return std::conj(values_[half_index(mirror(ix, n), mirror(iy, n), mirror(iz, n))]);
}

bool AmplitudeField::resolved(std::size_t ix, std::size_t iy, std::size_t iz) const
{
    std::size_t const n = lattice_.n_grid();
    if (ix < half_extent()) return mask_[half_index(ix, iy, iz)] != 0;
    return mask_[half_index(mirror(ix, n), mirror(iy, n), mirror(iz, n))] != 0;
}

namespace {

std::array<std::size_t, 3> grid_index(ReciprocalLattice const& lat, LatticePoint const& m)
{
    if (!lat.contains(m))
        throw LatticeError("lattice point (" + std::to_string(m[0]) + ", " + std::to_string(m[1]) + ", " +
                           std::to_string(m[2]) + ") lies outside the FFT grid band");
    return {lat.index_of_frequency(m[0]), lat.index_of_frequency(m[1]), lat.index_of_frequency(m[2])};
}

} // namespace

Complex AmplitudeField::at(LatticePoint const& m) const
{
    auto i = grid_index(lattice_, m);
    return at(i[0], i[1], i[2]);
}

bool AmplitudeField::resolved(LatticePoint const& m) const
{
    auto i = grid_index(lattice_, m);
    return resolved(i[0], i[1], i[2]);
}

SpeckleField::SpeckleField(AmplitudeField const& amplitude)
  : lattice_(amplitude.lattice())
  , method_(amplitude.method())
  , time_(amplitude.time())
  , params_(amplitude.params())
  , composition_(amplitude.composition())
  , mask_(amplitude.half_mask())
{
    auto const& a = amplitude.half_values();
    values_.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) values_[i] = std::norm(a[i]);
}

SpeckleField::SpeckleField(ReciprocalLattice lattice, Method method, double time)
  : lattice_(lattice)
  , method_(method)
  , time_(time)
{
    std::size_t const n = lattice_.n_grid();
    values_.assign(n * n * half_extent(), 0.0);
    mask_.assign(values_.size(), 1);
}

std::size_t SpeckleField::locate(std::size_t ix, std::size_t iy, std::size_t iz) const
{
    std::size_t const n = lattice_.n_grid();
    std::size_t const h = half_extent();
    if (ix < h) return (iz * n + iy) * h + ix;
    return (mirror(iz, n) * n + mirror(iy, n)) * h + mirror(ix, n);
}

double SpeckleField::at(std::size_t ix, std::size_t iy, std::size_t iz) const
{
    return values_[locate(ix, iy, iz)];
}

bool SpeckleField::resolved(std::size_t ix, std::size_t iy, std::size_t iz) const
{
    return mask_[locate(ix, iy, iz)] != 0;
}

double SpeckleField::at(LatticePoint const& m) const
{
    auto i = grid_index(lattice_, m);
    return at(i[0], i[1], i[2]);
}

bool SpeckleField::resolved(LatticePoint const& m) const
{
    auto i = grid_index(lattice_, m);
    return resolved(i[0], i[1], i[2]);
}

// ---- direct method ------------------------------------------------------------

namespace {

void direct_tabulated(Frame const& frame, Classified const& cls, std::vector<LatticePoint> const& points,
                      std::vector<Vec3> const& qs, std::vector<Complex>& out, unsigned threads)
{
    double const dq = 2.0 * std::numbers::pi / frame.box_length;
    std::size_t const n_groups = cls.composition.groups.size();

    parallel_for_chunks(points.size(), threads, [&](std::size_t begin, std::size_t end) {
        std::size_t const m = end - begin;
        std::array<long, 3> lo{}, hi{};
        for (int d = 0; d < 3; ++d) {
            lo[d] = hi[d] = points[begin][d];
            for (std::size_t i = begin; i < end; ++i) {
                lo[d] = std::min(lo[d], points[i][d]);
                hi[d] = std::max(hi[d], points[i][d]);
            }
        }
        std::array<std::vector<Complex>, 3> table;
        for (int d = 0; d < 3; ++d) table[d].resize(std::size_t(hi[d] - lo[d] + 1));
        // local offsets into the tables, computed once per chunk
        std::vector<std::array<std::size_t, 3>> offset(m);
        for (std::size_t i = 0; i < m; ++i)
            for (int d = 0; d < 3; ++d) offset[i][d] = std::size_t(points[begin + i][d] - lo[d]);

        std::vector<Complex> acc(n_groups * m, Complex{});
        for (std::size_t a = 0; a < frame.size(); ++a) {
            Vec3 const& r = frame.positions[a];
            for (int d = 0; d < 3; ++d)
                for (long k = lo[d]; k <= hi[d]; ++k)
                    table[d][std::size_t(k - lo[d])] = std::polar(1.0, -dq * double(k) * r[d]);
            Complex* g = acc.data() + std::size_t(cls.group_of[a]) * m;
            for (std::size_t i = 0; i < m; ++i) {
                auto const& o = offset[i];
                g[i] += table[0][o[0]] * table[1][o[1]] * table[2][o[2]];
            }
        }
        for (std::size_t i = 0; i < m; ++i) {
            double const qn = norm(qs[begin + i]);
            Complex p{};
            for (std::size_t gi = 0; gi < n_groups; ++gi)
                p += cls.composition.groups[gi].first(qn) * acc[gi * m + i];
            out[begin + i] = p;
        }
    });
}

void direct_per_point(Frame const& frame, Classified const& cls, std::vector<Vec3> const& qs,
                      std::vector<Complex>& out, unsigned threads)
{
    std::size_t const n_groups = cls.composition.groups.size();
    parallel_for_chunks(qs.size(), threads, [&](std::size_t begin, std::size_t end) {
        std::vector<Complex> acc(n_groups);
        for (std::size_t i = begin; i < end; ++i) {
            Vec3 const& q = qs[i];
            std::fill(acc.begin(), acc.end(), Complex{});
            for (std::size_t a = 0; a < frame.size(); ++a) {
                double const phase = -dot(q, frame.positions[a]);
                acc[cls.group_of[a]] += Complex(std::cos(phase), std::sin(phase));
            }
            double const qn = norm(q);
            Complex p{};
            for (std::size_t gi = 0; gi < n_groups; ++gi) p += cls.composition.groups[gi].first(qn) * acc[gi];
            out[i] = p;
        }
    });
}

} // namespace

AmplitudeList amplitude_direct(Frame const& frame, std::span<LatticePoint const> points, FormFactorModel const& model,
                               DirectOptions const& options)
{
    if (!(frame.box_length > 0.0)) throw ArgumentError("amplitude_direct: frame has no box length");
    Classified const cls = classify(frame, model);
    AmplitudeList out;
    out.box_length = frame.box_length;
    out.time = frame.time;
    out.points.assign(points.begin(), points.end());
    out.composition = cls.composition;
    out.values.assign(points.size(), Complex{});
    if (points.empty()) return out;

    std::vector<Vec3> qs(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) qs[i] = lattice_vector(points[i], frame.box_length);

    if (options.kernel == DirectKernel::Tabulated)
        direct_tabulated(frame, cls, out.points, qs, out.values, options.threads);
    else
        direct_per_point(frame, cls, qs, out.values, options.threads);
    return out;
}

AmplitudeList amplitude_direct(Frame const& frame, std::span<Vec3 const> q_list, FormFactorModel const& model,
                               DirectOptions const& options)
{
    std::vector<LatticePoint> points;
    points.reserve(q_list.size());
    for (Vec3 const& q : q_list) points.push_back(lattice_coordinates(q, frame.box_length));
    return amplitude_direct(frame, std::span<LatticePoint const>(points), model, options);
}

IntensityList intensity_of(AmplitudeList const& a)
{
    IntensityList out;
    out.box_length = a.box_length;
    out.time = a.time;
    out.points = a.points;
    out.composition = a.composition;
    out.values.resize(a.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) out.values[i] = std::norm(a.values[i]);
    return out;
}

IntensityList intensity_direct(Frame const& frame, std::span<Vec3 const> q_list, FormFactorModel const& model,
                               DirectOptions const& options)
{
    return intensity_of(amplitude_direct(frame, q_list, model, options));
}

IntensityList intensity_direct(Frame const& frame, std::span<LatticePoint const> points, FormFactorModel const& model,
                               DirectOptions const& options)
{
    return intensity_of(amplitude_direct(frame, points, model, options));
}

SpeckleField intensity_direct_grid(Frame const& frame, ReciprocalLattice const& lattice, FormFactorModel const& model,
                                   DirectOptions const& options)
{
    check_box(frame, lattice.box_length());
    SpeckleField field(lattice, Method::Direct, frame.time);
    std::size_t const n = lattice.n_grid();
    std::size_t const nh = field.half_extent();
    std::vector<LatticePoint> points;
    points.reserve(n * n * nh);
    for (std::size_t iz = 0; iz < n; ++iz)
        for (std::size_t iy = 0; iy < n; ++iy)
            for (std::size_t ix = 0; ix < nh; ++ix)
                points.push_back({lattice.frequency(ix), lattice.frequency(iy), lattice.frequency(iz)});
    IntensityList const list = intensity_direct(frame, std::span<LatticePoint const>(points), model, options);
    field.half_values() = list.values;
    field.set_composition(list.composition);
    return field;
}

// ---- FFT method -----------------------------------------------------------------

FftScatterer::FftScatterer(GridParams const& params, FormFactorModel model, FftPlanning planning)
  : params_(params)
  , lattice_(reciprocal_lattice(params))
  , kernel_(params)
  , model_(std::move(model))
  , fft_(params.n_grid, planning)
{}

AmplitudeField FftScatterer::amplitude(Frame const& frame) const
{
    check_box(frame, params_.box_length);
    Classified const cls = classify(frame, model_);
    std::size_t const n = params_.n_grid;
    std::size_t const nh = n / 2 + 1;
    double const d3 = std::pow(params_.spacing(), 3);
    auto const& axis = kernel_.axis_factor();
    double const mass = kernel_.mass();

    std::vector<std::uint8_t> mask(n * n * nh);
    for (std::size_t iz = 0; iz < n; ++iz)
        for (std::size_t iy = 0; iy < n; ++iy)
            for (std::size_t ix = 0; ix < nh; ++ix)
                mask[(iz * n + iy) * nh + ix] =
                    axis[ix] * axis[iy] * axis[iz] / mass >= KernelSpectrum::kResolvedFloor ? 1 : 0;

    // f(q)·δ³/f^η_raw(q) applied to the transform of one species group
    auto scale = [&](ComplexBuffer& spec, ComplexBuffer* sum, FormFactor const& ff) {
        for (std::size_t iz = 0; iz < n; ++iz)
            for (std::size_t iy = 0; iy < n; ++iy)
                for (std::size_t ix = 0; ix < nh; ++ix) {
                    std::size_t const h = (iz * n + iy) * nh + ix;
                    Complex v{};
                    if (mask[h]) {
                        double const f = ff.is_unit() ? 1.0 : ff(lattice_.magnitude(ix, iy, iz));
                        v = spec[h] * (f * d3 / (axis[ix] * axis[iy] * axis[iz]));
                    }
                    if (sum) (*sum)[h] += v;
                    else spec[h] = v;
                }
    };

    // the transform buffer becomes the field's storage, so no extra full-grid allocation
    ComplexBuffer values;
    std::size_t const n_groups = cls.composition.groups.size();
    if (n_groups == 1) {
        {
            DensityGrid rho = make_density_grid(params_);
            accumulate_density(rho, frame);
            fft_.execute(rho.values, values);
        }
        scale(values, nullptr, cls.composition.groups[0].first);
    } else {
        values.assign(n * n * nh, Complex{});
        ComplexBuffer spec;
        for (std::size_t g = 0; g < n_groups; ++g) {
            DensityGrid rho = make_density_grid(params_);
            accumulate_density(rho, frame, cls.members[g]);
            fft_.execute(rho.values, spec);
            scale(spec, &values, cls.composition.groups[g].first);
        }
    }
    AmplitudeField field(lattice_, Method::Fft, frame.time, std::move(values), std::move(mask));
    field.set_params(params_);
    field.set_composition(cls.composition);
    return field;
}

SpeckleField FftScatterer::intensity(Frame const& frame) const
{
    return SpeckleField(amplitude(frame));
}

AmplitudeField amplitude_fft(Frame const& frame, GridParams const& params, FormFactorModel const& model)
{
    return FftScatterer(params, model).amplitude(frame);
}

SpeckleField intensity_fft(Frame const& frame, GridParams const& params, FormFactorModel const& model)
{
    return FftScatterer(params, model).intensity(frame);
}

std::vector<SpeckleField> intensity_fft_frames(Trajectory const& traj, FftScatterer const& scatterer,
                                               unsigned threads)
{
    std::vector<SpeckleField> out(traj.size());
    parallel_for(traj.size(), threads, [&](std::size_t i) { out[i] = scatterer.intensity(traj.frame(i)); });
    return out;
}

// ---- rings ------------------------------------------------------------------

namespace {

QRing build_ring(double box_length, double q, double dq, long limit)
{
    if (!(q > 0.0) || !(dq > 0.0)) throw ArgumentError("q ring: q and dq must be positive");
    double const lo = q - 0.5 * dq;
    double const hi = q + 0.5 * dq;
    double const step = 2.0 * std::numbers::pi / box_length;
    long const reach = std::min(limit, long(std::ceil(hi / step)));
    QRing ring{q, dq, box_length, {}};
    for (long z = -reach; z <= reach; ++z)
        for (long y = -reach; y <= reach; ++y)
            for (long x = -reach; x <= reach; ++x) {
                if (x == 0 && y == 0 && z == 0) continue;
                double const mag = step * std::sqrt(double(x * x + y * y + z * z));
                if (mag >= lo && mag < hi) ring.points.push_back({x, y, z});
            }
    if (ring.points.empty())
        throw EmptyRingError("q ring " + std::to_string(q) + " ± " + std::to_string(0.5 * dq) +
                             " contains no lattice points (lattice spacing 2π/L = " + std::to_string(step) + ")");
    return ring;
}

} // namespace

QRing q_ring_mask(ReciprocalLattice const& lattice, double q, double dq)
{
    // the Nyquist plane has no ±q partner on an even grid, so it is left out
    long const limit = long((lattice.n_grid() - 1) / 2);
    return build_ring(lattice.box_length(), q, dq, limit);
}

QRing q_ring_mask(double box_length, double q, double dq)
{
    if (!(box_length > 0.0)) throw ArgumentError("q ring: box length must be positive");
    return build_ring(box_length, q, dq, std::numeric_limits<long>::max() / 4);
}

QRing QRing::half() const
{
    QRing h{q, dq, box_length, {}};
    for (auto const& m : points) {
        long lead = m[0] != 0 ? m[0] : (m[1] != 0 ? m[1] : m[2]);
        if (lead > 0) h.points.push_back(m);
    }
    return h;
}

// ---- Ewald slice ------------------------------------------------------------

void DetectorImage::write_csv(std::ostream& out) const
{
    auto const old_precision = out.precision(12);
    out << "row,col,qx,qy,qz,intensity,valid\n";
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            std::size_t const i = r * cols + c;
            out << r << ',' << c << ',' << q[i][0] << ',' << q[i][1] << ',' << q[i][2] << ',' << intensity[i] << ','
                << int(valid[i]) << '\n';
        }
    out.precision(old_precision);
}

DetectorImage ewald_slice(SpeckleField const& field, double wavelength, Vec3 const& beam_direction,
                          DetectorGeometry const& detector)
{
    if (!(wavelength > 0.0)) throw ArgumentError("ewald_slice: wavelength must be positive");
    double const bn = norm(beam_direction);
    if (!(bn > 0.0)) throw ArgumentError("ewald_slice: beam direction must be non-zero");
    if (detector.pixels == 0) throw ArgumentError("ewald_slice: detector needs at least one pixel");
    if (!(detector.half_angle >= 0.0) || detector.half_angle >= 0.5 * std::numbers::pi)
        throw ArgumentError("ewald_slice: half angle must lie in [0, π/2)");

    Vec3 const ki_hat = (1.0 / bn) * beam_direction;
    // detector axes perpendicular to the beam
    Vec3 helper = std::abs(ki_hat[0]) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
    Vec3 u = cross(ki_hat, helper);
    u = (1.0 / norm(u)) * u;
    Vec3 const v = cross(ki_hat, u);

    double const k = 2.0 * std::numbers::pi / wavelength;
    auto const& lat = field.lattice();
    long const limit = long((lat.n_grid() - 1) / 2);
    std::size_t const p = detector.pixels;

    DetectorImage img;
    img.rows = img.cols = p;
    img.intensity.assign(p * p, 0.0);
    img.q.resize(p * p);
    img.lattice_point.resize(p * p);
    img.valid.assign(p * p, 0);
    auto angle = [&](std::size_t i) {
        return p == 1 ? 0.0 : -detector.half_angle + 2.0 * detector.half_angle * double(i) / double(p - 1);
    };
    for (std::size_t r = 0; r < p; ++r)
        for (std::size_t c = 0; c < p; ++c) {
            // flat-detector direction whose projections onto u and v subtend the two pixel angles
            Vec3 d = ki_hat + std::tan(angle(c)) * u + std::tan(angle(r)) * v;
            d = (1.0 / norm(d)) * d;
            Vec3 const q = k * (d - ki_hat);
            std::size_t const i = r * p + c;
            img.q[i] = q;
            LatticePoint m{};
            bool in_band = true;
            for (int a = 0; a < 3; ++a) {
                m[a] = std::lround(q[a] / lat.spacing());
                if (std::abs(m[a]) > limit) in_band = false;
            }
            img.lattice_point[i] = m;
            if (in_band && field.resolved(m)) {
                img.intensity[i] = field.at(m);
                img.valid[i] = 1;
            }
        }
    return img;
}

SpeckleField average_fields(std::span<SpeckleField const> fields)
{
    if (fields.empty()) throw ArgumentError("average_fields: no fields");
    SpeckleField out = fields.front();
    auto& v = out.half_values();
    auto& mask = out.half_mask();
    for (std::size_t f = 1; f < fields.size(); ++f) {
        if (!(fields[f].lattice() == out.lattice())) throw GridMismatch("average_fields: fields on different grids");
        auto const& w = fields[f].half_values();
        auto const& wm = fields[f].half_mask();
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] += w[i];
            mask[i] = mask[i] && wm[i];
        }
    }
    double const inv = 1.0 / double(fields.size());
    for (double& x : v) x *= inv;
    return out;
}

} // namespace xpcs
