#include <xpcs/scatter.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <xpcs/error.hpp>

namespace xpcs {

PairDistribution pair_distribution(Trajectory const& traj, double r_max, std::size_t n_bins)
{
    if (traj.empty()) throw ArgumentError("pair_distribution: empty trajectory");
    if (n_bins == 0) throw ArgumentError("pair_distribution: n_bins must be positive");
    double const L = traj.box_length();
    if (!(r_max > 0.0) || r_max > 0.5 * L * (1.0 + 1e-12))
        throw ArgumentError("pair_distribution: r_max must lie in (0, L/2] for minimum-image distances");
    std::size_t const n = traj.atom_count();
    if (n < 2) throw InsufficientData("pair_distribution: need at least two atoms");

    double const width = r_max / double(n_bins);
    std::vector<double> hist(n_bins, 0.0);
    for (Frame const& f : traj.frames()) {
        for (std::size_t i = 0; i + 1 < n; ++i) {
            Vec3 const& a = f.positions[i];
            for (std::size_t j = i + 1; j < n; ++j) {
                Vec3 d = f.positions[j] - a;
                for (double& c : d) c -= L * std::round(c / L);
                double const r = norm(d);
                if (r < r_max) {
                    auto b = std::min(n_bins - 1, std::size_t(r / width));
                    hist[b] += 2.0;   // both (i,j) and (j,i)
                }
            }
        }
    }
    // ideal-gas expectation per ordered pair: shell volume / V
    double const volume = L * L * L;
    double const pairs = double(n) * double(n - 1) * double(traj.size());
    PairDistribution out;
    out.r.resize(n_bins);
    out.g.resize(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b) {
        double const r0 = width * double(b);
        double const r1 = r0 + width;
        double const shell = 4.0 / 3.0 * std::numbers::pi * (r1 * r1 * r1 - r0 * r0 * r0);
        out.r[b] = 0.5 * (r0 + r1);
        out.g[b] = hist[b] / (pairs * shell / volume);
    }
    return out;
}

StructureFactorCurve structure_factor_angular_avg(std::span<SpeckleField const> fields, std::span<double const> edges)
{
    if (fields.empty()) throw ArgumentError("structure_factor_angular_avg: no fields");
    if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end()) ||
        std::adjacent_find(edges.begin(), edges.end()) != edges.end())
        throw ArgumentError("structure_factor_angular_avg: need at least two strictly increasing bin edges");
    std::size_t const n_bins = edges.size() - 1;
    ReciprocalLattice const& lat = fields.front().lattice();
    std::size_t const n = lat.n_grid();

    std::vector<double> sum(n_bins, 0.0);
    std::vector<std::size_t> count(n_bins, 0);
    for (SpeckleField const& f : fields) {
        if (!(f.lattice() == lat)) throw GridMismatch("structure_factor_angular_avg: fields on different grids");
        for (std::size_t iz = 0; iz < n; ++iz)
            for (std::size_t iy = 0; iy < n; ++iy)
                for (std::size_t ix = 0; ix < n; ++ix) {
                    if (ix == 0 && iy == 0 && iz == 0) continue;
                    double const q = lat.magnitude(ix, iy, iz);
                    if (q < edges.front() || q >= edges.back()) continue;
                    if (!f.resolved(ix, iy, iz)) continue;
                    auto b = std::size_t(std::upper_bound(edges.begin(), edges.end(), q) - edges.begin()) - 1;
                    sum[b] += f.at(ix, iy, iz) / f.composition().sum_f_squared(q);
                    ++count[b];
                }
    }
    StructureFactorCurve out;
    out.q.resize(n_bins);
    out.s.resize(n_bins);
    out.count = count;
    for (std::size_t b = 0; b < n_bins; ++b) {
        out.q[b] = 0.5 * (edges[b] + edges[b + 1]);
        out.s[b] = count[b] ? sum[b] / double(count[b]) : std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

} // namespace xpcs
