#include <xpcs/trajectory.hpp>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include <xpcs/error.hpp>

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace xpcs {

namespace {

std::vector<std::string> split_ws(std::string const& line)
{
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

bool to_double(std::string const& s, double& out)
{
    char const* b = s.data();
    char const* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && p == e && std::isfinite(out);
}

template <typename Int>
bool to_int(std::string const& s, Int& out)
{
    char const* b = s.data();
    char const* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && p == e;
}

std::string trim(std::string s)
{
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

/// key=value pairs of an extended-XYZ comment line; values may be double-quoted.
std::map<std::string, std::string> parse_comment(std::string const& line)
{
    std::map<std::string, std::string> kv;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t key_start = i;
        while (i < line.size() && line[i] != '=' && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::string key = line.substr(key_start, i - key_start);
        if (i >= line.size() || line[i] != '=') {
            if (!key.empty()) kv[key] = "";
            continue;
        }
        ++i;
        std::string value;
        if (i < line.size() && line[i] == '"') {
            std::size_t close = line.find('"', i + 1);
            if (close == std::string::npos) close = line.size();
            value = line.substr(i + 1, close - i - 1);
            i = close + 1;
        } else {
            std::size_t start = i;
            while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
            value = line.substr(start, i - start);
        }
        kv[key] = value;
    }
    return kv;
}

double cubic_lattice_length(std::string const& value, std::size_t line_no)
{
    auto toks = split_ws(value);
    std::vector<double> m;
    for (auto const& t : toks) {
        double v;
        if (!to_double(t, v)) throw ParseError("non-numeric Lattice entry '" + t + "'", line_no);
        m.push_back(v);
    }
    if (m.size() == 1) return m[0];
    if (m.size() != 9) throw ParseError("Lattice must have 9 entries", line_no);
    double L = m[0];
    double tol = 1e-9 * std::abs(L);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            double v = m[3 * r + c];
            if (r == c && std::abs(v - L) > tol)
                throw UnsupportedGeometry("line " + std::to_string(line_no) + ": only cubic boxes are supported");
            if (r != c && std::abs(v) > tol)
                throw UnsupportedGeometry("line " + std::to_string(line_no) +
                                          ": non-orthogonal (triclinic) lattice is not supported");
        }
    return L;
}

} // namespace

Trajectory parse_xyz(std::istream& in, std::string const& source)
{
    std::vector<Frame> frames;
    SpeciesList species;
    std::string line;
    std::size_t line_no = 0;
    std::size_t expected = 0;
    bool any_time = false, all_time = true;

    while (true) {
        if (!std::getline(in, line)) break;
        ++line_no;
        std::string count_text = trim(line);
        if (count_text.empty()) continue;
        std::size_t frame_no = frames.size() + 1;
        std::size_t count = 0;
        if (!to_int(count_text, count)) throw ParseError("malformed atom count '" + count_text + "'", line_no);
        if (frame_no == 1) {
            expected = count;
        } else if (count != expected) {
            throw ParseError("frame " + std::to_string(frame_no) + ": atom count mismatch (expected " +
                                 std::to_string(expected) + ", got " + std::to_string(count) + ")",
                             line_no);
        }

        if (!std::getline(in, line)) throw ParseError("missing comment line", line_no + 1);
        ++line_no;
        auto kv = parse_comment(line);
        double L = 0.0;
        if (auto it = kv.find("Lattice"); it != kv.end()) {
            L = cubic_lattice_length(it->second, line_no);
        } else if (auto it2 = kv.find("box_length"); it2 != kv.end()) {
            if (!to_double(it2->second, L)) throw ParseError("non-numeric box_length", line_no);
        } else {
            throw ParseError("frame " + std::to_string(frame_no) + ": missing box length (Lattice=...)", line_no);
        }
        if (!(L > 0.0)) throw ParseError("box length must be positive", line_no);

        double time = double(frames.size());
        bool has_time = false;
        for (char const* key : {"time", "Time", "t"}) {
            if (auto it = kv.find(key); it != kv.end()) {
                if (!to_double(it->second, time)) throw ParseError("non-numeric time", line_no);
                has_time = true;
                break;
            }
        }
        any_time |= has_time;
        all_time &= has_time;
        bool with_unwrapped = kv.count("unwrapped") && (kv["unwrapped"] == "T" || kv["unwrapped"] == "true");

        Frame fr;
        fr.box_length = L;
        fr.time = time;
        fr.positions.reserve(count);
        auto names = std::make_shared<std::vector<std::string>>();
        names->reserve(count);
        for (std::size_t a = 0; a < count; ++a) {
            if (!std::getline(in, line))
                throw ParseError("frame " + std::to_string(frame_no) + ": atom count mismatch (file ends early)",
                                 line_no + 1);
            ++line_no;
            auto toks = split_ws(line);
            std::size_t need = with_unwrapped ? 7 : 4;
            if (toks.size() < need) throw ParseError("expected 'species x y z' row", line_no);
            Vec3 r{};
            for (int c = 0; c < 3; ++c)
                if (!to_double(toks[1 + c], r[c]))
                    throw ParseError("non-numeric coordinate '" + toks[1 + c] + "'", line_no);
            if (with_unwrapped) {
                Vec3 u{};
                for (int c = 0; c < 3; ++c)
                    if (!to_double(toks[4 + c], u[c]))
                        throw ParseError("non-numeric coordinate '" + toks[4 + c] + "'", line_no);
                fr.unwrapped.push_back(u);
            }
            names->push_back(toks[0]);
            fr.positions.push_back(wrap(r, L));
        }
        if (!species || *species != *names) {
            if (species && frames.size() > 0)
                throw ParseError("frame " + std::to_string(frame_no) + ": species ordering differs", line_no);
            species = std::move(names);
        }
        fr.species = species;
        frames.push_back(std::move(fr));
    }
    if (frames.empty()) throw ParseError("no frames found");
    if (any_time && !all_time) throw ParseError("time given for some frames but not all");
    try {
        return Trajectory(std::move(frames), {source, std::nullopt});
    } catch (ArgumentError const& e) {
        throw ParseError(e.what());
    }
}

void write_xyz(Trajectory const& traj, std::ostream& out)
{
    out << std::setprecision(17);
    for (auto const& fr : traj.frames()) {
        double L = fr.box_length;
        out << fr.size() << '\n';
        out << "Lattice=\"" << L << " 0 0 0 " << L << " 0 0 0 " << L << "\" time=" << fr.time;
        if (fr.has_unwrapped()) out << " unwrapped=T";
        out << '\n';
        for (std::size_t i = 0; i < fr.size(); ++i) {
            auto const& r = fr.positions[i];
            out << fr.species_of(i) << ' ' << r[0] << ' ' << r[1] << ' ' << r[2];
            if (fr.has_unwrapped()) {
                auto const& u = fr.unwrapped[i];
                out << ' ' << u[0] << ' ' << u[1] << ' ' << u[2];
            }
            out << '\n';
        }
    }
}

// ---- LAMMPS --------------------------------------------------------------

namespace {

struct AtomRow
{
    long long id;
    std::string species;
    Vec3 wrapped;
    Vec3 unwrapped;
};

} // namespace

Trajectory parse_lammps_dump(std::istream& in, LammpsDumpOptions const& options, std::string const& source)
{
    if (!(options.timestep_ps > 0.0)) throw ArgumentError("LAMMPS timestep must be positive");
    std::vector<Frame> frames;
    SpeciesList species;
    bool unwrapped_view = false;
    std::string line;
    std::size_t line_no = 0;

    auto next_line = [&](char const* what) -> std::string& {
        if (!std::getline(in, line)) throw ParseError(std::string("unexpected end of file, expected ") + what,
                                                      line_no + 1);
        ++line_no;
        return line;
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        if (trim(line) != "ITEM: TIMESTEP") throw ParseError("expected 'ITEM: TIMESTEP'", line_no);
        long long step = 0;
        if (!to_int(trim(next_line("timestep")), step)) throw ParseError("malformed timestep", line_no);

        if (trim(next_line("ITEM: NUMBER OF ATOMS")) != "ITEM: NUMBER OF ATOMS")
            throw ParseError("expected 'ITEM: NUMBER OF ATOMS'", line_no);
        std::size_t count = 0;
        if (!to_int(trim(next_line("atom count")), count)) throw ParseError("malformed atom count", line_no);

        std::string bounds = trim(next_line("ITEM: BOX BOUNDS"));
        if (bounds.rfind("ITEM: BOX BOUNDS", 0) != 0) throw ParseError("expected 'ITEM: BOX BOUNDS'", line_no);
        if (bounds.find("xy") != std::string::npos || bounds.find("xz") != std::string::npos ||
            bounds.find("yz") != std::string::npos)
            throw UnsupportedGeometry("line " + std::to_string(line_no) +
                                      ": triclinic box bounds (xy xz yz) are not supported");
        double lo[3], hi[3];
        for (int d = 0; d < 3; ++d) {
            auto toks = split_ws(next_line("box bounds"));
            if (toks.size() != 2) {
                if (toks.size() == 3)
                    throw UnsupportedGeometry("line " + std::to_string(line_no) + ": tilted box bounds are not supported");
                throw ParseError("expected 'lo hi' box bounds", line_no);
            }
            if (!to_double(toks[0], lo[d]) || !to_double(toks[1], hi[d]))
                throw ParseError("non-numeric box bounds", line_no);
        }
        double L = hi[0] - lo[0];
        if (!(L > 0.0)) throw ParseError("box bounds must have hi > lo", line_no);
        for (int d = 1; d < 3; ++d)
            if (std::abs((hi[d] - lo[d]) - L) > 1e-9 * L)
                throw UnsupportedGeometry("line " + std::to_string(line_no) + ": only cubic boxes are supported");

        auto header = split_ws(next_line("ITEM: ATOMS"));
        if (header.size() < 2 || header[0] != "ITEM:" || header[1] != "ATOMS")
            throw ParseError("expected 'ITEM: ATOMS ...'", line_no);
        std::map<std::string, std::size_t> col;
        for (std::size_t c = 2; c < header.size(); ++c) col[header[c]] = c - 2;
        auto find_set = [&](char const* a, char const* b, char const* c) -> std::optional<std::array<std::size_t, 3>> {
            if (col.count(a) && col.count(b) && col.count(c)) return std::array{col[a], col[b], col[c]};
            return std::nullopt;
        };
        auto plain = find_set("x", "y", "z");
        auto scaled = find_set("xs", "ys", "zs");
        auto unwrapped = find_set("xu", "yu", "zu");
        auto scaled_unwrapped = find_set("xsu", "ysu", "zsu");
        auto images = find_set("ix", "iy", "iz");
        if (!plain && !scaled && !unwrapped && !scaled_unwrapped)
            throw ParseError("unknown column layout: need x y z, xs ys zs, xu yu zu or xsu ysu zsu", line_no);
        bool frame_unwrapped = unwrapped || scaled_unwrapped || (images && (plain || scaled));
        if (!frames.empty() && frame_unwrapped != unwrapped_view)
            throw ParseError("column layout changes between frames", line_no);
        unwrapped_view = frame_unwrapped;
        std::size_t const ncols = header.size() - 2;

        std::vector<AtomRow> rows;
        rows.reserve(count);
        for (std::size_t a = 0; a < count; ++a) {
            auto toks = split_ws(next_line("atom row"));
            if (toks.size() != ncols)
                throw ParseError("expected " + std::to_string(ncols) + " columns, got " + std::to_string(toks.size()),
                                 line_no);
            auto read3 = [&](std::array<std::size_t, 3> const& idx) {
                Vec3 v{};
                for (int d = 0; d < 3; ++d)
                    if (!to_double(toks[idx[d]], v[d]))
                        throw ParseError("non-numeric coordinate '" + toks[idx[d]] + "'", line_no);
                return v;
            };
            AtomRow row{};
            row.id = static_cast<long long>(a);
            if (col.count("id") && !to_int(toks[col["id"]], row.id)) throw ParseError("malformed atom id", line_no);
            if (col.count("element")) row.species = toks[col["element"]];
            else if (col.count("type")) row.species = toks[col["type"]];
            else row.species = "X";

            Vec3 raw{};  // relative to lo, not yet wrapped
            if (plain) raw = read3(*plain) - Vec3{lo[0], lo[1], lo[2]};
            else if (scaled) raw = L * read3(*scaled);
            else if (unwrapped) raw = read3(*unwrapped) - Vec3{lo[0], lo[1], lo[2]};
            else raw = L * read3(*scaled_unwrapped);
            row.wrapped = wrap(raw, L);

            if (frame_unwrapped) {
                if (unwrapped) row.unwrapped = read3(*unwrapped) - Vec3{lo[0], lo[1], lo[2]};
                else if (scaled_unwrapped) row.unwrapped = L * read3(*scaled_unwrapped);
                else {
                    Vec3 img = read3(*images);
                    row.unwrapped = raw + L * img;
                }
            }
            rows.push_back(std::move(row));
        }
        std::sort(rows.begin(), rows.end(), [](AtomRow const& a, AtomRow const& b) { return a.id < b.id; });

        Frame fr;
        fr.box_length = L;
        fr.time = double(step) * options.timestep_ps;
        auto names = std::make_shared<std::vector<std::string>>();
        for (auto const& r : rows) {
            names->push_back(r.species);
            fr.positions.push_back(r.wrapped);
            if (frame_unwrapped) fr.unwrapped.push_back(r.unwrapped);
        }
        if (!species || *species != *names) {
            if (species) throw ParseError("frame " + std::to_string(frames.size() + 1) + ": species ordering differs",
                                          line_no);
            species = std::move(names);
        }
        if (!frames.empty() && fr.size() != frames.front().size())
            throw ParseError("frame " + std::to_string(frames.size() + 1) + ": atom count mismatch", line_no);
        fr.species = species;
        frames.push_back(std::move(fr));
    }
    if (frames.empty()) throw ParseError("no frames found");
    try {
        return Trajectory(std::move(frames), {source, std::nullopt});
    } catch (ArgumentError const& e) {
        throw ParseError(e.what());
    }
}

// ---- binary cache ----------------------------------------------------------

namespace {

constexpr char kTrajMagic[8] = {'X', 'P', 'C', 'S', 'T', 'R', 'J', '1'};
constexpr std::uint32_t kTrajVersion = 1;

template <typename T>
void put(std::ostream& out, T const& v)
{
    out.write(reinterpret_cast<char const*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in)
{
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw IoError("binary trajectory: truncated file");
    return v;
}

void put_block(std::ostream& out, std::vector<Vec3> const& v)
{
    out.write(reinterpret_cast<char const*>(v.data()), std::streamsize(v.size() * sizeof(Vec3)));
}

void get_block(std::istream& in, std::vector<Vec3>& v, std::size_t n)
{
    v.resize(n);
    if (!in.read(reinterpret_cast<char*>(v.data()), std::streamsize(n * sizeof(Vec3))))
        throw IoError("binary trajectory: truncated coordinate block");
}

} // namespace

void write_binary_trajectory(Trajectory const& traj, std::ostream& out)
{
    out.write(kTrajMagic, sizeof kTrajMagic);
    put(out, kTrajVersion);
    put(out, std::uint64_t(traj.atom_count()));
    put(out, traj.box_length());
    put(out, std::uint64_t(traj.size()));
    put(out, std::uint8_t(traj.has_unwrapped()));
    put(out, std::uint8_t(traj.metadata().seed.has_value()));
    put(out, traj.metadata().seed.value_or(0));
    if (!traj.empty())
        for (auto const& s : *traj.species()) {
            put(out, std::uint32_t(s.size()));
            out.write(s.data(), std::streamsize(s.size()));
        }
    for (auto const& fr : traj.frames()) {
        put(out, fr.time);
        put_block(out, fr.positions);
        if (traj.has_unwrapped()) put_block(out, fr.unwrapped);
    }
    if (!out) throw IoError("binary trajectory: write failed");
}

Trajectory read_binary_trajectory(std::istream& in)
{
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kTrajMagic, 8) != 0)
        throw IoError("binary trajectory: bad magic");
    if (get<std::uint32_t>(in) != kTrajVersion) throw IoError("binary trajectory: unsupported version");
    auto n = get<std::uint64_t>(in);
    auto L = get<double>(in);
    auto n_frames = get<std::uint64_t>(in);
    bool has_unwrapped = get<std::uint8_t>(in) != 0;
    bool has_seed = get<std::uint8_t>(in) != 0;
    auto seed = get<std::uint64_t>(in);
    auto names = std::make_shared<std::vector<std::string>>();
    if (n_frames > 0)
        for (std::uint64_t i = 0; i < n; ++i) {
            auto len = get<std::uint32_t>(in);
            std::string s(len, '\0');
            if (!in.read(s.data(), len)) throw IoError("binary trajectory: truncated species table");
            names->push_back(std::move(s));
        }
    SpeciesList species = names;
    std::vector<Frame> frames(n_frames);
    for (auto& fr : frames) {
        fr.box_length = L;
        fr.species = species;
        fr.time = get<double>(in);
        get_block(in, fr.positions, n);
        if (has_unwrapped) get_block(in, fr.unwrapped, n);
    }
    TrajectoryMetadata meta{"binary", has_seed ? std::optional<std::uint64_t>(seed) : std::nullopt};
    return Trajectory(std::move(frames), meta);
}

Trajectory load_trajectory(std::string const& path, std::string const& format, LammpsDumpOptions const& options)
{
    std::ifstream in(path, format == "binary" ? std::ios::binary : std::ios::in);
    if (!in) throw IoError("cannot open trajectory '" + path + "'");
    if (format == "xyz") return parse_xyz(in, path);
    if (format == "lammps") return parse_lammps_dump(in, options, path);
    if (format == "binary") return read_binary_trajectory(in);
    throw ArgumentError("unknown trajectory format '" + format + "' (expected xyz, lammps or binary)");
}

} // namespace xpcs
