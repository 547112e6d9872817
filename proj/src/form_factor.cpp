#include <xpcs/form_factor.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <xpcs/error.hpp>

namespace xpcs {

FormFactor::FormFactor(std::string species, FormFactorCoefficients const& coeffs)
  : unit_(false)
  , species_(std::move(species))
  , coeffs_(coeffs)
{}

double FormFactor::operator()(double q) const
{
    if (unit_) return 1.0;
    double s = q / (4.0 * std::numbers::pi);
    double s2 = s * s;
    double f = coeffs_.c;
    for (int i = 0; i < 4; ++i) f += coeffs_.a[i] * std::exp(-coeffs_.b[i] * s2);
    return f;
}

FormFactorTable FormFactorTable::parse(std::istream& in)
{
    FormFactorTable t;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        std::string species;
        if (!(ss >> species)) continue;
        FormFactorCoefficients c;
        for (int i = 0; i < 4; ++i)
            if (!(ss >> c.a[i] >> c.b[i])) throw ParseError("form factor table: expected a_i b_i pairs", line_no);
        if (!(ss >> c.c)) throw ParseError("form factor table: missing constant c", line_no);
        t.add(species, c);
    }
    return t;
}

FormFactorTable FormFactorTable::load(std::string const& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open form factor table '" + path + "'");
    return parse(in);
}

FormFactorTable const& FormFactorTable::bundled()
{
    static FormFactorTable const table = load(std::string(XPCS_DATA_DIR) + "/form_factors.txt");
    return table;
}

void FormFactorTable::add(std::string const& species, FormFactorCoefficients const& coeffs)
{
    table_.insert_or_assign(species, FormFactor(species, coeffs));
}

FormFactor const& FormFactorTable::at(std::string const& species) const
{
    auto it = table_.find(species);
    if (it == table_.end()) {
        std::string known;
        for (auto const& [name, ff] : table_) known += (known.empty() ? "" : ", ") + name;
        throw ArgumentError("unknown species '" + species + "' (registered: " + known + ")");
    }
    return it->second;
}

std::vector<std::string> FormFactorTable::species() const
{
    std::vector<std::string> out;
    for (auto const& [name, ff] : table_) out.push_back(name);
    return out;
}

FormFactorModel FormFactorModel::tabulated(FormFactorTable table)
{
    FormFactorModel m;
    m.unit_ = false;
    m.table_ = std::move(table);
    return m;
}

FormFactor const& FormFactorModel::for_species(std::string const& species) const
{
    return unit_ ? unit_ff_ : table_.at(species);
}

} // namespace xpcs
