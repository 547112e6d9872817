#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace xpcs {

/// f(q) = Σ_{i=1..4} a_i·exp(-b_i·(q/4π)²) + c, q in Å^-1.
struct FormFactorCoefficients
{
    std::array<double, 4> a{};
    std::array<double, 4> b{};
    double c = 0.0;
};

class FormFactor
{
public:
    /// f ≡ 1.
    static FormFactor unit() { return FormFactor(); }
    FormFactor(std::string species, FormFactorCoefficients const& coeffs);

    double operator()(double q) const;
    double at_zero() const { return unit_ ? 1.0 : coeffs_.a[0] + coeffs_.a[1] + coeffs_.a[2] + coeffs_.a[3] + coeffs_.c; }
    bool is_unit() const { return unit_; }
    std::string const& species() const { return species_; }
    FormFactorCoefficients const& coefficients() const { return coeffs_; }

    bool operator==(FormFactor const& o) const
    {
        return unit_ == o.unit_ && species_ == o.species_ && coeffs_.a == o.coeffs_.a && coeffs_.b == o.coeffs_.b &&
               coeffs_.c == o.coeffs_.c;
    }

private:
    FormFactor() = default;
    bool unit_ = true;
    std::string species_ = "unit";
    FormFactorCoefficients coeffs_{};
};

/// Registry of Gaussian-sum coefficients keyed by species label.
class FormFactorTable
{
public:
    /// Whitespace table: `species a1 b1 a2 b2 a3 b3 a4 b4 c`, '#' comments.
    static FormFactorTable parse(std::istream& in);
    static FormFactorTable load(std::string const& path);
    /// The table shipped in data/form_factors.txt.
    static FormFactorTable const& bundled();

    void add(std::string const& species, FormFactorCoefficients const& coeffs);
    bool contains(std::string const& species) const { return table_.count(species) != 0; }
    /// Throws ArgumentError listing the registered species when missing.
    FormFactor const& at(std::string const& species) const;
    std::vector<std::string> species() const;

private:
    std::map<std::string, FormFactor> table_;
};

/// Maps the species labels of a frame to form factors: either everything is
/// the unit form factor, or labels are looked up in a table.
class FormFactorModel
{
public:
    static FormFactorModel unit() { return FormFactorModel(); }
    static FormFactorModel tabulated(FormFactorTable table);

    bool is_unit() const { return unit_; }
    FormFactor const& for_species(std::string const& species) const;

private:
    FormFactorModel() = default;
    bool unit_ = true;
    FormFactorTable table_;
    FormFactor unit_ff_ = FormFactor::unit();
};

/// `form_factor(species, q)` via a model.
inline double form_factor(FormFactorModel const& model, std::string const& species, double q)
{
    return model.for_species(species)(q);
}

} // namespace xpcs
