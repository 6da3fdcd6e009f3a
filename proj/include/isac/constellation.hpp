#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "isac/numerics.hpp"

namespace isac {

/// Kurtosis of a standard complex Gaussian symbol; the sub-Gaussian boundary.
inline constexpr double kGaussianKurtosis = 2.0;

struct AssumptionReport {
    bool unit_power = false;
    bool zero_mean = false;
    bool zero_pseudo_variance = false;
    bool central_symmetry = false;
    bool nonzero_points = false;
    bool sub_gaussian = false;

    double power_residual = 0.0;          // |E|s|^2 - 1|
    double mean_residual = 0.0;           // |E s|
    double pseudo_variance_residual = 0.0; // |E s^2|
    double symmetry_residual = 0.0;       // max over points of distance from -p to its ring
    double kurtosis = 0.0;

    /// The three normalization/symmetry assumptions plus "no zero point".
    bool all_pass() const {
        return unit_power && zero_mean && zero_pseudo_variance && central_symmetry && nonzero_points;
    }
};

/// Finite alphabet under the uniform distribution, normalized to unit average
/// power. Immutable; construction enforces every assumption.
class Constellation {
public:
    static Constellation psk(std::size_t order);
    /// Square QAM (16, 64, 256, 1024) and cross QAM (128, 512, 2048).
    static Constellation qam(std::size_t order);
    /// "psk<M>" or "qam<M>", e.g. "psk16", "qam64".
    static Constellation from_name(std::string_view name);
    /// Arbitrary alphabet; rescaled to unit power, then validated.
    static Constellation custom(std::string name, std::vector<Complex> points);

    const std::vector<Complex>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    const std::string& name() const { return name_; }
    double kurtosis() const { return kurtosis_; }
    double power() const { return power_; }

private:
    Constellation(std::string name, std::vector<Complex> points);

    std::string name_;
    std::vector<Complex> points_;
    double kurtosis_ = 0.0;
    double power_ = 0.0;
};

/// (mean |p|^4) / (mean |p|^2)^2 over the alphabet.
double kurtosis(std::span<const Complex> points);
double kurtosis(const Constellation& c);

AssumptionReport validate_assumptions(std::span<const Complex> points);
AssumptionReport validate_assumptions(const Constellation& c);

struct SymbolVector {
    CVector symbols;
    std::uint64_t seed = 0;
    std::uint64_t trial = 0;
};

/// n i.i.d. uniform draws; a pure function of (c, n, seed, trial).
SymbolVector sample_symbols(const Constellation& c, std::size_t n, std::uint64_t seed,
                            std::uint64_t trial);

/// Deterministic enumeration: the digits of `index` in base |S| select the
/// symbols (entry 0 is the least significant digit).
SymbolVector enumerate_symbols(const Constellation& c, std::size_t n, std::uint64_t index);

} // namespace isac
