#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "isac/numerics.hpp"

namespace isac {

/// Speed of light in m/s, used for range-unit conversion.
inline constexpr double kSpeedOfLight = 299792458.0;

/// Target geometry and noise level. Delays are in normalized sampling units.
class Scenario {
public:
    /// Throws degenerate_scenario naming the first failed condition.
    Scenario(std::size_t n, std::vector<double> taus, std::vector<Complex> betas, double sigma2);

    std::size_t n() const { return n_; }
    std::size_t l() const { return taus_.size(); }
    const std::vector<double>& taus() const { return taus_; }
    const std::vector<Complex>& betas() const { return betas_; }
    double sigma2() const { return sigma2_; }

    Scenario with_sigma2(double sigma2) const;
    Scenario with_n(std::size_t n) const;

private:
    std::size_t n_;
    std::vector<double> taus_;
    std::vector<Complex> betas_;
    double sigma2_;
};

/// Every violated scenario condition as a human-readable line; empty if valid.
std::vector<std::string> scenario_violations(std::size_t n, const std::vector<double>& taus,
                                             const std::vector<Complex>& betas, double sigma2);

/// Jacobian and rank-one geometry matrices of a scenario.
struct Geometry {
    std::size_t n = 0;
    std::size_t l = 0;
    double sigma2 = 1.0;
    CMatrix h;                   // N x 3L, columns [beta a' | a | j a]
    std::vector<RMatrix> c_mats; // C_n = (2/sigma^2) Re(h_n^H h_n), h_n row n of H
    RMatrix stacked;             // [Re H; Im H], 2N x 3L
    RMatrix jbar;                // (2/sigma^2) Re(H^H H) = sum_n C_n

    /// 2/sigma^2.
    double scale() const { return 2.0 / sigma2; }
    Index params() const { return h.cols(); }
};

CVector steering(double tau, std::size_t n);
CVector steering_derivative(double tau, std::size_t n);
/// Fractional periodic delay P_tau = F^H Diag{exp(-j2pi m tau/n)} F.
CMatrix delay_operator(double tau, std::size_t n);

Geometry build_geometry(const Scenario& s);
/// Geometry of raw targets without the Scenario invariants (N > 3L, distinct
/// delays, nonzero amplitudes); only shapes and sigma2 are checked.
Geometry build_geometry(std::size_t n, const std::vector<double>& taus, const std::vector<Complex>& betas,
                        double sigma2);

/// scale * Hs^T Diag([w; w]) Hs for nonnegative w, Hs = [Re H; Im H].
/// Deterministic: equal inputs give bitwise equal outputs.
RMatrix weighted_gram(const RMatrix& stacked, const RVector& weights, double scale);

enum class SelectionKind { delay, amplitude, full };

/// Diagonal 0/1 projector T selecting the parameters whose CRB is summed.
struct SelectionMatrix {
    SelectionKind kind = SelectionKind::delay;
    RMatrix t;
    std::vector<Index> indices;
};

SelectionMatrix selection(SelectionKind kind, std::size_t l);
SelectionKind parse_selection_kind(std::string_view name);
std::string_view to_string(SelectionKind kind);

enum class AmplitudeLaw { unit_random_phase, unit_real };

AmplitudeLaw parse_amplitude_law(std::string_view name);

/// Rejection-sampled delays in [0, n) with circular separation >= min_separation.
Scenario random_scenario(std::uint64_t seed, std::size_t n, std::size_t l, double min_separation,
                         AmplitudeLaw law = AmplitudeLaw::unit_random_phase, double sigma2 = 1.0);

/// Text format: "n <N>", "l <L>", "sigma2 <s>" (also "key = value") and one
/// "tau beta_re beta_im" line per target. '#' starts a comment.
struct ScenarioFileData {
    std::size_t n = 0;
    std::vector<double> taus;
    std::vector<Complex> betas;
    double sigma2 = 1.0;
};

ScenarioFileData read_scenario_data(const std::filesystem::path& path);
Scenario load_scenario_file(const std::filesystem::path& path);
void write_scenario_file(const std::filesystem::path& path, const Scenario& s);

/// Factor c^2/(4B^2) converting a normalized-delay CRB to squared meters.
double range_unit_factor(double bandwidth_hz);

} // namespace isac
