#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "isac/numerics.hpp"

namespace isac {

/// Exact rational used for the AFDM chirp rate so that the 2*N*c1 integrality
/// constraint is checked without floating-point ambiguity.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Unit-spectral-norm skew-Hermitian direction on the unitary group.
class GeodesicDirection {
public:
    /// Validates skew-Hermitian structure and ||K||_2 = 1 (both within 1e-9).
    explicit GeodesicDirection(CMatrix k);

    /// Rescales an arbitrary nonzero skew-Hermitian matrix to unit spectral norm.
    static GeodesicDirection normalized(const CMatrix& k);
    /// Random direction: complex Gaussian G, K = (G - G^H)/2, normalized.
    static GeodesicDirection random(std::size_t n, std::uint64_t seed);

    const CMatrix& k() const { return k_; }
    Index size() const { return k_.rows(); }

private:
    CMatrix k_;
};

/// Unitary modulation basis U with its cached Q = U^H F^H and B = |Q|^2.
class UnitaryBasis {
public:
    /// Validates ||U^H U - I||_F <= 1e-9 sqrt(N).
    UnitaryBasis(CMatrix u, std::string label);
    /// Same, with Q supplied when it is known in closed form.
    UnitaryBasis(CMatrix u, CMatrix q, std::string label);

    const CMatrix& u() const { return u_; }
    const CMatrix& q() const { return q_; }
    /// Row r, column n holds |Q_{r,n}|^2; column n is the power profile that
    /// frequency bin n receives from every symbol.
    const RMatrix& b() const { return b_; }
    const std::string& label() const { return label_; }
    Index size() const { return u_.rows(); }

private:
    CMatrix u_;
    CMatrix q_;
    RMatrix b_;
    std::string label_;
};

UnitaryBasis basis_sc(std::size_t n);
UnitaryBasis basis_ofdm(std::size_t n);
UnitaryBasis basis_otfs(std::size_t n1, std::size_t n2);
UnitaryBasis basis_afdm(std::size_t n, Rational c1, double c2);
UnitaryBasis basis_geodesic(const UnitaryBasis& base, const GeodesicDirection& k, double t);

/// Diag{exp(-j2pi c m^2)}, m = 0..n-1.
CVector chirp_diagonal(std::size_t n, double c);

/// Parses `sc`, `ofdm`, `otfs:N1xN2`, `afdm:num/den,c2` at block length n.
UnitaryBasis parse_waveform(std::string_view selector, std::size_t n);

/// Reads the text format "N" followed by N^2 lines "re im" (row-major).
CMatrix read_basis_matrix(const std::filesystem::path& path);
/// read_basis_matrix plus the unitarity check of UnitaryBasis.
UnitaryBasis load_basis_file(const std::filesystem::path& path);
void write_basis_file(const std::filesystem::path& path, const CMatrix& u);

/// Standard deviation of the power spectrum |F u|^2 on the grid (k-1)/N.
double rms_bandwidth(const CVector& u_col);
/// Minimum RMS bandwidth over the columns of U.
double alpha_spread(const UnitaryBasis& basis);
const RMatrix& mixing_matrix(const UnitaryBasis& basis);

/// Max deviation of B's row and column sums from one.
double doubly_stochastic_residual(const RMatrix& b);

} // namespace isac
