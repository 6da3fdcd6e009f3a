#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

#include "isac/error.hpp"

namespace isac {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kPi = 3.14159265358979323846;

namespace numerics {

/// Matrices with rcond below this are treated as singular everywhere in the
/// library (matrix inversion, FIM draws, Monte Carlo skip policy).
inline constexpr double kSingularRcond = 1e-12;

struct HermitianEig {
    RVector eigenvalues;  // ascending
    CMatrix eigenvectors; // orthonormal columns
};

struct SymmetricEig {
    RVector eigenvalues;  // ascending
    RMatrix eigenvectors;
};

/// Throws invalid_dimension / domain errors for empty or non-finite input.
void require_finite(const CMatrix& a, std::string_view what);
void require_finite(const RMatrix& a, std::string_view what);
void require_square(Index rows, Index cols, std::string_view what);

/// Normalized DFT matrix, entry (m,k) = exp(-j2pi mk/n)/sqrt(n), 0-based.
CMatrix dft_matrix(std::size_t n);

HermitianEig hermitian_eig(const CMatrix& a);
SymmetricEig symmetric_eig(const RMatrix& a);

/// Hermitian inputs are inverted through their eigendecomposition, anything
/// else through partial-pivot LU. Throws SingularError when rcond < 1e-12.
CMatrix inverse(const CMatrix& a);
RMatrix inverse(const RMatrix& a);

/// Hermitian PSD square root. Eigenvalues down to -1e-10*lambda_max are
/// clamped to zero; below -1e-6*lambda_max throws not_psd.
CMatrix psd_sqrt(const CMatrix& a);
RMatrix psd_sqrt(const RMatrix& a);

/// exp(t*k) for skew-Hermitian k, via the eigendecomposition of j*k.
CMatrix exp_skew(const CMatrix& k, double t);

/// lambda_min / lambda_max of a Hermitian matrix (0 when lambda_max is 0).
double rcond_estimate(const CMatrix& a);
double rcond_estimate(const RMatrix& a);

/// ||A^H A - I||_F.
double unitarity_residual(const CMatrix& a);

} // namespace numerics
} // namespace isac
