#include "isac/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace isac {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::invalid_dimension: return "invalid-dimension";
    case ErrorKind::domain: return "domain";
    case ErrorKind::singular_matrix: return "singular-matrix";
    case ErrorKind::not_psd: return "not-psd";
    case ErrorKind::unsupported_constellation: return "unsupported-constellation";
    case ErrorKind::invalid_parameter: return "invalid-parameter";
    case ErrorKind::degenerate_scenario: return "degenerate-scenario";
    case ErrorKind::infeasible_separation: return "infeasible-separation";
    case ErrorKind::singular_fim: return "singular-fim";
    case ErrorKind::no_valid_draws: return "no-valid-draws";
    case ErrorKind::inapplicable_basis: return "inapplicable-basis";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
    }
    return "unknown";
}

namespace numerics {

namespace {

constexpr double kHermitianTol = 1e-9;
constexpr double kClampTol = 1e-10;
constexpr double kNotPsdTol = 1e-6;

template <typename M>
bool is_hermitian(const M& a) {
    const double scale = a.norm();
    return (a - a.adjoint()).norm() <= kHermitianTol * std::max(scale, 1e-300);
}

template <typename M>
void require_hermitian(const M& a, std::string_view what) {
    require_square(a.rows(), a.cols(), what);
    if (!is_hermitian(a)) {
        std::ostringstream msg;
        msg << what << ": matrix is not Hermitian (||A - A^H||_F = "
            << (a - a.adjoint()).norm() << ")";
        throw Error(ErrorKind::domain, msg.str());
    }
}

double ratio(double lo, double hi) {
    return hi == 0.0 ? 0.0 : lo / hi;
}

[[noreturn]] void throw_singular(std::string_view what, double rcond) {
    std::ostringstream msg;
    msg << what << ": matrix is singular (rcond = " << rcond << ")";
    throw SingularError(ErrorKind::singular_matrix, msg.str(), rcond);
}

template <typename M, typename Eig>
M eig_inverse(const Eig& eig, std::string_view what) {
    const auto& lam = eig.eigenvalues;
    const double amax = lam.cwiseAbs().maxCoeff();
    const double amin = lam.cwiseAbs().minCoeff();
    const double rc = ratio(amin, amax);
    if (rc < kSingularRcond) throw_singular(what, rc);
    const auto& v = eig.eigenvectors;
    M out = v * lam.cwiseInverse().asDiagonal() * v.adjoint();
    return (out + out.adjoint()) / 2.0;
}

template <typename M, typename Eig>
M eig_sqrt(const Eig& eig, std::string_view what) {
    RVector lam = eig.eigenvalues;
    const double lmax = lam.maxCoeff();
    const double lmin = lam.minCoeff();
    if (lmin < -kNotPsdTol * std::max(lmax, 0.0) || (lmax <= 0.0 && lmin < 0.0)) {
        std::ostringstream msg;
        msg << what << ": matrix is not PSD (lambda_min = " << lmin
            << ", lambda_max = " << lmax << ")";
        throw Error(ErrorKind::not_psd, msg.str());
    }
    // Small negatives between the clamp and not-PSD thresholds are rounding
    // noise of a PSD construction and are clamped as well.
    for (Index i = 0; i < lam.size(); ++i) lam[i] = std::sqrt(std::max(lam[i], 0.0));
    const auto& v = eig.eigenvectors;
    M out = v * lam.asDiagonal() * v.adjoint();
    return (out + out.adjoint()) / 2.0;
}

template <typename M>
void check_finite(const M& a, std::string_view what) {
    if (a.rows() < 1 || a.cols() < 1) {
        throw Error(ErrorKind::invalid_dimension, std::string(what) + ": empty matrix");
    }
    if (!a.allFinite()) {
        throw Error(ErrorKind::domain, std::string(what) + ": non-finite entry");
    }
}

} // namespace

void require_finite(const CMatrix& a, std::string_view what) { check_finite(a, what); }
void require_finite(const RMatrix& a, std::string_view what) { check_finite(a, what); }

void require_square(Index rows, Index cols, std::string_view what) {
    if (rows < 1 || rows != cols) {
        std::ostringstream msg;
        msg << what << ": expected a non-empty square matrix, got " << rows << "x" << cols;
        throw Error(ErrorKind::invalid_dimension, msg.str());
    }
}

CMatrix dft_matrix(std::size_t n) {
    if (n == 0) throw Error(ErrorKind::invalid_dimension, "dft_matrix: n must be >= 1");
    const auto sz = static_cast<Index>(n);
    const double norm = 1.0 / std::sqrt(static_cast<double>(n));
    CMatrix f(sz, sz);
    for (Index m = 0; m < sz; ++m) {
        for (Index k = 0; k < sz; ++k) {
            // Reduce the exponent mod n before scaling to keep the phase exact.
            const auto r = static_cast<double>((static_cast<unsigned long long>(m) *
                                                static_cast<unsigned long long>(k)) % n);
            f(m, k) = std::polar(norm, -2.0 * kPi * r / static_cast<double>(n));
        }
    }
    return f;
}

HermitianEig hermitian_eig(const CMatrix& a) {
    require_finite(a, "hermitian_eig");
    require_hermitian(a, "hermitian_eig");
    const CMatrix sym = (a + a.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorKind::domain, "hermitian_eig: eigensolver did not converge");
    }
    return {solver.eigenvalues(), solver.eigenvectors()};
}

SymmetricEig symmetric_eig(const RMatrix& a) {
    require_finite(a, "symmetric_eig");
    require_hermitian(a, "symmetric_eig");
    const RMatrix sym = (a + a.transpose()) / 2.0;
    Eigen::SelfAdjointEigenSolver<RMatrix> solver(sym);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorKind::domain, "symmetric_eig: eigensolver did not converge");
    }
    return {solver.eigenvalues(), solver.eigenvectors()};
}

CMatrix inverse(const CMatrix& a) {
    require_finite(a, "inverse");
    require_square(a.rows(), a.cols(), "inverse");
    if (is_hermitian(a)) return eig_inverse<CMatrix>(hermitian_eig(a), "inverse");
    Eigen::PartialPivLU<CMatrix> lu(a);
    const double rc = lu.rcond();
    if (!(rc >= kSingularRcond)) throw_singular("inverse", rc);
    return lu.inverse();
}

RMatrix inverse(const RMatrix& a) {
    require_finite(a, "inverse");
    require_square(a.rows(), a.cols(), "inverse");
    if (is_hermitian(a)) return eig_inverse<RMatrix>(symmetric_eig(a), "inverse");
    Eigen::PartialPivLU<RMatrix> lu(a);
    const double rc = lu.rcond();
    if (!(rc >= kSingularRcond)) throw_singular("inverse", rc);
    return lu.inverse();
}

CMatrix psd_sqrt(const CMatrix& a) {
    return eig_sqrt<CMatrix>(hermitian_eig(a), "psd_sqrt");
}

RMatrix psd_sqrt(const RMatrix& a) {
    return eig_sqrt<RMatrix>(symmetric_eig(a), "psd_sqrt");
}

CMatrix exp_skew(const CMatrix& k, double t) {
    require_finite(k, "exp_skew");
    require_square(k.rows(), k.cols(), "exp_skew");
    const double skew_res = (k + k.adjoint()).norm();
    if (skew_res > kHermitianTol * std::max(1.0, k.norm())) {
        std::ostringstream msg;
        msg << "exp_skew: matrix is not skew-Hermitian (||K + K^H||_F = " << skew_res << ")";
        throw Error(ErrorKind::domain, msg.str());
    }
    const Index n = k.rows();
    if (t == 0.0 || k.norm() == 0.0) return CMatrix::Identity(n, n);
    // j*K is Hermitian: j*K = V diag(lam) V^H, so exp(tK) = V diag(exp(-j t lam)) V^H.
    const CMatrix h = Complex(0.0, 1.0) * k;
    Eigen::SelfAdjointEigenSolver<CMatrix> solver((h + h.adjoint()) / 2.0);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorKind::domain, "exp_skew: eigensolver did not converge");
    }
    CVector phase(n);
    for (Index i = 0; i < n; ++i) phase[i] = std::polar(1.0, -t * solver.eigenvalues()[i]);
    const CMatrix& v = solver.eigenvectors();
    return v * phase.asDiagonal() * v.adjoint();
}

double rcond_estimate(const CMatrix& a) {
    const auto eig = hermitian_eig(a);
    return ratio(eig.eigenvalues[0], eig.eigenvalues[eig.eigenvalues.size() - 1]);
}

double rcond_estimate(const RMatrix& a) {
    require_finite(a, "rcond_estimate");
    require_hermitian(a, "rcond_estimate");
    Eigen::SelfAdjointEigenSolver<RMatrix> solver((a + a.transpose()) / 2.0,
                                                  Eigen::EigenvaluesOnly);
    const auto& lam = solver.eigenvalues();
    return ratio(lam[0], lam[lam.size() - 1]);
}

double unitarity_residual(const CMatrix& a) {
    return (a.adjoint() * a - CMatrix::Identity(a.cols(), a.cols())).norm();
}

} // namespace numerics
} // namespace isac
