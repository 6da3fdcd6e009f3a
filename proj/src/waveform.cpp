#include "isac/waveform.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "isac/rng.hpp"

namespace isac {

namespace {

constexpr double kUnitaryTol = 1e-9;

double skew_spectral_norm(const CMatrix& k) {
    // K is normal, so ||K||_2 = max |eig(jK)| and jK is Hermitian.
    const CMatrix h = Complex(0.0, 1.0) * k;
    Eigen::SelfAdjointEigenSolver<CMatrix> solver((h + h.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double spectrum_std(const RVector& p) {
    const auto n = static_cast<double>(p.size());
    double centroid = 0.0;
    for (Index k = 0; k < p.size(); ++k) centroid += (static_cast<double>(k) / n) * p[k];
    double var = 0.0;
    for (Index k = 0; k < p.size(); ++k) {
        const double d = static_cast<double>(k) / n - centroid;
        var += d * d * p[k];
    }
    return std::sqrt(std::max(var, 0.0));
}

[[noreturn]] void bad_selector(std::string_view selector, std::string_view why) {
    throw Error(ErrorKind::config,
                "invalid waveform selector '" + std::string(selector) + "': " + std::string(why));
}

template <typename T>
T parse_number(std::string_view text, std::string_view selector) {
    T value{};
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc() || ptr != end) {
        bad_selector(selector, "cannot parse '" + std::string(text) + "'");
    }
    return value;
}

} // namespace

GeodesicDirection::GeodesicDirection(CMatrix k) : k_(std::move(k)) {
    numerics::require_finite(k_, "GeodesicDirection");
    numerics::require_square(k_.rows(), k_.cols(), "GeodesicDirection");
    const double skew = (k_ + k_.adjoint()).norm();
    if (skew > kUnitaryTol) {
        throw Error(ErrorKind::domain, "GeodesicDirection: K is not skew-Hermitian");
    }
    const double norm2 = skew_spectral_norm(k_);
    if (std::abs(norm2 - 1.0) > kUnitaryTol) {
        std::ostringstream msg;
        msg << "GeodesicDirection: ||K||_2 = " << norm2 << ", expected 1";
        throw Error(ErrorKind::domain, msg.str());
    }
}

GeodesicDirection GeodesicDirection::normalized(const CMatrix& k) {
    const CMatrix skew = (k - k.adjoint()) / 2.0;
    const double norm2 = skew_spectral_norm(skew);
    if (!(norm2 > 0.0)) {
        throw Error(ErrorKind::domain, "GeodesicDirection: zero direction cannot be normalized");
    }
    return GeodesicDirection(skew / norm2);
}

GeodesicDirection GeodesicDirection::random(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw Error(ErrorKind::invalid_dimension, "GeodesicDirection: n must be >= 1");
    CounterRng rng(seed, 0, Stream::direction);
    const auto sz = static_cast<Index>(n);
    CMatrix g(sz, sz);
    for (Index c = 0; c < sz; ++c) {
        for (Index r = 0; r < sz; ++r) {
            const double re = rng.normal();
            const double im = rng.normal();
            g(r, c) = Complex(re, im);
        }
    }
    return normalized(g);
}

UnitaryBasis::UnitaryBasis(CMatrix u, std::string label)
    : UnitaryBasis(std::move(u), CMatrix(), std::move(label)) {}

UnitaryBasis::UnitaryBasis(CMatrix u, CMatrix q, std::string label)
    : u_(std::move(u)), q_(std::move(q)), label_(std::move(label)) {
    numerics::require_finite(u_, "UnitaryBasis");
    numerics::require_square(u_.rows(), u_.cols(), "UnitaryBasis");
    const double residual = numerics::unitarity_residual(u_);
    const double tol = kUnitaryTol * std::sqrt(static_cast<double>(u_.rows()));
    if (residual > tol) {
        std::ostringstream msg;
        msg << "basis '" << label_ << "' is not unitary: ||U^H U - I||_F = " << residual
            << " > " << tol;
        throw Error(ErrorKind::domain, msg.str());
    }
    const CMatrix f = numerics::dft_matrix(static_cast<std::size_t>(u_.rows()));
    const CMatrix computed = u_.adjoint() * f.adjoint();
    if (q_.size() == 0) {
        q_ = computed;
    } else if (q_.rows() != u_.rows() || q_.cols() != u_.cols() ||
               (q_ - computed).norm() > kUnitaryTol * std::sqrt(static_cast<double>(u_.rows()))) {
        throw Error(ErrorKind::domain, "basis '" + label_ + "': supplied Q does not match U^H F^H");
    }
    b_ = q_.cwiseAbs2();
}

UnitaryBasis basis_sc(std::size_t n) {
    const auto sz = static_cast<Index>(n);
    if (n == 0) throw Error(ErrorKind::invalid_dimension, "basis_sc: n must be >= 1");
    return UnitaryBasis(CMatrix::Identity(sz, sz), "sc");
}

UnitaryBasis basis_ofdm(std::size_t n) {
    const auto sz = static_cast<Index>(n);
    return UnitaryBasis(numerics::dft_matrix(n).adjoint(), CMatrix::Identity(sz, sz), "ofdm");
}

UnitaryBasis basis_otfs(std::size_t n1, std::size_t n2) {
    if (n1 == 0 || n2 == 0) {
        throw Error(ErrorKind::invalid_dimension, "basis_otfs: N1 and N2 must be >= 1");
    }
    const CMatrix f1h = numerics::dft_matrix(n1).adjoint();
    const auto a = static_cast<Index>(n1);
    const auto b = static_cast<Index>(n2);
    CMatrix u = CMatrix::Zero(a * b, a * b);
    // Kronecker product F_{N1}^H (x) I_{N2}.
    for (Index i = 0; i < a; ++i) {
        for (Index j = 0; j < a; ++j) {
            for (Index d = 0; d < b; ++d) u(i * b + d, j * b + d) = f1h(i, j);
        }
    }
    return UnitaryBasis(std::move(u), "otfs:" + std::to_string(n1) + "x" + std::to_string(n2));
}

CVector chirp_diagonal(std::size_t n, double c) {
    CVector d(static_cast<Index>(n));
    for (Index m = 0; m < d.size(); ++m) {
        const double mm = static_cast<double>(m);
        // Phase reduced mod 1 before scaling so large m^2 c keeps precision.
        const double frac = std::fmod(c * mm * mm, 1.0);
        d[m] = std::polar(1.0, -2.0 * kPi * frac);
    }
    return d;
}

UnitaryBasis basis_afdm(std::size_t n, Rational c1, double c2) {
    if (n == 0) throw Error(ErrorKind::invalid_dimension, "basis_afdm: n must be >= 1");
    if (c1.den <= 0) throw Error(ErrorKind::invalid_parameter, "basis_afdm: c1 denominator must be > 0");
    const std::int64_t twice = 2 * static_cast<std::int64_t>(n) * c1.num;
    if (twice % c1.den != 0) {
        std::ostringstream msg;
        msg << "basis_afdm: 2*N*c1 = 2*" << n << "*" << c1.num << "/" << c1.den
            << " is not an integer";
        throw Error(ErrorKind::invalid_parameter, msg.str());
    }
    const CVector l1 = chirp_diagonal(n, c1.value());
    const CVector l2 = chirp_diagonal(n, c2);
    const CMatrix fh = numerics::dft_matrix(n).adjoint();
    const CMatrix u = l1.conjugate().asDiagonal() * fh * l2.conjugate().asDiagonal();
    std::ostringstream label;
    label << "afdm:" << c1.num << "/" << c1.den << "," << c2;
    return UnitaryBasis(u, label.str());
}

UnitaryBasis basis_geodesic(const UnitaryBasis& base, const GeodesicDirection& k, double t) {
    if (base.size() != k.size()) {
        throw Error(ErrorKind::invalid_dimension, "basis_geodesic: base and direction sizes differ");
    }
    if (t == 0.0) return base;
    std::ostringstream label;
    label << "geodesic(" << base.label() << ",t=" << t << ")";
    return UnitaryBasis(base.u() * numerics::exp_skew(k.k(), t), label.str());
}

UnitaryBasis parse_waveform(std::string_view selector, std::size_t n) {
    if (selector == "sc") return basis_sc(n);
    if (selector == "ofdm") return basis_ofdm(n);
    if (selector.starts_with("otfs:")) {
        const auto body = selector.substr(5);
        const auto x = body.find('x');
        if (x == std::string_view::npos) bad_selector(selector, "expected otfs:N1xN2");
        const auto n1 = parse_number<std::size_t>(body.substr(0, x), selector);
        const auto n2 = parse_number<std::size_t>(body.substr(x + 1), selector);
        if (n1 * n2 != n) {
            std::ostringstream msg;
            msg << "otfs " << n1 << "x" << n2 << " does not match block length " << n;
            throw Error(ErrorKind::invalid_dimension, msg.str());
        }
        return basis_otfs(n1, n2);
    }
    if (selector.starts_with("afdm:")) {
        const auto body = selector.substr(5);
        const auto slash = body.find('/');
        const auto comma = body.find(',');
        if (slash == std::string_view::npos || comma == std::string_view::npos || comma < slash) {
            bad_selector(selector, "expected afdm:num/den,c2");
        }
        Rational c1{parse_number<std::int64_t>(body.substr(0, slash), selector),
                    parse_number<std::int64_t>(body.substr(slash + 1, comma - slash - 1), selector)};
        const auto c2 = parse_number<double>(body.substr(comma + 1), selector);
        return basis_afdm(n, c1, c2);
    }
    bad_selector(selector, "unknown kind");
}

CMatrix read_basis_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open basis file " + path.string());
    long long n = 0;
    if (!(in >> n) || n < 1) {
        throw Error(ErrorKind::config, "basis file " + path.string() + ": bad dimension line");
    }
    CMatrix u(n, n);
    for (Index r = 0; r < n; ++r) {
        for (Index c = 0; c < n; ++c) {
            double re = 0.0;
            double im = 0.0;
            if (!(in >> re >> im)) {
                throw Error(ErrorKind::config,
                            "basis file " + path.string() + ": expected " +
                                std::to_string(n * n) + " 're im' lines");
            }
            u(r, c) = Complex(re, im);
        }
    }
    return u;
}

UnitaryBasis load_basis_file(const std::filesystem::path& path) {
    return UnitaryBasis(read_basis_matrix(path), "custom:" + path.filename().string());
}

void write_basis_file(const std::filesystem::path& path, const CMatrix& u) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::io, "cannot write basis file " + path.string());
    out << u.rows() << "\n" << std::setprecision(17);
    for (Index r = 0; r < u.rows(); ++r) {
        for (Index c = 0; c < u.cols(); ++c) out << u(r, c).real() << " " << u(r, c).imag() << "\n";
    }
}

double rms_bandwidth(const CVector& u_col) {
    if (u_col.size() < 1) throw Error(ErrorKind::invalid_dimension, "rms_bandwidth: empty vector");
    const double norm = u_col.norm();
    if (std::abs(norm - 1.0) > 1e-9) {
        std::ostringstream msg;
        msg << "rms_bandwidth: vector norm " << norm << " is not 1";
        throw Error(ErrorKind::domain, msg.str());
    }
    const CMatrix f = numerics::dft_matrix(static_cast<std::size_t>(u_col.size()));
    return spectrum_std((f * u_col).cwiseAbs2());
}

double alpha_spread(const UnitaryBasis& basis) {
    // Column n of F U is the spectrum of basis vector n; |F U|^2 = B^T.
    const RMatrix& b = basis.b();
    double alpha = std::numeric_limits<double>::infinity();
    for (Index n = 0; n < b.rows(); ++n) alpha = std::min(alpha, spectrum_std(b.row(n).transpose()));
    return alpha;
}

const RMatrix& mixing_matrix(const UnitaryBasis& basis) { return basis.b(); }

double doubly_stochastic_residual(const RMatrix& b) {
    const double rows = (b.rowwise().sum().array() - 1.0).abs().maxCoeff();
    const double cols = (b.colwise().sum().array() - 1.0).abs().maxCoeff();
    return std::max(rows, cols);
}

} // namespace isac
