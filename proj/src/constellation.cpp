#include "isac/constellation.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <cmath>
#include <map>
#include <sstream>

#include "isac/rng.hpp"

namespace isac {

namespace {

constexpr double kMomentTol = 1e-12;
constexpr double kRingTol = 1e-9;

double mean_abs_pow(std::span<const Complex> pts, int p) {
    double acc = 0.0;
    for (const auto& z : pts) acc += std::pow(std::abs(z), p);
    return acc / static_cast<double>(pts.size());
}

std::vector<Complex> normalize(std::vector<Complex> pts) {
    const double power = mean_abs_pow(pts, 2);
    if (!(power > 0.0)) {
        throw Error(ErrorKind::unsupported_constellation, "constellation has zero power");
    }
    const double scale = 1.0 / std::sqrt(power);
    for (auto& z : pts) z *= scale;
    return pts;
}

[[noreturn]] void unsupported(std::string_view what, std::size_t order) {
    std::ostringstream msg;
    msg << what << ": unsupported order " << order;
    throw Error(ErrorKind::unsupported_constellation, msg.str());
}

// Odd-integer grid {-(side-1), ..., -1, 1, ..., side-1}^2 with `corner`x`corner`
// blocks removed at each of the four corners (corner = 0 gives square QAM).
std::vector<Complex> qam_grid(int side, int corner) {
    std::vector<Complex> pts;
    const int edge = side - 1 - 2 * corner;
    for (int i = -side + 1; i < side; i += 2) {
        for (int q = -side + 1; q < side; q += 2) {
            if (corner > 0 && std::abs(i) > edge && std::abs(q) > edge) continue;
            pts.emplace_back(i, q);
        }
    }
    return pts;
}

Complex unit_modulus_snap(Complex z) {
    auto sq = [](Complex p) { return p.real() * p.real() + p.imag() * p.imag(); };
    if (sq(z) == 1.0) return z;
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (int radius = 1; radius <= 8; ++radius) {
        for (int dr = -radius; dr <= radius; ++dr) {
            for (int di = -radius; di <= radius; ++di) {
                double re = z.real();
                double im = z.imag();
                for (int k = 0; k < std::abs(dr); ++k) re = std::nextafter(re, dr > 0 ? inf : -inf);
                for (int k = 0; k < std::abs(di); ++k) im = std::nextafter(im, di > 0 ? inf : -inf);
                if (sq({re, im}) == 1.0) return {re, im};
            }
        }
    }
    return z;
}

} // namespace

Constellation::Constellation(std::string name, std::vector<Complex> points)
    : name_(std::move(name)), points_(std::move(points)) {
    if (points_.empty()) {
        throw Error(ErrorKind::unsupported_constellation, "constellation has no points");
    }
    const auto report = validate_assumptions(points_);
    if (!report.all_pass()) {
        std::ostringstream msg;
        msg << "constellation '" << name_ << "' violates its assumptions:";
        if (!report.nonzero_points) msg << " contains zero point;";
        if (!report.unit_power) msg << " power residual " << report.power_residual << ";";
        if (!report.zero_mean) msg << " mean residual " << report.mean_residual << ";";
        if (!report.zero_pseudo_variance)
            msg << " pseudo-variance residual " << report.pseudo_variance_residual << ";";
        if (!report.central_symmetry) msg << " not centrally symmetric;";
        throw Error(ErrorKind::unsupported_constellation, msg.str());
    }
    power_ = mean_abs_pow(points_, 2);
    kurtosis_ = report.kurtosis;
}

Constellation Constellation::psk(std::size_t order) {
    if (order < 4 || order % 2 != 0) unsupported("psk", order);
    std::vector<Complex> pts;
    pts.reserve(order);
    for (std::size_t m = 0; m < order; ++m) {
        pts.push_back(std::polar(1.0, 2.0 * kPi * static_cast<double>(m) / static_cast<double>(order)));
    }
    // Snap the exact axis points so QPSK is exactly {1, j, -1, -j}.
    for (auto& z : pts) {
        if (std::abs(z.real()) < 1e-15) z.real(0.0);
        if (std::abs(z.imag()) < 1e-15) z.imag(0.0);
    }
    // Keep |p|^2 == 1 in floating point and p_{m+M/2} == -p_m bit for bit, so
    // constant-modulus draws give identical per-bin weights.
    for (std::size_t m = 0; m < order / 2; ++m) {
        pts[m] = unit_modulus_snap(pts[m]);
        pts[m + order / 2] = -pts[m];
    }
    return Constellation("psk" + std::to_string(order), std::move(pts));
}

Constellation Constellation::qam(std::size_t order) {
    int side = 0;
    int corner = 0;
    switch (order) {
    case 16: side = 4; break;
    case 64: side = 8; break;
    case 256: side = 16; break;
    case 1024: side = 32; break;
    case 128: side = 12; corner = 2; break;
    case 512: side = 24; corner = 4; break;
    case 2048: side = 48; corner = 8; break;
    default: unsupported("qam", order);
    }
    return Constellation("qam" + std::to_string(order), normalize(qam_grid(side, corner)));
}

Constellation Constellation::from_name(std::string_view name) {
    auto parse_order = [&](std::string_view digits) -> std::size_t {
        std::size_t value = 0;
        const auto* end = digits.data() + digits.size();
        auto [ptr, ec] = std::from_chars(digits.data(), end, value);
        if (ec != std::errc() || ptr != end || digits.empty()) {
            throw Error(ErrorKind::unsupported_constellation,
                        "unknown constellation '" + std::string(name) + "'");
        }
        return value;
    };
    if (name.starts_with("psk")) return psk(parse_order(name.substr(3)));
    if (name.starts_with("qam")) return qam(parse_order(name.substr(3)));
    if (name == "qpsk") return psk(4);
    throw Error(ErrorKind::unsupported_constellation,
                "unknown constellation '" + std::string(name) + "'");
}

Constellation Constellation::custom(std::string name, std::vector<Complex> points) {
    return Constellation(std::move(name), normalize(std::move(points)));
}

double kurtosis(std::span<const Complex> points) {
    const double p2 = mean_abs_pow(points, 2);
    return mean_abs_pow(points, 4) / (p2 * p2);
}

double kurtosis(const Constellation& c) { return kurtosis(c.points()); }

AssumptionReport validate_assumptions(std::span<const Complex> points) {
    AssumptionReport r;
    if (points.empty()) return r;
    const auto m = static_cast<double>(points.size());
    Complex mean{0.0, 0.0};
    Complex pseudo{0.0, 0.0};
    for (const auto& z : points) {
        mean += z;
        pseudo += z * z;
    }
    mean /= m;
    pseudo /= m;

    r.power_residual = std::abs(mean_abs_pow(points, 2) - 1.0);
    r.mean_residual = std::abs(mean);
    r.pseudo_variance_residual = std::abs(pseudo);
    r.unit_power = r.power_residual <= kMomentTol;
    r.zero_mean = r.mean_residual <= kMomentTol;
    r.zero_pseudo_variance = r.pseudo_variance_residual <= kMomentTol;
    r.nonzero_points = std::none_of(points.begin(), points.end(),
                                    [](const Complex& z) { return z == Complex{0.0, 0.0}; });

    // Per-ring central symmetry: -p must be a point of the same magnitude ring.
    double worst = 0.0;
    for (const auto& p : points) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& q : points) {
            if (std::abs(std::norm(q) - std::norm(p)) > kRingTol) continue;
            best = std::min(best, std::abs(q + p));
        }
        worst = std::max(worst, best);
    }
    r.symmetry_residual = worst;
    r.central_symmetry = worst <= kRingTol;
    r.kurtosis = kurtosis(points);
    r.sub_gaussian = r.unit_power && r.zero_mean && r.zero_pseudo_variance &&
                     r.kurtosis < kGaussianKurtosis;
    return r;
}

AssumptionReport validate_assumptions(const Constellation& c) {
    return validate_assumptions(c.points());
}

SymbolVector sample_symbols(const Constellation& c, std::size_t n, std::uint64_t seed,
                            std::uint64_t trial) {
    if (n == 0) throw Error(ErrorKind::invalid_dimension, "sample_symbols: n must be >= 1");
    CounterRng rng(seed, trial, Stream::symbols);
    const auto bound = static_cast<std::uint32_t>(c.size());
    CVector s(static_cast<Index>(n));
    for (Index i = 0; i < s.size(); ++i) s[i] = c.points()[rng.uniform_index(bound)];
    return {std::move(s), seed, trial};
}

SymbolVector enumerate_symbols(const Constellation& c, std::size_t n, std::uint64_t index) {
    if (n == 0) throw Error(ErrorKind::invalid_dimension, "enumerate_symbols: n must be >= 1");
    CVector s(static_cast<Index>(n));
    std::uint64_t rest = index;
    for (Index i = 0; i < s.size(); ++i) {
        s[i] = c.points()[rest % c.size()];
        rest /= c.size();
    }
    return {std::move(s), 0, index};
}

} // namespace isac
