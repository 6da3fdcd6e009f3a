#include "isac/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "isac/rng.hpp"

namespace isac {

namespace {

constexpr int kMaxPlacementAttempts = 10000;

double circular_distance(double a, double b, double n) {
    const double d = std::fmod(std::abs(a - b), n);
    return std::min(d, n - d);
}

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

} // namespace

std::vector<std::string> scenario_violations(std::size_t n, const std::vector<double>& taus,
                                             const std::vector<Complex>& betas, double sigma2) {
    std::vector<std::string> out;
    const std::size_t l = taus.size();
    if (l == 0) out.emplace_back("at least one target is required");
    if (betas.size() != l) {
        out.emplace_back("got " + std::to_string(taus.size()) + " delays but " +
                         std::to_string(betas.size()) + " amplitudes");
    }
    if (!(n > 3 * l)) {
        out.emplace_back("block length must exceed 3L (N = " + std::to_string(n) +
                         ", L = " + std::to_string(l) + ")");
    }
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) out.emplace_back("noise variance must be positive");
    const auto nn = static_cast<double>(n);
    for (std::size_t i = 0; i < l; ++i) {
        if (!std::isfinite(taus[i]) || taus[i] < 0.0 || taus[i] >= nn) {
            std::ostringstream msg;
            msg << "delay " << i << " = " << taus[i] << " outside [0, N)";
            out.push_back(msg.str());
        }
    }
    for (std::size_t i = 0; i < l; ++i) {
        for (std::size_t k = i + 1; k < l; ++k) {
            if (taus[i] == taus[k]) {
                std::ostringstream msg;
                msg << "non-degenerate channel condition violated: delays " << i << " and " << k
                    << " coincide (tau = " << taus[i] << ")";
                out.push_back(msg.str());
            }
        }
    }
    for (std::size_t i = 0; i < betas.size(); ++i) {
        if (betas[i] == Complex{0.0, 0.0} || !std::isfinite(std::abs(betas[i]))) {
            out.push_back("non-degenerate channel condition violated: amplitude " +
                          std::to_string(i) + " is zero or non-finite");
        }
    }
    return out;
}

Scenario::Scenario(std::size_t n, std::vector<double> taus, std::vector<Complex> betas, double sigma2)
    : n_(n), taus_(std::move(taus)), betas_(std::move(betas)), sigma2_(sigma2) {
    const auto problems = scenario_violations(n_, taus_, betas_, sigma2_);
    if (!problems.empty()) {
        throw Error(ErrorKind::degenerate_scenario, "degenerate scenario: " + problems.front());
    }
}

Scenario Scenario::with_sigma2(double sigma2) const { return Scenario(n_, taus_, betas_, sigma2); }

Scenario Scenario::with_n(std::size_t n) const { return Scenario(n, taus_, betas_, sigma2_); }

CVector steering(double tau, std::size_t n) {
    CVector a(static_cast<Index>(n));
    const auto nn = static_cast<double>(n);
    for (Index m = 0; m < a.size(); ++m) {
        const double phase = std::fmod(static_cast<double>(m) * tau, nn);
        a[m] = std::polar(1.0, -2.0 * kPi * phase / nn);
    }
    return a;
}

CVector steering_derivative(double tau, std::size_t n) {
    CVector a = steering(tau, n);
    const auto nn = static_cast<double>(n);
    for (Index m = 0; m < a.size(); ++m) {
        a[m] *= Complex(0.0, -2.0 * kPi * static_cast<double>(m) / nn);
    }
    return a;
}

CMatrix delay_operator(double tau, std::size_t n) {
    const CMatrix f = numerics::dft_matrix(n);
    return f.adjoint() * steering(tau, n).asDiagonal() * f;
}

Geometry build_geometry(const Scenario& s) { return build_geometry(s.n(), s.taus(), s.betas(), s.sigma2()); }

Geometry build_geometry(std::size_t block, const std::vector<double>& taus, const std::vector<Complex>& betas,
                        double sigma2) {
    if (block == 0 || taus.empty() || taus.size() != betas.size())
        throw Error(ErrorKind::invalid_dimension, "build_geometry: need N >= 1 and one amplitude per delay");
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
        throw Error(ErrorKind::invalid_parameter, "build_geometry: sigma2 must be positive and finite");
    Geometry g;
    g.n = block;
    g.l = taus.size();
    g.sigma2 = sigma2;
    const auto n = static_cast<Index>(block);
    const auto l = static_cast<Index>(taus.size());
    g.h.resize(n, 3 * l);
    for (Index k = 0; k < l; ++k) {
        const auto uk = static_cast<std::size_t>(k);
        const CVector a = steering(taus[uk], block);
        g.h.col(k) = betas[uk] * steering_derivative(taus[uk], block);
        g.h.col(l + k) = a;
        g.h.col(2 * l + k) = Complex(0.0, 1.0) * a;
    }
    const double scale = g.scale();
    g.c_mats.reserve(block);
    for (Index row = 0; row < n; ++row) {
        const CVector r = g.h.row(row).transpose();
        RMatrix c = scale * (r.conjugate() * r.transpose()).real();
        c = (c + c.transpose()) / 2.0;
        g.c_mats.push_back(std::move(c));
    }
    g.stacked.resize(2 * n, 3 * l);
    g.stacked.topRows(n) = g.h.real();
    g.stacked.bottomRows(n) = g.h.imag();
    g.jbar = weighted_gram(g.stacked, RVector::Ones(n), scale);
    return g;
}

RMatrix weighted_gram(const RMatrix& stacked, const RVector& weights, double scale) {
    const Index n = weights.size();
    if (stacked.rows() != 2 * n) {
        throw Error(ErrorKind::invalid_dimension, "weighted_gram: weight length does not match H");
    }
    RVector root(2 * n);
    for (Index i = 0; i < n; ++i) {
        if (!(weights[i] >= 0.0)) {
            throw Error(ErrorKind::domain, "weighted_gram: weights must be nonnegative");
        }
        root[i] = root[n + i] = std::sqrt(weights[i]);
    }
    const RMatrix m = root.asDiagonal() * stacked;
    RMatrix j = RMatrix::Zero(stacked.cols(), stacked.cols());
    j.selfadjointView<Eigen::Lower>().rankUpdate(m.transpose(), scale);
    return j.selfadjointView<Eigen::Lower>();
}

SelectionMatrix selection(SelectionKind kind, std::size_t l) {
    if (l == 0) throw Error(ErrorKind::invalid_dimension, "selection: L must be >= 1");
    const auto ll = static_cast<Index>(l);
    SelectionMatrix sel;
    sel.kind = kind;
    sel.t = RMatrix::Zero(3 * ll, 3 * ll);
    Index lo = 0;
    Index hi = 3 * ll;
    if (kind == SelectionKind::delay) hi = ll;
    if (kind == SelectionKind::amplitude) lo = ll;
    for (Index i = lo; i < hi; ++i) {
        sel.t(i, i) = 1.0;
        sel.indices.push_back(i);
    }
    return sel;
}

SelectionKind parse_selection_kind(std::string_view name) {
    if (name == "delay") return SelectionKind::delay;
    if (name == "amplitude") return SelectionKind::amplitude;
    if (name == "full") return SelectionKind::full;
    throw Error(ErrorKind::config, "unknown selection kind '" + std::string(name) + "'");
}

std::string_view to_string(SelectionKind kind) {
    switch (kind) {
    case SelectionKind::delay: return "delay";
    case SelectionKind::amplitude: return "amplitude";
    case SelectionKind::full: return "full";
    }
    return "delay";
}

AmplitudeLaw parse_amplitude_law(std::string_view name) {
    if (name == "unit" || name == "unit_random_phase") return AmplitudeLaw::unit_random_phase;
    if (name == "unit_real") return AmplitudeLaw::unit_real;
    throw Error(ErrorKind::config, "unknown amplitude law '" + std::string(name) + "'");
}

Scenario random_scenario(std::uint64_t seed, std::size_t n, std::size_t l, double min_separation,
                         AmplitudeLaw law, double sigma2) {
    const auto nn = static_cast<double>(n);
    if (!(n > 3 * l)) {
        throw Error(ErrorKind::degenerate_scenario,
                    "random_scenario: block length must exceed 3L");
    }
    if (static_cast<double>(l) * min_separation >= nn) {
        std::ostringstream msg;
        msg << "random_scenario: " << l << " targets with separation " << min_separation
            << " cannot fit in " << n << " samples";
        throw Error(ErrorKind::infeasible_separation, msg.str());
    }
    CounterRng rng(seed, 0, Stream::scenario);
    std::vector<double> taus;
    taus.reserve(l);
    int attempts = 0;
    while (taus.size() < l) {
        if (++attempts > kMaxPlacementAttempts) {
            throw Error(ErrorKind::infeasible_separation,
                        "random_scenario: rejection sampling exceeded 10000 attempts");
        }
        const double tau = nn * rng.uniform();
        const bool ok = std::all_of(taus.begin(), taus.end(), [&](double other) {
            return circular_distance(tau, other, nn) >= min_separation && tau != other;
        });
        if (ok) taus.push_back(tau);
    }
    std::vector<Complex> betas;
    betas.reserve(l);
    for (std::size_t i = 0; i < l; ++i) {
        if (law == AmplitudeLaw::unit_real) {
            betas.emplace_back(1.0, 0.0);
        } else {
            betas.push_back(std::polar(1.0, 2.0 * kPi * rng.uniform()));
        }
    }
    return Scenario(n, std::move(taus), std::move(betas), sigma2);
}

ScenarioFileData read_scenario_data(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open scenario file " + path.string());
    ScenarioFileData data;
    std::size_t declared_l = 0;
    bool have_l = false;
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& why) {
        throw Error(ErrorKind::config,
                    path.string() + ":" + std::to_string(lineno) + ": " + why);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::replace(line.begin(), line.end(), '=', ' ');
        line = trim(line);
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string head;
        fields >> head;
        if (head == "n" || head == "l" || head == "sigma2") {
            double value = 0.0;
            std::string extra;
            if (!(fields >> value) || (fields >> extra)) fail("expected '" + head + " <value>'");
            if (head == "n") data.n = static_cast<std::size_t>(value);
            if (head == "l") {
                declared_l = static_cast<std::size_t>(value);
                have_l = true;
            }
            if (head == "sigma2") data.sigma2 = value;
            continue;
        }
        std::istringstream target(line);
        double tau = 0.0;
        double re = 0.0;
        double im = 0.0;
        std::string extra;
        if (!(target >> tau >> re >> im) || (target >> extra)) {
            fail("expected 'tau beta_re beta_im'");
        }
        data.taus.push_back(tau);
        data.betas.emplace_back(re, im);
    }
    if (data.n == 0) throw Error(ErrorKind::config, path.string() + ": missing 'n'");
    if (have_l && declared_l != data.taus.size()) {
        throw Error(ErrorKind::config, path.string() + ": l = " + std::to_string(declared_l) +
                                           " but " + std::to_string(data.taus.size()) +
                                           " target lines");
    }
    return data;
}

Scenario load_scenario_file(const std::filesystem::path& path) {
    auto d = read_scenario_data(path);
    return Scenario(d.n, std::move(d.taus), std::move(d.betas), d.sigma2);
}

void write_scenario_file(const std::filesystem::path& path, const Scenario& s) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::io, "cannot write scenario file " + path.string());
    out << std::setprecision(17);
    out << "n = " << s.n() << "\nl = " << s.l() << "\nsigma2 = " << s.sigma2() << "\n";
    for (std::size_t i = 0; i < s.l(); ++i) {
        out << s.taus()[i] << " " << s.betas()[i].real() << " " << s.betas()[i].imag() << "\n";
    }
}

double range_unit_factor(double bandwidth_hz) {
    if (!(bandwidth_hz > 0.0)) {
        throw Error(ErrorKind::invalid_parameter, "range_unit_factor: bandwidth must be positive");
    }
    return kSpeedOfLight * kSpeedOfLight / (4.0 * bandwidth_hz * bandwidth_hz);
}

} // namespace isac
