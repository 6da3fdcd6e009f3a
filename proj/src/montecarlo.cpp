#include "isac/montecarlo.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "isac/analysis.hpp"

namespace isac {

std::string_view to_string(SkipPolicy p) { return p == SkipPolicy::skip ? "skip" : "strict"; }

SkipPolicy parse_skip_policy(std::string_view name) {
    if (name == "skip") return SkipPolicy::skip;
    if (name == "strict") return SkipPolicy::strict;
    throw Error(ErrorKind::config, "unknown skip policy '" + std::string(name) + "'");
}

void RunningStats::add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
}

void RunningStats::merge(const RunningStats& other) {
    if (other.count == 0) return;
    if (count == 0) {
        *this = other;
        return;
    }
    const double na = static_cast<double>(count);
    const double nb = static_cast<double>(other.count);
    const double n = na + nb;
    const double delta = other.mean - mean;
    mean += delta * nb / n;
    m2 += other.m2 + delta * delta * na * nb / n;
    count += other.count;
}

double RunningStats::variance() const {
    return count < 2 ? 0.0 : m2 / static_cast<double>(count - 1);
}

double RunningStats::std_error() const {
    return count < 2 ? 0.0 : std::sqrt(variance() / static_cast<double>(count));
}

SymbolVector draw_symbols(const Constellation& c, std::size_t n, std::uint64_t seed,
                          std::uint64_t trial, SymbolSource source) {
    if (source == SymbolSource::enumerate) return enumerate_symbols(c, n, trial);
    return sample_symbols(c, n, seed, trial);
}

namespace {

struct PairedChunk {
    std::vector<RunningStats> per_basis;
    std::vector<RunningStats> diff;
    std::vector<std::size_t> skipped;
};

void require_trials(std::size_t trials) {
    if (trials < 1) throw Error(ErrorKind::invalid_parameter, "at least one trial is required");
}

} // namespace

PairedCrb paired_crb(const Geometry& geom, const std::vector<UnitaryBasis>& bases,
                     const Constellation& c, const SelectionMatrix& t, std::size_t trials,
                     std::uint64_t seed, const McOptions& opts, std::size_t reference) {
    require_trials(trials);
    if (bases.empty()) throw Error(ErrorKind::invalid_parameter, "no bases given");
    if (reference >= bases.size()) throw Error(ErrorKind::invalid_parameter, "reference basis out of range");
    for (const auto& b : bases) {
        if (b.size() != static_cast<Index>(geom.n)) {
            throw Error(ErrorKind::invalid_dimension,
                        "basis '" + b.label() + "' does not match block length " + std::to_string(geom.n));
        }
    }
    const std::size_t nb = bases.size();
    PairedCrb out;
    out.reference = reference;
    out.jensen = jensen_bound(geom, t);

    auto chunks = run_chunked<PairedChunk>(trials, opts.threads, [&](std::size_t first, std::size_t last) {
        PairedChunk chunk{std::vector<RunningStats>(nb), std::vector<RunningStats>(nb),
                          std::vector<std::size_t>(nb, 0)};
        FimEvaluator eval(geom, t);
        std::vector<double> values(nb);
        std::vector<bool> valid(nb);
        for (std::size_t trial = first; trial < last; ++trial) {
            const SymbolVector s = draw_symbols(c, geom.n, seed, trial, opts.source);
            for (std::size_t b = 0; b < nb; ++b) {
                double rc = 0.0;
                const auto f = eval.crb(symbol_weights(bases[b], s.symbols), &rc);
                valid[b] = f.has_value();
                if (!f) {
                    if (opts.skip_policy == SkipPolicy::strict) {
                        std::ostringstream msg;
                        msg << "strict skip policy: trial " << trial << " of '" << bases[b].label()
                            << "' has a singular FIM (rcond = " << rc << ")";
                        throw SingularError(ErrorKind::singular_fim, msg.str(), rc);
                    }
                    ++chunk.skipped[b];
                    continue;
                }
                values[b] = *f;
                chunk.per_basis[b].add(*f);
            }
            for (std::size_t b = 0; b < nb; ++b) {
                if (valid[b] && valid[reference]) chunk.diff[b].add(values[b] - values[reference]);
            }
        }
        return chunk;
    });

    out.per_basis.assign(nb, {});
    out.diff_to_reference.assign(nb, {});
    out.skipped.assign(nb, 0);
    for (const auto& chunk : chunks) {
        for (std::size_t b = 0; b < nb; ++b) {
            out.per_basis[b].merge(chunk.per_basis[b]);
            out.diff_to_reference[b].merge(chunk.diff[b]);
            out.skipped[b] += chunk.skipped[b];
        }
    }
    for (std::size_t b = 0; b < nb; ++b) {
        if (out.per_basis[b].count == 0) {
            throw Error(ErrorKind::no_valid_draws, "waveform '" + bases[b].label() + "': all " +
                                                       std::to_string(trials) +
                                                       " draws have a singular FIM");
        }
    }
    return out;
}

CrbEstimate estimate_crb(const Scenario& scenario, const UnitaryBasis& basis, const Constellation& c,
                         const SelectionMatrix& t, std::size_t trials, std::uint64_t seed,
                         const McOptions& opts) {
    const Geometry geom = build_geometry(scenario);
    const PairedCrb run = paired_crb(geom, {basis}, c, t, trials, seed, opts);
    CrbEstimate est;
    est.mean = run.per_basis[0].mean;
    est.std_error = run.per_basis[0].std_error();
    est.trials_used = run.per_basis[0].count;
    est.trials_skipped = run.skipped[0];
    est.jensen = run.jensen;
    est.skip_policy = opts.skip_policy;
    est.seed = seed;
    return est;
}

SweepResult snr_sweep(const Scenario& tmpl, const std::vector<UnitaryBasis>& bases,
                      const Constellation& c, const SelectionMatrix& t,
                      const std::vector<double>& snr_grid_db, std::size_t trials,
                      std::uint64_t seed, const McOptions& opts) {
    if (snr_grid_db.empty()) throw Error(ErrorKind::invalid_parameter, "snr grid is empty");
    for (double snr : snr_grid_db) {
        if (!std::isfinite(snr)) throw Error(ErrorKind::invalid_parameter, "snr grid has a non-finite entry");
    }
    std::size_t reference = 0;
    for (std::size_t b = 0; b < bases.size(); ++b) {
        if (bases[b].label() == "ofdm") {
            reference = b;
            break;
        }
    }
    const Geometry geom = build_geometry(tmpl.with_sigma2(1.0));
    const PairedCrb run = paired_crb(geom, bases, c, t, trials, seed, opts, reference);

    SweepResult out;
    for (double snr : snr_grid_db) {
        const double sigma2 = std::pow(10.0, -snr / 10.0);
        for (std::size_t b = 0; b < bases.size(); ++b) {
            const auto& st = run.per_basis[b];
            out.rows.push_back({snr, bases[b].label(), c.name(), sigma2 * st.mean, sigma2 * run.jensen,
                                sigma2 * st.std_error(), st.count, run.skipped[b]});
            if (b != reference) {
                const auto& d = run.diff_to_reference[b];
                out.paired.push_back({snr, bases[b].label(), bases[reference].label(), sigma2 * d.mean,
                                      sigma2 * d.std_error(), d.count});
            }
        }
    }
    auto key = [](const auto& r) { return std::tie(r.snr_db, r.waveform); };
    std::stable_sort(out.rows.begin(), out.rows.end(),
                     [&](const SweepRow& a, const SweepRow& b) { return key(a) < key(b); });
    std::stable_sort(out.paired.begin(), out.paired.end(),
                     [&](const PairedGap& a, const PairedGap& b) { return key(a) < key(b); });
    return out;
}

namespace {

struct CovChunk {
    std::uint64_t count = 0;
    RVector mean;
    RMatrix comoment;
};

} // namespace

RMatrix empirical_sigma_s(const UnitaryBasis& basis, const Constellation& c, std::size_t samples,
                          std::uint64_t seed, const McOptions& opts) {
    if (samples < 2) throw Error(ErrorKind::invalid_parameter, "empirical_sigma_s: need at least 2 samples");
    const Index n = basis.size();
    auto chunks = run_chunked<CovChunk>(samples, opts.threads, [&](std::size_t first, std::size_t last) {
        CovChunk chunk{0, RVector::Zero(n), RMatrix::Zero(n, n)};
        for (std::size_t trial = first; trial < last; ++trial) {
            const auto s = draw_symbols(c, static_cast<std::size_t>(n), seed, trial, opts.source);
            const RVector w = symbol_weights(basis, s.symbols);
            ++chunk.count;
            const RVector delta = w - chunk.mean;
            chunk.mean += delta / static_cast<double>(chunk.count);
            chunk.comoment.noalias() += delta * (w - chunk.mean).transpose();
        }
        return chunk;
    });
    CovChunk total{0, RVector::Zero(n), RMatrix::Zero(n, n)};
    for (const auto& ch : chunks) {
        if (total.count == 0) {
            total = ch;
            continue;
        }
        const double na = static_cast<double>(total.count);
        const double nb = static_cast<double>(ch.count);
        const double nn = na + nb;
        const RVector delta = ch.mean - total.mean;
        total.mean += delta * (nb / nn);
        total.comoment += ch.comoment + (delta * delta.transpose()) * (na * nb / nn);
        total.count += ch.count;
    }
    RMatrix cov = total.comoment / static_cast<double>(total.count - 1);
    return (cov + cov.transpose()) / 2.0;
}

BasisFamily parse_basis_family(std::string_view selector) {
    const std::string sel(selector);
    if (sel.starts_with("otfs:*x")) {
        const std::size_t n2 = std::stoul(sel.substr(7));
        if (n2 == 0) throw Error(ErrorKind::config, "otfs family needs N2 >= 1");
        return [n2](std::size_t n) {
            if (n % n2 != 0) {
                throw Error(ErrorKind::invalid_dimension,
                            "otfs family: N = " + std::to_string(n) + " is not a multiple of " +
                                std::to_string(n2));
            }
            return basis_otfs(n / n2, n2);
        };
    }
    if (sel.starts_with("otfs:")) {
        throw Error(ErrorKind::config, "otfs family selector must be otfs:*xN2");
    }
    return [sel](std::size_t n) { return parse_waveform(sel, n); };
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw Error(ErrorKind::invalid_parameter, "loglog_slope: need at least two matching points");
    }
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

ScalingReport z_moment_scaling(const Scenario& tmpl, const BasisFamily& family, const Constellation& c,
                               const std::vector<std::size_t>& n_list, unsigned k, std::size_t trials,
                               std::uint64_t seed, const McOptions& opts) {
    require_trials(trials);
    if (k < 1) throw Error(ErrorKind::invalid_parameter, "moment order must be >= 1");
    ScalingReport report;
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t n : n_list) {
        const Geometry geom = build_geometry(tmpl.with_n(n));
        const UnitaryBasis basis = family(n);
        const SelectionMatrix t = selection(SelectionKind::delay, geom.l);
        auto chunks = run_chunked<RunningStats>(trials, opts.threads, [&](std::size_t first, std::size_t last) {
            RunningStats st;
            FimEvaluator eval(geom, t);
            for (std::size_t trial = first; trial < last; ++trial) {
                const auto s = draw_symbols(c, n, seed, trial, opts.source);
                st.add(std::pow(eval.z_norm(symbol_weights(basis, s.symbols)), static_cast<double>(k)));
            }
            return st;
        });
        RunningStats total;
        for (const auto& ch : chunks) total.merge(ch);
        report.points.push_back({n, total.mean, total.std_error()});
        xs.push_back(static_cast<double>(n));
        ys.push_back(total.mean);
    }
    report.slope = n_list.size() >= 2 ? loglog_slope(xs, ys) : std::numeric_limits<double>::quiet_NaN();
    return report;
}

} // namespace isac
