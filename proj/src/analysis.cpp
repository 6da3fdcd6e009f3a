#include "isac/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace isac {

namespace {

void require_kappa(double kappa, std::string_view what) {
    if (!(kappa >= 1.0 && kappa <= 2.0)) {
        std::ostringstream msg;
        msg << what << ": kurtosis " << kappa << " outside [1, 2]";
        throw Error(ErrorKind::invalid_parameter, msg.str());
    }
}

// sum_{n<m} w_nm b_n^T b_m.
double overlap_sum(const RMatrix& b, const RMatrix& w) {
    const RMatrix gram = b.transpose() * b;
    double acc = 0.0;
    for (Index m = 1; m < gram.cols(); ++m) {
        for (Index n = 0; n < m; ++n) acc += w(n, m) * gram(n, m);
    }
    return acc;
}

} // namespace

double jensen_bound(const Geometry& geom, const SelectionMatrix& t) {
    if (t.t.rows() != geom.params()) {
        throw Error(ErrorKind::invalid_dimension, "jensen_bound: selection size does not match FIM");
    }
    const double rc = numerics::rcond_estimate(geom.jbar);
    if (!(rc >= numerics::kSingularRcond)) {
        std::ostringstream msg;
        msg << "expected FIM is singular (rcond = " << rc << ")";
        throw Error(ErrorKind::degenerate_scenario, msg.str());
    }
    const auto v = trace_selected_inverse(geom.jbar, t.indices);
    if (!v) throw Error(ErrorKind::degenerate_scenario, "expected FIM is not positive definite");
    return *v;
}

RMatrix sigma_s_closed(const UnitaryBasis& basis, double kappa) {
    const RMatrix& b = basis.b();
    RMatrix out = RMatrix::Identity(b.rows(), b.cols()) + (kappa - 2.0) * (b.transpose() * b);
    return (out + out.transpose()) / 2.0;
}

RMatrix mu_weights(const Geometry& geom, const SelectionMatrix& t) {
    // With C_n = s (x_n x_n^T + y_n y_n^T), x + jy = row n of H, every mu_nm is
    // a signed sum of entries of (V A V^T) o (V W V^T) over the rows V of
    // [Re H; Im H], where W = Jbar^{-1} and A = W T W.
    const RMatrix w = numerics::inverse(geom.jbar);
    const RMatrix a = w * t.t * w;
    const RMatrix& v = geom.stacked;
    const RMatrix p = (v * a * v.transpose()).cwiseProduct(v * w * v.transpose());
    const auto n = static_cast<Index>(geom.n);
    const RMatrix r = p.topLeftCorner(n, n) + p.topRightCorner(n, n) + p.bottomLeftCorner(n, n) +
                      p.bottomRightCorner(n, n);
    const double s2 = geom.scale() * geom.scale();
    RMatrix mu(n, n);
    for (Index m = 0; m < n; ++m) {
        for (Index k = 0; k < n; ++k) {
            mu(k, m) = k == m ? 0.0 : std::max(0.0, s2 * (r(k, k) + r(m, m) - r(k, m) - r(m, k)));
        }
    }
    return mu;
}

GapReport second_order_gap(const RMatrix& mu, const UnitaryBasis& basis, double kappa) {
    require_kappa(kappa, "second_order_gap");
    if (mu.rows() != basis.size()) {
        throw Error(ErrorKind::invalid_dimension, "second_order_gap: basis size does not match geometry");
    }
    GapReport rep;
    rep.kappa = kappa;
    rep.mu = mu;
    rep.gap_closed = (2.0 - kappa) * overlap_sum(basis.b(), mu);
    return rep;
}

GapReport second_order_gap(const Geometry& geom, const UnitaryBasis& basis, double kappa,
                           const SelectionMatrix& t) {
    return second_order_gap(mu_weights(geom, t), basis, kappa);
}

Estimate second_order_gap_mc(const Geometry& geom, const UnitaryBasis& basis, const Constellation& c,
                             const SelectionMatrix& t, std::size_t trials, std::uint64_t seed,
                             const McOptions& opts) {
    if (trials < 1) throw Error(ErrorKind::invalid_parameter, "at least one trial is required");
    const UnitaryBasis ofdm = basis_ofdm(geom.n);
    auto chunks = run_chunked<RunningStats>(trials, opts.threads, [&](std::size_t first, std::size_t last) {
        RunningStats st;
        FimEvaluator eval(geom, t);
        for (std::size_t trial = first; trial < last; ++trial) {
            const auto s = draw_symbols(c, geom.n, seed, trial, opts.source);
            st.add(eval.r2(symbol_weights(basis, s.symbols)) - eval.r2(symbol_weights(ofdm, s.symbols)));
        }
        return st;
    });
    RunningStats total;
    for (const auto& ch : chunks) total.merge(ch);
    return {total.mean, total.std_error()};
}

GapReport second_order_gap(const Geometry& geom, const UnitaryBasis& basis, const Constellation& c,
                           const SelectionMatrix& t, std::size_t trials, std::uint64_t seed,
                           const McOptions& opts) {
    GapReport rep = second_order_gap(geom, basis, c.kurtosis(), t);
    const Estimate mc = second_order_gap_mc(geom, basis, c, t, trials, seed, opts);
    rep.gap_mc = mc.value;
    rep.stderr_mc = mc.std_error;
    rep.trials_mc = trials;
    return rep;
}

double eisl_gap(const UnitaryBasis& basis, double kappa) {
    require_kappa(kappa, "eisl_gap");
    const auto n = static_cast<double>(basis.size());
    return n * (2.0 - kappa) * (n - basis.b().squaredNorm());
}

double eisl_gap_pairwise(const UnitaryBasis& basis, double kappa) {
    require_kappa(kappa, "eisl_gap");
    const auto n = basis.size();
    return 2.0 * static_cast<double>(n) * (2.0 - kappa) * overlap_sum(basis.b(), RMatrix::Ones(n, n));
}

double hessian_r2_closed(const RMatrix& mu, const GeodesicDirection& k, double kappa) {
    require_kappa(kappa, "hessian_r2_closed");
    if (mu.rows() != k.size()) {
        throw Error(ErrorKind::invalid_dimension, "hessian_r2_closed: direction size does not match geometry");
    }
    double acc = 0.0;
    for (Index m = 1; m < mu.cols(); ++m) {
        for (Index n = 0; n < m; ++n) acc += std::norm(k.k()(n, m)) * mu(n, m);
    }
    return 4.0 * (2.0 - kappa) * acc;
}

double hessian_r2_closed(const Geometry& geom, const GeodesicDirection& k, double kappa,
                         const SelectionMatrix& t) {
    return hessian_r2_closed(mu_weights(geom, t), k, kappa);
}

namespace {

struct GeodesicChunk {
    RunningStats d1, d2, d2_r2, f0;
    std::size_t skipped = 0;
};

} // namespace

GeodesicReport geodesic_derivatives(const Geometry& geom, const GeodesicDirection& k, const Constellation& c,
                                    const SelectionMatrix& t, double step, std::size_t trials,
                                    std::uint64_t seed, const McOptions& opts) {
    if (!(step > 0.0 && step <= 0.1)) {
        throw Error(ErrorKind::invalid_parameter, "geodesic_derivatives: step must lie in (0, 0.1]");
    }
    if (trials < 1) throw Error(ErrorKind::invalid_parameter, "at least one trial is required");
    if (k.size() != static_cast<Index>(geom.n)) {
        throw Error(ErrorKind::invalid_dimension, "geodesic_derivatives: direction size does not match geometry");
    }
    const UnitaryBasis base = basis_ofdm(geom.n);
    const UnitaryBasis minus = basis_geodesic(base, k, -step);
    const UnitaryBasis plus = basis_geodesic(base, k, step);
    const double h2 = step * step;

    auto chunks = run_chunked<GeodesicChunk>(trials, opts.threads, [&](std::size_t first, std::size_t last) {
        GeodesicChunk chunk;
        FimEvaluator eval(geom, t);
        for (std::size_t trial = first; trial < last; ++trial) {
            const auto s = draw_symbols(c, geom.n, seed, trial, opts.source);
            const RVector wm = symbol_weights(minus, s.symbols);
            const RVector w0 = symbol_weights(base, s.symbols);
            const RVector wp = symbol_weights(plus, s.symbols);
            chunk.d2_r2.add((eval.r2(wp) - 2.0 * eval.r2(w0) + eval.r2(wm)) / h2);
            double rc = 0.0;
            const auto fm = eval.crb(wm, &rc);
            const auto f0 = fm ? eval.crb(w0, &rc) : std::nullopt;
            const auto fp = f0 ? eval.crb(wp, &rc) : std::nullopt;
            if (!fp) {
                if (opts.skip_policy == SkipPolicy::strict) {
                    std::ostringstream msg;
                    msg << "strict skip policy: geodesic trial " << trial << " has a singular FIM (rcond = "
                        << rc << ")";
                    throw SingularError(ErrorKind::singular_fim, msg.str(), rc);
                }
                ++chunk.skipped;
                continue;
            }
            chunk.d1.add((*fp - *fm) / (2.0 * step));
            chunk.d2.add((*fp - 2.0 * *f0 + *fm) / h2);
            chunk.f0.add(*f0);
        }
        return chunk;
    });
    GeodesicChunk total;
    for (const auto& ch : chunks) {
        total.d1.merge(ch.d1);
        total.d2.merge(ch.d2);
        total.d2_r2.merge(ch.d2_r2);
        total.f0.merge(ch.f0);
        total.skipped += ch.skipped;
    }
    if (total.d1.count == 0) {
        throw Error(ErrorKind::no_valid_draws, "geodesic_derivatives: all draws have a singular FIM");
    }
    GeodesicReport rep;
    rep.d1_fd = {total.d1.mean, total.d1.std_error()};
    rep.d2_fd = {total.d2.mean, total.d2.std_error()};
    rep.d2_r2_fd = {total.d2_r2.mean, total.d2_r2.std_error()};
    rep.f0 = {total.f0.mean, total.f0.std_error()};
    rep.d2_r2_closed = hessian_r2_closed(geom, k, c.kurtosis(), t);
    rep.jensen = jensen_bound(geom, t);
    rep.step = step;
    rep.trials_used = total.d1.count;
    rep.trials_skipped = total.skipped;
    return rep;
}

double frequency_weighted_overlap(const UnitaryBasis& basis) {
    const Index n = basis.size();
    RMatrix w(n, n);
    for (Index m = 0; m < n; ++m) {
        for (Index k = 0; k < n; ++k) {
            const double d = static_cast<double>(k - m) / static_cast<double>(n);
            w(k, m) = d * d;
        }
    }
    return overlap_sum(basis.b(), w);
}

SpreadReport spread_gap_lower_bound_check(const Scenario& tmpl, const BasisFamily& family, double kappa,
                                          const std::vector<std::size_t>& n_list, const SelectionMatrix& t) {
    require_kappa(kappa, "spread_gap_lower_bound_check");
    if (n_list.empty()) throw Error(ErrorKind::invalid_parameter, "spread check needs at least one N");
    SpreadReport rep;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t n : n_list) {
        const UnitaryBasis basis = family(n);
        SpreadPoint pt;
        pt.n = n;
        pt.alpha = alpha_spread(basis);
        if (!(pt.alpha > 1e-9)) {
            std::ostringstream msg;
            msg << "basis '" << basis.label() << "' is not frequency-spread at N = " << n << " (alpha = "
                << pt.alpha << ")";
            throw Error(ErrorKind::inapplicable_basis, msg.str());
        }
        const Geometry geom = build_geometry(tmpl.with_n(n));
        pt.gap_closed = second_order_gap(geom, basis, kappa, t).gap_closed;
        const auto nn = static_cast<double>(n);
        pt.gap_n2 = pt.gap_closed * nn * nn;
        pt.freq_sum_over_n = frequency_weighted_overlap(basis) / nn;
        pt.freq_bound_holds = pt.freq_sum_over_n >= pt.alpha * pt.alpha * (1.0 - 1e-9);
        lo = std::min(lo, pt.gap_n2);
        hi = std::max(hi, pt.gap_n2);
        rep.points.push_back(pt);
    }
    rep.positive = lo > 0.0;
    rep.variation = rep.positive ? (hi - lo) / lo : std::numeric_limits<double>::infinity();
    return rep;
}

} // namespace isac
