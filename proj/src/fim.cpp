#include "isac/fim.hpp"

#include <cmath>
#include <sstream>

namespace isac {

namespace {

void check_weights(const Geometry& geom, const RVector& w, std::string_view what) {
    if (w.size() != static_cast<Index>(geom.n)) {
        std::ostringstream msg;
        msg << what << ": expected " << geom.n << " weights, got " << w.size();
        throw Error(ErrorKind::invalid_dimension, msg.str());
    }
    for (Index i = 0; i < w.size(); ++i) {
        if (!(w[i] >= 0.0) || !std::isfinite(w[i])) {
            throw Error(ErrorKind::domain, std::string(what) + ": weights must be finite and nonnegative");
        }
    }
}

double eig_rcond(const RMatrix& j) {
    Eigen::SelfAdjointEigenSolver<RMatrix> solver(j, Eigen::EigenvaluesOnly);
    const auto& lam = solver.eigenvalues();
    const double hi = lam[lam.size() - 1];
    return hi > 0.0 ? lam[0] / hi : 0.0;
}

[[noreturn]] void throw_singular_fim(double rcond) {
    std::ostringstream msg;
    msg << "FIM is singular (rcond = " << rcond << ")";
    throw SingularError(ErrorKind::singular_fim, msg.str(), rcond);
}

} // namespace

RVector symbol_weights(const UnitaryBasis& basis, const CVector& s) {
    if (s.size() != basis.size()) {
        throw Error(ErrorKind::invalid_dimension, "symbol_weights: symbol length does not match basis");
    }
    const CVector y = basis.q().adjoint() * s;
    RVector w(y.size());
    for (Index i = 0; i < y.size(); ++i) w[i] = y[i].real() * y[i].real() + y[i].imag() * y[i].imag();
    return w;
}

RMatrix assemble_fim(const Geometry& geom, const RVector& weights) {
    check_weights(geom, weights, "assemble_fim");
    return weighted_gram(geom.stacked, weights, geom.scale());
}

FimSample fim_from_weights(const Geometry& geom, const RVector& weights) {
    FimSample f;
    f.j = assemble_fim(geom, weights);
    f.rcond = eig_rcond(f.j);
    f.weights = weights;
    return f;
}

FimSample fim(const Geometry& geom, const UnitaryBasis& basis, const SymbolVector& s) {
    if (basis.size() != static_cast<Index>(geom.n)) {
        throw Error(ErrorKind::invalid_dimension, "fim: basis size does not match scenario");
    }
    return fim_from_weights(geom, symbol_weights(basis, s.symbols));
}

RMatrix fim_via_cn(const Geometry& geom, const RVector& weights) {
    check_weights(geom, weights, "fim_via_cn");
    RMatrix j = RMatrix::Zero(geom.params(), geom.params());
    for (std::size_t n = 0; n < geom.n; ++n) j += weights[static_cast<Index>(n)] * geom.c_mats[n];
    return (j + j.transpose()) / 2.0;
}

std::optional<double> trace_selected_inverse(const RMatrix& j, const std::vector<Index>& selected) {
    Eigen::LLT<RMatrix> llt(j);
    if (llt.info() != Eigen::Success) return std::nullopt;
    // Tr(T J^{-1}) = ||L^{-1} E||_F^2 with E the selected unit columns.
    RMatrix e = RMatrix::Zero(j.rows(), static_cast<Index>(selected.size()));
    for (std::size_t k = 0; k < selected.size(); ++k) e(selected[k], static_cast<Index>(k)) = 1.0;
    llt.matrixL().solveInPlace(e);
    return e.squaredNorm();
}

double conditional_crb(const FimSample& f, const SelectionMatrix& t) {
    if (f.j.rows() != t.t.rows()) {
        throw Error(ErrorKind::invalid_dimension, "conditional_crb: selection size does not match FIM");
    }
    if (!(f.rcond >= numerics::kSingularRcond)) throw_singular_fim(f.rcond);
    const auto value = trace_selected_inverse(f.j, t.indices);
    if (!value) throw_singular_fim(f.rcond);
    return *value;
}

ResolventTerms resolvent(const Geometry& geom, const FimSample& f, const SelectionMatrix& t) {
    const RMatrix jbar_inv = numerics::inverse(geom.jbar);
    const RMatrix z = jbar_inv * (f.j - geom.jbar);
    const Index p = z.rows();
    auto traced = [&](const RMatrix& m) {
        double acc = 0.0;
        for (Index i : t.indices) acc += m(i, i);
        return acc;
    };
    ResolventTerms out;
    const RMatrix zj = z * jbar_inv;
    out.r1_trace = traced(zj);
    out.r2_trace = traced(z * zj);
    Eigen::JacobiSVD<RMatrix> svd(z);
    out.z_norm = svd.singularValues()[0];
    if (out.z_norm < 1.0) {
        const RMatrix tail = (RMatrix::Identity(p, p) + z).partialPivLu().solve(jbar_inv);
        out.r3_trace = traced(z * z * z * tail);
        out.r3_available = true;
    }
    return out;
}

FimEvaluator::FimEvaluator(const Geometry& geom, const SelectionMatrix& t)
    : geom_(geom), selected_(t.indices) {
    if (t.t.rows() != geom.params()) {
        throw Error(ErrorKind::invalid_dimension, "FimEvaluator: selection size does not match FIM");
    }
}

std::optional<double> FimEvaluator::crb(const RVector& weights, double* rcond_out) {
    const RMatrix j = weighted_gram(geom_.stacked, weights, geom_.scale());
    const double rc = eig_rcond(j);
    if (rcond_out) *rcond_out = rc;
    if (!(rc >= numerics::kSingularRcond)) return std::nullopt;
    return trace_selected_inverse(j, selected_);
}

RMatrix FimEvaluator::delta(const RVector& weights) const {
    const Index n = weights.size();
    RVector d(2 * n);
    for (Index i = 0; i < n; ++i) d[i] = d[n + i] = weights[i] - 1.0;
    const RMatrix& hs = geom_.stacked;
    RMatrix out = geom_.scale() * (hs.transpose() * d.asDiagonal() * hs);
    return (out + out.transpose()) / 2.0;
}

double FimEvaluator::r2(const RVector& weights) {
    if (jbar_inv_.size() == 0) {
        jbar_inv_ = numerics::inverse(geom_.jbar);
        jbar_inv_sqrt_ = numerics::psd_sqrt(jbar_inv_);
        jbar_inv_rows_.resize(static_cast<Index>(selected_.size()), jbar_inv_.cols());
        for (std::size_t k = 0; k < selected_.size(); ++k) {
            jbar_inv_rows_.row(static_cast<Index>(k)) = jbar_inv_.row(selected_[k]);
        }
    }
    return (jbar_inv_rows_ * delta(weights) * jbar_inv_sqrt_).squaredNorm();
}

double FimEvaluator::z_norm(const RVector& weights) {
    if (jbar_inv_.size() == 0) r2(RVector::Ones(weights.size()));
    const RMatrix z = jbar_inv_ * delta(weights);
    Eigen::JacobiSVD<RMatrix> svd(z);
    return svd.singularValues()[0];
}

} // namespace isac
