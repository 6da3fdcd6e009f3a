#pragma once

#include <optional>

#include "isac/constellation.hpp"
#include "isac/scenario.hpp"
#include "isac/waveform.hpp"

namespace isac {

/// One draw of the random FIM J(U, s).
struct FimSample {
    RMatrix j;
    double rcond = 0.0;
    RVector weights; // |Q^H s|^2, the per-bin information weights
};

struct ResolventTerms {
    double r1_trace = 0.0;
    double r2_trace = 0.0;
    double r3_trace = 0.0;
    bool r3_available = false; // only when ||Z||_2 < 1
    double z_norm = 0.0;
};

/// |Q^H s|^2.
RVector symbol_weights(const UnitaryBasis& basis, const CVector& s);

/// (2/sigma^2) Re(H^H Diag(w) H) through the stacked real Jacobian [Re H; Im H].
/// With w = 1 this is bitwise the same computation that produces Geometry::jbar.
RMatrix assemble_fim(const Geometry& geom, const RVector& weights);

FimSample fim(const Geometry& geom, const UnitaryBasis& basis, const SymbolVector& s);
FimSample fim_from_weights(const Geometry& geom, const RVector& weights);

/// sum_n w_n C_n. Throws domain on a negative weight.
RMatrix fim_via_cn(const Geometry& geom, const RVector& weights);

/// Tr(T J^{-1}). Throws SingularError(singular_fim) when rcond < 1e-12.
double conditional_crb(const FimSample& f, const SelectionMatrix& t);

/// Tr(T J^{-1}) for a symmetric positive definite J by Cholesky; nullopt if
/// the factorization fails.
std::optional<double> trace_selected_inverse(const RMatrix& j, const std::vector<Index>& selected);

ResolventTerms resolvent(const Geometry& geom, const FimSample& f, const SelectionMatrix& t);

/// Reusable per-thread evaluator of the conditional CRB and of the
/// second-order resolvent term for weight vectors, sharing one geometry.
class FimEvaluator {
public:
    FimEvaluator(const Geometry& geom, const SelectionMatrix& t);

    /// Tr(T J(w)^{-1}); nullopt when rcond(J(w)) < 1e-12. `rcond_out` receives
    /// the estimate when non-null.
    std::optional<double> crb(const RVector& weights, double* rcond_out = nullptr);

    /// Tr(T Z^2 Jbar^{-1}) = ||T_sel Jbar^{-1} Delta Jbar^{-1/2}||_F^2, Delta = J(w) - Jbar.
    double r2(const RVector& weights);

    /// ||Z||_2 with Z = Jbar^{-1}(J(w) - Jbar).
    double z_norm(const RVector& weights);

private:
    const Geometry& geom_;
    std::vector<Index> selected_;
    RMatrix jbar_inv_;
    RMatrix jbar_inv_rows_; // selected rows of Jbar^{-1}
    RMatrix jbar_inv_sqrt_;

    RMatrix delta(const RVector& weights) const;
};

} // namespace isac
