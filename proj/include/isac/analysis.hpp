#pragma once

#include <optional>

#include "isac/montecarlo.hpp"

namespace isac {

/// Tr(T Jbar^{-1}). Throws degenerate_scenario if Jbar is singular.
double jensen_bound(const Geometry& geom, const SelectionMatrix& t);

/// Covariance of |Q^H s|^2: I + (kappa - 2) B^T B.
RMatrix sigma_s_closed(const UnitaryBasis& basis, double kappa);

/// mu(n, m) = ||T Jbar^{-1} (C_n - C_m) Jbar^{-1/2}||_F^2, symmetric with zero diagonal.
RMatrix mu_weights(const Geometry& geom, const SelectionMatrix& t);

struct GapReport {
    double gap_closed = 0.0;
    std::optional<double> gap_mc;
    double stderr_mc = 0.0;
    std::size_t trials_mc = 0;
    RMatrix mu;
    double kappa = 0.0;
};

/// (2 - kappa) sum_{n<m} mu_nm b_n^T b_m, b_n column n of B.
GapReport second_order_gap(const Geometry& geom, const UnitaryBasis& basis, double kappa,
                           const SelectionMatrix& t);
GapReport second_order_gap(const RMatrix& mu, const UnitaryBasis& basis, double kappa);

/// Paired estimate of E Tr(T R2(U)) - E Tr(T R2(OFDM)) over identical draws.
Estimate second_order_gap_mc(const Geometry& geom, const UnitaryBasis& basis, const Constellation& c,
                             const SelectionMatrix& t, std::size_t trials, std::uint64_t seed,
                             const McOptions& opts = {});

/// second_order_gap with gap_mc filled in.
GapReport second_order_gap(const Geometry& geom, const UnitaryBasis& basis, const Constellation& c,
                           const SelectionMatrix& t, std::size_t trials, std::uint64_t seed,
                           const McOptions& opts = {});

/// N (2 - kappa) (N - ||B||_F^2).
double eisl_gap(const UnitaryBasis& basis, double kappa);
/// 2 N (2 - kappa) sum_{n<m} b_n^T b_m.
double eisl_gap_pairwise(const UnitaryBasis& basis, double kappa);

/// 4 (2 - kappa) sum_{n<m} |K_nm|^2 mu_nm.
double hessian_r2_closed(const RMatrix& mu, const GeodesicDirection& k, double kappa);
double hessian_r2_closed(const Geometry& geom, const GeodesicDirection& k, double kappa,
                         const SelectionMatrix& t);

struct GeodesicReport {
    Estimate d1_fd;
    Estimate d2_fd;
    Estimate d2_r2_fd; // second difference of the isolated R2 term
    double d2_r2_closed = 0.0;
    Estimate f0;
    double jensen = 0.0;
    double step = 0.0;
    std::size_t trials_used = 0;
    std::size_t trials_skipped = 0;
};

inline constexpr double kDefaultGeodesicStep = 0.02;

/// Central differences of E f(U(t)), U(t) = F^H e^{tK}, at t in {-h, 0, h}
/// with the same symbol draw at all three points.
GeodesicReport geodesic_derivatives(const Geometry& geom, const GeodesicDirection& k, const Constellation& c,
                                    const SelectionMatrix& t, double step, std::size_t trials,
                                    std::uint64_t seed, const McOptions& opts = {});

struct SpreadPoint {
    std::size_t n = 0;
    double alpha = 0.0;
    double gap_closed = 0.0;
    double gap_n2 = 0.0;            // gap_closed * N^2
    double freq_sum_over_n = 0.0;   // sum_{n<m} (f_n - f_m)^2 b_n^T b_m / N
    bool freq_bound_holds = false;  // freq_sum_over_n >= alpha^2
};

struct SpreadReport {
    std::vector<SpreadPoint> points;
    double variation = 0.0; // (max - min) / min of gap_closed * N^2
    bool positive = false;
};

/// Frequencies are on the grid k/N, matching alpha_spread.
double frequency_weighted_overlap(const UnitaryBasis& basis);

SpreadReport spread_gap_lower_bound_check(const Scenario& tmpl, const BasisFamily& family, double kappa,
                                          const std::vector<std::size_t>& n_list, const SelectionMatrix& t);

} // namespace isac
