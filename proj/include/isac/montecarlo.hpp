#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "isac/constellation.hpp"
#include "isac/fim.hpp"
#include "isac/scenario.hpp"
#include "isac/waveform.hpp"

namespace isac {

enum class SkipPolicy { skip, strict };
enum class SymbolSource { random, enumerate };

std::string_view to_string(SkipPolicy p);
SkipPolicy parse_skip_policy(std::string_view name);

struct McOptions {
    std::size_t threads = 1;
    SkipPolicy skip_policy = SkipPolicy::skip;
    SymbolSource source = SymbolSource::random;
};

/// Streaming mean/variance (Welford) with Chan's pairwise merge.
struct RunningStats {
    std::uint64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x);
    void merge(const RunningStats& other);
    double variance() const;
    /// Standard error of the mean; 0 for fewer than two samples.
    double std_error() const;
};

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Trials are cut into fixed chunks so the reduction order, and therefore
/// every result bit, is independent of the thread count.
inline constexpr std::size_t kChunkTrials = 64;

/// Runs fn(first, last) over [0, trials) in fixed chunks on up to `threads`
/// workers and returns the chunk results in chunk order. The exception of
/// the lowest failing chunk is rethrown.
template <typename Result, typename Fn>
std::vector<Result> run_chunked(std::size_t trials, std::size_t threads, Fn&& fn) {
    const std::size_t chunks = (trials + kChunkTrials - 1) / kChunkTrials;
    std::vector<Result> results(chunks);
    std::vector<std::exception_ptr> errors(chunks);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t c = next++; c < chunks; c = next++) {
            try {
                const std::size_t first = c * kChunkTrials;
                results[c] = fn(first, std::min(trials, first + kChunkTrials));
            } catch (...) {
                errors[c] = std::current_exception();
            }
        }
    };
    const std::size_t workers = std::max<std::size_t>(1, std::min(threads, chunks));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return results;
}

SymbolVector draw_symbols(const Constellation& c, std::size_t n, std::uint64_t seed,
                          std::uint64_t trial, SymbolSource source);

struct CrbEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t trials_used = 0;
    std::size_t trials_skipped = 0;
    double jensen = 0.0;
    SkipPolicy skip_policy = SkipPolicy::skip;
    std::uint64_t seed = 0;
};

/// Conditional-CRB statistics of several bases fed identical symbol draws.
struct PairedCrb {
    std::vector<RunningStats> per_basis;
    std::vector<std::size_t> skipped;
    /// f(basis b) - f(basis `reference`) over trials valid for both.
    std::vector<RunningStats> diff_to_reference;
    std::size_t reference = 0;
    double jensen = 0.0;
};

PairedCrb paired_crb(const Geometry& geom, const std::vector<UnitaryBasis>& bases,
                     const Constellation& c, const SelectionMatrix& t, std::size_t trials,
                     std::uint64_t seed, const McOptions& opts = {}, std::size_t reference = 0);

CrbEstimate estimate_crb(const Scenario& scenario, const UnitaryBasis& basis, const Constellation& c,
                         const SelectionMatrix& t, std::size_t trials, std::uint64_t seed,
                         const McOptions& opts = {});

struct SweepRow {
    double snr_db = 0.0;
    std::string waveform;
    std::string constellation;
    double crb_mc = 0.0;
    double crb_jensen = 0.0;
    double std_error = 0.0;
    std::size_t trials_used = 0;
    std::size_t trials_skipped = 0;
};

struct PairedGap {
    double snr_db = 0.0;
    std::string waveform;
    std::string reference;
    double mean_diff = 0.0; // crb(waveform) - crb(reference)
    double std_error = 0.0;
    std::size_t pairs = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows;    // sorted by (snr_db, waveform)
    std::vector<PairedGap> paired; // against OFDM if present, else the first basis
};

/// The targets stay fixed and only sigma^2 = 10^(-snr/10) changes. The CRB is
/// exactly proportional to sigma^2, so each basis is simulated once at unit
/// noise and rescaled per grid point.
SweepResult snr_sweep(const Scenario& tmpl, const std::vector<UnitaryBasis>& bases,
                      const Constellation& c, const SelectionMatrix& t,
                      const std::vector<double>& snr_grid_db, std::size_t trials,
                      std::uint64_t seed, const McOptions& opts = {});

/// Sample covariance of |Q^H s|^2.
RMatrix empirical_sigma_s(const UnitaryBasis& basis, const Constellation& c, std::size_t samples,
                          std::uint64_t seed, const McOptions& opts = {});

using BasisFamily = std::function<UnitaryBasis(std::size_t)>;

/// `sc`, `ofdm`, `otfs:*xN2` (N1 = N/N2) or any fixed-N-free waveform selector.
BasisFamily parse_basis_family(std::string_view selector);

struct MomentPoint {
    std::size_t n = 0;
    double moment = 0.0;
    double std_error = 0.0;
};

struct ScalingReport {
    std::vector<MomentPoint> points;
    double slope = 0.0; // least-squares slope of log moment against log N; NaN if a moment is 0
};

/// E ||Z||_2^k per N with Z = Jbar^{-1}(J - Jbar).
ScalingReport z_moment_scaling(const Scenario& tmpl, const BasisFamily& family, const Constellation& c,
                               const std::vector<std::size_t>& n_list, unsigned k, std::size_t trials,
                               std::uint64_t seed, const McOptions& opts = {});

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace isac
