#include "helpers.hpp"

#include "isac/fim.hpp"
#include "isac/montecarlo.hpp"

using namespace isac;
using namespace testutil;

namespace {

Geometry tiny() { return build_geometry(2, {0.0}, {{1, 0}}, 1.0); }

RMatrix hand_j() {
    const double pi = kPi;
    RMatrix j(3, 3);
    j << 2 * pi * pi, 0, -2 * pi, 0, 4, 0, -2 * pi, 0, 4;
    return j;
}

double brute_trace(const RMatrix& j, const SelectionMatrix& t) {
    // inverse through a plain LU solve, independent of the Cholesky route
    const RMatrix inv = j.fullPivLu().inverse();
    return (t.t * inv).trace();
}

} // namespace

TEST_SUITE("fim") {

TEST_CASE("hand example") {
    const Geometry g = tiny();
    CVector s(2);
    s << 1, 1;
    const FimSample f = fim(g, basis_ofdm(2), {s, 0, 0});
    CHECK(rel_diff(f.j, hand_j()) < 1e-14);
    CHECK(conditional_crb(f, selection(SelectionKind::delay, 1)) == doctest::Approx(1.0 / (kPi * kPi)).epsilon(1e-13));
    const double full = 1.0 / (kPi * kPi) + 0.25 + 0.5;
    CHECK(conditional_crb(f, selection(SelectionKind::full, 1)) == doctest::Approx(full).epsilon(1e-13));
    CHECK(conditional_crb(f, selection(SelectionKind::full, 1)) ==
          doctest::Approx(brute_trace(hand_j(), selection(SelectionKind::full, 1))).epsilon(1e-13));
}

TEST_CASE("ofdm with psk reproduces the expected fim exactly") {
    const Geometry g = build_geometry(random_scenario(4, 64, 8, 1.0));
    const auto psk = Constellation::psk(16);
    const auto ofdm = basis_ofdm(64);
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        const FimSample f = fim(g, ofdm, sample_symbols(psk, 64, 1, trial));
        CHECK(f.weights == RVector::Ones(64));
        CHECK(f.j == g.jbar);
        const ResolventTerms r = resolvent(g, f, selection(SelectionKind::delay, 8));
        CHECK(r.r1_trace == 0.0);
        CHECK(r.r2_trace == 0.0);
        CHECK(r.r3_trace == 0.0);
        CHECK(r.z_norm == 0.0);
    }
}

TEST_CASE("degenerate single-carrier draw") {
    const std::size_t n = 8;
    const Geometry g = build_geometry(Scenario(n, {1.5}, {{1, 0}}, 1.0));
    const auto q = Constellation::psk(4);
    const Complex s1 = q.points()[1];
    const CVector s = CVector::Constant(static_cast<Index>(n), s1);
    const FimSample f = fim(g, basis_sc(n), {s, 0, 0});
    CHECK(f.weights[0] == doctest::Approx(static_cast<double>(n) * std::norm(s1)));
    CHECK(f.weights.tail(n - 1).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(f.rcond < numerics::kSingularRcond);
    CHECK(numerics::rcond_estimate(f.j) < numerics::kSingularRcond);
    try {
        conditional_crb(f, selection(SelectionKind::delay, 1));
        FAIL("expected singular");
    } catch (const SingularError& e) {
        CHECK(e.kind() == ErrorKind::singular_fim);
    }
}

TEST_CASE("dual assembly routes agree") {
    std::mt19937_64 gen(8);
    std::uniform_int_distribution<int> pick_n(8, 32), pick_l(1, 2), pick_b(0, 3);
    const auto qam = Constellation::qam(16);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = pick_n(gen);
        const std::size_t l = pick_l(gen);
        const Geometry g = build_geometry(random_scenario(rep, n, l, 1.0));
        UnitaryBasis b = basis_sc(n);
        switch (pick_b(gen)) {
        case 1: b = basis_ofdm(n); break;
        case 2: b = basis_geodesic(basis_ofdm(n), GeodesicDirection::random(n, rep), 0.5); break;
        case 3: b = UnitaryBasis(numerics::exp_skew((random_complex(n, n, rep) - random_complex(n, n, rep).adjoint()) / 2.0, 1.0), "rnd"); break;
        default: break;
        }
        const auto s = sample_symbols(qam, n, 3, rep);
        const FimSample f = fim(g, b, s);
        CHECK(rel_diff(fim_via_cn(g, f.weights), f.j) <= 1e-9);
        CHECK((f.j - f.j.transpose()).norm() <= 1e-10 * f.j.norm());
        CHECK(f.weights.mean() * static_cast<double>(n) == doctest::Approx(s.symbols.squaredNorm()).epsilon(1e-9));
        const auto lam = numerics::symmetric_eig(f.j).eigenvalues;
        CHECK(lam[0] >= -1e-9 * lam[lam.size() - 1]);
    }
    const Geometry g = build_geometry(random_scenario(1, 8, 1, 1.0));
    RVector e = RVector::Zero(8);
    e[2] = 8.0;
    CHECK(rel_diff(fim_via_cn(g, e), RMatrix(8.0 * g.c_mats[2])) < 1e-14);
    CHECK(rel_diff(fim_via_cn(g, RVector::Ones(8)), g.jbar) < 1e-12);
    e[3] = -1.0;
    CHECK(kind_of([&] { fim_via_cn(g, e); }) == ErrorKind::domain);
    CHECK(kind_of([&] { fim(g, basis_sc(6), sample_symbols(Constellation::psk(4), 6, 1, 1)); }) ==
          ErrorKind::invalid_dimension);
}

TEST_CASE("expected fim is the average") {
    const std::size_t n = 8;
    const Geometry g = build_geometry(Scenario(n, {1.2, 4.7}, {{1, 0}, std::polar(1.0, 2.0)}, 1.0));
    const auto b = basis_sc(n);
    const auto qam = Constellation::qam(16);
    const int trials = 100000;
    const Index p = g.params();
    RMatrix mean = RMatrix::Zero(p, p), sq = RMatrix::Zero(p, p);
    for (int t = 0; t < trials; ++t) {
        const RMatrix j = assemble_fim(g, symbol_weights(b, sample_symbols(qam, n, 6, t).symbols));
        mean += j;
        sq += j.cwiseProduct(j);
    }
    mean /= trials;
    const RMatrix var = sq / trials - mean.cwiseProduct(mean);
    for (Index r = 0; r < p; ++r)
        for (Index c = 0; c < p; ++c) {
            const double se = std::sqrt(std::max(var(r, c), 0.0) / trials);
            CHECK(std::abs(mean(r, c) - g.jbar(r, c)) <= 5 * se + 1e-12 * g.jbar.norm());
        }
}

TEST_CASE("conditional crb is at least the jensen value on average") {
    const std::size_t n = 16;
    const Geometry g = build_geometry(random_scenario(2, n, 2, 1.0));
    const auto t = selection(SelectionKind::delay, 2);
    const double jensen = trace_selected_inverse(g.jbar, t.indices).value();
    RunningStats st;
    for (int trial = 0; trial < 4000; ++trial) {
        const FimSample f = fim(g, basis_sc(n), sample_symbols(Constellation::qam(16), n, 1, trial));
        if (f.rcond >= numerics::kSingularRcond) st.add(conditional_crb(f, t));
    }
    CHECK(st.mean >= jensen - 5 * st.std_error());
    CHECK(st.mean > jensen);
}

TEST_CASE("resolvent terms") {
    const std::size_t n = 32;
    const Geometry g = build_geometry(random_scenario(9, n, 2, 1.0));
    const auto t = selection(SelectionKind::delay, 2);
    const auto qam = Constellation::qam(16);
    const RMatrix jbar_inv = g.jbar.inverse();
    const RMatrix root = numerics::psd_sqrt(jbar_inv);
    FimEvaluator eval(g, t);
    int checked = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const FimSample f = fim(g, basis_sc(n), sample_symbols(qam, n, 2, trial));
        const ResolventTerms r = resolvent(g, f, t);
        const RMatrix z = jbar_inv * (f.j - g.jbar);
        const double r2 = (t.t * z * root).squaredNorm();
        CHECK(r.r2_trace >= 0.0);
        CHECK(r.r2_trace == doctest::Approx(r2).epsilon(1e-9));
        CHECK(eval.r2(f.weights) == doctest::Approx(r2).epsilon(1e-9));
        CHECK(eval.z_norm(f.weights) == doctest::Approx(r.z_norm).epsilon(1e-9));
        if (!r.r3_available) continue;
        ++checked;
        const double lhs = r.r1_trace - r.r2_trace + r.r3_trace;
        const double rhs = brute_trace(g.jbar, t) - brute_trace(f.j, t);
        CHECK(std::abs(lhs - rhs) <= 1e-8 * std::abs(rhs));
        CHECK(eval.crb(f.weights).value() == doctest::Approx(conditional_crb(f, t)).epsilon(1e-12));
    }
    CHECK(checked > 10);
}

}
