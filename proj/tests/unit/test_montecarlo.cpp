#include "helpers.hpp"

#include "isac/analysis.hpp"
#include "isac/montecarlo.hpp"

using namespace isac;
using namespace testutil;

namespace {

bool same(const CrbEstimate& a, const CrbEstimate& b) {
    return a.mean == b.mean && a.std_error == b.std_error && a.trials_used == b.trials_used &&
           a.trials_skipped == b.trials_skipped && a.jensen == b.jensen;
}

} // namespace

TEST_SUITE("montecarlo") {

TEST_CASE("running statistics") {
    std::vector<double> xs;
    std::mt19937_64 gen(1);
    std::normal_distribution<double> d(3.0, 2.0);
    for (int i = 0; i < 1000; ++i) xs.push_back(d(gen));
    RunningStats all, a, b;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        all.add(xs[i]);
        (i < 377 ? a : b).add(xs[i]);
    }
    a.merge(b);
    double mean = 0;
    for (double x : xs) mean += x / 1000.0;
    double var = 0;
    for (double x : xs) var += (x - mean) * (x - mean) / 999.0;
    CHECK(all.mean == doctest::Approx(mean).epsilon(1e-13));
    CHECK(all.variance() == doctest::Approx(var).epsilon(1e-12));
    CHECK(a.mean == doctest::Approx(mean).epsilon(1e-13));
    CHECK(a.variance() == doctest::Approx(var).epsilon(1e-12));
    CHECK(all.std_error() == doctest::Approx(std::sqrt(var / 1000.0)).epsilon(1e-12));
}

TEST_CASE("ofdm with psk attains the jensen bound exactly") {
    const Scenario sc = random_scenario(11, 64, 10, 1.0);
    const auto est = estimate_crb(sc, basis_ofdm(64), Constellation::psk(16), selection(SelectionKind::delay, 10),
                                  100, 5);
    CHECK(est.mean == est.jensen);
    CHECK(est.std_error == 0.0);
    CHECK(est.trials_used == 100);
    CHECK(est.trials_skipped == 0);
    CHECK(est.seed == 5);
}

TEST_CASE("thread count never changes results") {
    const Scenario sc = random_scenario(3, 32, 4, 1.0);
    const auto t = selection(SelectionKind::delay, 4);
    McOptions one, eight;
    eight.threads = 8;
    const auto a = estimate_crb(sc, basis_sc(32), Constellation::qam(16), t, 1000, 9, one);
    const auto b = estimate_crb(sc, basis_sc(32), Constellation::qam(16), t, 1000, 9, eight);
    CHECK(same(a, b));
    const auto ra = empirical_sigma_s(basis_sc(8), Constellation::qam(16), 5000, 2, one);
    const auto rb = empirical_sigma_s(basis_sc(8), Constellation::qam(16), 5000, 2, eight);
    CHECK(ra == rb);
    CHECK(a.mean >= a.jensen - 5 * a.std_error);
    CHECK(a.trials_used + a.trials_skipped == 1000);
}

TEST_CASE("exhaustive enumeration") {
    const Scenario sc(4, {1.3}, {{1, 0}}, 1.0);
    const Geometry g = build_geometry(sc);
    const auto q = Constellation::psk(4);
    const auto t = selection(SelectionKind::delay, 1);
    const auto basis = basis_sc(4);
    double sum = 0;
    int valid = 0;
    for (int i0 = 0; i0 < 4; ++i0)
        for (int i1 = 0; i1 < 4; ++i1)
            for (int i2 = 0; i2 < 4; ++i2)
                for (int i3 = 0; i3 < 4; ++i3) {
                    CVector s(4);
                    s << q.points()[i0], q.points()[i1], q.points()[i2], q.points()[i3];
                    const RVector w = (numerics::dft_matrix(4) * s).cwiseAbs2();
                    const RMatrix j = fim_via_cn(g, w);
                    if (numerics::rcond_estimate(j) < numerics::kSingularRcond) continue;
                    sum += (t.t * j.fullPivLu().inverse()).trace();
                    ++valid;
                }
    McOptions opts;
    opts.source = SymbolSource::enumerate;
    const auto est = estimate_crb(sc, basis, q, t, 256, 0, opts);
    CHECK(est.trials_used == static_cast<std::size_t>(valid));
    CHECK(est.trials_skipped == 256u - valid);
    CHECK(std::abs(est.mean - sum / valid) <= 1e-12 * (sum / valid));
}

TEST_CASE("skip policies") {
    const Scenario sc(4, {1.3}, {{1, 0}}, 1.0);
    const auto t = selection(SelectionKind::delay, 1);
    McOptions opts;
    opts.source = SymbolSource::enumerate;
    // draw 0 is the all-equal vector, singular under single carrier
    CHECK(kind_of([&] { estimate_crb(sc, basis_sc(4), Constellation::psk(4), t, 1, 0, opts); }) ==
          ErrorKind::no_valid_draws);
    opts.skip_policy = SkipPolicy::strict;
    CHECK(kind_of([&] { estimate_crb(sc, basis_sc(4), Constellation::psk(4), t, 10, 0, opts); }) ==
          ErrorKind::singular_fim);
    CHECK(parse_skip_policy("strict") == SkipPolicy::strict);
    CHECK(kind_of([] { parse_skip_policy("lenient"); }) == ErrorKind::config);
}

TEST_CASE("singular draws are rare at moderate N") {
    const Scenario sc = random_scenario(5, 16, 1, 1.0);
    const auto est = estimate_crb(sc, basis_sc(16), Constellation::psk(4), selection(SelectionKind::delay, 1),
                                  20000, 3);
    CHECK(static_cast<double>(est.trials_skipped) / 20000.0 < 1e-3);
}

TEST_CASE("snr sweep") {
    const Scenario sc = random_scenario(2, 32, 4, 1.0);
    const std::vector<UnitaryBasis> bases{basis_sc(32), basis_ofdm(32), basis_otfs(8, 4)};
    const auto t = selection(SelectionKind::delay, 4);
    const auto psk = Constellation::psk(16);
    const auto res = snr_sweep(sc, bases, psk, t, {10.0, 0.0, 5.0}, 500, 4);
    REQUIRE(res.rows.size() == 9);
    CHECK(res.rows[0].snr_db == 0.0);
    CHECK(res.rows[0].waveform == "ofdm");
    CHECK(res.rows[1].waveform == "otfs:8x4");
    CHECK(res.rows[2].waveform == "sc");
    for (const auto& r : res.rows) {
        CHECK(r.crb_mc > 0.0);
        if (r.waveform == "ofdm") {
            CHECK(r.crb_mc == r.crb_jensen);
            CHECK(r.std_error == 0.0);
        }
    }
    CHECK(res.paired.size() == 6);
    for (const auto& p : res.paired) CHECK(p.reference == "ofdm");

    // rescaling the unit-noise run matches a run rebuilt at that noise level
    const double sigma2 = std::pow(10.0, -0.5);
    const auto direct = estimate_crb(sc.with_sigma2(sigma2), bases[0], psk, t, 500, 4);
    const auto& row = res.rows[5]; // snr 5, sc
    CHECK(row.waveform == "sc");
    CHECK(row.crb_mc == doctest::Approx(direct.mean).epsilon(1e-12));
    CHECK(row.crb_jensen == doctest::Approx(direct.jensen).epsilon(1e-12));
    CHECK(row.std_error == doctest::Approx(direct.std_error).epsilon(1e-9));

    // paired standard error is smaller than the unpaired one
    const auto qres = snr_sweep(sc, bases, Constellation::qam(16), t, {0.0}, 2000, 4);
    const auto& sc_gap = qres.paired[1];
    CHECK(sc_gap.waveform == "sc");
    CHECK(sc_gap.std_error < std::hypot(qres.rows[2].std_error, qres.rows[0].std_error));
    CHECK(kind_of([&] { snr_sweep(sc, bases, psk, t, {}, 10, 1); }) == ErrorKind::invalid_parameter);
}

TEST_CASE("jensen value is linear in the noise variance") {
    const Scenario sc = random_scenario(2, 32, 4, 1.0);
    const auto t = selection(SelectionKind::delay, 4);
    const double j1 = jensen_bound(build_geometry(sc), t);
    CHECK(jensen_bound(build_geometry(sc.with_sigma2(0.5)), t) == doctest::Approx(j1 / 2).epsilon(1e-12));
}

TEST_CASE("empirical symbol power covariance") {
    const auto qam = Constellation::qam(16);
    const RMatrix zero = empirical_sigma_s(basis_ofdm(8), Constellation::psk(16), 1000, 1);
    CHECK(zero.cwiseAbs().maxCoeff() < 1e-12);
    const RMatrix o = empirical_sigma_s(basis_ofdm(8), qam, 1000000, 1);
    CHECK((o - 0.32 * RMatrix::Identity(8, 8)).cwiseAbs().maxCoeff() <= 0.01);
    const RMatrix s = empirical_sigma_s(basis_sc(8), qam, 1000000, 2);
    CHECK((s - sigma_s_closed(basis_sc(8), qam.kurtosis())).cwiseAbs().maxCoeff() <= 0.01);
    CHECK(kind_of([&] { empirical_sigma_s(basis_sc(8), qam, 1, 2); }) == ErrorKind::invalid_parameter);
}

TEST_CASE("fluctuation moments") {
    const Scenario tmpl(32, {2.3, 9.7}, {{1, 0}, std::polar(1.0, 0.9)}, 1.0);
    const auto zero = z_moment_scaling(tmpl, parse_basis_family("ofdm"), Constellation::psk(8), {32, 64}, 2, 50, 1);
    for (const auto& p : zero.points) CHECK(p.moment == 0.0);
    CHECK(std::isnan(zero.slope));
    const auto k1 = z_moment_scaling(tmpl, parse_basis_family("sc"), Constellation::qam(16), {32, 64, 128, 256},
                                     1, 2000, 1);
    CHECK(k1.slope >= -0.7);
    CHECK(k1.slope <= -0.3);
    CHECK(parse_basis_family("otfs:*x4")(64).label() == "otfs:16x4");
    CHECK(kind_of([] { parse_basis_family("otfs:*x4")(30); }) == ErrorKind::invalid_dimension);
    CHECK(loglog_slope({1, 10, 100}, {1, 0.1, 0.01}) == doctest::Approx(-1.0));
}

}
