#include "helpers.hpp"

#include "isac/rng.hpp"

using namespace isac;

TEST_SUITE("rng") {

TEST_CASE("philox known answer") {
    // Random123 reference vector for philox4x32-10 with zero counter and key.
    const auto out = CounterRng::philox({0, 0, 0, 0}, {0, 0});
    CHECK(out[0] == 0x6627e8d5u);
    CHECK(out[1] == 0xe169c58du);
    CHECK(out[2] == 0xbc57ac4cu);
    CHECK(out[3] == 0x9b00dbd8u);
    const auto ff = CounterRng::philox({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                       {0xffffffffu, 0xffffffffu});
    CHECK(ff[0] == 0x408f276du);
    CHECK(ff[1] == 0x41c83b0eu);
    CHECK(ff[2] == 0xa20bc7c6u);
    CHECK(ff[3] == 0x6d5451fdu);
}

TEST_CASE("streams are reproducible and distinct") {
    CounterRng a(5, 17), b(5, 17), c(5, 18), d(5, 17, Stream::scenario);
    bool differ_c = false, differ_d = false;
    for (int i = 0; i < 32; ++i) {
        const auto x = a();
        CHECK(x == b());
        differ_c = differ_c || x != c();
        differ_d = differ_d || x != d();
    }
    CHECK(differ_c);
    CHECK(differ_d);
}

TEST_CASE("uniform and index ranges") {
    CounterRng r(1, 0);
    double sum = 0.0;
    std::vector<int> counts(7, 0);
    const int n = 70000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
        const auto k = r.uniform_index(7);
        REQUIRE(k < 7u);
        ++counts[k];
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
    for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("normal moments") {
    CounterRng r(2, 0);
    double m1 = 0, m2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal();
        m1 += x;
        m2 += x * x;
    }
    CHECK(std::abs(m1 / n) < 0.01);
    CHECK(std::abs(m2 / n - 1.0) < 0.02);
}

}
