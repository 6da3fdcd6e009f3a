#pragma once

#include <doctest.h>

#include <random>

#include "isac/numerics.hpp"

namespace testutil {

using namespace isac;

inline CMatrix random_complex(Index rows, Index cols, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> d;
    CMatrix m(rows, cols);
    for (Index c = 0; c < cols; ++c)
        for (Index r = 0; r < rows; ++r) m(r, c) = Complex(d(gen), d(gen));
    return m;
}

inline RMatrix random_real(Index rows, Index cols, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> d;
    RMatrix m(rows, cols);
    for (Index c = 0; c < cols; ++c)
        for (Index r = 0; r < rows; ++r) m(r, c) = d(gen);
    return m;
}

inline double rel_diff(const RMatrix& a, const RMatrix& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }
inline double rel_diff(const CMatrix& a, const CMatrix& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

template <typename F>
ErrorKind kind_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an isac::Error");
    return ErrorKind::config;
}

} // namespace testutil
