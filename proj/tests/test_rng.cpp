#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <set>

#include "blindmix/rng.hpp"

using namespace blindmix;

TEST_SUITE("rng") {

TEST_CASE("streams with the same key replay the same sequence") {
    rng::Stream a(42), b(42);
    for (int i = 0; i < 64; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("derived keys separate streams by label") {
    std::set<uint64_t> keys;
    for (uint64_t a = 0; a < 8; ++a)
        for (uint64_t b = 0; b < 8; ++b) keys.insert(rng::derive(123, a, b));
    CHECK(keys.size() == 64);
    CHECK(rng::derive(1, 2, 3) != rng::derive(2, 1, 3));
    CHECK(rng::derive(1, 2, 3, 4) != rng::derive(1, 2, 3, 5));
}

TEST_CASE("uniform draws stay in range") {
    rng::Stream st(7);
    for (int i = 0; i < 10000; ++i) {
        const double u = st.next_unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const double v = st.next_unit_open();
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("gaussian moments match N(0,1)") {
    rng::Stream st(11);
    const int n = 200000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = st.next_gaussian();
        sum += g;
        sumsq += g * g;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sumsq / n - 1.0) < 0.02);
}

TEST_CASE("complex gaussian has unit second moment, split evenly") {
    rng::Stream st(13);
    const int n = 200000;
    double msq = 0.0, re2 = 0.0, im2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const cplx z = st.next_cgaussian();
        msq += std::norm(z);
        re2 += z.real() * z.real();
        im2 += z.imag() * z.imag();
    }
    CHECK(std::abs(msq / n - 1.0) < 0.02);
    CHECK(std::abs(re2 / n - 0.5) < 0.01);
    CHECK(std::abs(im2 / n - 0.5) < 0.01);
}

TEST_CASE("signs are +/-1 and balanced") {
    rng::Stream st(17);
    int pos = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const int s = st.next_sign();
        CHECK((s == 1 || s == -1));
        if (s == 1) ++pos;
    }
    CHECK(std::abs(pos - n / 2) < 1000);
}

TEST_CASE("fill_cgaussian equals elementwise draws") {
    rng::Stream a(19), b(19);
    cvec buf(257);
    a.fill_cgaussian(buf);
    for (const cplx& v : buf) CHECK(v == b.next_cgaussian());
}

}  // TEST_SUITE
