#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "xlb/rng.hpp"

using namespace xlb;

TEST_SUITE("rng") {

TEST_CASE("mix64 is deterministic and spreads nearby inputs") {
    CHECK(mix64(1) == mix64(1));
    std::set<uint64_t> outs;
    for (uint64_t i = 1; i <= 64; ++i) outs.insert(mix64(i));
    CHECK(outs.size() == 64);
}

TEST_CASE("absorb order matters") {
    RngKey k(42);
    CHECK(k.absorb("a").absorb("b").value() != k.absorb("b").absorb("a").value());
    CHECK(k.absorb(uint64_t{1}).value() != k.absorb(uint64_t{2}).value());
    CHECK(k.absorb("noise").value() != k.absorb("bias").value());
}

TEST_CASE("streams replay bit-identically") {
    RngKey k = RngKey(42).absorb("replay").absorb(uint64_t{3});
    StreamRng a(k), b(k);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    StreamRng c(k), d(k);
    for (int i = 0; i < 50; ++i) {
        CHECK(c.next_double() == d.next_double());
        CHECK(c.next_normal() == d.next_normal());
    }
}

TEST_CASE("distinct keys give distinct streams") {
    StreamRng a(RngKey(42).absorb("x"));
    StreamRng b(RngKey(42).absorb("y"));
    int same = 0;
    for (int i = 0; i < 16; ++i) same += a.next_u64() == b.next_u64();
    CHECK(same == 0);
}

TEST_CASE("next_double stays in [0,1) and looks uniform") {
    StreamRng r(RngKey(7).absorb("u"));
    double sum = 0.0;
    for (int i = 0; i < 10000; ++i) {
        double x = r.next_double();
        REQUIRE(x >= 0.0);
        REQUIRE(x < 1.0);
        sum += x;
    }
    CHECK(sum / 10000.0 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("next_below respects the bound and hits every residue") {
    StreamRng r(RngKey(9).absorb("below"));
    std::set<uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
        uint64_t v = r.next_below(7);
        REQUIRE(v < 7);
        seen.insert(v);
    }
    CHECK(seen.size() == 7);
}

TEST_CASE("next_normal has roughly standard moments") {
    StreamRng r(RngKey(11).absorb("n"));
    const int n = 20000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = r.next_normal();
        sum += x;
        sum2 += x * x;
    }
    double mean = sum / n;
    double var = sum2 / n - mean * mean;
    CHECK(mean == doctest::Approx(0.0).epsilon(1).scale(0.03));
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("normal_vector matches element-wise draws") {
    RngKey k = RngKey(5).absorb("vec");
    StreamRng a(k);
    auto v = a.normal_vector(9);
    REQUIRE(v.size() == 9);
    StreamRng b(k);
    for (double x : v) CHECK(x == b.next_normal());
}

TEST_CASE("deterministic_shuffle permutes reproducibly") {
    std::vector<int> base(20);
    for (int i = 0; i < 20; ++i) base[i] = i;

    auto v1 = base, v2 = base;
    StreamRng r1(RngKey(42).absorb("shuf")), r2(RngKey(42).absorb("shuf"));
    deterministic_shuffle(v1, r1);
    deterministic_shuffle(v2, r2);
    CHECK(v1 == v2);
    CHECK(v1 != base);

    auto sorted = v1;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == base);
}

}  // TEST_SUITE
