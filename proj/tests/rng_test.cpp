#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <vector>

#include "dglab/rng.hpp"

using dglab::Rng;

TEST(Rng, SameSeedSameStream) {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(Rng, DifferentSeedsDiverge) {
    Rng a(1), b(2);
    int equal = 0;
    for (int i = 0; i < 100; ++i) equal += a() == b();
    EXPECT_EQ(equal, 0);
}

TEST(Rng, UniformStaysInUnitInterval) {
    Rng r(7);
    double lo = 1.0, hi = 0.0, sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        sum += u;
    }
    EXPECT_GE(lo, 0.0);
    EXPECT_LT(hi, 1.0);
    EXPECT_NEAR(sum / n, 0.5, 0.01);
}

TEST(Rng, NormalMoments) {
    Rng r(11);
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        s += z;
        s2 += z * z;
    }
    EXPECT_NEAR(s / n, 0.0, 0.01);
    EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Rng, BelowCoversRange) {
    Rng r(3);
    std::vector<int> hits(5, 0);
    for (int i = 0; i < 5000; ++i) ++hits[r.below(5)];
    for (int h : hits) EXPECT_GT(h, 800);
}

TEST(Rng, ShuffleIsPermutation) {
    Rng r(5);
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    r.shuffle(std::span<int>(v));
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(Rng, DeriveSeedSeparatesStreams) {
    EXPECT_NE(dglab::derive_seed(0, 0), dglab::derive_seed(0, 1));
    EXPECT_EQ(dglab::derive_seed(9, 4), dglab::derive_seed(9, 4));
}
