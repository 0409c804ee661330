#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "lrcone/potentials.hpp"
#include "lrcone/tracemap.hpp"

using namespace lrcone;

namespace {

// Half-trace of A_n ... A_1 over the first `length` letters of the golden word, by direct
// 2x2 products. The letter at x is floor((x+1) theta) - floor(x theta), evaluated here in
// long double, which is exact for these short prefixes.
double direct_half_trace(double lambda, double energy, std::size_t length) {
    const long double theta = kGoldenRotation;
    std::array<double, 4> m{1, 0, 0, 1};
    for (std::size_t x = 1; x <= length; ++x) {
        const long double a = std::floor((x + 1) * theta) - std::floor(x * theta);
        const double h = lambda * static_cast<double>(a);
        const std::array<double, 4> step{energy - h, -1.0, 1.0, 0.0};
        m = {step[0] * m[0] + step[1] * m[2], step[0] * m[1] + step[1] * m[3], step[2] * m[0] + step[3] * m[2],
             step[2] * m[1] + step[3] * m[3]};
    }
    return 0.5 * (m[0] + m[3]);
}

}  // namespace

TEST(Invariant, Examples) {
    EXPECT_EQ(invariant(1, 1, 1), 0.0);
    EXPECT_EQ(invariant(0, 0, 0), -1.0);
    EXPECT_NEAR(invariant(initial_traces(2.0, 1.0)), 1.0, 1e-15);
    for (double e : {-1.3, 0.0, 0.7, 1.9}) EXPECT_NEAR(invariant(initial_traces(0.0, e)), 0.0, 1e-15);
    for (double lambda : {0.5, 3.0, 12.0})
        for (double e : {-4.0, 0.2, 9.0}) EXPECT_NEAR(invariant(initial_traces(lambda, e)), lambda * lambda / 4.0, 1e-12 * (1 + lambda * lambda));
}

TEST(Iterate, FixedPointAndRecursion) {
    TraceState s;
    s.x = {1.0, 1.0, 1.0};
    const auto n = iterate(s);
    EXPECT_EQ(n.x[2], 1.0);
    EXPECT_EQ(n.generation, s.generation + 1);

    const auto init = initial_traces(1.5, 0.4);
    const auto next = iterate(init);
    EXPECT_DOUBLE_EQ(next.x[2], 2.0 * init.x[2] * init.x[1] - init.x[0]);
    EXPECT_DOUBLE_EQ(next.x[0], init.x[1]);
    EXPECT_DOUBLE_EQ(next.x[1], init.x[2]);
}

TEST(Iterate, ConservesInvariant) {
    for (double lambda : {0.0, 0.5, 1.0, 2.0, 4.0})
        for (double e : {-2.0, -0.5, 0.3, 1.1}) {
            auto s = initial_traces(lambda, e);
            for (int k = 0; k < 25 && !s.overflow; ++k) {
                const auto n = iterate(s);
                if (n.overflow) break;
                ASSERT_LE(std::abs(invariant(n) - invariant(s)), 1e-9 * invariant_scale(n))
                    << lambda << " " << e << " " << k;
                s = n;
            }
        }
}

TEST(Iterate, FreeBoundedOrbit) {
    auto s = initial_traces(0.0, 2.0 * std::cos(0.3));
    for (int k = 0; k < 30; ++k) {
        s = iterate(s);
        for (double v : s.x) ASSERT_LE(std::abs(v), 1.0 + 1e-9);
    }
}

TEST(Iterate, OverflowRaised) {
    auto s = initial_traces(4.0, 0.0);
    for (int k = 0; k < 30; ++k) s = iterate(s);
    EXPECT_TRUE(s.overflow);
}

TEST(Escape, FreeCase) {
    EXPECT_FALSE(escape_time(0.0, 1.0, 100).escaped);
    EXPECT_TRUE(escape_time(0.0, 3.0, 100).escaped);
    for (int i = 0; i < 100; ++i) {
        const double e = -5.0 + 10.0 * (i + 0.5) / 100.0;
        const auto r = escape_time(0.0, e, 100);
        if (std::abs(e) < 2.0) EXPECT_FALSE(r.escaped) << e;
        if (std::abs(e) > 2.01) EXPECT_TRUE(r.escaped) << e;
    }
}

TEST(Escape, LargeCouplingThinsSpectrum) {
    const int n = 10000;
    std::vector<double> grid(n);
    for (int i = 0; i < n; ++i) grid[i] = -10.0 + 20.0 * i / (n - 1.0);
    const auto scan = escape_scan(8.0, grid, 60);
    std::size_t bounded = 0;
    for (const auto& s : scan) bounded += !s.result.escaped;
    EXPECT_LT(bounded * (20.0 / (n - 1.0)), 4.0);
}

TEST(TraceCheck, AgreesWithDirectProducts) {
    EXPECT_NEAR(trace_check(0.0, 0.5, 3).trace_map, trace_check(0.0, 0.5, 3).transfer, 1e-9);
    const auto base = trace_check(2.0, 0.0, 1);
    EXPECT_DOUBLE_EQ(base.trace_map, base.transfer);
    EXPECT_DOUBLE_EQ(base.transfer, 0.5 * (0.0 - 2.0));
    const auto deep = trace_check(2.0, 0.0, 12);
    EXPECT_NEAR(deep.trace_map / deep.transfer, 1.0, 1e-9);

    for (double lambda : {0.5, 1.0, 2.0, 4.0})
        for (double e : {-1.5, -0.2, 0.6, 1.4, 2.5})
            for (int k = 1; k <= 12; ++k) {
                const auto c = trace_check(lambda, e, k);
                const double direct = direct_half_trace(lambda, e, fibonacci_length(k));
                const double scale = 1.0 + std::abs(direct);
                ASSERT_NEAR(c.transfer, direct, 1e-9 * scale) << lambda << " " << e << " " << k;
                ASSERT_NEAR(c.trace_map, direct, 1e-6 * scale) << lambda << " " << e << " " << k;
            }
}
