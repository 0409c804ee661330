#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "lrcone/onebody.hpp"

using namespace lrcone;

namespace {

Field free_field(std::size_t n) {
    FieldSpec s;
    s.kind = FieldKind::constant;
    s.lambda = 0.0;
    s.length = n;
    return make_field(s);
}

Field fibonacci(double lambda, std::size_t n) {
    FieldSpec s;
    s.kind = FieldKind::sturmian;
    s.lambda = lambda;
    s.length = n;
    return make_field(s);
}

Field from_values(std::vector<double> v) {
    FieldSpec s;
    s.kind = FieldKind::periodic;
    s.pattern = v;
    s.length = v.size();
    return make_field(s);
}

// Free Dirichlet chain: v_k(x) = sqrt(2/(N+1)) sin(k pi x/(N+1)), E_k = 2 cos(k pi/(N+1)).
Complex dirichlet_amplitude(std::size_t n, std::size_t x, std::size_t y, double st) {
    const double l = static_cast<double>(n + 1);
    Complex sum = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        const double a = std::numbers::pi * static_cast<double>(k) / l;
        const double e = 2.0 * std::cos(a);
        sum += (2.0 / l) * std::sin(a * static_cast<double>(x)) * std::sin(a * static_cast<double>(y)) *
               std::polar(1.0, -st * e);
    }
    return sum;
}

// Half-line image formula for e^{-i tau h}, h the free hopping operator.
Complex bessel_amplitude(int x, int y, double tau) {
    const auto phase = [](int m) {
        const Complex mi(0.0, -1.0);
        return std::pow(mi, m);
    };
    const auto j = [&](int m) {
        const double v = std::cyl_bessel_j(static_cast<double>(std::abs(m)), 2.0 * tau);
        return (m < 0 && (m % 2 != 0)) ? -v : v;
    };
    return phase(x - y) * j(x - y) - phase(x + y) * j(x + y);
}

}  // namespace

TEST(Operator, ApplyAndGershgorin) {
    const OneBodyOperator op(std::vector<double>{1.0, -2.0, 3.0});
    const auto out = op.apply(std::vector<double>{1.0, 1.0, 1.0});
    EXPECT_DOUBLE_EQ(out[0], 2.0);
    EXPECT_DOUBLE_EQ(out[1], 0.0);
    EXPECT_DOUBLE_EQ(out[2], 4.0);
    EXPECT_DOUBLE_EQ(op.spectral_radius_bound(), 5.0);
}

TEST(Eigensystem, Examples) {
    const auto e3 = eigensystem(build_operator(from_values({0, 0, 0})));
    EXPECT_NEAR(e3.values(0), -std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(e3.values(1), 0.0, 1e-12);
    EXPECT_NEAR(e3.values(2), std::sqrt(2.0), 1e-12);
    // E = 0 eigenvector is (1, 0, -1)/sqrt 2 up to sign
    EXPECT_NEAR(std::abs(e3.vectors(0, 1)), 1.0 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(e3.vectors(1, 1), 0.0, 1e-12);
    EXPECT_NEAR(e3.vectors(0, 1), -e3.vectors(2, 1), 1e-12);

    const auto e1 = eigensystem(build_operator(from_values({2.5})));
    EXPECT_DOUBLE_EQ(e1.values(0), 2.5);
    EXPECT_DOUBLE_EQ(std::abs(e1.vectors(0, 0)), 1.0);

    const auto e2 = eigensystem(build_operator(from_values({5, 5})));
    EXPECT_NEAR(e2.values(0), 4.0, 1e-12);
    EXPECT_NEAR(e2.values(1), 6.0, 1e-12);
}

TEST(Eigensystem, MatchesDirichletClosedForm) {
    const std::size_t n = 300;
    const auto eig = eigensystem(build_operator(free_field(n)));
    for (std::size_t k = 1; k <= n; ++k) {
        const double e = 2.0 * std::cos(std::numbers::pi * static_cast<double>(n + 1 - k) / (n + 1.0));
        ASSERT_NEAR(eig.values(static_cast<Eigen::Index>(k - 1)), e, 1e-12);
    }
}

TEST(Eigensystem, ReconstructsOperator) {
    const auto field = fibonacci(3.0, 120);
    const auto op = build_operator(field);
    const auto eig = eigensystem(op);
    const Eigen::MatrixXd rebuilt = eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
    for (Eigen::Index i = 0; i < 120; ++i)
        for (Eigen::Index j = 0; j < 120; ++j) {
            double expected = 0.0;
            if (i == j) expected = field.at(static_cast<std::size_t>(i + 1));
            if (std::abs(i - j) == 1) expected = 1.0;
            ASSERT_NEAR(rebuilt(i, j), expected, 1e-10);
        }
    const auto res = eigen_residuals(op, eig);
    EXPECT_LE(res.max_residual, 1e-10 * op.spectral_radius_bound());
    EXPECT_LE(res.max_norm_defect, 1e-12);
    EXPECT_LE(res.max_overlap, 1e-12);
}

TEST(Eigensystem, SturmCountAgrees) {
    const auto op = build_operator(fibonacci(5.0, 200));
    const auto eig = eigensystem(op);
    for (double e : {-3.0, 0.0, 1.7, 4.2, 7.5}) {
        std::size_t below = 0;
        for (Eigen::Index k = 0; k < eig.values.size(); ++k) below += eig.values(k) < e;
        EXPECT_EQ(op.count_below(e), below) << e;
    }
}

TEST(Amplitude, TimeZeroIsIdentity) {
    const auto eig = eigensystem(build_operator(fibonacci(2.0, 40)));
    const auto row = amplitude_row(eig, 7, 0.0, Scale::fermion);
    for (std::size_t y = 1; y <= 40; ++y) EXPECT_NEAR(std::abs(row.amplitudes[y - 1] - Complex(y == 7)), 0.0, 1e-12);
}

TEST(Amplitude, ScalarCase) {
    const double h = 0.7, t = 1.3;
    const auto eig = eigensystem(build_operator(from_values({h})));
    EXPECT_NEAR(std::abs(amplitude_row(eig, 1, t, Scale::fermion).amplitudes[0] - std::polar(1.0, -2.0 * h * t)), 0.0,
                1e-14);
    EXPECT_NEAR(std::abs(amplitude_row(eig, 1, t, Scale::transport).amplitudes[0] - std::polar(1.0, -h * t)), 0.0,
                1e-14);
}

TEST(Amplitude, MatchesDirichletAndBesselOracles) {
    const std::size_t n = 2001;
    const auto eig = eigensystem(build_operator(free_field(n)));
    const auto row = amplitude_row(eig, 1, 5.0, Scale::transport);
    for (std::size_t y = 1; y <= 60; ++y) {
        EXPECT_NEAR(std::abs(row.amplitudes[y - 1] - bessel_amplitude(1, static_cast<int>(y), 5.0)), 0.0, 1e-10) << y;
        EXPECT_NEAR(std::abs(row.amplitudes[y - 1] - dirichlet_amplitude(n, 1, y, 5.0)), 0.0, 1e-10) << y;
    }
    for (std::size_t y = 26; y <= n; ++y) ASSERT_LT(std::abs(row.amplitudes[y - 1]), 1e-8) << y;
}

TEST(Amplitude, UnitaritySymmetryComposition) {
    const auto eig = eigensystem(build_operator(fibonacci(1.5, 50)));
    for (double t : {0.3, 2.0, 17.0}) {
        for (std::size_t x : {1u, 13u, 50u}) EXPECT_NEAR(amplitude_row(eig, x, t, Scale::fermion).norm_squared(), 1.0, 1e-10);
        for (std::size_t x : {2u, 20u})
            for (std::size_t y : {5u, 44u})
                EXPECT_NEAR(std::abs(amplitude_row(eig, x, t, Scale::transport).amplitudes[y - 1] -
                                     amplitude_row(eig, y, t, Scale::transport).amplitudes[x - 1]),
                            0.0, 1e-10);
    }
    const double t1 = 0.8, t2 = 1.9;
    const std::size_t x = 9;
    const auto full = amplitude_row(eig, x, t1 + t2, Scale::transport);
    const auto first = amplitude_row(eig, x, t1, Scale::transport);
    for (std::size_t y = 1; y <= 50; ++y) {
        Complex sum = 0.0;
        for (std::size_t z = 1; z <= 50; ++z)
            sum += first.amplitudes[z - 1] * amplitude_row(eig, z, t2, Scale::transport).amplitudes[y - 1];
        ASSERT_NEAR(std::abs(sum - full.amplitudes[y - 1]), 0.0, 1e-9);
    }
}

TEST(Amplitude, RejectsBadSource) {
    const auto eig = eigensystem(build_operator(free_field(5)));
    EXPECT_THROW(amplitude_row(eig, 0, 1.0, Scale::transport), std::out_of_range);
    EXPECT_THROW(amplitude_row(eig, 6, 1.0, Scale::transport), std::out_of_range);
}

TEST(OutsideProbability, Basics) {
    const auto eig = eigensystem(build_operator(free_field(2001)));
    EXPECT_EQ(outside_probability(eig, 1, 0.0), 0.0);
    EXPECT_EQ(outside_probability(eig, 5, 0.0), 0.0);
    EXPECT_NEAR(outside_probability(eig, 0, 3.0), 1.0, 1e-12);
    EXPECT_LT(outside_probability(eig, 40, 10.0), 1e-6);

    const auto p = outside_profile(amplitude_row(eig, 1, 10.0, Scale::transport));
    for (std::size_t x = 1; x < p.size(); ++x) {
        ASSERT_LE(p[x], p[x - 1] + 1e-15);
        ASSERT_GE(p[x], 0.0);
        ASSERT_LE(p[x], 1.0 + 1e-12);
    }
}

TEST(TailSum, Basics) {
    const auto eig = eigensystem(build_operator(fibonacci(1.0, 60)));
    EXPECT_NEAR(tail_sum(eig, 3, 8, 0.0), 0.0, 1e-12);
    EXPECT_THROW(tail_sum(eig, 1, 1, 1.0), InvalidArgument);
    EXPECT_THROW(tail_sum(eig, 5, 2, 1.0), InvalidArgument);
    for (std::size_t xp = 2; xp < 60; ++xp) ASSERT_LE(tail_sum(eig, 1, xp + 1, 4.0), tail_sum(eig, 1, xp, 4.0));
    const auto row = amplitude_row(eig, 1, 4.0, Scale::fermion);
    double direct = 0.0;
    for (std::size_t y = 10; y <= 60; ++y) direct += std::abs(row.amplitudes[y - 1]);
    EXPECT_NEAR(tail_sum(eig, 1, 10, 4.0), direct, 1e-13);
}

TEST(Resolvent, Examples) {
    const double h = 0.4;
    const OneBodyOperator one(std::vector<double>{h});
    const Complex z(0.3, 1.1);
    EXPECT_NEAR(std::abs(resolvent_element(one, z, 1, 1) - 1.0 / (h - z)), 0.0, 1e-14);

    const OneBodyOperator two(std::vector<double>{0.0, 0.0});
    const Complex z2(0.0, 2.0);
    // ([[-2i, 1], [1, -2i]])^{-1}_{11} = -2i / ((-2i)^2 - 1)
    EXPECT_NEAR(std::abs(resolvent_element(two, z2, 1, 1) - Complex(0.0, -2.0) / Complex(-5.0, 0.0)), 0.0, 1e-14);

    const auto op = build_operator(fibonacci(2.0, 30));
    EXPECT_NEAR(std::abs(resolvent_element(op, z, 3, 17) - resolvent_element(op, z, 17, 3)), 0.0, 1e-13);
}

TEST(Resolvent, RejectsSpectrum) {
    const auto op = build_operator(from_values({5, 5}));
    EXPECT_THROW(resolvent_element(op, Complex(4.0, 0.0), 1, 1), NumericalError);
}

TEST(Dunford, Examples) {
    const double h = 0.9;
    const OneBodyOperator one(std::vector<double>{h});
    DunfordOptions o;
    o.points = 512;
    EXPECT_NEAR(std::abs(dunford_amplitude(one, 1, 1, 1.0, o) - std::polar(1.0, -2.0 * h)), 0.0, 1e-8);

    const auto free2 = build_operator(free_field(2));
    const auto eig2 = eigensystem(free2);
    for (std::size_t x = 1; x <= 2; ++x)
        for (std::size_t y = 1; y <= 2; ++y)
            EXPECT_NEAR(std::abs(dunford_amplitude(free2, x, y, 1.0) -
                                 amplitude_row(eig2, x, 1.0, Scale::fermion).amplitudes[y - 1]),
                        0.0, 1e-6);

    const auto op = build_operator(fibonacci(1.0, 20));
    for (std::size_t x : {1u, 7u})
        for (std::size_t y : {1u, 7u, 12u})
            EXPECT_NEAR(std::abs(dunford_amplitude(op, x, y, 0.0) - Complex(x == y)), 0.0, 1e-8);
}

TEST(Dunford, ErrorShrinksWithPoints) {
    const auto op = build_operator(fibonacci(2.0, 50));
    const auto eig = eigensystem(op);
    const Complex exact = amplitude_row(eig, 3, 1.0, Scale::fermion).amplitudes[9];
    double previous = 1e300;
    for (int m : {64, 128, 256, 512, 1024}) {
        DunfordOptions o;
        o.points = m;
        const double err = std::abs(dunford_amplitude(op, 3, 10, 1.0, o) - exact);
        EXPECT_LE(err, 2.0 * previous + 1e-14) << m;
        previous = err;
    }
    EXPECT_LT(previous, 1e-10);
    EXPECT_NEAR(std::abs(dunford_amplitude_checked(op, 3, 10, 1.0) - exact), 0.0, 1e-6);
}

TEST(Dunford, CheckedFailsWhenUnconverged) {
    const auto op = build_operator(fibonacci(2.0, 50));
    DunfordOptions o;
    o.points = 128;
    EXPECT_THROW(dunford_amplitude_checked(op, 3, 10, 40.0, o), NumericalError);
    o.points = 64;
    EXPECT_THROW(dunford_amplitude_checked(op, 3, 10, 1.0, o), InvalidArgument);
    o.points = 8;
    EXPECT_THROW(dunford_amplitude(op, 3, 10, 1.0, o), InvalidArgument);
}

TEST(Transfer, SingleStepRotation) {
    const std::vector<double> zero{0.0};
    const auto t = transfer_matrix(zero, 0.0, 1, 1);
    EXPECT_EQ(t(0, 0), 0.0);
    EXPECT_EQ(t(0, 1), -1.0);
    EXPECT_EQ(t(1, 0), 1.0);
    EXPECT_EQ(t(1, 1), 0.0);
    const std::vector<double> four(4, 0.0);
    const auto t4 = transfer_matrix(four, 0.0, 1, 4);
    EXPECT_NEAR(t4(0, 0), 1.0, 1e-15);
    EXPECT_NEAR(t4(0, 1), 0.0, 1e-15);
    EXPECT_NEAR(t4(1, 0), 0.0, 1e-15);
    EXPECT_NEAR(t4(1, 1), 1.0, 1e-15);
}

TEST(Transfer, UnimodularAndTransportsSolutions) {
    const Field f = fibonacci(3.0, 200);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double e : {-2.5, 0.1, 1.7, 4.0}) {
        for (auto [a, b] : {std::pair<std::size_t, std::size_t>{1, 40}, {17, 63}, {5, 5}}) {
            const auto t = transfer_matrix(f, e, a, b);
            // ad - bc cancels at the scale of |T|^2
            EXPECT_NEAR(t.determinant(), 1.0, 1e-14 * (1.0 + t.norm() * t.norm()));
            const double psi_a = u(rng), psi_prev = u(rng);
            // forward recursion psi_{n+1} = (E - h_n) psi_n - psi_{n-1}
            double cur = psi_a, prev = psi_prev;
            for (std::size_t n = a; n <= b; ++n) {
                const double next = (e - f.at(n)) * cur - prev;
                prev = cur;
                cur = next;
            }
            const auto v = t.apply({psi_a, psi_prev});
            const double scale = 1.0 + std::abs(cur) + std::abs(prev);
            EXPECT_NEAR(v[0], cur, 1e-10 * scale);
            EXPECT_NEAR(v[1], prev, 1e-10 * scale);
        }
    }
}

TEST(Transfer, RejectsBadRange) {
    const Field f = fibonacci(1.0, 10);
    EXPECT_THROW(transfer_matrix(f, 0.0, 0, 3), InvalidArgument);
    EXPECT_THROW(transfer_matrix(f, 0.0, 4, 3), InvalidArgument);
    EXPECT_THROW(transfer_matrix(f, 0.0, 3, 11), InvalidArgument);
}
