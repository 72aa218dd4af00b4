#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "spreadchan/error.hpp"
#include "spreadchan/special.hpp"

using namespace spreadchan;

TEST(Special, BesselI0MatchesSeries) {
    for (double x : {0.0, 1e-8, 0.3, 1.0, 2.5, 7.0, 20.0, 60.0}) {
        const double ref = static_cast<double>(oracle::bessel_i0_series(x));
        EXPECT_NEAR(bessel_i0(x) / ref, 1.0, 1e-13) << "x=" << x;
    }
}

TEST(Special, ScaledBesselMatchesSeriesIncludingAsymptoticBranch) {
    for (double x : {0.0, 0.5, 10.0, 300.0, 699.0, 701.0, 1500.0, 5000.0}) {
        const long double xl = x;
        const double ref = static_cast<double>(oracle::bessel_i0_series(xl) * std::exp(-xl));
        EXPECT_NEAR(bessel_i0_scaled(x) / ref, 1.0, 1e-12) << "x=" << x;
    }
}

TEST(Special, ScaledBesselFiniteForHugeArgument) {
    const double v = bessel_i0_scaled(1e12);
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_NEAR(v * std::sqrt(2.0 * oracle::kPiL * 1e12), 1.0, 1e-9);
}

TEST(Special, BesselRejectsNegative) {
    EXPECT_THROW(bessel_i0(-1.0), Error);
    EXPECT_THROW(bessel_i0_scaled(-1.0), Error);
}

TEST(Special, LaguerreMatchesExplicitSum) {
    for (int n : {0, 1, 2, 5, 10, 15}) {
        for (double x : {0.0, 0.25, 1.0, 3.7, 9.0}) {
            const double ref = static_cast<double>(oracle::laguerre_sum(n, x));
            EXPECT_NEAR(laguerre(n, x), ref, 1e-10 * std::max(1.0, std::abs(ref))) << n << " " << x;
        }
    }
}

TEST(Special, HermiteFunctionsMatchExplicitPolynomials) {
    for (int n = 0; n <= 20; ++n) {
        for (double x : {-4.0, -1.3, 0.0, 0.7, 2.2, 5.0}) {
            const double ref = static_cast<double>(oracle::hermite_function(n, x));
            EXPECT_NEAR(hermite_position_amplitude(n, x), ref, 1e-12) << n << " " << x;
        }
    }
}

TEST(Special, HermiteTableAgreesWithDirectEvaluation) {
    HermiteFunctions table(300);
    std::vector<double> out;
    for (double x : {-20.0, -3.0, 0.1, 11.0}) {
        table.evaluate(x, out);
        const auto direct = hermite_position_amplitudes(300, x);
        ASSERT_EQ(out.size(), direct.size());
        for (std::size_t n = 0; n < out.size(); ++n) {
            EXPECT_DOUBLE_EQ(out[n], direct[n]);
        }
    }
}

TEST(Special, HighOrderHermiteFunctionsStayOrthonormal) {
    // Trapezoid rule on a wide grid is spectrally accurate for these functions.
    const int count = 200;
    const double h = 0.02;
    HermiteFunctions table(count);
    std::vector<double> v;
    std::vector<double> gram(static_cast<std::size_t>(4), 0.0);
    const int pairs[4][2] = {{199, 199}, {150, 150}, {199, 197}, {100, 40}};
    for (double x = -30.0; x <= 30.0; x += h) {
        table.evaluate(x, v);
        for (int k = 0; k < 4; ++k) {
            gram[k] += h * v[pairs[k][0]] * v[pairs[k][1]];
        }
    }
    EXPECT_NEAR(gram[0], 1.0, 1e-10);
    EXPECT_NEAR(gram[1], 1.0, 1e-10);
    EXPECT_NEAR(gram[2], 0.0, 1e-10);
    EXPECT_NEAR(gram[3], 0.0, 1e-10);
}

TEST(Special, HermiteFunctionsUnderflowGracefullyFarOut) {
    const auto v = hermite_position_amplitudes(50, 60.0);
    for (double a : v) {
        EXPECT_TRUE(std::isfinite(a));
        EXPECT_LT(std::abs(a), 1e-300);
    }
}
