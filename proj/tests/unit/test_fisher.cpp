#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "spreadchan/error.hpp"
#include "spreadchan/fisher.hpp"

using namespace spreadchan;

namespace {

DensityOperator two_level_family(double a) {
    CMat m = CMat::Zero(2, 2);
    m(0, 0) = a * a;
    m(1, 1) = 1.0 - a * a;
    return DensityOperator(m);
}

}  // namespace

TEST(Fisher, PureQfiIsFourTimesVariance) {
    const int dim = 40;
    const auto psi = build_pure_state(StateSpec::coherent({0.7, 0.2}), FockDimension(dim));
    const auto g = displacement_generator(0.3, FockDimension(dim));
    // Any coherent state has Var(G) = 1 for the displacement generator.
    EXPECT_NEAR(qfi_pure(psi, g).value, 4.0, 1e-12);
    EXPECT_THROW(qfi_pure(psi, make_ladder(FockDimension(dim)).annihilation), Error);
}

TEST(Fisher, AveragedQfiMatchesEnergyBound) {
    const auto u = PhaseDistribution::uniform();
    for (const auto &spec : {StateSpec::fock(3), StateSpec::squeezed_with_energy(2.0)}) {
        const auto psi = build_pure_state(spec, auto_dimension(spec, 0.1));
        EXPECT_NEAR(avg_qfi(psi, 1e-3, u).value, qfi_bound(spec.nominal_energy()), 1e-4) << spec.to_string();
    }
    const auto coh = build_pure_state(StateSpec::coherent({2.0, 0.0}), FockDimension(60));
    EXPECT_NEAR(avg_qfi(coh, 0.5, u).value, 4.0, 1e-10);
    EXPECT_DOUBLE_EQ(qfi_bound(5.0), 44.0);
    EXPECT_THROW(qfi_bound(-1.0), Error);
}

TEST(Fisher, FixedPhaseSqueezedQfi) {
    // Displacing along the anti-squeezed direction is generated by sqrt(2) p, so F = 8 Var(p) = 4 e^{2r}.
    const double r = 0.6;
    const auto psi = build_pure_state(StateSpec::squeezed(r), FockDimension(80));
    EXPECT_NEAR(avg_qfi(psi, 0.2, PhaseDistribution::delta(0.0)).value, 4.0 * std::exp(2.0 * r), 1e-10);
    EXPECT_NEAR(avg_qfi(psi, 0.2, PhaseDistribution::delta(oracle::kPiL / 2)).value, 4.0 * std::exp(-2.0 * r), 1e-10);
}

TEST(Fisher, MixedQfiTwoLevelFamily) {
    for (double a : {0.05, 0.3, 0.6, 0.9}) {
        const auto rep = qfi_mixed(two_level_family, a);
        EXPECT_NEAR(rep.value / (4.0 + 4.0 * a * a / (1.0 - a * a)), 1.0, 1e-8) << a;
        EXPECT_FALSE(rep.degenerate);
        EXPECT_EQ(rep.method, FisherMethod::sld_eigen);
    }
    const auto edge = qfi_mixed(two_level_family, 0.0);
    EXPECT_TRUE(edge.degenerate);
    EXPECT_GT(edge.excluded_terms, 0);
    SldOptions rich;
    rich.richardson = true;
    EXPECT_NEAR(qfi_mixed(two_level_family, 0.5, rich).value, 4.0 + 4.0 * 0.25 / 0.75, 1e-9);
}

TEST(Fisher, MixedQfiOfPureFamilyEqualsPureQfi) {
    const int dim = 50;
    const auto psi = build_pure_state(StateSpec::squeezed(0.4), FockDimension(dim));
    const Displacer disp{FockDimension(dim)};
    const auto family = [&](double a) {
        return DensityOperator::from_pure(StateVector::normalized(disp.at(a).apply(0.9, psi.amplitudes())));
    };
    const double expected = avg_qfi(psi, 0.3, PhaseDistribution::delta(0.9)).value;
    EXPECT_NEAR(qfi_mixed(family, 0.3).value, expected, 1e-6 * expected);
}

TEST(Fisher, DiscreteCfiOfBernoulli) {
    // p = (t^2, 1 - t^2): F = 4 t^2 / (t^2 (1 - t^2)) = 4 / (1 - t^2).
    const auto fam = [](double t) { return std::vector<double>{t * t, 1.0 - t * t}; };
    for (double t : {0.2, 0.5, 0.8}) {
        EXPECT_NEAR(cfi_discrete(fam, t).value, 4.0 / (1.0 - t * t), 1e-7);
    }
    const auto edge = cfi_discrete([](double t) { return std::vector<double>{t, 1.0 - t, 0.0}; }, 0.3);
    EXPECT_EQ(edge.excluded_terms, 1);
    EXPECT_FALSE(edge.degenerate);
}

TEST(Fisher, SelfProjectionAtOriginIsDegenerate) {
    // p1 = 0 at alpha = 0 and opens up beyond it, so the point value is not the right limit.
    const auto rep = cfi_self_projection(StateSpec::vacuum(), PhaseDistribution::uniform(), 0.0);
    EXPECT_TRUE(rep.degenerate);
    EXPECT_EQ(rep.excluded_terms, 1);
    EXPECT_FALSE(cfi_self_projection(StateSpec::vacuum(), PhaseDistribution::uniform(), 0.1).degenerate);
}

TEST(Fisher, CoherentSelfProjectionCfi) {
    // p0 = e^{-a^2}: F = 4 a^2 e^{-a^2} / (1 - e^{-a^2}).
    const auto u = PhaseDistribution::uniform();
    for (double a : {0.05, 0.4, 1.0}) {
        const double e = std::exp(-a * a);
        const double ref = 4.0 * a * a * e / (1.0 - e);
        EXPECT_NEAR(cfi_self_projection(StateSpec::vacuum(), u, a).value / ref, 1.0, 1e-6) << a;
    }
}

TEST(Fisher, DarkNoiseCfiMatchesFormula) {
    const double eps = 0.05;
    const auto p0 = [](double a) { return std::exp(-a * a); };
    const double a = 0.3;
    const double q = (1.0 - eps) * p0(a) + eps / 2.0;
    const double dq = (1.0 - eps) * (-2.0 * a * p0(a));
    EXPECT_NEAR(noisy_cfi(p0, eps, a).value, dq * dq / (q * (1.0 - q)), 1e-6);
    EXPECT_THROW(noisy_cfi(p0, 1.5, a), Error);
}

TEST(Fisher, FockSelfProjectionDipsAtFidelityExtrema) {
    // The CFI vanishes where d p0 / d alpha = 0, here at a turning point of e^{-x} L_5(x)^2 between roots.
    const auto u = PhaseDistribution::uniform();
    const auto derivative = [](double a) {
        const double h = 1e-6;
        return (p0_fock_closed(a + h, 5) - p0_fock_closed(a - h, 5)) / (2 * h);
    };
    const double turning = oracle::bisect([&](double a) { return -derivative(a); }, 0.0, 0.6, 1.1);
    EXPECT_LT(std::abs(derivative(turning)), 1e-6);
    EXPECT_LT(cfi_self_projection(StateSpec::fock(5), u, turning).value, 1e-4);
}

TEST(Fisher, QuadratureCfiVacuum) {
    // Vacuum with a fixed phase: shift sqrt(2) a along x, F = 2 (sqrt(2))^2 = 4 for all a.
    const auto rep = cfi_quadrature(StateSpec::vacuum(), 0.4, PhaseDistribution::delta(0.0));
    EXPECT_NEAR(rep.value, 4.0, 1e-6);
    EXPECT_EQ(rep.method, FisherMethod::quadrature_cfi);
    EXPECT_EQ(rep.derivative_step, 0.0);
}

TEST(Fisher, SaturationConstantFit) {
    const std::vector<double> alphas{0.01, 0.02, 0.05};
    std::vector<double> f;
    for (double a : alphas) {
        f.push_back(44.0 * (1.0 - 3.0 * a));
    }
    EXPECT_NEAR(saturation_constant(alphas, f, 44.0), 3.0, 1e-12);
}

TEST(Fisher, DefaultStep) {
    EXPECT_DOUBLE_EQ(default_step(0.0), 1e-6);
    EXPECT_DOUBLE_EQ(default_step(0.5), 5e-4);
}
