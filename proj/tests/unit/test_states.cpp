#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "spreadchan/error.hpp"
#include "spreadchan/states.hpp"

using namespace spreadchan;

namespace {

double max_diff(const CVec &a, const CVec &b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST(States, VacuumAndFock) {
    const auto vac = build_pure_state(StateSpec::vacuum(), FockDimension(4));
    EXPECT_EQ(vac[0], cplx(1.0, 0.0));
    const auto f = build_pure_state(StateSpec::fock(3), FockDimension(8));
    EXPECT_EQ(f[3], cplx(1.0, 0.0));
    EXPECT_DOUBLE_EQ(mean_number(f), 3.0);
    EXPECT_THROW(build_pure_state(StateSpec::fock(8), FockDimension(8)), Error);
}

TEST(States, CoherentMatchesRatioRecurrence) {
    const cplx beta(1.2, -0.7);
    const auto psi = build_pure_state(StateSpec::coherent(beta), FockDimension(60));
    EXPECT_LT(max_diff(psi.amplitudes(), oracle::coherent_ket(beta, 60)), 1e-14);
    EXPECT_NEAR(mean_number(psi), std::norm(beta), 1e-12);
}

TEST(States, SqueezedMatchesClosedFormKet) {
    for (double theta : {0.0, 0.9}) {
        const double r = std::asinh(std::sqrt(5.0));
        const int dim = auto_dimension(StateSpec::squeezed(r, theta), 0.0).value();
        const auto psi = build_pure_state(StateSpec::squeezed(r, theta), FockDimension(dim));
        EXPECT_LT(max_diff(psi.amplitudes(), oracle::squeezed_ket(r, theta, dim)), 1e-13);
        EXPECT_NEAR(mean_number(psi), 5.0, 1e-9);
    }
}

TEST(States, SqueezedQuadratureVarianceIsReduced) {
    // theta = 0 squeezes x: Var(x) = e^{-2r}/2 with x = (a + a^dagger)/sqrt(2).
    const double r = 0.8;
    const int dim = 120;
    const auto psi = build_pure_state(StateSpec::squeezed(r), FockDimension(dim));
    const CMat a = oracle::lowering(dim);
    const CMat x = (a + a.adjoint()) / std::sqrt(2.0);
    const cplx var = psi.amplitudes().dot(x * x * psi.amplitudes());
    EXPECT_NEAR(var.real(), std::exp(-2.0 * r) / 2.0, 1e-12);
}

TEST(States, MultiCatMatchesExplicitSuperposition) {
    const auto spec = StateSpec::multi_cat(3, cplx(1.7, 0.0), 0.4);
    const auto psi = build_pure_state(spec, FockDimension(50));
    const CVec ref = oracle::multi_cat_ket(3, 1.7, 0.4, 50);
    // Compare up to a global phase.
    const cplx phase = ref.dot(psi.amplitudes());
    EXPECT_NEAR(std::abs(phase), 1.0, 1e-13);
    EXPECT_LT(max_diff(psi.amplitudes(), phase * ref), 1e-13);
}

TEST(States, CatWithEnergyHitsTarget) {
    const auto spec = StateSpec::multi_cat_with_energy(10, 10.0);
    const auto &cat = std::get<MultiCat>(spec.kind());
    EXPECT_NEAR(std::norm(cat.beta), oracle::kCat10BetaSquared, 1e-9);
    const auto psi = build_pure_state(spec, auto_dimension(spec, 0.0));
    EXPECT_NEAR(mean_number(psi), 10.0, 1e-9);
    EXPECT_NEAR(std::norm(psi[10]), oracle::kCat10FockOverlap, 1e-9);
}

TEST(States, ThermalIsGeometric) {
    const auto rho = std::get<DensityOperator>(build_state(StateSpec::thermal(2.0), FockDimension(120)));
    for (int n = 0; n < 10; ++n) {
        EXPECT_NEAR(rho.matrix()(n, n).real(), std::pow(2.0 / 3.0, n) / 3.0, 1e-14);
    }
    EXPECT_NEAR(mean_number(rho), 2.0, 1e-12);
    EXPECT_THROW(build_pure_state(StateSpec::thermal(1.0), FockDimension(20)), Error);
}

TEST(States, PopulationsSumToOneAndMatchEnergy) {
    for (const auto &spec : {StateSpec::coherent({2.0, 1.0}), StateSpec::squeezed_with_energy(5.0),
                             StateSpec::multi_cat(4, {2.5, 0.0}), StateSpec::thermal(3.0)}) {
        const auto p = spec.populations(4000);
        double total = 0.0;
        double energy = 0.0;
        for (std::size_t n = 0; n < p.size(); ++n) {
            total += p[n];
            energy += n * p[n];
        }
        EXPECT_NEAR(total, 1.0, 1e-12) << spec.to_string();
        EXPECT_NEAR(energy, spec.nominal_energy(), 1e-9) << spec.to_string();
    }
}

TEST(States, AutoDimensionKeepsLeakageNegligible) {
    for (const auto &spec : {StateSpec::squeezed(2.0), StateSpec::fock(10), StateSpec::coherent({3.0, 0.0}),
                             StateSpec::multi_cat_with_energy(10, 10.0), StateSpec::thermal(2.0)}) {
        for (double alpha : {0.0, 2.0}) {
            const auto dim = auto_dimension(spec, alpha);
            const auto state = build_state(spec, dim);
            EXPECT_LT(leakage(state), 1e-12) << spec.to_string();
            EXPECT_GE(dim.value(), static_cast<int>(4 * (spec.nominal_energy() + alpha * alpha)));
        }
    }
}

TEST(States, StrictLeakageIsATruncationError) {
    try {
        build_state(StateSpec::squeezed(1.5), FockDimension(10));
        FAIL() << "expected truncation";
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::truncation);
    }
    BuildOptions lenient;
    lenient.strict = false;
    const auto s = build_state(StateSpec::squeezed(1.5), FockDimension(10), lenient);
    EXPECT_GT(leakage(s), 1e-6);
}

TEST(States, TextRoundTrip) {
    for (const char *src : {"vac", "fock:n=5", "coh:beta=1.5-0.25i", "sq:r=1.25,theta=0.5", "cat:k=10,nbar=10,theta=0",
                            "cat:k=2,beta=2,theta=1.5707963267948966", "thermal:nbar=2"}) {
        const auto spec = StateSpec::parse(src);
        EXPECT_EQ(StateSpec::parse(spec.to_string()).to_string(), spec.to_string()) << src;
    }
    const auto sq = StateSpec::parse("sq:nbar=5");
    EXPECT_NEAR(sq.nominal_energy(), 5.0, 1e-12);
    EXPECT_EQ(StateSpec::parse("fock:n=5").label(), "fock_n5");
}

TEST(States, ParseErrorsReportPosition) {
    struct Case {
        const char *text;
        const char *needle;
    };
    for (const auto &c : {Case{"squid:r=1", "position 0"}, Case{"sq:r=1,phi=2", "position 7"},
                          Case{"fock:n=2.5", "position 7"}, Case{"sq:r=x", "position 5"}, Case{"fock", "missing key"},
                          Case{"fock:n=-1", "n must be"}}) {
        try {
            StateSpec::parse(c.text);
            FAIL() << "no error for " << c.text;
        } catch (const Error &e) {
            EXPECT_EQ(e.kind(), ErrorKind::parse) << c.text;
            EXPECT_NE(std::string(e.what()).find(c.needle), std::string::npos) << e.what();
        }
    }
}
