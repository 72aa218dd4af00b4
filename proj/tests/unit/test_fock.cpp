#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spreadchan/error.hpp"
#include "spreadchan/fock.hpp"

using namespace spreadchan;

namespace {

CMat random_matrix(int dim, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> g;
    CMat m(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            m(i, j) = cplx(g(gen), g(gen));
        }
    }
    return m;
}

ErrorKind kind_of(const std::function<void()> &f) {
    try {
        f();
    } catch (const Error &e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorKind::domain;
}

}  // namespace

TEST(Fock, DimensionMustBePositive) {
    EXPECT_EQ(kind_of([] { FockDimension(0); }), ErrorKind::invalid_dimension);
    EXPECT_EQ(FockDimension(7).value(), 7);
}

TEST(Fock, LadderMatchesDefinition) {
    const auto lad = make_ladder(FockDimension(12));
    EXPECT_LT((lad.annihilation.matrix() - oracle::lowering(12)).norm(), 1e-15);
    EXPECT_LT((lad.creation.matrix() - oracle::lowering(12).adjoint()).norm(), 1e-15);
    const CMat comm = lad.annihilation.matrix() * lad.creation.matrix() - lad.creation.matrix() * lad.annihilation.matrix();
    // [a, a^dagger] = 1 except for the truncation corner.
    EXPECT_LT(identity_deviation(comm, 11), 1e-14);
    EXPECT_NEAR(comm(11, 11).real(), -11.0, 1e-14);
}

TEST(Fock, NumberOperatorIsDiagonal) {
    const auto n = number_operator(FockDimension(6)).matrix();
    for (int i = 0; i < 6; ++i) {
        EXPECT_EQ(n(i, i), cplx(i, 0));
    }
    EXPECT_NEAR((n - CMat(n.diagonal().asDiagonal())).norm(), 0.0, 0.0);
}

TEST(Fock, MatExpAntiHermitianMatchesTaylorAndIsUnitary) {
    const CMat m = random_matrix(20, 1);
    const CMat ah = 0.3 * (m - m.adjoint());
    const CMat u = mat_exp(Operator(ah)).matrix();
    EXPECT_LT((u - oracle::taylor_exp(ah)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT(identity_deviation(u * u.adjoint(), 20), 1e-13);
}

TEST(Fock, MatExpGeneralMatchesTaylor) {
    const CMat m = 0.4 * random_matrix(15, 2);
    const CMat e = mat_exp(Operator(m)).matrix();
    const CMat ref = oracle::taylor_exp(m);
    EXPECT_LT((e - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Fock, MatExpOfZeroIsIdentity) {
    EXPECT_LT(identity_deviation(mat_exp(Operator(CMat::Zero(5, 5))).matrix(), 5), 1e-15);
}

TEST(Fock, StateVectorNormalizationRules) {
    CVec v(3);
    v << 3.0, 4.0, 0.0;
    const auto s = StateVector::normalized(v);
    EXPECT_NEAR(s.amplitudes().norm(), 1.0, 1e-15);
    EXPECT_EQ(kind_of([&] { StateVector bad(v); }), ErrorKind::numeric);
    EXPECT_EQ(kind_of([] { StateVector::normalized(CVec::Zero(3)); }), ErrorKind::numeric);
    CVec nan = CVec::Zero(2);
    nan[0] = std::nan("");
    EXPECT_EQ(kind_of([&] { StateVector::normalized(nan); }), ErrorKind::numeric);
}

TEST(Fock, LeakageIsTopTwoPopulation) {
    CVec v(4);
    v << std::sqrt(0.7), std::sqrt(0.2), std::sqrt(0.06), std::sqrt(0.04);
    EXPECT_NEAR(StateVector(v).leakage(), 0.1, 1e-15);
    const std::vector<double> pops{0.5, 0.3, 0.15, 0.05};
    EXPECT_NEAR(tail_leakage(pops), 0.2, 1e-15);
}

TEST(Fock, DensityOperatorValidation) {
    CMat good = CMat::Zero(2, 2);
    good(0, 0) = 0.25;
    good(1, 1) = 0.75;
    EXPECT_NO_THROW(DensityOperator{good});
    CMat trace = good * 2.0;
    EXPECT_EQ(kind_of([&] { DensityOperator{trace}; }), ErrorKind::numeric);
    CMat herm = good;
    herm(0, 1) = 0.1;
    EXPECT_EQ(kind_of([&] { DensityOperator{herm}; }), ErrorKind::numeric);
    CMat negative = CMat::Zero(2, 2);
    negative(0, 0) = 1.5;
    negative(1, 1) = -0.5;
    EXPECT_EQ(kind_of([&] { DensityOperator{negative}; }), ErrorKind::numeric);
    CMat rect = CMat::Zero(2, 3);
    EXPECT_EQ(kind_of([&] { DensityOperator{rect}; }), ErrorKind::shape);
}

TEST(Fock, OverlapFidelityAndMeanNumber) {
    const CVec a = oracle::coherent_ket(cplx(0.8, -0.3), 60);
    const CVec b = oracle::coherent_ket(cplx(-0.2, 0.5), 60);
    const StateVector sa = StateVector::normalized(a);
    const StateVector sb = StateVector::normalized(b);
    // |<a|b>|^2 = e^{-|a-b|^2}
    EXPECT_NEAR(fidelity(sa, sb), std::exp(-std::norm(cplx(1.0, -0.8))), 1e-13);
    EXPECT_NEAR(mean_number(sa), 0.73, 1e-12);
    EXPECT_NEAR(mean_number(DensityOperator::from_pure(sa)), 0.73, 1e-12);
}

TEST(Fock, OperatorAlgebra) {
    const auto lad = make_ladder(FockDimension(4));
    const Operator x = lad.annihilation + lad.creation;
    EXPECT_TRUE(x.is_hermitian());
    const Operator p = cplx(0, 1) * (lad.creation - lad.annihilation);
    EXPECT_TRUE(p.is_hermitian());
    EXPECT_TRUE((lad.creation - lad.annihilation).is_anti_hermitian());
    EXPECT_FALSE(lad.annihilation.is_hermitian());
    EXPECT_LT(((lad.creation * lad.annihilation).matrix() - number_operator(FockDimension(4)).matrix()).norm(), 1e-14);
}
