#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <set>

#include "oracles.hpp"
#include "spreadchan/error.hpp"
#include "spreadchan/estimation.hpp"

using namespace spreadchan;

namespace {

class ThreadCap {
  public:
    explicit ThreadCap(const char *value) {
        if (const char *old = std::getenv("SPREADCHAN_THREADS")) {
            saved_ = old;
        }
        setenv("SPREADCHAN_THREADS", value, 1);
    }
    ~ThreadCap() {
        if (saved_.empty()) {
            unsetenv("SPREADCHAN_THREADS");
        } else {
            setenv("SPREADCHAN_THREADS", saved_.c_str(), 1);
        }
    }

  private:
    std::string saved_;
};

std::int64_t expected_zero_count(double p0, std::int64_t m) {
    return static_cast<std::int64_t>(std::llround(p0 * static_cast<double>(m)));
}

}  // namespace

TEST(CounterRngTest, StreamIsPureFunctionOfKey) {
    CounterRng a(42, 3, 7);
    CounterRng b(42, 3, 7);
    for (int i = 0; i < 10; ++i) {
        EXPECT_EQ(a.next(), b.next());
    }
    std::set<std::uint64_t> firsts;
    for (std::uint64_t trial = 0; trial < 4; ++trial) {
        for (std::uint64_t shot = 0; shot < 4; ++shot) {
            firsts.insert(CounterRng(42, trial, shot).next());
        }
    }
    firsts.insert(CounterRng(43, 0, 0).next());
    EXPECT_EQ(firsts.size(), 17u);
}

TEST(CounterRngTest, UniformMoments) {
    CounterRng rng(1, 0, 0);
    const int n = 200000;
    double s = 0.0;
    double s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        s += u;
        s2 += u * u;
    }
    EXPECT_NEAR(s / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
    EXPECT_NEAR(s2 / n, 1.0 / 3.0, 4.0 * std::sqrt(4.0 / 45.0 / n));
}

TEST(Mle, InvertsExactCountsForMonotoneCurves) {
    const auto u = PhaseDistribution::uniform();
    const std::int64_t m = 1000000;
    for (const auto &spec : {StateSpec::vacuum(), StateSpec::squeezed_with_energy(5.0)}) {
        ASSERT_TRUE(monotone_fidelity(spec));
        const double alpha = 0.25;
        const double p0 = *p0_closed(spec, alpha, u);
        const auto m0 = expected_zero_count(p0, m);
        const auto res = mle_from_counts(m0, m - m0, spec, u);
        EXPECT_NEAR(res.alpha_hat, alpha, 1e-3) << spec.to_string();
        EXPECT_FALSE(res.boundary);
        EXPECT_FALSE(res.ambiguous);
    }
}

TEST(Mle, GridPathForNonMonotoneCurve) {
    const auto spec = StateSpec::multi_cat(2, {1.0, 0.0});
    EXPECT_FALSE(monotone_fidelity(spec));
    const auto u = PhaseDistribution::uniform();
    const double alpha = 0.3;
    const std::int64_t m = 1000000;
    const auto m0 = expected_zero_count(p0_numeric(spec, alpha, u), m);
    const auto res = mle_from_counts(m0, m - m0, spec, u);
    EXPECT_NEAR(res.alpha_hat, alpha, 1e-3);
}

TEST(Mle, BoundaryCases) {
    const auto u = PhaseDistribution::uniform();
    const auto zero = mle_from_counts(100, 0, StateSpec::vacuum(), u);
    EXPECT_EQ(zero.alpha_hat, 0.0);
    EXPECT_TRUE(zero.boundary);
    const auto top = mle_from_counts(0, 100, StateSpec::vacuum(), u);
    EXPECT_TRUE(top.boundary);
    EXPECT_NEAR(top.alpha_hat, 3.0, 1e-9);
    // With dark noise p0 never drops below eps/2, so m0/M under that is out of range.
    const auto noisy = mle_from_counts(1, 999, StateSpec::vacuum(), u, 0.1);
    EXPECT_TRUE(noisy.boundary);
    EXPECT_THROW(mle_from_counts(0, 0, StateSpec::vacuum(), u), Error);
}

TEST(Mle, AmbiguousFockCountsReportCandidates) {
    // e^{-a^2}(1 - a^2)^2 = 0.2 has one root below the zero at a = 1; the rebound to
    // about 0.199 near a = 1.73 is almost as likely.
    const auto res = mle_from_counts(200, 800, StateSpec::fock(1), PhaseDistribution::uniform());
    EXPECT_TRUE(res.ambiguous);
    ASSERT_GE(res.candidates.size(), 2u);
    EXPECT_DOUBLE_EQ(res.alpha_hat, res.candidates.front());
    EXPECT_NEAR(p0_fock_closed(res.alpha_hat, 1), 0.2, 1e-6);
    EXPECT_GT(res.candidates.back(), 1.0);
}

TEST(Simulation, DeterministicAndConsistent) {
    ExperimentConfig c;
    c.probe = StateSpec::squeezed_with_energy(5.0);
    c.alpha_true = 0.1;
    c.repetitions = 5000;
    c.seed = 99;
    c.keep_phases = true;
    const auto a = simulate(c);
    const auto b = simulate(c);
    EXPECT_EQ(a.m0, b.m0);
    EXPECT_EQ(a.alpha_hat, b.alpha_hat);
    EXPECT_EQ(a.m0 + a.m1, 5000);
    EXPECT_EQ(a.phases.size(), 5000u);
    const double p0 = p0_squeezed_closed(0.1, std::asinh(std::sqrt(5.0)));
    EXPECT_NEAR(a.m0 / 5000.0, p0, 4.0 * std::sqrt(p0 * (1 - p0) / 5000.0));
    EXPECT_NEAR(a.crb_sigma, 1.0 / std::sqrt(5000.0 * self_projection_cfi(c.probe, c.phases, 0.1, 0.0)), 1e-12);
    c.trial = 1;
    EXPECT_NE(simulate(c).phases, a.phases);
}

TEST(Simulation, Validation) {
    ExperimentConfig c;
    c.repetitions = 0;
    EXPECT_THROW(simulate(c), Error);
    c.repetitions = 10;
    c.probe = StateSpec::thermal(1.0);
    EXPECT_THROW(simulate(c), Error);
}

TEST(Simulation, SweepIsIndependentOfThreadCount) {
    ExperimentConfig c;
    c.probe = StateSpec::coherent({1.0, 0.0});
    c.alpha_true = 0.3;
    c.repetitions = 200;
    c.seed = 5;
    RmseRow one;
    RmseRow many;
    {
        ThreadCap cap("1");
        one = rmse_sweep_point(c, 120);
    }
    {
        ThreadCap cap("4");
        many = rmse_sweep_point(c, 120);
    }
    EXPECT_EQ(one.squared_errors, many.squared_errors);
    EXPECT_EQ(one.rmse, many.rmse);
    EXPECT_THROW(rmse_sweep_point(c, 99), Error);
}

TEST(Simulation, SweepRowsAndCrbColumn) {
    const auto rows = rmse_sweep({StateSpec::vacuum(), StateSpec::squeezed_with_energy(1.0)}, {0.2}, {400},
                                 PhaseDistribution::uniform(), 100, 17);
    ASSERT_EQ(rows.size(), 2u);
    for (const auto &r : rows) {
        EXPECT_EQ(r.trials, 100);
        EXPECT_EQ(r.squared_errors.size(), 100u);
        const double f = self_projection_cfi(StateSpec::parse(r.label == "vac" ? "vac" : "sq:nbar=1"),
                                             PhaseDistribution::uniform(), 0.2, 0.0);
        EXPECT_NEAR(r.crb, 1.0 / std::sqrt(400.0 * f), 1e-12);
        EXPECT_NEAR(r.ratio, r.rmse / r.crb, 1e-15);
    }
}

TEST(Statistics, WelchMatchesReference) {
    const auto w = welch_test({1, 2, 3, 4, 5}, {2, 4, 6, 8, 10, 12.5});
    EXPECT_NEAR(w.t, oracle::kWelchT, 1e-12);
    EXPECT_NEAR(w.p_value, oracle::kWelchP, 1e-10);
    EXPECT_NEAR(welch_test({1, 2, 3}, {1, 2, 3}).p_value, 1.0, 1e-15);
    EXPECT_THROW(welch_test({1}, {1, 2}), Error);
}

TEST(Statistics, RandomizedRotationRecoversUniformAverage) {
    const auto spec = StateSpec::squeezed(0.8);
    const double alpha = 0.4;
    const auto est = randomized_rotation_statistics(spec, alpha, PhaseDistribution::delta(1.0), 20000, 3);
    EXPECT_EQ(est.draws, 20000);
    EXPECT_LT(std::abs(est.mean - p0_squeezed_closed(alpha, 0.8)), 4.0 * est.standard_error);
}

TEST(Statistics, OverlapFluctuations) {
    const auto fock = overlap_fluctuations(StateSpec::fock(3), {0.2, 0.6}, 64, 1);
    for (const auto &row : fock) {
        EXPECT_LT(row.rms, 1e-12);
        EXPECT_NEAR(row.mean, std::sqrt(p0_fock_closed(row.alpha, 3)), 1e-12);
    }
    const auto sq = overlap_fluctuations(StateSpec::squeezed_with_energy(10.0), {0.5}, 64, 1);
    EXPECT_GT(sq[0].rms, 0.1);
    EXPECT_EQ(overlap_fluctuations(StateSpec::squeezed(1.0), {0.3}, 64, 9)[0].rms,
              overlap_fluctuations(StateSpec::squeezed(1.0), {0.3}, 64, 9)[0].rms);
}

TEST(Statistics, EnergyScalingApproachesLimit) {
    const std::vector<double> grid{0.1, 0.5, 1.0, 2.0};
    const double d5 = energy_scaling_deviation(5.0, grid);
    const double d50 = energy_scaling_deviation(50.0, grid);
    EXPECT_LT(d50, d5);
    EXPECT_LT(d50, 1e-2);
}
