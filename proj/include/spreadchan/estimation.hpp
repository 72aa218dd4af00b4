#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spreadchan/channel.hpp"
#include "spreadchan/measurement.hpp"
#include "spreadchan/states.hpp"

namespace spreadchan {

/// Counter-based generator: the stream is a pure function of (seed, trial, shot), so
/// any split of the work across threads draws the same numbers.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t trial, std::uint64_t shot) noexcept;

    std::uint64_t next() noexcept;
    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept;

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

struct ExperimentConfig {
    StateSpec probe;
    PhaseDistribution phases;
    double alpha_true = 0.0;
    std::int64_t repetitions = 1;
    std::uint64_t seed = 0;
    double dark_noise = 0.0;
    /// Adds a uniformly random rotation to each shot's phase before the channel.
    bool randomize_rotation = false;
    /// Selects an independent stream for repeated experiments with one seed.
    std::uint64_t trial = 0;
    bool keep_phases = false;
    double alpha_max = 3.0;
};

struct MleOptions {
    double alpha_max = 3.0;
    /// Local maxima within this log-likelihood of the best one count as competing.
    double ambiguity_tolerance = 0.5;
    int grid_points = 3001;
};

struct MleResult {
    double alpha_hat = 0.0;
    /// m0/M was outside the range the model reaches on [0, alpha_max].
    bool boundary = false;
    /// Several separated alphas explain the counts about equally well.
    bool ambiguous = false;
    /// Every near-optimal local maximum, ascending.
    std::vector<double> candidates;
};

/// p0 is monotone in alpha for vacuum, coherent and squeezed probes.
bool monotone_fidelity(const StateSpec &probe);

/// Maximum-likelihood alpha from binary counts under p0 -> (1 - eps) p0 + eps / 2.
/// Monotone curves are inverted by bisection; others use a likelihood grid plus
/// golden-section refinement and report the smallest near-optimal alpha.
MleResult mle_from_counts(std::int64_t m0, std::int64_t m1, const StateSpec &probe, const PhaseDistribution &phases,
                          double eps = 0.0, const MleOptions &options = {});

/// Same with a precomputed p0 curve.
MleResult mle_from_counts(std::int64_t m0, std::int64_t m1, const std::function<double(double)> &p0, bool monotone,
                          double eps = 0.0, const MleOptions &options = {});

struct ExperimentResult {
    std::int64_t m0 = 0;
    std::int64_t m1 = 0;
    double alpha_hat = 0.0;
    /// 1 / sqrt(M F_C(alpha_true)); the right limit is used at alpha_true = 0.
    double crb_sigma = 0.0;
    bool boundary = false;
    bool ambiguous = false;
    std::vector<double> phases;
};

/// Self-projection CFI under dark noise at alpha (right limit at 0).
double self_projection_cfi(const StateSpec &probe, const PhaseDistribution &phases, double alpha, double eps);

ExperimentResult simulate(const ExperimentConfig &config);

struct RmseRow {
    std::string label;
    double alpha = 0.0;
    std::int64_t repetitions = 0;
    int trials = 0;
    double rmse = 0.0;
    double crb = 0.0;
    double ratio = 0.0;
    double mean_estimate = 0.0;
    int ambiguous = 0;
    int boundary = 0;
    std::vector<double> squared_errors;
};

/// T independent experiments (trial index 0..T-1) of one configuration. T >= 100.
RmseRow rmse_sweep_point(const ExperimentConfig &config, int trials);

/// Cartesian sweep over probes x alphas x repetitions; each probe uses `seed + probe index`.
std::vector<RmseRow> rmse_sweep(const std::vector<StateSpec> &probes, const std::vector<double> &alphas,
                                const std::vector<std::int64_t> &repetitions, const PhaseDistribution &phases,
                                int trials, std::uint64_t seed, double eps = 0.0);

struct WelchTest {
    double t = 0.0;
    double dof = 0.0;
    double p_value = 1.0;
};

/// Two-sided Welch test for equal means.
WelchTest welch_test(const std::vector<double> &a, const std::vector<double> &b);

struct MonteCarloEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
    std::int64_t draws = 0;
};

/// Average of |<psi|psi_alpha^{theta + phi}>|^2 with theta uniform and phi ~ p.
MonteCarloEstimate randomized_rotation_statistics(const StateSpec &probe, double alpha,
                                                  const PhaseDistribution &phases, std::int64_t draws,
                                                  std::uint64_t seed);

struct OverlapRow {
    double alpha = 0.0;
    double mean = 0.0;
    /// Root-mean-square deviation of |overlap| from its sample mean (divides by M).
    double rms = 0.0;
};

/// M uniform phases per alpha (trial index = alpha index).
std::vector<OverlapRow> overlap_fluctuations(const StateSpec &probe, const std::vector<double> &alphas, int samples,
                                             std::uint64_t seed);

/// Largest |p0_squeezed(alpha) - e^{-2u} I0(2u)| over u = alpha^2 N in `u_grid`, where the
/// limit is the large-N form of the squeezed fidelity as a function of alpha^2 N.
double energy_scaling_deviation(double mean_photons, const std::vector<double> &u_grid);

}  // namespace spreadchan
