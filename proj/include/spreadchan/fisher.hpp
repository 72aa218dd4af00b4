#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spreadchan/channel.hpp"
#include "spreadchan/fock.hpp"
#include "spreadchan/measurement.hpp"
#include "spreadchan/states.hpp"

namespace spreadchan {

enum class FisherMethod { pure_variance, sld_eigen, discrete_cfi, quadrature_cfi };

const char *to_string(FisherMethod method);

struct FisherReport {
    double value = 0.0;
    FisherMethod method = FisherMethod::pure_variance;
    double sld_spectrum_cutoff = 0.0;
    /// Finite-difference step; 0 when the derivative is analytic.
    double derivative_step = 0.0;
    double leakage = 0.0;
    /// Pairs or outcomes dropped by the cutoff / probability floor.
    int excluded_terms = 0;
    /// The support of the family changes at this alpha (e.g. the alpha = 0 point of a
    /// family whose rank jumps), so the value is not the right limit.
    bool degenerate = false;
    /// POVM description for classical reports.
    std::string povm;
};

/// 4 Var_psi(G). G must be Hermitian.
FisherReport qfi_pure(const StateVector &psi, const Operator &generator);

/// Phase average of the pure-state QFI of D(alpha, phi)|psi>.
FisherReport avg_qfi(const StateVector &psi, double alpha, const PhaseDistribution &phases, int nodes = 0);

using DensityFamily = std::function<DensityOperator(double)>;

struct DerivativeOptions {
    /// Unset picks max(1e-6, 1e-3 alpha).
    std::optional<double> step;
    /// Combine steps h and h/2 to cancel the leading error term.
    bool richardson = false;
};

double default_step(double alpha);

struct SldOptions : DerivativeOptions {
    double cutoff = 1e-12;
};

/// 2 sum_{l_j + l_k > cutoff} |<j|d rho|k>|^2 / (l_j + l_k). Central differences, or a
/// forward difference when alpha - h would leave the domain.
FisherReport qfi_mixed(const DensityFamily &family, double alpha, const SldOptions &options = {});

using ProbabilityFamily = std::function<std::vector<double>(double)>;

struct CfiOptions : DerivativeOptions {
    double probability_floor = 1e-14;
    std::string povm;
};

/// sum_i (d p_i)^2 / p_i; outcomes below the floor are dropped and counted.
FisherReport cfi_discrete(const ProbabilityFamily &probabilities, double alpha, const CfiOptions &options = {});

/// Binary CFI after p0 -> (1 - eps) p0 + eps / 2.
FisherReport noisy_cfi(const std::function<double(double)> &p0, double eps, double alpha,
                       const DerivativeOptions &options = {});

/// Self-projection CFI for a probe under p(phi), closed-form curve where available.
FisherReport cfi_self_projection(const StateSpec &probe, const PhaseDistribution &phases, double alpha,
                                 double eps = 0.0, const DerivativeOptions &options = {});

struct QuadratureCfiOptions {
    /// Unset uses default_quadrature_grid(probe, alpha).
    std::optional<std::vector<double>> x_grid;
    double angle = 0.0;
    /// Recompute on a grid with half the spacing and require relative agreement.
    bool verify_grid = true;
    double grid_tolerance = 1e-6;
};

/// Homodyne CFI integral of (d p(x|alpha))^2 / p(x|alpha) with the analytic alpha-derivative.
FisherReport cfi_quadrature(const StateSpec &probe, double alpha, const PhaseDistribution &phases,
                            const QuadratureCfiOptions &options = {});

/// 8 (N + 1/2).
double qfi_bound(double mean_photons);

/// Least-squares C in |F(alpha)/F_plus - 1| = C alpha.
double saturation_constant(const std::vector<double> &alphas, const std::vector<double> &fisher, double f_plus);

}  // namespace spreadchan
