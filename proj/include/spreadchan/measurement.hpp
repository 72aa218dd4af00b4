#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "spreadchan/channel.hpp"
#include "spreadchan/fock.hpp"
#include "spreadchan/states.hpp"

namespace spreadchan {

/// Binary POVM {|psi><psi|, 1 - |psi><psi|}.
struct SelfProjection {
    StateSpec probe;
};

/// Continuous POVM {|x_angle><x_angle|} sampled on `x_grid`.
struct QuadratureMeasurement {
    double angle = 0.0;
    std::vector<double> x_grid;
};

class MeasurementModel {
  public:
    using Kind = std::variant<SelfProjection, QuadratureMeasurement>;

    /// dark_noise must lie in [0, 1].
    explicit MeasurementModel(Kind kind, double dark_noise = 0.0);

    static MeasurementModel self_projection(StateSpec probe, double dark_noise = 0.0);
    static MeasurementModel quadrature(double angle, std::vector<double> x_grid);

    const Kind &kind() const noexcept {
        return kind_;
    }
    double dark_noise() const noexcept {
        return dark_noise_;
    }
    std::string describe() const;

  private:
    Kind kind_;
    double dark_noise_ = 0.0;
};

struct OutcomePair {
    double p0 = 1.0;
    double p1 = 0.0;
};

/// p0 -> (1 - eps) p0 + eps / 2.
OutcomePair apply_dark_noise(double p0, double eps);

/// Uniform-phase fidelity of a squeezed vacuum, e^{-a^2 cosh 2r} I0(a^2 sinh 2r).
double p0_squeezed_closed(double alpha, double r);

/// Phase-independent Fock fidelity e^{-a^2} L_n(a^2)^2.
double p0_fock_closed(double alpha, int n);

/// Vacuum or coherent probe, any phase: e^{-a^2}.
double p0_coherent(double alpha);

/// |<psi|D(alpha, phi)|psi>|^2 in closed form for vacuum, coherent, Fock and squeezed probes.
std::optional<double> fixed_phase_fidelity_closed(const StateSpec &probe, double alpha, double phi);

/// Phase-averaged fidelity in closed form where one exists (phase-insensitive probes,
/// or squeezed vacuum under uniform phases).
std::optional<double> p0_closed(const StateSpec &probe, double alpha, const PhaseDistribution &phases);

struct P0Evaluation {
    double value = 1.0;
    int dim = 0;
    /// Phase-averaged population of the top two levels after displacement.
    double leakage = 0.0;
};

/// Fidelity engine in a fixed truncated space. With X = a + a^dagger = W diag(l) W^T the
/// overlap coefficients are c_k(alpha) = sum_j B_kj e^{-i alpha l_j}; B is built once, so
/// each alpha costs O(dim^2).
class SelfProjectionCurve {
  public:
    SelfProjectionCurve(const StateSpec &probe, PhaseDistribution phases, FockDimension dim,
                        double leakage_limit = 1e-6);

    P0Evaluation evaluate(double alpha) const;
    double operator()(double alpha) const {
        return evaluate(alpha).value;
    }
    /// <psi|D(alpha, phi)|psi>.
    cplx overlap(double alpha, double phi) const;
    /// c_k of <psi|D(alpha, phi)|psi> = sum_k c_k e^{i k phi}; entry k + dim - 1 holds c_k.
    CVec coefficients(double alpha) const;

    const StateVector &probe_state() const noexcept {
        return psi_;
    }
    FockDimension dimension() const {
        return psi_.dimension();
    }

  private:
    PhaseDistribution phases_;
    StateVector psi_;
    Displacer displacer_;
    CMat mixing_;  // B
    double leakage_limit_;
};

struct NumericOptions {
    /// Unset selects auto_dimension(probe, alpha).
    std::optional<int> dim;
    double leakage_limit = 1e-6;
};

/// p0 = integral of p(phi) |<psi|psi_alpha^phi>|^2 through the truncated Fock space.
P0Evaluation p0_numeric_report(const StateSpec &probe, double alpha, const PhaseDistribution &phases,
                               const NumericOptions &options = {});
double p0_numeric(const StateSpec &probe, double alpha, const PhaseDistribution &phases,
                  const NumericOptions &options = {});

/// phi -> |<psi|D(alpha, phi)|psi>|^2 at one alpha. Closed forms where available,
/// otherwise the truncated-space overlap coefficients.
class FixedPhaseFidelity {
  public:
    FixedPhaseFidelity(const StateSpec &probe, double alpha, std::optional<int> dim = std::nullopt);

    double operator()(double phi) const;
    /// |<psi|D(alpha, phi)|psi>|.
    double overlap_magnitude(double phi) const;
    bool closed_form() const noexcept {
        return !coefficients_.has_value();
    }

  private:
    StateSpec probe_;
    double alpha_;
    std::optional<CVec> coefficients_;
};

/// alpha -> p0 using the closed form when available, the numeric engine otherwise
/// (sized once for alpha up to `alpha_max`).
std::function<double(double)> p0_curve(const StateSpec &probe, const PhaseDistribution &phases,
                                       double alpha_max = 3.0);

/// p(x|alpha) and its alpha-derivative on a grid, for the quadrature at `angle`.
struct QuadratureDensity {
    std::vector<double> x;
    std::vector<double> p;
    std::vector<double> dp_dalpha;
    /// Trapezoid integral of p over the grid.
    double normalization = 0.0;
};

/// Grid half-width 8 max(1, e^r) + sqrt(2) alpha for a squeezed probe, width from the
/// probe energy otherwise; `points` uniform samples.
std::vector<double> default_quadrature_grid(const StateSpec &probe, double alpha, int points = 4001);

/// Builds the density from Hermite functions of the probe; the phase average uses the
/// trapezoid rule with convergence checked by node doubling. Normalization off by
/// more than 1e-6 is a quadrature error.
QuadratureDensity quadrature_density(const StateSpec &probe, double alpha, const PhaseDistribution &phases,
                                     const std::vector<double> &x_grid, double angle = 0.0);

/// Two-column CSV `x,p` with header.
std::string to_csv(const QuadratureDensity &density);

/// Moments of A = x^2 on the phase-averaged displaced squeezed vacuum (theta = 0, uniform phases).
struct QuadratureMoments {
    double mean_a = 0.0;
    /// e^{-2r}(2 a^2 + e^{-2r}/2): the spread of A at fixed phase, averaged over phase.
    double var_a_within_phase = 0.0;
    /// Adds the phase-to-phase spread a^4/2 of the conditional mean.
    double var_a_total = 0.0;
    /// Error propagation with the within-phase variance, e^{-2r}(4a^2 + e^{-2r})/(8a^2).
    /// Unset at alpha = 0.
    std::optional<double> var_estimate;
    /// Error propagation with the total variance. Unset at alpha = 0.
    std::optional<double> var_estimate_total;
};

QuadratureMoments quadrature_moments_closed(double r, double alpha);

/// Inverse-CDF sampler over a tabulated density (piecewise-constant within cells).
class GridSampler {
  public:
    explicit GridSampler(const QuadratureDensity &density);
    double operator()(double uniform01) const;

  private:
    std::vector<double> x_;
    std::vector<double> cdf_;
};

}  // namespace spreadchan
