#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "spreadchan/fock.hpp"
#include "spreadchan/states.hpp"

namespace spreadchan {

struct PhaseAtom {
    double phi = 0.0;
    double weight = 0.0;
};

struct UniformPhase {};

struct VonMisesPhase {
    double mu = 0.0;
    double kappa = 0.0;
};

struct DiscretePhase {
    std::vector<PhaseAtom> atoms;
};

/// p(phi) for the direction of each channel use.
class PhaseDistribution {
  public:
    using Kind = std::variant<UniformPhase, VonMisesPhase, DiscretePhase>;

    PhaseDistribution() = default;
    explicit PhaseDistribution(Kind kind);

    static PhaseDistribution uniform();
    static PhaseDistribution von_mises(double mu, double kappa);
    /// Weights must be positive and sum to 1 within 1e-12.
    static PhaseDistribution discrete(std::vector<PhaseAtom> atoms);
    static PhaseDistribution delta(double phi);

    /// `uniform`, `vonmises:mu=0,kappa=5`, `discrete:0@0.5,3.14159@0.5`.
    static PhaseDistribution parse(std::string_view text);
    std::string to_string() const;

    const Kind &kind() const noexcept {
        return kind_;
    }
    bool is_uniform() const noexcept;
    bool is_continuous() const noexcept;

    /// Nodes and weights summing to one. Continuous kinds use the periodic trapezoid
    /// rule with `nodes` points; discrete kinds return their atoms.
    std::vector<PhaseAtom> quadrature(int nodes) const;

    /// Draws phi using uniforms in [0,1) from `next_uniform`.
    double sample(const std::function<double()> &next_uniform) const;

  private:
    Kind kind_ = UniformPhase{};
};

int default_phase_nodes(FockDimension dim);

struct ChannelSpec {
    double alpha = 0.0;
    PhaseDistribution phases;
    /// 0 selects max(64, 4 dim). Must be >= 8 otherwise.
    int quadrature_nodes = 0;
    /// Recompute with doubled nodes and require agreement within 1e-10.
    bool verify_convergence = true;
};

class Displacer;

/// D(alpha, phi) for one alpha, reused across phases.
class FixedAlphaDisplacement {
  public:
    double alpha() const noexcept {
        return alpha_;
    }
    /// D(alpha, 0); real in the Fock basis.
    const CMat &zero_phase() const noexcept {
        return zero_phase_;
    }
    CMat matrix(double phi) const;
    CVec apply(double phi, const CVec &v) const;

    /// <psi|D(alpha, phi)|psi> = sum_k c_k e^{i k phi}; entry k + dim - 1 holds c_k.
    CVec overlap_coefficients(const CVec &psi) const;

  private:
    friend class Displacer;
    FixedAlphaDisplacement(double alpha, CMat zero_phase) : alpha_(alpha), zero_phase_(std::move(zero_phase)) {}

    double alpha_;
    CMat zero_phase_;
};

/// Eigensystem of the truncated generator a + a^dagger, reused to exponentiate
/// alpha (e^{i phi} a^dagger - e^{-i phi} a) for any alpha and phi.
class Displacer {
  public:
    explicit Displacer(FockDimension dim);

    FockDimension dimension() const {
        return FockDimension(static_cast<int>(eigenvalues_.size()));
    }
    FixedAlphaDisplacement at(double alpha) const;
    Operator operator()(double alpha, double phi) const;

    /// Spectrum and orthonormal eigenvectors of a + a^dagger.
    const RVec &eigenvalues() const noexcept {
        return eigenvalues_;
    }
    const RMat &eigenvectors() const noexcept {
        return eigenvectors_;
    }

  private:
    RVec eigenvalues_;
    RMat eigenvectors_;
};

/// e^{alpha (e^{i phi} a^dagger - e^{-i phi} a)} through mat_exp. alpha >= 0.
Operator displacement(double alpha, double phi, FockDimension dim);

/// G(phi) = -i (e^{i phi} a^dagger - e^{-i phi} a).
Operator displacement_generator(double phi, FockDimension dim);

/// Lambda_alpha(rho) = sum over phase nodes of w D rho D^dagger.
DensityOperator apply_channel(const ProbeState &state, const ChannelSpec &spec);
DensityOperator apply_channel(const ProbeState &state, const ChannelSpec &spec, const Displacer &displacer);

void require_nonnegative_alpha(double alpha, const char *where);

}  // namespace spreadchan
