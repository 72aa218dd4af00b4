#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "spreadchan/fock.hpp"

namespace spreadchan {

struct Vacuum {};

struct FockState {
    int n = 0;
};

struct Coherent {
    cplx beta{0.0, 0.0};
};

/// S(r e^{i theta})|0>. theta = 0 squeezes x = (a + a^dagger)/sqrt(2).
struct SqueezedVacuum {
    double r = 0.0;
    double theta = 0.0;
};

/// Normalized sum of `components` coherent states |beta e^{i(2 pi k / components + theta)}>.
/// When `target_nbar` is set, |beta| was solved from it and the text form keeps nbar.
struct MultiCat {
    int components = 1;
    cplx beta{0.0, 0.0};
    double theta = 0.0;
    std::optional<double> target_nbar;
};

struct Thermal {
    double nbar = 0.0;
};

using StateKind = std::variant<Vacuum, FockState, Coherent, SqueezedVacuum, MultiCat, Thermal>;

class StateSpec {
  public:
    StateSpec() = default;
    StateSpec(StateKind kind);  // NOLINT(google-explicit-constructor)

    static StateSpec vacuum();
    static StateSpec fock(int n);
    static StateSpec coherent(cplx beta);
    static StateSpec squeezed(double r, double theta = 0.0);
    /// Squeezed vacuum with sinh^2 r = nbar.
    static StateSpec squeezed_with_energy(double nbar, double theta = 0.0);
    static StateSpec multi_cat(int components, cplx beta, double theta = 0.0);
    /// Solves |beta| by bisection so the normalized superposition has <a^dagger a> = nbar.
    static StateSpec multi_cat_with_energy(int components, double nbar, double theta = 0.0);
    static StateSpec thermal(double nbar);

    /// Parses the canonical text form, e.g. `sq:r=1.0,theta=0`, `fock:n=5`,
    /// `cat:k=2,nbar=10,theta=1.5708`, `coh:beta=1+0i`, `thermal:nbar=5`, `vac`.
    static StateSpec parse(std::string_view text);

    const StateKind &kind() const noexcept {
        return kind_;
    }
    bool is_pure() const noexcept;

    /// Closed-form <a^dagger a> in infinite dimension.
    double nominal_energy() const;

    /// Canonical text form; parse(to_string()) reproduces the spec.
    std::string to_string() const;

    /// Short label for tables, e.g. `sq(N=5)`.
    std::string label() const;

    /// Untruncated Fock populations for n = 0..count-1 (closed form).
    std::vector<double> populations(int count) const;

  private:
    StateKind kind_ = Vacuum{};
};

using ProbeState = std::variant<StateVector, DensityOperator>;

struct BuildOptions {
    /// Leakage above this is a truncation error, or only recorded when `strict` is false.
    double leakage_limit = 1e-6;
    bool strict = true;
};

/// Pure kinds produce a StateVector, thermal produces a DensityOperator.
ProbeState build_state(const StateSpec &spec, FockDimension dim, const BuildOptions &options = {});

/// Shortcut for pure kinds; throws domain error for thermal.
StateVector build_pure_state(const StateSpec &spec, FockDimension dim, const BuildOptions &options = {});

double mean_energy(const ProbeState &state);
double leakage(const ProbeState &state);

/// Truncation heuristic for a computation that displaces `spec` by up to `alpha_max`:
/// max(ceil(4(N + alpha_max^2 + 3 sqrt(N+1)) + 20), closed-form tail bound plus a
/// displacement margin).
FockDimension auto_dimension(const StateSpec &spec, double alpha_max);

/// Same for several states; returns the largest.
FockDimension auto_dimension(const std::vector<StateSpec> &specs, double alpha_max);

}  // namespace spreadchan
