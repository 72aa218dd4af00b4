#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spreadchan/fock.hpp"
#include "spreadchan/states.hpp"

namespace spreadchan {

struct GridSpec {
    /// Square window [-h, h]^2; unset sizes it from the state (see auto_half_width).
    std::optional<double> half_width;
    int resolution = 201;
};

struct PhaseSpaceGrid {
    std::vector<double> x;
    std::vector<double> p;
    /// values(i, j) = W(x_i, p_j).
    RMat values;
    double max_imaginary_residue = 0.0;
    int dim = 0;
    double leakage = 0.0;
    std::vector<std::string> warnings;

    /// Trapezoid integral over the window.
    double integral() const;
    double max_abs() const;
};

/// max(2 sqrt(2N + 1) + 2, |<x,p>| + 4.5 sigma_max) for a probe with mean photon number N.
double auto_half_width(const StateSpec &spec);

/// Exact <m|D(rho)|n> for real rho >= 0 and m, n < dim (not the truncated exponential),
/// from the associated Laguerre recurrence run along each diagonal.
RMat displacement_elements(double rho, int dim);

/// W(x, p) = (1/pi) tr(rho D(2 beta) P), beta = (x + i p)/sqrt(2), P = (-1)^{a^dagger a},
/// normalized so the integral over dx dp is one. `grid.half_width` must be set.
PhaseSpaceGrid wigner_grid(const ProbeState &state, const GridSpec &grid);
PhaseSpaceGrid wigner_grid(const StateSpec &spec, const GridSpec &grid = {});

/// Single point, same convention.
double wigner_at(const ProbeState &state, double x, double p);

/// Three-column CSV `x,p,W` with header.
std::string to_csv(const PhaseSpaceGrid &grid);

}  // namespace spreadchan
