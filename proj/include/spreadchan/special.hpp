#pragma once

// Special functions used by the closed-form fidelity curves and the
// quadrature densities. Everything is local so tests can check it against
// independent series oracles.

#include <vector>

namespace spreadchan {

/// Modified Bessel function of the first kind, order zero. x >= 0.
/// Thin wrapper over std::cyl_bessel_i with a domain check.
double bessel_i0(double x);

/// exp(-x) * I0(x), finite for all x >= 0.
double bessel_i0_scaled(double x);

/// Laguerre polynomial L_n(x) (std::laguerre).
double laguerre(int n, double x);

/// Normalized harmonic-oscillator eigenfunction <x|n> for x = (a + a^dagger)/sqrt(2).
double hermite_position_amplitude(int n, double x);

/// <x|0>, ..., <x|count-1> in one recurrence pass.
std::vector<double> hermite_position_amplitudes(int count, double x);

/// Same recurrence with its coefficients tabulated, for repeated evaluation.
class HermiteFunctions {
  public:
    explicit HermiteFunctions(int count);

    int count() const noexcept {
        return static_cast<int>(forward_.size());
    }
    /// Fills `out` (resized to count()) with <x|n>.
    void evaluate(double x, std::vector<double> &out) const;

  private:
    std::vector<double> forward_;   // sqrt(2 / (n + 1))
    std::vector<double> backward_;  // sqrt(n / (n + 1))
};

}  // namespace spreadchan
