#pragma once

#include <complex>
#include <span>
#include <utility>

#include <Eigen/Dense>

namespace spreadchan {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Number of retained Fock levels, indices 0..value()-1.
class FockDimension {
  public:
    explicit FockDimension(int dim);

    int value() const noexcept {
        return dim_;
    }
    friend bool operator==(FockDimension a, FockDimension b) = default;

  private:
    int dim_;
};

/// Population in the top two retained levels.
double tail_leakage(std::span<const double> populations);

/// Normalized pure state in a truncated Fock space.
class StateVector {
  public:
    /// Normalizes `amplitudes`. Throws numeric error on zero or non-finite input.
    static StateVector normalized(CVec amplitudes);

    /// Takes `amplitudes` as-is; they must already have unit norm within 1e-10.
    explicit StateVector(CVec amplitudes);

    const CVec &amplitudes() const noexcept {
        return amplitudes_;
    }
    FockDimension dimension() const {
        return FockDimension(static_cast<int>(amplitudes_.size()));
    }
    double leakage() const noexcept {
        return leakage_;
    }
    cplx operator[](int n) const {
        return amplitudes_[n];
    }

  private:
    CVec amplitudes_;
    double leakage_;
};

/// Trace-one, Hermitian, positive semidefinite matrix.
class DensityOperator {
  public:
    /// Validates trace, Hermiticity, and the minimum eigenvalue (>= -1e-10).
    explicit DensityOperator(CMat matrix);

    static DensityOperator from_pure(const StateVector &psi);

    const CMat &matrix() const noexcept {
        return matrix_;
    }
    FockDimension dimension() const {
        return FockDimension(static_cast<int>(matrix_.rows()));
    }
    double leakage() const noexcept {
        return leakage_;
    }
    double min_eigenvalue() const noexcept {
        return min_eigenvalue_;
    }

  private:
    CMat matrix_;
    double leakage_;
    double min_eigenvalue_;
};

/// Plain dim x dim matrix. Consumers assert unitarity or Hermiticity.
class Operator {
  public:
    explicit Operator(CMat matrix);

    const CMat &matrix() const noexcept {
        return matrix_;
    }
    FockDimension dimension() const {
        return FockDimension(static_cast<int>(matrix_.rows()));
    }
    Operator adjoint() const {
        return Operator(matrix_.adjoint());
    }
    bool is_hermitian(double tol = 1e-12) const;
    bool is_anti_hermitian(double tol = 1e-12) const;

    friend Operator operator*(const Operator &a, const Operator &b);
    friend Operator operator+(const Operator &a, const Operator &b);
    friend Operator operator-(const Operator &a, const Operator &b);
    friend Operator operator*(cplx s, const Operator &a);

  private:
    CMat matrix_;
};

struct Ladder {
    Operator annihilation;
    Operator creation;
};

/// a with a[n-1, n] = sqrt(n); creation is its adjoint.
Ladder make_ladder(FockDimension dim);

Operator identity(FockDimension dim);
Operator number_operator(FockDimension dim);

/// Matrix exponential. Anti-Hermitian input goes through a Hermitian
/// eigendecomposition (exactly unitary); anything else uses Pade(13)
/// scaling and squaring.
Operator mat_exp(const Operator &op);

/// <psi|chi>
cplx overlap(const StateVector &psi, const StateVector &chi);
double fidelity(const StateVector &psi, const StateVector &chi);

/// <a^dagger a> for either representation.
double mean_number(const StateVector &psi);
double mean_number(const DensityOperator &rho);

/// Largest |M_ij - I_ij| over the leading `block` x `block` corner.
double identity_deviation(const CMat &m, int block);

}  // namespace spreadchan
