#pragma once
// Independent reference computations for the unit and acceptance tests. Each one
// takes a different route from the library: plain series in long double, Taylor
// exponentials, explicit ket sums, or direct quadrature.

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

inline constexpr long double kPiL = 3.141592653589793238462643383279502884L;

/// I0(x) = sum_k (x/2)^{2k} / (k!)^2.
inline long double bessel_i0_series(long double x) {
    const long double q = x * x / 4.0L;
    long double term = 1.0L;
    long double sum = 1.0L;
    for (int k = 1; k < 100000; ++k) {
        term *= q / (static_cast<long double>(k) * k);
        sum += term;
        if (term < sum * 1e-21L) {
            break;
        }
    }
    return sum;
}

/// L_n(x) = sum_k (-1)^k C(n, k) x^k / k!.
inline long double laguerre_sum(int n, long double x) {
    long double sum = 0.0L;
    long double binom = 1.0L;
    long double power = 1.0L;
    long double fact = 1.0L;
    for (int k = 0; k <= n; ++k) {
        if (k > 0) {
            binom *= static_cast<long double>(n - k + 1) / k;
            power *= x;
            fact *= k;
        }
        sum += (k % 2 ? -1.0L : 1.0L) * binom * power / fact;
    }
    return sum;
}

/// <x|n> from the explicit Hermite polynomial sum. Reliable for n <= 20.
inline long double hermite_function(int n, long double x) {
    long double h = 0.0L;
    long double nfact = std::tgamma(static_cast<long double>(n) + 1.0L);
    for (int m = 0; 2 * m <= n; ++m) {
        const long double denom = std::tgamma(m + 1.0L) * std::tgamma(n - 2.0L * m + 1.0L);
        h += (m % 2 ? -1.0L : 1.0L) * std::pow(2.0L * x, n - 2 * m) / denom;
    }
    h *= nfact;
    const long double norm = std::sqrt(std::pow(2.0L, n) * nfact * std::sqrt(kPiL));
    return h * std::exp(-x * x / 2.0L) / norm;
}

/// Taylor series exponential with scaling and squaring.
inline CMat taylor_exp(const CMat &m) {
    const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = 0;
    while (norm / std::pow(2.0, squarings) > 0.25) {
        ++squarings;
    }
    const CMat a = m / std::pow(2.0, squarings);
    CMat term = CMat::Identity(m.rows(), m.cols());
    CMat sum = term;
    for (int k = 1; k < 40; ++k) {
        term = term * a / static_cast<double>(k);
        sum += term;
    }
    for (int s = 0; s < squarings; ++s) {
        sum = sum * sum;
    }
    return sum;
}

/// Annihilation operator with a[n-1, n] = sqrt(n).
inline CMat lowering(int dim) {
    CMat a = CMat::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) {
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    return a;
}

/// |beta> amplitudes by the ratio c_n = c_{n-1} beta / sqrt(n).
inline CVec coherent_ket(cplx beta, int dim) {
    CVec v(dim);
    std::complex<long double> c = std::exp(-std::norm(std::complex<long double>(beta.real(), beta.imag())) / 2.0L);
    const std::complex<long double> b(beta.real(), beta.imag());
    for (int n = 0; n < dim; ++n) {
        if (n > 0) {
            c *= b / std::sqrt(static_cast<long double>(n));
        }
        v[n] = cplx(static_cast<double>(c.real()), static_cast<double>(c.imag()));
    }
    return v;
}

/// S(r e^{i theta})|0>: amplitude of |2m> is (-e^{i theta} tanh r)^m sqrt((2m)!) / (2^m m! sqrt(cosh r)).
inline CVec squeezed_ket(double r, double theta, int dim) {
    CVec v = CVec::Zero(dim);
    const long double t = std::tanh(static_cast<long double>(r));
    for (int m = 0; 2 * m < dim; ++m) {
        const long double logmag = m * std::log(t == 0.0L ? 1.0L : t) + 0.5L * std::lgamma(2.0L * m + 1.0L) -
                                   m * std::log(2.0L) - std::lgamma(m + 1.0L) -
                                   0.5L * std::log(std::cosh(static_cast<long double>(r)));
        const double mag = (t == 0.0L && m > 0) ? 0.0 : static_cast<double>(std::exp(logmag));
        v[2 * m] = std::polar(mag, m * (theta + static_cast<double>(kPiL)));
    }
    return v;
}

/// Normalized sum of k coherent kets at phases 2 pi j / k + theta.
inline CVec multi_cat_ket(int k, double beta_mag, double theta, int dim) {
    CVec v = CVec::Zero(dim);
    for (int j = 0; j < k; ++j) {
        v += coherent_ket(std::polar(beta_mag, 2.0 * static_cast<double>(kPiL) * j / k + theta), dim);
    }
    return v / v.norm();
}

/// Phase average of f over [0, 2 pi) by the midpoint rule.
inline double phase_average(const std::function<double(double)> &f, int nodes) {
    long double sum = 0.0L;
    for (int j = 0; j < nodes; ++j) {
        sum += f(2.0 * static_cast<double>(kPiL) * (j + 0.5) / nodes);
    }
    return static_cast<double>(sum / nodes);
}

/// Squeezed-vacuum fidelity at fixed phase, from the Gaussian overlap.
inline double squeezed_fixed_phase(double alpha, double r, double phi) {
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    return std::exp(-alpha * alpha * (c * c * std::exp(2.0 * r) + s * s * std::exp(-2.0 * r)));
}

/// Bisection helper on [lo, hi] for an increasing function.
inline double bisect(const std::function<double(double)> &f, double target, double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Recorded reference values.
/// |<10|cat_10>|^2 at <n> = 10, from a 40-digit evaluation of the cat populations.
inline constexpr double kCat10FockOverlap = 0.99536854191936332;
inline constexpr double kCat10BetaSquared = 8.3043493236235141;
/// Welch t and two-sided p for {1,2,3,4,5} vs {2,4,6,8,10,12.5}, from a reference statistics package.
inline constexpr double kWelchT = -2.3547897235278423;
inline constexpr double kWelchP = 0.05149163675518934;

}  // namespace oracle
