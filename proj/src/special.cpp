#include "spreadchan/special.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "spreadchan/error.hpp"
#include "spreadchan/fock.hpp"

namespace spreadchan {

namespace {

// Beyond this the unscaled I0 leaves double range.
constexpr double kUnscaledLimit = 700.0;

// e^{-x} I0(x) ~ (2 pi x)^{-1/2} sum_k ((2k-1)!!)^2 / (k! (8x)^k)
double i0_scaled_asymptotic(double x) {
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 60; ++k) {
        const double next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * x);
        if (next > term) {
            break;
        }
        term = next;
        sum += term;
        if (term < sum * 1e-17) {
            break;
        }
    }
    return sum / std::sqrt(kTwoPi * x);
}

void require_nonnegative(double x, const char *what) {
    if (!(x >= 0.0)) {
        fail(ErrorKind::domain, std::string(what) + ": argument must be >= 0, got " + std::to_string(x));
    }
}

}  // namespace

double bessel_i0(double x) {
    require_nonnegative(x, "bessel_i0");
    return std::cyl_bessel_i(0.0, x);
}

double bessel_i0_scaled(double x) {
    require_nonnegative(x, "bessel_i0_scaled");
    if (x < kUnscaledLimit) {
        return std::exp(-x) * std::cyl_bessel_i(0.0, x);
    }
    return i0_scaled_asymptotic(x);
}

double laguerre(int n, double x) {
    if (n < 0) {
        fail(ErrorKind::domain, "laguerre: order must be >= 0");
    }
    return std::laguerre(static_cast<unsigned>(n), x);
}

HermiteFunctions::HermiteFunctions(int count) {
    if (count < 0) {
        fail(ErrorKind::domain, "hermite functions: negative count");
    }
    forward_.resize(static_cast<std::size_t>(count));
    backward_.resize(static_cast<std::size_t>(count));
    for (int n = 0; n < count; ++n) {
        forward_[n] = std::sqrt(2.0 / (n + 1.0));
        backward_[n] = std::sqrt(n / (n + 1.0));
    }
}

void HermiteFunctions::evaluate(double x, std::vector<double> &out) const {
    const int count = this->count();
    out.assign(static_cast<std::size_t>(count), 0.0);
    if (count == 0) {
        return;
    }
    // Run the recurrence without the Gaussian factor and fold it back at the end,
    // rescaling on the way so far-out points do not underflow at order zero.
    constexpr double kBig = 1e150;
    double log_scale = -0.5 * x * x;
    out[0] = std::pow(kPi, -0.25);
    if (count > 1) {
        out[1] = forward_[0] * x * out[0];
    }
    for (int n = 1; n + 1 < count; ++n) {
        out[n + 1] = forward_[n] * x * out[n] - backward_[n] * out[n - 1];
        if (std::abs(out[n + 1]) > kBig) {
            for (int k = 0; k <= n + 1; ++k) {
                out[k] /= kBig;
            }
            log_scale += std::log(kBig);
        }
    }
    if (log_scale > -700.0) {
        const double factor = std::exp(log_scale);
        for (auto &v : out) {
            v *= factor;
        }
        return;
    }
    for (auto &v : out) {
        v = v == 0.0 ? 0.0 : std::copysign(std::exp(std::log(std::abs(v)) + log_scale), v);
    }
}

std::vector<double> hermite_position_amplitudes(int count, double x) {
    std::vector<double> out;
    HermiteFunctions(count).evaluate(x, out);
    return out;
}

double hermite_position_amplitude(int n, double x) {
    if (n < 0) {
        fail(ErrorKind::domain, "hermite_position_amplitude: order must be >= 0");
    }
    return hermite_position_amplitudes(n + 1, x)[static_cast<std::size_t>(n)];
}

}  // namespace spreadchan
