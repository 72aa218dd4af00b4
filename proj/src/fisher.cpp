#include "spreadchan/fisher.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "spreadchan/error.hpp"
#include "spreadchan/text.hpp"

namespace spreadchan {

namespace {

struct Difference {
    double step = 0.0;
    bool forward = false;
};

// First derivative of f at alpha. f returns an Eigen object.
template <class F>
auto differentiate(const F &f, double alpha, const DerivativeOptions &options, Difference &used) {
    const double h = options.step ? *options.step : default_step(alpha);
    if (!(h > 0.0)) {
        fail(ErrorKind::domain, "derivative step must be > 0");
    }
    used.step = h;
    used.forward = alpha - h < 0.0;
    auto estimate = [&](double step) {
        using Value = std::decay_t<decltype(f(alpha))>;
        if (used.forward) {
            Value out = (f(alpha + step) - f(alpha)) / step;
            return out;
        }
        Value out = (f(alpha + step) - f(alpha - step)) / (2.0 * step);
        return out;
    };
    auto coarse = estimate(h);
    if (!options.richardson) {
        return coarse;
    }
    auto fine = estimate(0.5 * h);
    // Forward differences err at O(h), central ones at O(h^2).
    decltype(coarse) combined = used.forward ? (2.0 * fine - coarse).eval() : ((4.0 * fine - coarse) / 3.0).eval();
    return combined;
}

RVec as_vector(const std::vector<double> &p) {
    return Eigen::Map<const RVec>(p.data(), static_cast<Eigen::Index>(p.size()));
}

void check_distribution(const std::vector<double> &p) {
    double total = 0.0;
    for (double v : p) {
        if (!(v >= -1e-15) || !std::isfinite(v)) {
            fail(ErrorKind::domain, "cfi: probabilities must be finite and non-negative");
        }
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        fail(ErrorKind::domain, "cfi: probabilities sum to " + text::format_number(total));
    }
}

// -i (e^{i phi} a^dagger - e^{-i phi} a) v without forming the matrix.
CVec apply_generator(double phi, const CVec &v) {
    const auto d = v.size();
    CVec out = CVec::Zero(d);
    const cplx up = cplx(0.0, -1.0) * std::polar(1.0, phi);
    const cplx down = cplx(0.0, 1.0) * std::polar(1.0, -phi);
    for (Eigen::Index n = 0; n < d; ++n) {
        if (n + 1 < d) {
            out[n + 1] += up * std::sqrt(static_cast<double>(n + 1)) * v[n];
        }
        if (n > 0) {
            out[n - 1] += down * std::sqrt(static_cast<double>(n)) * v[n];
        }
    }
    return out;
}

double top_two(const CVec &v) {
    const auto d = v.size();
    return std::norm(v[d - 1]) + std::norm(v[d - 2]);
}

}  // namespace

const char *to_string(FisherMethod method) {
    switch (method) {
        case FisherMethod::pure_variance:
            return "pure_variance";
        case FisherMethod::sld_eigen:
            return "sld_eigen";
        case FisherMethod::discrete_cfi:
            return "discrete_cfi";
        case FisherMethod::quadrature_cfi:
            return "quadrature_cfi";
    }
    return "unknown";
}

double default_step(double alpha) {
    return std::max(1e-6, 1e-3 * alpha);
}

FisherReport qfi_pure(const StateVector &psi, const Operator &generator) {
    if (!(generator.dimension() == psi.dimension())) {
        fail(ErrorKind::shape, "qfi_pure: generator and state dimensions differ");
    }
    if (!generator.is_hermitian(1e-10)) {
        fail(ErrorKind::domain, "qfi_pure: generator is not Hermitian");
    }
    const CVec g_psi = generator.matrix() * psi.amplitudes();
    const double mean = std::real(psi.amplitudes().dot(g_psi));
    FisherReport report;
    report.value = std::max(0.0, 4.0 * (g_psi.squaredNorm() - mean * mean));
    report.method = FisherMethod::pure_variance;
    report.leakage = psi.leakage();
    return report;
}

FisherReport avg_qfi(const StateVector &psi, double alpha, const PhaseDistribution &phases, int nodes) {
    require_nonnegative_alpha(alpha, "avg_qfi");
    const auto dim = psi.dimension();
    const int count = nodes > 0 ? nodes : default_phase_nodes(dim);
    const auto disp = Displacer(dim).at(alpha);
    FisherReport report;
    report.method = FisherMethod::pure_variance;
    report.leakage = psi.leakage();
    double total = 0.0;
    for (const auto &node : phases.quadrature(count)) {
        const CVec moved = disp.apply(node.phi, psi.amplitudes());
        const CVec g_moved = apply_generator(node.phi, moved);
        const double mean = std::real(moved.dot(g_moved));
        total += node.weight * 4.0 * (g_moved.squaredNorm() - mean * mean);
        report.leakage = std::max(report.leakage, top_two(moved));
    }
    report.value = std::max(0.0, total);
    return report;
}

FisherReport qfi_mixed(const DensityFamily &family, double alpha, const SldOptions &options) {
    require_nonnegative_alpha(alpha, "qfi_mixed");
    const DensityOperator rho = family(alpha);
    Difference used;
    const CMat derivative = differentiate([&](double a) { return family(a).matrix(); }, alpha, options, used);

    Eigen::SelfAdjointEigenSolver<CMat> solver(rho.matrix());
    if (solver.info() != Eigen::Success) {
        fail(ErrorKind::numeric, "qfi_mixed: eigendecomposition failed");
    }
    const RVec &lambda = solver.eigenvalues();
    const CMat &v = solver.eigenvectors();
    const CMat d_eigen = v.adjoint() * derivative * v;
    const double scale = d_eigen.cwiseAbs().maxCoeff();

    FisherReport report;
    report.method = FisherMethod::sld_eigen;
    report.sld_spectrum_cutoff = options.cutoff;
    report.derivative_step = used.step;
    report.leakage = rho.leakage();
    double total = 0.0;
    int kept = 0;
    const auto n = lambda.size();
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index k = 0; k < n; ++k) {
            const double denom = lambda[j] + lambda[k];
            const double weight = std::norm(d_eigen(j, k));
            if (denom > options.cutoff) {
                total += 2.0 * weight / denom;
                ++kept;
            } else {
                ++report.excluded_terms;
                // Derivative weight outside the support: the rank jumps here.
                if (std::sqrt(weight) > 1e-6 * scale) {
                    report.degenerate = true;
                }
            }
        }
    }
    if (kept == 0) {
        fail(ErrorKind::degenerate_family, "qfi_mixed: the spectrum cutoff removed every term");
    }
    report.value = std::max(0.0, total);
    return report;
}

FisherReport cfi_discrete(const ProbabilityFamily &probabilities, double alpha, const CfiOptions &options) {
    require_nonnegative_alpha(alpha, "cfi_discrete");
    const auto p = probabilities(alpha);
    check_distribution(p);
    Difference used;
    const RVec dp = differentiate([&](double a) { return as_vector(probabilities(a)); }, alpha, options, used);
    if (dp.size() != static_cast<Eigen::Index>(p.size())) {
        fail(ErrorKind::shape, "cfi_discrete: outcome count changed with alpha");
    }
    FisherReport report;
    report.method = FisherMethod::discrete_cfi;
    report.derivative_step = used.step;
    report.povm = options.povm;
    double total = 0.0;
    std::vector<double> ahead;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] < options.probability_floor) {
            ++report.excluded_terms;
            // An outcome that becomes possible just beyond alpha marks a support change.
            if (ahead.empty()) {
                ahead = probabilities(alpha + used.step);
            }
            if (i < ahead.size() && ahead[i] >= options.probability_floor) {
                report.degenerate = true;
            }
            continue;
        }
        total += dp[static_cast<Eigen::Index>(i)] * dp[static_cast<Eigen::Index>(i)] / p[i];
    }
    report.value = std::max(0.0, total);
    return report;
}

FisherReport noisy_cfi(const std::function<double(double)> &p0, double eps, double alpha,
                       const DerivativeOptions &options) {
    if (!(eps >= 0.0 && eps <= 1.0)) {
        fail(ErrorKind::domain, "noisy_cfi: eps must lie in [0, 1]");
    }
    CfiOptions cfi;
    static_cast<DerivativeOptions &>(cfi) = options;
    cfi.povm = "self_projection eps=" + text::format_number(eps);
    return cfi_discrete(
        [&](double a) {
            const auto q = apply_dark_noise(std::clamp(p0(a), 0.0, 1.0), eps);
            return std::vector<double>{q.p0, q.p1};
        },
        alpha, cfi);
}

FisherReport cfi_self_projection(const StateSpec &probe, const PhaseDistribution &phases, double alpha, double eps,
                                 const DerivativeOptions &options) {
    const double reach = alpha + (options.step ? *options.step : default_step(alpha));
    auto report = noisy_cfi(p0_curve(probe, phases, std::max(reach, 1e-3)), eps, alpha, options);
    report.povm = MeasurementModel::self_projection(probe, eps).describe();
    return report;
}

FisherReport cfi_quadrature(const StateSpec &probe, double alpha, const PhaseDistribution &phases,
                            const QuadratureCfiOptions &options) {
    require_nonnegative_alpha(alpha, "cfi_quadrature");
    const auto grid = options.x_grid ? *options.x_grid : default_quadrature_grid(probe, alpha);

    int excluded = 0;
    auto integrate = [&](const std::vector<double> &x) {
        const auto density = quadrature_density(probe, alpha, phases, x, options.angle);
        const double peak = *std::max_element(density.p.begin(), density.p.end());
        excluded = 0;
        std::vector<double> integrand(x.size(), 0.0);
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (density.p[i] > 1e-14 * peak) {
                integrand[i] = density.dp_dalpha[i] * density.dp_dalpha[i] / density.p[i];
            } else {
                ++excluded;
            }
        }
        double total = 0.0;
        for (std::size_t i = 1; i < x.size(); ++i) {
            total += 0.5 * (integrand[i] + integrand[i - 1]) * (x[i] - x[i - 1]);
        }
        return total;
    };

    double value = integrate(grid);
    if (options.verify_grid) {
        std::vector<double> fine;
        fine.reserve(2 * grid.size() - 1);
        for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
            fine.push_back(grid[i]);
            fine.push_back(0.5 * (grid[i] + grid[i + 1]));
        }
        fine.push_back(grid.back());
        const double refined = integrate(fine);
        if (std::abs(refined - value) > options.grid_tolerance * std::max(std::abs(refined), 1e-12)) {
            fail(ErrorKind::quadrature, "cfi_quadrature: halving the grid spacing moved the value from " +
                                            text::format_number(value) + " to " + text::format_number(refined));
        }
        value = refined;
    }
    FisherReport report;
    report.value = std::max(0.0, value);
    report.method = FisherMethod::quadrature_cfi;
    report.excluded_terms = excluded;
    report.povm = MeasurementModel::quadrature(options.angle, grid).describe();
    return report;
}

double qfi_bound(double mean_photons) {
    if (!(mean_photons >= 0.0)) {
        fail(ErrorKind::domain, "qfi_bound: mean photon number must be >= 0");
    }
    return 8.0 * (mean_photons + 0.5);
}

double saturation_constant(const std::vector<double> &alphas, const std::vector<double> &fisher, double f_plus) {
    if (alphas.size() != fisher.size() || alphas.empty()) {
        fail(ErrorKind::shape, "saturation_constant: need matching, non-empty inputs");
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        num += alphas[i] * std::abs(fisher[i] / f_plus - 1.0);
        den += alphas[i] * alphas[i];
    }
    return num / den;
}

}  // namespace spreadchan
