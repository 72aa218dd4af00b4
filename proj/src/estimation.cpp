#include "spreadchan/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "spreadchan/error.hpp"
#include "spreadchan/fisher.hpp"
#include "spreadchan/parallel.hpp"
#include "spreadchan/special.hpp"

namespace spreadchan {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_likelihood(std::int64_t m0, std::int64_t m1, double q) {
    double out = 0.0;
    if (m0 > 0) {
        out += q > 0.0 ? static_cast<double>(m0) * std::log(q) : kNegInf;
    }
    if (m1 > 0) {
        out += q < 1.0 ? static_cast<double>(m1) * std::log1p(-q) : kNegInf;
    }
    return out;
}

void validate(const ExperimentConfig &c) {
    require_nonnegative_alpha(c.alpha_true, "simulate");
    if (c.repetitions < 1) {
        fail(ErrorKind::domain, "simulate: repetitions must be >= 1");
    }
    if (!(c.dark_noise >= 0.0 && c.dark_noise <= 1.0)) {
        fail(ErrorKind::domain, "simulate: dark noise must lie in [0, 1]");
    }
    if (!c.probe.is_pure()) {
        fail(ErrorKind::domain, "simulate: self-projection needs a pure probe");
    }
}

// Phase distribution that the counts actually follow.
PhaseDistribution effective_phases(const ExperimentConfig &c) {
    return c.randomize_rotation ? PhaseDistribution::uniform() : c.phases;
}

struct Counts {
    std::int64_t m0 = 0;
    std::int64_t m1 = 0;
    std::vector<double> phases;
};

Counts draw_counts(const ExperimentConfig &c, const FixedPhaseFidelity &fidelity) {
    Counts out;
    if (c.keep_phases) {
        out.phases.reserve(static_cast<std::size_t>(c.repetitions));
    }
    for (std::int64_t shot = 0; shot < c.repetitions; ++shot) {
        CounterRng rng(c.seed, c.trial, static_cast<std::uint64_t>(shot));
        double phi = c.phases.sample([&] { return rng.uniform(); });
        if (c.randomize_rotation) {
            phi = std::fmod(phi + kTwoPi * rng.uniform(), kTwoPi);
        }
        const double q = (1.0 - c.dark_noise) * fidelity(phi) + 0.5 * c.dark_noise;
        if (rng.uniform() < q) {
            ++out.m0;
        } else {
            ++out.m1;
        }
        if (c.keep_phases) {
            out.phases.push_back(phi);
        }
    }
    return out;
}

double golden_max(const std::function<double(double)> &f, double lo, double hi) {
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo;
    double b = hi;
    double x1 = b - ratio * (b - a);
    double x2 = a + ratio * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int it = 0; it < 200 && b - a > 1e-13 * std::max(1.0, std::abs(b)); ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t trial, std::uint64_t shot) noexcept
    : key_(mix(mix(mix(seed + kGolden) ^ (trial * 0xd1b54a32d192ed03ULL)) ^ (shot * 0x8cb92ba72f3d8dd7ULL))) {}

std::uint64_t CounterRng::next() noexcept {
    ++counter_;
    return mix(key_ + counter_ * kGolden);
}

double CounterRng::uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

bool monotone_fidelity(const StateSpec &probe) {
    return std::holds_alternative<Vacuum>(probe.kind()) || std::holds_alternative<Coherent>(probe.kind()) ||
           std::holds_alternative<SqueezedVacuum>(probe.kind());
}

MleResult mle_from_counts(std::int64_t m0, std::int64_t m1, const std::function<double(double)> &p0, bool monotone,
                          double eps, const MleOptions &options) {
    if (m0 < 0 || m1 < 0 || m0 + m1 < 1) {
        fail(ErrorKind::domain, "mle: need non-negative counts with m0 + m1 >= 1");
    }
    if (!(eps >= 0.0 && eps <= 1.0)) {
        fail(ErrorKind::domain, "mle: eps must lie in [0, 1]");
    }
    if (!(options.alpha_max > 0.0)) {
        fail(ErrorKind::domain, "mle: alpha_max must be > 0");
    }
    const double amax = options.alpha_max;
    auto q = [&](double a) { return (1.0 - eps) * std::clamp(p0(a), 0.0, 1.0) + 0.5 * eps; };
    MleResult out;
    if (m1 == 0 && eps == 0.0) {
        out.alpha_hat = 0.0;
        out.boundary = true;
        out.candidates = {0.0};
        return out;
    }
    const double target = static_cast<double>(m0) / static_cast<double>(m0 + m1);

    if (monotone) {
        const double top = q(0.0);
        const double bottom = q(amax);
        if (target >= top) {
            out.alpha_hat = 0.0;
            out.boundary = true;
        } else if (target <= bottom) {
            out.alpha_hat = amax;
            out.boundary = true;
        } else {
            double lo = 0.0;
            double hi = amax;
            for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
                const double mid = 0.5 * (lo + hi);
                (q(mid) > target ? lo : hi) = mid;
            }
            out.alpha_hat = 0.5 * (lo + hi);
        }
        out.candidates = {out.alpha_hat};
        return out;
    }

    const int n = std::max(options.grid_points, 3);
    const double step = amax / (n - 1);
    std::vector<double> ell(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        ell[i] = log_likelihood(m0, m1, q(i * step));
    }
    auto objective = [&](double a) { return log_likelihood(m0, m1, q(a)); };
    std::vector<std::pair<double, double>> maxima;  // (alpha, log-likelihood)
    for (int i = 0; i < n; ++i) {
        const double left = i > 0 ? ell[i - 1] : kNegInf;
        const double right = i + 1 < n ? ell[i + 1] : kNegInf;
        if (ell[i] == kNegInf || ell[i] < left || ell[i] < right || (ell[i] == left && i > 0)) {
            continue;
        }
        double a = i * step;
        if (i > 0 && i + 1 < n) {
            a = golden_max(objective, (i - 1) * step, (i + 1) * step);
        }
        maxima.emplace_back(a, std::max(objective(a), ell[i]));
    }
    if (maxima.empty()) {
        fail(ErrorKind::numeric, "mle: likelihood is -inf on the whole grid");
    }
    double best = kNegInf;
    for (const auto &m : maxima) {
        best = std::max(best, m.second);
    }
    for (const auto &m : maxima) {
        if (m.second >= best - options.ambiguity_tolerance &&
            (out.candidates.empty() || m.first - out.candidates.back() > 2.0 * step)) {
            out.candidates.push_back(m.first);
        }
    }
    out.alpha_hat = out.candidates.front();
    out.ambiguous = out.candidates.size() > 1;
    out.boundary = out.alpha_hat <= 0.0 || out.alpha_hat >= amax;
    return out;
}

MleResult mle_from_counts(std::int64_t m0, std::int64_t m1, const StateSpec &probe, const PhaseDistribution &phases,
                          double eps, const MleOptions &options) {
    return mle_from_counts(m0, m1, p0_curve(probe, phases, options.alpha_max), monotone_fidelity(probe), eps, options);
}

double self_projection_cfi(const StateSpec &probe, const PhaseDistribution &phases, double alpha, double eps) {
    // Right limit at the origin.
    const double at = alpha > 0.0 ? alpha : 1e-3;
    return cfi_self_projection(probe, phases, at, eps).value;
}

ExperimentResult simulate(const ExperimentConfig &config) {
    validate(config);
    const FixedPhaseFidelity fidelity(config.probe, config.alpha_true);
    auto counts = draw_counts(config, fidelity);
    const auto phases = effective_phases(config);
    MleOptions mle;
    mle.alpha_max = config.alpha_max;
    const auto fit = mle_from_counts(counts.m0, counts.m1, config.probe, phases, config.dark_noise, mle);
    ExperimentResult out;
    out.m0 = counts.m0;
    out.m1 = counts.m1;
    out.alpha_hat = fit.alpha_hat;
    out.boundary = fit.boundary;
    out.ambiguous = fit.ambiguous;
    out.crb_sigma = 1.0 / std::sqrt(static_cast<double>(config.repetitions) *
                                    self_projection_cfi(config.probe, phases, config.alpha_true, config.dark_noise));
    out.phases = std::move(counts.phases);
    return out;
}

RmseRow rmse_sweep_point(const ExperimentConfig &config, int trials) {
    validate(config);
    if (trials < 100) {
        fail(ErrorKind::domain, "rmse_sweep: at least 100 trials required");
    }
    const FixedPhaseFidelity fidelity(config.probe, config.alpha_true);
    const auto phases = effective_phases(config);
    const auto curve = p0_curve(config.probe, phases, config.alpha_max);
    const bool monotone = monotone_fidelity(config.probe);
    MleOptions mle;
    mle.alpha_max = config.alpha_max;

    std::vector<MleResult> fits(static_cast<std::size_t>(trials));
    parallel_for(fits.size(), [&](std::size_t t) {
        ExperimentConfig c = config;
        c.trial = t;
        c.keep_phases = false;
        const auto counts = draw_counts(c, fidelity);
        fits[t] = mle_from_counts(counts.m0, counts.m1, curve, monotone, c.dark_noise, mle);
    });

    RmseRow row;
    row.label = config.probe.label();
    row.alpha = config.alpha_true;
    row.repetitions = config.repetitions;
    row.trials = trials;
    double sum_sq = 0.0;
    double sum = 0.0;
    for (const auto &f : fits) {
        const double e = f.alpha_hat - config.alpha_true;
        row.squared_errors.push_back(e * e);
        sum_sq += e * e;
        sum += f.alpha_hat;
        row.ambiguous += f.ambiguous ? 1 : 0;
        row.boundary += f.boundary ? 1 : 0;
    }
    row.rmse = std::sqrt(sum_sq / trials);
    row.mean_estimate = sum / trials;
    row.crb = 1.0 / std::sqrt(static_cast<double>(config.repetitions) *
                              self_projection_cfi(config.probe, phases, config.alpha_true, config.dark_noise));
    row.ratio = row.rmse / row.crb;
    return row;
}

std::vector<RmseRow> rmse_sweep(const std::vector<StateSpec> &probes, const std::vector<double> &alphas,
                                const std::vector<std::int64_t> &repetitions, const PhaseDistribution &phases,
                                int trials, std::uint64_t seed, double eps) {
    std::vector<RmseRow> rows;
    for (std::size_t p = 0; p < probes.size(); ++p) {
        for (double a : alphas) {
            for (auto m : repetitions) {
                ExperimentConfig c;
                c.probe = probes[p];
                c.phases = phases;
                c.alpha_true = a;
                c.repetitions = m;
                c.seed = seed + p;
                c.dark_noise = eps;
                rows.push_back(rmse_sweep_point(c, trials));
            }
        }
    }
    return rows;
}

WelchTest welch_test(const std::vector<double> &a, const std::vector<double> &b) {
    if (a.size() < 2 || b.size() < 2) {
        fail(ErrorKind::domain, "welch_test: each sample needs at least two values");
    }
    auto moments = [](const std::vector<double> &v) {
        double mean = 0.0;
        double m2 = 0.0;
        double k = 0.0;
        for (double x : v) {
            k += 1.0;
            const double d = x - mean;
            mean += d / k;
            m2 += d * (x - mean);
        }
        return std::pair<double, double>{mean, m2 / (k - 1.0)};
    };
    const auto [ma, va] = moments(a);
    const auto [mb, vb] = moments(b);
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double sa = va / na;
    const double sb = vb / nb;
    WelchTest out;
    if (sa + sb == 0.0) {
        out.p_value = ma == mb ? 1.0 : 0.0;
        return out;
    }
    out.t = (ma - mb) / std::sqrt(sa + sb);
    out.dof = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    const boost::math::students_t dist(out.dof);
    out.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(out.t)));
    return out;
}

MonteCarloEstimate randomized_rotation_statistics(const StateSpec &probe, double alpha,
                                                  const PhaseDistribution &phases, std::int64_t draws,
                                                  std::uint64_t seed) {
    if (draws < 2) {
        fail(ErrorKind::domain, "randomized_rotation_statistics: need at least two draws");
    }
    const FixedPhaseFidelity fidelity(probe, alpha);
    double mean = 0.0;
    double m2 = 0.0;
    for (std::int64_t i = 0; i < draws; ++i) {
        CounterRng rng(seed, 0, static_cast<std::uint64_t>(i));
        const double theta = kTwoPi * rng.uniform();
        const double phi = phases.sample([&] { return rng.uniform(); });
        const double x = fidelity(theta + phi);
        const double d = x - mean;
        mean += d / static_cast<double>(i + 1);
        m2 += d * (x - mean);
    }
    MonteCarloEstimate out;
    out.mean = mean;
    out.draws = draws;
    out.standard_error = std::sqrt(m2 / static_cast<double>(draws - 1) / static_cast<double>(draws));
    return out;
}

std::vector<OverlapRow> overlap_fluctuations(const StateSpec &probe, const std::vector<double> &alphas, int samples,
                                             std::uint64_t seed) {
    if (samples < 2) {
        fail(ErrorKind::domain, "overlap_fluctuations: need at least two samples");
    }
    std::vector<OverlapRow> rows(alphas.size());
    parallel_for(alphas.size(), [&](std::size_t i) {
        const FixedPhaseFidelity fidelity(probe, alphas[i]);
        double mean = 0.0;
        double m2 = 0.0;
        for (int s = 0; s < samples; ++s) {
            CounterRng rng(seed, i, static_cast<std::uint64_t>(s));
            const double x = fidelity.overlap_magnitude(kTwoPi * rng.uniform());
            const double d = x - mean;
            mean += d / (s + 1.0);
            m2 += d * (x - mean);
        }
        rows[i] = OverlapRow{alphas[i], mean, std::sqrt(m2 / samples)};
    });
    return rows;
}

double energy_scaling_deviation(double mean_photons, const std::vector<double> &u_grid) {
    if (!(mean_photons > 0.0)) {
        fail(ErrorKind::domain, "energy_scaling_deviation: mean photon number must be > 0");
    }
    const double r = std::asinh(std::sqrt(mean_photons));
    double worst = 0.0;
    for (double u : u_grid) {
        if (!(u >= 0.0)) {
            fail(ErrorKind::domain, "energy_scaling_deviation: u must be >= 0");
        }
        const double limit = bessel_i0_scaled(2.0 * u);
        worst = std::max(worst, std::abs(p0_squeezed_closed(std::sqrt(u / mean_photons), r) - limit));
    }
    return worst;
}

}  // namespace spreadchan
