#include "spreadchan/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "spreadchan/error.hpp"
#include "spreadchan/special.hpp"
#include "spreadchan/text.hpp"

namespace spreadchan {

namespace {

void require_probability(double p, const char *what) {
    if (!(p >= 0.0 && p <= 1.0)) {
        fail(ErrorKind::domain, std::string(what) + " must lie in [0, 1]");
    }
}

// Squeezed |<psi|D|psi>|^2 along direction phi for squeezing angle theta.
double squeezed_fixed_phase(double alpha, double r, double theta, double phi) {
    const double c = std::cos(phi - 0.5 * theta);
    const double s = std::sin(phi - 0.5 * theta);
    return std::exp(-alpha * alpha * (c * c * std::exp(2.0 * r) + s * s * std::exp(-2.0 * r)));
}

bool phase_insensitive(const StateSpec &probe) {
    return std::holds_alternative<Vacuum>(probe.kind()) || std::holds_alternative<Coherent>(probe.kind()) ||
           std::holds_alternative<FockState>(probe.kind());
}

struct Shift {
    double rate;  // sqrt(2) cos(phi - angle); the quadrature moves by alpha * rate
    double weight;
};

// Equal rates merged so symmetric phase nodes cost one evaluation.
std::vector<Shift> shifts_for(const std::vector<PhaseAtom> &atoms, double angle) {
    std::vector<Shift> raw;
    raw.reserve(atoms.size());
    for (const auto &a : atoms) {
        raw.push_back(Shift{std::sqrt(2.0) * std::cos(a.phi - angle), a.weight});
    }
    std::sort(raw.begin(), raw.end(), [](const Shift &l, const Shift &r) { return l.rate < r.rate; });
    std::vector<Shift> merged;
    for (const auto &s : raw) {
        if (!merged.empty() && std::abs(merged.back().rate - s.rate) < 1e-14) {
            merged.back().weight += s.weight;
        } else {
            merged.push_back(s);
        }
    }
    return merged;
}

class Wavefunction {
  public:
    Wavefunction(const CVec &amplitudes, double angle)
        : re_(amplitudes.size()), im_(amplitudes.size()), hermite_(static_cast<int>(amplitudes.size()) + 1) {
        const auto d = amplitudes.size();
        // Derivative coefficients: psi' = sum_n c_n (sqrt(n/2) h_{n-1} - sqrt((n+1)/2) h_{n+1}),
        // regrouped by h_m as sum_m h_m (sqrt((m+1)/2) c_{m+1} - sqrt(m/2) c_{m-1}).
        dre_ = RVec::Zero(d + 1);
        dim_ = RVec::Zero(d + 1);
        CVec c(d);
        for (Eigen::Index n = 0; n < d; ++n) {
            c[n] = amplitudes[n] * std::polar(1.0, -angle * static_cast<double>(n));
            re_[n] = c[n].real();
            im_[n] = c[n].imag();
        }
        for (Eigen::Index m = 0; m <= d; ++m) {
            cplx v(0.0, 0.0);
            if (m + 1 < d) {
                v += std::sqrt((m + 1.0) / 2.0) * c[m + 1];
            }
            if (m >= 1 && m - 1 < d) {
                v -= std::sqrt(m / 2.0) * c[m - 1];
            }
            dre_[m] = v.real();
            dim_[m] = v.imag();
        }
    }

    // |psi(y)|^2 and its y-derivative.
    std::pair<double, double> density(double y, std::vector<double> &h) const {
        hermite_.evaluate(y, h);
        const Eigen::Map<const RVec> hv(h.data(), static_cast<Eigen::Index>(h.size()));
        const auto d = re_.size();
        const double vr = re_.dot(hv.head(d));
        const double vi = im_.dot(hv.head(d));
        const double sr = dre_.dot(hv);
        const double si = dim_.dot(hv);
        return {vr * vr + vi * vi, 2.0 * (vr * sr + vi * si)};
    }

  private:
    RVec re_;
    RVec im_;
    RVec dre_;
    RVec dim_;
    HermiteFunctions hermite_;
};

}  // namespace

MeasurementModel::MeasurementModel(Kind kind, double dark_noise) : kind_(std::move(kind)), dark_noise_(dark_noise) {
    require_probability(dark_noise, "dark noise");
    if (const auto *q = std::get_if<QuadratureMeasurement>(&kind_)) {
        if (q->x_grid.size() < 3 || !std::is_sorted(q->x_grid.begin(), q->x_grid.end())) {
            fail(ErrorKind::domain, "quadrature measurement needs an increasing grid of at least 3 points");
        }
    }
}

MeasurementModel MeasurementModel::self_projection(StateSpec probe, double dark_noise) {
    return MeasurementModel(SelfProjection{std::move(probe)}, dark_noise);
}

MeasurementModel MeasurementModel::quadrature(double angle, std::vector<double> x_grid) {
    return MeasurementModel(QuadratureMeasurement{angle, std::move(x_grid)});
}

std::string MeasurementModel::describe() const {
    std::string out;
    if (const auto *s = std::get_if<SelfProjection>(&kind_)) {
        out = "self_projection(" + s->probe.to_string() + ")";
    } else {
        const auto &q = std::get<QuadratureMeasurement>(kind_);
        out = "quadrature(angle=" + text::format_number(q.angle) + ",points=" + std::to_string(q.x_grid.size()) + ")";
    }
    if (dark_noise_ > 0.0) {
        out += " eps=" + text::format_number(dark_noise_);
    }
    return out;
}

OutcomePair apply_dark_noise(double p0, double eps) {
    require_probability(p0, "p0");
    require_probability(eps, "eps");
    const double q = (1.0 - eps) * p0 + 0.5 * eps;
    return OutcomePair{q, 1.0 - q};
}

double p0_squeezed_closed(double alpha, double r) {
    require_nonnegative_alpha(alpha, "p0_squeezed_closed");
    if (!(r >= 0.0)) {
        fail(ErrorKind::domain, "p0_squeezed_closed: r must be >= 0");
    }
    // e^{-a^2 cosh 2r} I0(a^2 sinh 2r) = e^{-a^2 e^{-2r}} e^{-z} I0(z), z = a^2 sinh 2r.
    const double a2 = alpha * alpha;
    return std::exp(-a2 * std::exp(-2.0 * r)) * bessel_i0_scaled(a2 * std::sinh(2.0 * r));
}

double p0_fock_closed(double alpha, int n) {
    require_nonnegative_alpha(alpha, "p0_fock_closed");
    if (n < 0) {
        fail(ErrorKind::domain, "p0_fock_closed: n must be >= 0");
    }
    const double a2 = alpha * alpha;
    const double l = laguerre(n, a2);
    return std::exp(-a2) * l * l;
}

double p0_coherent(double alpha) {
    require_nonnegative_alpha(alpha, "p0_coherent");
    return std::exp(-alpha * alpha);
}

std::optional<double> fixed_phase_fidelity_closed(const StateSpec &probe, double alpha, double phi) {
    require_nonnegative_alpha(alpha, "fixed_phase_fidelity_closed");
    if (std::holds_alternative<Vacuum>(probe.kind()) || std::holds_alternative<Coherent>(probe.kind())) {
        return p0_coherent(alpha);
    }
    if (const auto *f = std::get_if<FockState>(&probe.kind())) {
        return p0_fock_closed(alpha, f->n);
    }
    if (const auto *s = std::get_if<SqueezedVacuum>(&probe.kind())) {
        return squeezed_fixed_phase(alpha, s->r, s->theta, phi);
    }
    return std::nullopt;
}

std::optional<double> p0_closed(const StateSpec &probe, double alpha, const PhaseDistribution &phases) {
    require_nonnegative_alpha(alpha, "p0_closed");
    if (phase_insensitive(probe)) {
        return fixed_phase_fidelity_closed(probe, alpha, 0.0);
    }
    if (const auto *s = std::get_if<SqueezedVacuum>(&probe.kind())) {
        if (phases.is_uniform()) {
            return p0_squeezed_closed(alpha, s->r);
        }
        if (!phases.is_continuous()) {
            double total = 0.0;
            for (const auto &a : phases.quadrature(0)) {
                total += a.weight * squeezed_fixed_phase(alpha, s->r, s->theta, a.phi);
            }
            return total;
        }
    }
    return std::nullopt;
}

SelfProjectionCurve::SelfProjectionCurve(const StateSpec &probe, PhaseDistribution phases, FockDimension dim,
                                         double leakage_limit)
    : phases_(std::move(phases)),
      psi_(build_pure_state(probe, dim, BuildOptions{leakage_limit, true})),
      displacer_(dim),
      leakage_limit_(leakage_limit) {
    // D(alpha, 0)_{mn} = i^{m-n} sum_j W_mj e^{-i alpha l_j} W_nj, so
    // B_kj = i^k sum_n conj(psi_{n+k}) W_{n+k,j} W_nj psi_n.
    const int d = dim.value();
    const RMat &w = displacer_.eigenvectors();
    const CVec &psi = psi_.amplitudes();
    const CMat weighted = psi.asDiagonal() * w;                 // psi_n W_nj
    const CMat conj_weighted = psi.conjugate().asDiagonal() * w;  // conj(psi_m) W_mj
    mixing_ = CMat::Zero(2 * d - 1, d);
    const cplx powers[4] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
    for (int k = -(d - 1); k <= d - 1; ++k) {
        const int lo = std::max(0, -k);
        const int hi = std::min(d, d - k);
        if (hi <= lo) {
            continue;
        }
        const auto rows = hi - lo;
        auto row = mixing_.row(k + d - 1);
        row = (conj_weighted.middleRows(lo + k, rows).cwiseProduct(weighted.middleRows(lo, rows))).colwise().sum();
        row *= powers[((k % 4) + 4) % 4];
    }
}

CVec SelfProjectionCurve::coefficients(double alpha) const {
    const RVec &lambda = displacer_.eigenvalues();
    CVec phase(lambda.size());
    for (Eigen::Index j = 0; j < lambda.size(); ++j) {
        phase[j] = std::polar(1.0, -alpha * lambda[j]);
    }
    return mixing_ * phase;
}

P0Evaluation SelfProjectionCurve::evaluate(double alpha) const {
    require_nonnegative_alpha(alpha, "p0");
    const int d = psi_.dimension().value();
    if (alpha == 0.0) {
        return P0Evaluation{1.0, d, psi_.leakage()};
    }
    const CVec &psi = psi_.amplitudes();
    const CVec c = coefficients(alpha);

    // Phase-averaged top-two population: phase averaging removes the cross terms, leaving
    // sum_n |D(alpha, 0)_{mn}|^2 |psi_n|^2.
    const RVec &lambda = displacer_.eigenvalues();
    const RMat &w = displacer_.eigenvectors();
    double tail = 0.0;
    for (int m = d - 2; m < d; ++m) {
        CVec top(d);
        for (int j = 0; j < d; ++j) {
            top[j] = w(m, j) * std::polar(1.0, -alpha * lambda[j]);
        }
        const CVec row = w * top;  // K_{m,n} with |D_mn| = |K_mn|
        for (int n = 0; n < d; ++n) {
            tail += std::norm(row[n]) * std::norm(psi[n]);
        }
    }
    if (tail > leakage_limit_) {
        fail(ErrorKind::truncation, "p0: displaced probe leaks " + text::format_number(tail) + " into the top levels at dim " +
                                        std::to_string(d) + "; raise the dimension");
    }

    auto at_phase = [&](double phi) {
        cplx sum(0.0, 0.0);
        for (Eigen::Index k = 0; k < c.size(); ++k) {
            sum += c[k] * std::polar(1.0, static_cast<double>(k - (d - 1)) * phi);
        }
        return std::norm(sum);
    };
    auto integrate = [&](const std::vector<PhaseAtom> &nodes) {
        double total = 0.0;
        for (const auto &a : nodes) {
            total += a.weight * at_phase(a.phi);
        }
        return total;
    };

    double value = 0.0;
    if (phases_.is_uniform()) {
        value = c.squaredNorm();
    } else if (!phases_.is_continuous()) {
        value = integrate(phases_.quadrature(0));
    } else {
        const int nodes = std::max(default_phase_nodes(psi_.dimension()), 2 * d);
        value = integrate(phases_.quadrature(nodes));
        const double refined = integrate(phases_.quadrature(2 * nodes));
        if (std::abs(refined - value) > 1e-12) {
            fail(ErrorKind::quadrature, "p0: phase quadrature did not converge");
        }
        value = refined;
    }
    return P0Evaluation{std::clamp(value, 0.0, 1.0), d, std::max(tail, psi_.leakage())};
}

cplx SelfProjectionCurve::overlap(double alpha, double phi) const {
    require_nonnegative_alpha(alpha, "overlap");
    const CVec c = coefficients(alpha);
    const int d = psi_.dimension().value();
    cplx sum(0.0, 0.0);
    for (Eigen::Index k = 0; k < c.size(); ++k) {
        sum += c[k] * std::polar(1.0, static_cast<double>(k - (d - 1)) * phi);
    }
    return sum;
}

P0Evaluation p0_numeric_report(const StateSpec &probe, double alpha, const PhaseDistribution &phases,
                               const NumericOptions &options) {
    require_nonnegative_alpha(alpha, "p0_numeric");
    const FockDimension dim = options.dim ? FockDimension(*options.dim) : auto_dimension(probe, alpha);
    return SelfProjectionCurve(probe, phases, dim, options.leakage_limit).evaluate(alpha);
}

double p0_numeric(const StateSpec &probe, double alpha, const PhaseDistribution &phases, const NumericOptions &options) {
    return p0_numeric_report(probe, alpha, phases, options).value;
}

FixedPhaseFidelity::FixedPhaseFidelity(const StateSpec &probe, double alpha, std::optional<int> dim)
    : probe_(probe), alpha_(alpha) {
    require_nonnegative_alpha(alpha, "fixed-phase fidelity");
    if (!probe.is_pure()) {
        fail(ErrorKind::domain, "fixed-phase fidelity: probe must be pure");
    }
    if (!fixed_phase_fidelity_closed(probe, alpha, 0.0)) {
        const FockDimension d = dim ? FockDimension(*dim) : auto_dimension(probe, alpha);
        const auto psi = build_pure_state(probe, d);
        coefficients_ = Displacer(d).at(alpha).overlap_coefficients(psi.amplitudes());
    }
}

double FixedPhaseFidelity::operator()(double phi) const {
    if (!coefficients_) {
        return *fixed_phase_fidelity_closed(probe_, alpha_, phi);
    }
    const double m = overlap_magnitude(phi);
    return std::min(1.0, m * m);
}

double FixedPhaseFidelity::overlap_magnitude(double phi) const {
    if (!coefficients_) {
        return std::sqrt(*fixed_phase_fidelity_closed(probe_, alpha_, phi));
    }
    const CVec &c = *coefficients_;
    const auto offset = (c.size() - 1) / 2;
    // Horner in e^{i phi}, then undo the lowest power.
    const cplx z = std::polar(1.0, phi);
    cplx sum(0.0, 0.0);
    for (Eigen::Index k = c.size() - 1; k >= 0; --k) {
        sum = sum * z + c[k];
    }
    return std::abs(sum * std::polar(1.0, -phi * static_cast<double>(offset)));
}

std::function<double(double)> p0_curve(const StateSpec &probe, const PhaseDistribution &phases, double alpha_max) {
    if (p0_closed(probe, 0.0, phases)) {
        return [probe, phases](double alpha) { return *p0_closed(probe, alpha, phases); };
    }
    auto engine = std::make_shared<SelfProjectionCurve>(probe, phases, auto_dimension(probe, alpha_max));
    return [engine](double alpha) { return (*engine)(alpha); };
}

std::vector<double> default_quadrature_grid(const StateSpec &probe, double alpha, int points) {
    require_nonnegative_alpha(alpha, "default_quadrature_grid");
    if (points < 3) {
        fail(ErrorKind::domain, "quadrature grid needs at least 3 points");
    }
    double half = 0.0;
    if (const auto *s = std::get_if<SqueezedVacuum>(&probe.kind())) {
        half = 8.0 * std::max(1.0, std::exp(s->r)) + std::sqrt(2.0) * alpha;
    } else {
        half = 8.0 * std::sqrt(2.0 * probe.nominal_energy() + 1.0) + std::sqrt(2.0) * alpha;
    }
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        grid[i] = -half + 2.0 * half * i / (points - 1);
    }
    return grid;
}

QuadratureDensity quadrature_density(const StateSpec &probe, double alpha, const PhaseDistribution &phases,
                                     const std::vector<double> &x_grid, double angle) {
    require_nonnegative_alpha(alpha, "quadrature_density");
    if (!probe.is_pure()) {
        fail(ErrorKind::domain, "quadrature_density: probe must be pure");
    }
    if (x_grid.size() < 3 || !std::is_sorted(x_grid.begin(), x_grid.end())) {
        fail(ErrorKind::domain, "quadrature_density: grid must be increasing with at least 3 points");
    }
    const auto psi = build_pure_state(probe, auto_dimension(probe, 0.0));
    const Wavefunction wf(psi.amplitudes(), angle);

    QuadratureDensity out;
    out.x = x_grid;
    auto run = [&](const std::vector<PhaseAtom> &atoms, std::vector<double> &p, std::vector<double> &dp) {
        p.assign(x_grid.size(), 0.0);
        dp.assign(x_grid.size(), 0.0);
        std::vector<double> h;
        for (const auto &s : shifts_for(atoms, angle)) {
            // d/dalpha f(x - alpha * rate) = -rate f'(x - alpha * rate)
            for (std::size_t i = 0; i < x_grid.size(); ++i) {
                const auto [f, fp] = wf.density(x_grid[i] - alpha * s.rate, h);
                p[i] += s.weight * f;
                dp[i] -= s.weight * s.rate * fp;
            }
        }
    };

    if (!phases.is_continuous()) {
        run(phases.quadrature(0), out.p, out.dp_dalpha);
    } else {
        int nodes = 64;
        std::vector<double> p;
        std::vector<double> dp;
        run(phases.quadrature(nodes), p, dp);
        for (;;) {
            std::vector<double> p2;
            std::vector<double> dp2;
            run(phases.quadrature(2 * nodes), p2, dp2);
            double change = 0.0;
            double scale = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) {
                change = std::max({change, std::abs(p2[i] - p[i]), std::abs(dp2[i] - dp[i])});
                scale = std::max({scale, std::abs(p2[i]), std::abs(dp2[i])});
            }
            p = std::move(p2);
            dp = std::move(dp2);
            nodes *= 2;
            if (change <= 1e-10 * std::max(scale, 1.0)) {
                break;
            }
            if (nodes > 16384) {
                fail(ErrorKind::quadrature, "quadrature_density: phase average did not converge");
            }
        }
        out.p = std::move(p);
        out.dp_dalpha = std::move(dp);
    }

    double total = 0.0;
    for (std::size_t i = 1; i < x_grid.size(); ++i) {
        total += 0.5 * (out.p[i] + out.p[i - 1]) * (x_grid[i] - x_grid[i - 1]);
    }
    out.normalization = total;
    if (std::abs(total - 1.0) > 1e-6) {
        fail(ErrorKind::quadrature, "quadrature_density: grid integral is " + text::format_number(total) +
                                        "; widen or refine the grid");
    }
    return out;
}

std::string to_csv(const QuadratureDensity &density) {
    std::ostringstream os;
    os << "x,p\n";
    for (std::size_t i = 0; i < density.x.size(); ++i) {
        os << text::format_number(density.x[i]) << ',' << text::format_number(density.p[i]) << '\n';
    }
    return os.str();
}

QuadratureMoments quadrature_moments_closed(double r, double alpha) {
    require_nonnegative_alpha(alpha, "quadrature_moments_closed");
    if (!(r >= 0.0)) {
        fail(ErrorKind::domain, "quadrature_moments_closed: r must be >= 0");
    }
    const double a2 = alpha * alpha;
    const double e = std::exp(-2.0 * r);
    QuadratureMoments m;
    m.mean_a = a2 + 0.5 * e;
    m.var_a_within_phase = e * (2.0 * a2 + 0.5 * e);
    // The conditional mean 2 a^2 cos^2(phi) + e/2 has variance 4 a^4 Var(cos^2) = a^4 / 2.
    m.var_a_total = m.var_a_within_phase + 0.5 * a2 * a2;
    if (alpha > 0.0) {
        // (d<A>/dalpha)^2 = 4 a^2
        m.var_estimate = m.var_a_within_phase / (4.0 * a2);
        m.var_estimate_total = m.var_a_total / (4.0 * a2);
    }
    return m;
}

GridSampler::GridSampler(const QuadratureDensity &density) : x_(density.x), cdf_(density.x.size(), 0.0) {
    for (std::size_t i = 1; i < x_.size(); ++i) {
        cdf_[i] = cdf_[i - 1] + 0.5 * (density.p[i] + density.p[i - 1]) * (x_[i] - x_[i - 1]);
    }
    const double total = cdf_.back();
    if (!(total > 0.0)) {
        fail(ErrorKind::numeric, "grid sampler: density integrates to zero");
    }
    for (auto &c : cdf_) {
        c /= total;
    }
}

double GridSampler::operator()(double u) const {
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.begin()) {
        return x_.front();
    }
    if (it == cdf_.end()) {
        return x_.back();
    }
    const auto i = static_cast<std::size_t>(it - cdf_.begin());
    const double span = cdf_[i] - cdf_[i - 1];
    const double t = span > 0.0 ? (u - cdf_[i - 1]) / span : 0.5;
    return x_[i - 1] + t * (x_[i] - x_[i - 1]);
}

}  // namespace spreadchan
