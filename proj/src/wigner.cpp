#include "spreadchan/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "spreadchan/error.hpp"
#include "spreadchan/parallel.hpp"
#include "spreadchan/text.hpp"

namespace spreadchan {

namespace {

// Largest quadrature standard deviation and |<(x, p)>| for the Gaussian-like kinds.
std::pair<double, double> spread_of(const StateSpec &spec) {
    const double n = spec.nominal_energy();
    if (const auto *s = std::get_if<SqueezedVacuum>(&spec.kind())) {
        return {std::exp(s->r) / std::sqrt(2.0), 0.0};
    }
    if (const auto *c = std::get_if<Coherent>(&spec.kind())) {
        return {std::sqrt(0.5), std::sqrt(2.0) * std::abs(c->beta)};
    }
    if (std::holds_alternative<Thermal>(spec.kind())) {
        return {std::sqrt(n + 0.5), 0.0};
    }
    return {std::sqrt(0.5), 0.0};
}

CMat density_matrix(const ProbeState &state) {
    if (const auto *psi = std::get_if<StateVector>(&state)) {
        return psi->amplitudes() * psi->amplitudes().adjoint();
    }
    return std::get<DensityOperator>(state).matrix();
}

}  // namespace

double PhaseSpaceGrid::integral() const {
    auto weights = [](const std::vector<double> &g) {
        std::vector<double> w(g.size(), 0.0);
        for (std::size_t i = 1; i < g.size(); ++i) {
            const double h = 0.5 * (g[i] - g[i - 1]);
            w[i - 1] += h;
            w[i] += h;
        }
        return w;
    };
    const auto wx = weights(x);
    const auto wp = weights(p);
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = 0; j < p.size(); ++j) {
            total += wx[i] * wp[j] * values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
    return total;
}

double PhaseSpaceGrid::max_abs() const {
    return values.size() ? values.cwiseAbs().maxCoeff() : 0.0;
}

double auto_half_width(const StateSpec &spec) {
    const double n = spec.nominal_energy();
    const auto [sigma, mean] = spread_of(spec);
    return std::max(2.0 * std::sqrt(2.0 * n + 1.0) + 2.0, mean + 4.5 * sigma);
}

RMat displacement_elements(double rho, int dim) {
    if (!(rho >= 0.0) || dim < 1) {
        fail(ErrorKind::domain, "displacement_elements: need rho >= 0 and dim >= 1");
    }
    RMat d = RMat::Zero(dim, dim);
    if (rho == 0.0) {
        d.setIdentity();
        return d;
    }
    // Along each diagonal d_{n+k,n} = sqrt(n!/(n+k)!) rho^k e^{-x/2} L_n^{(k)}(x), x = rho^2, the
    // Laguerre three-term recurrence becomes
    // d_{n+1} = ((2n + 1 + k - x) d_n - sqrt(n (n + k)) d_{n-1}) / sqrt((n + 1)(n + k + 1)).
    // Entries above the diagonal follow from d_{n,n+k} = (-1)^k d_{n+k,n}.
    const double x = rho * rho;
    const double log_rho = std::log(rho);
    for (int k = 0; k < dim; ++k) {
        const int len = dim - k;
        std::vector<double> v(static_cast<std::size_t>(len));
        v[0] = std::exp(-0.5 * x + k * log_rho - 0.5 * std::lgamma(k + 1.0));
        if (len > 1) {
            v[1] = (1.0 + k - x) * v[0] / std::sqrt(k + 1.0);
        }
        for (int n = 1; n + 1 < len; ++n) {
            v[n + 1] = ((2.0 * n + 1.0 + k - x) * v[n] - std::sqrt(n * (n + static_cast<double>(k))) * v[n - 1]) /
                       std::sqrt((n + 1.0) * (n + k + 1.0));
        }
        const double sign = k % 2 ? -1.0 : 1.0;
        for (int n = 0; n < len; ++n) {
            d(n + k, n) = v[n];
            d(n, n + k) = sign * v[n];
        }
    }
    return d;
}

double wigner_at(const ProbeState &state, double x, double p) {
    const CMat r = density_matrix(state);
    const auto dim = static_cast<int>(r.rows());
    const double rho = std::sqrt(2.0) * std::hypot(x, p);
    const double theta = std::atan2(p, x);
    const RMat d = displacement_elements(rho, dim);
    cplx total(0.0, 0.0);
    for (int m = 0; m < dim; ++m) {
        for (int n = 0; n < dim; ++n) {
            const double parity = n % 2 ? -1.0 : 1.0;
            total += r(n, m) * d(m, n) * parity * std::polar(1.0, (m - n) * theta);
        }
    }
    return total.real() / kPi;
}

PhaseSpaceGrid wigner_grid(const ProbeState &state, const GridSpec &spec) {
    if (spec.resolution < 3) {
        fail(ErrorKind::domain, "wigner_grid: resolution must be >= 3");
    }
    if (!spec.half_width || !(*spec.half_width > 0.0)) {
        fail(ErrorKind::domain, "wigner_grid: half width must be > 0");
    }
    const int res = spec.resolution;
    const double h = *spec.half_width;
    const double step = 2.0 * h / (res - 1);
    const double centre = 0.5 * (res - 1);
    PhaseSpaceGrid out;
    const CMat r = density_matrix(state);
    out.dim = static_cast<int>(r.rows());
    out.leakage = leakage(state);
    out.x.resize(static_cast<std::size_t>(res));
    for (int i = 0; i < res; ++i) {
        out.x[i] = (i - centre) * step;
    }
    out.p = out.x;
    out.values = RMat::Zero(res, res);

    // Points sharing x^2 + p^2 share <m|D|n>; the angle enters as e^{i(m-n) theta}.
    std::map<double, std::vector<std::pair<int, int>>> by_radius;
    for (int i = 0; i < res; ++i) {
        for (int j = 0; j < res; ++j) {
            const double a = i - centre;
            const double b = j - centre;
            by_radius[a * a + b * b].emplace_back(i, j);
        }
    }
    std::vector<const std::pair<const double, std::vector<std::pair<int, int>>> *> groups;
    groups.reserve(by_radius.size());
    for (const auto &g : by_radius) {
        groups.push_back(&g);
    }

    const int dim = out.dim;
    std::vector<double> residue(groups.size(), 0.0);
    parallel_for(groups.size(), [&](std::size_t g) {
        const double rho = std::sqrt(2.0) * step * std::sqrt(groups[g]->first);
        const RMat d = displacement_elements(rho, dim);
        // C_k = sum_n rho_{n,n+k} d_{n+k,n} (-1)^n, k = -(dim-1)..dim-1
        CVec coeff = CVec::Zero(2 * dim - 1);
        for (int n = 0; n < dim; ++n) {
            const double parity = n % 2 ? -1.0 : 1.0;
            for (int m = 0; m < dim; ++m) {
                coeff[m - n + dim - 1] += r(n, m) * (parity * d(m, n));
            }
        }
        for (const auto &[i, j] : groups[g]->second) {
            const double theta = std::atan2(out.p[j], out.x[i]);
            const cplx z = std::polar(1.0, theta);
            cplx sum(0.0, 0.0);
            for (int k = 2 * dim - 2; k >= 0; --k) {
                sum = sum * z + coeff[k];
            }
            sum *= std::polar(1.0, -(dim - 1) * theta);
            out.values(i, j) = sum.real() / kPi;
            residue[g] = std::max(residue[g], std::abs(sum.imag()) / kPi);
        }
    });
    out.max_imaginary_residue = *std::max_element(residue.begin(), residue.end());
    if (out.max_imaginary_residue > 1e-10) {
        fail(ErrorKind::numeric, "wigner_grid: imaginary residue " + text::format_number(out.max_imaginary_residue));
    }

    const double peak = out.max_abs();
    double edge = 0.0;
    for (int k = 0; k < res; ++k) {
        edge = std::max({edge, std::abs(out.values(0, k)), std::abs(out.values(res - 1, k)),
                         std::abs(out.values(k, 0)), std::abs(out.values(k, res - 1))});
    }
    if (edge > 1e-4 * peak) {
        out.warnings.push_back("W reaches " + text::format_number(edge / peak) +
                               " of its peak on the grid edge; widen the window");
    }
    if (out.leakage > 1e-8) {
        out.warnings.push_back("state leakage " + text::format_number(out.leakage) + " at dim " + std::to_string(dim));
    }
    return out;
}

PhaseSpaceGrid wigner_grid(const StateSpec &spec, const GridSpec &grid) {
    GridSpec g = grid;
    if (!g.half_width) {
        g.half_width = auto_half_width(spec);
    }
    return wigner_grid(build_state(spec, auto_dimension(spec, 0.0)), g);
}

std::string to_csv(const PhaseSpaceGrid &grid) {
    std::ostringstream os;
    os << "x,p,W\n";
    for (std::size_t i = 0; i < grid.x.size(); ++i) {
        for (std::size_t j = 0; j < grid.p.size(); ++j) {
            os << text::format_number(grid.x[i]) << ',' << text::format_number(grid.p[j]) << ','
               << text::format_number(grid.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) << '\n';
        }
    }
    return os.str();
}

}  // namespace spreadchan
