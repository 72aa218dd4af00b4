#include "spreadchan/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "spreadchan/error.hpp"
#include "spreadchan/text.hpp"

namespace spreadchan {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double wrap_phase(double phi) {
    double w = std::fmod(phi, kTwoPi);
    if (w < 0.0) {
        w += kTwoPi;
    }
    return w;
}

// Best & Fisher (1979) rejection sampler.
double sample_von_mises(double mu, double kappa, const std::function<double()> &next_uniform) {
    if (kappa < 1e-8) {
        return kTwoPi * next_uniform();
    }
    const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
    const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
    const double r = (1.0 + rho * rho) / (2.0 * rho);
    for (;;) {
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double u3 = next_uniform();
        const double z = std::cos(kPi * u1);
        const double f = (1.0 + r * z) / (r + z);
        const double c = kappa * (r - f);
        if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
            const double angle = std::acos(std::clamp(f, -1.0, 1.0));
            return wrap_phase(mu + (u3 > 0.5 ? angle : -angle));
        }
    }
}

// Columns sqrt(weight) * D(alpha, phi_j) v for each node and each ensemble member.
CMat channel_factor(const std::vector<std::pair<double, CVec>> &ensemble, const std::vector<PhaseAtom> &nodes,
                    const FixedAlphaDisplacement &disp) {
    const auto dim = ensemble.front().second.size();
    CMat x(dim, static_cast<Eigen::Index>(ensemble.size() * nodes.size()));
    Eigen::Index col = 0;
    for (const auto &[p, v] : ensemble) {
        for (const auto &node : nodes) {
            x.col(col++) = std::sqrt(p * node.weight) * disp.apply(node.phi, v);
        }
    }
    return x;
}

std::vector<std::pair<double, CVec>> pure_ensemble(const ProbeState &state) {
    std::vector<std::pair<double, CVec>> out;
    if (const auto *psi = std::get_if<StateVector>(&state)) {
        out.emplace_back(1.0, psi->amplitudes());
        return out;
    }
    const CMat &m = std::get<DensityOperator>(state).matrix();
    Eigen::SelfAdjointEigenSolver<CMat> solver(m);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double p = solver.eigenvalues()[i];
        if (p > 1e-16) {
            out.emplace_back(p, solver.eigenvectors().col(i));
        }
    }
    return out;
}

CMat averaged_output(const std::vector<std::pair<double, CVec>> &ensemble, const std::vector<PhaseAtom> &nodes,
                     const FixedAlphaDisplacement &disp) {
    const CMat x = channel_factor(ensemble, nodes, disp);
    CMat rho = x * x.adjoint();
    return 0.5 * (rho + rho.adjoint());
}

}  // namespace

void require_nonnegative_alpha(double alpha, const char *where) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        fail(ErrorKind::domain, std::string(where) + ": alpha must be a finite value >= 0, got " + std::to_string(alpha));
    }
}

PhaseDistribution::PhaseDistribution(Kind kind) : kind_(std::move(kind)) {
    std::visit(overloaded{
                   [](const UniformPhase &) {},
                   [](const VonMisesPhase &v) {
                       if (!std::isfinite(v.mu) || !std::isfinite(v.kappa) || v.kappa < 0.0) {
                           fail(ErrorKind::domain, "von Mises: need finite mu and kappa >= 0");
                       }
                   },
                   [](const DiscretePhase &d) {
                       if (d.atoms.empty()) {
                           fail(ErrorKind::domain, "discrete phases: no atoms");
                       }
                       double total = 0.0;
                       for (const auto &a : d.atoms) {
                           if (!(a.weight > 0.0) || !std::isfinite(a.phi)) {
                               fail(ErrorKind::domain, "discrete phases: weights must be > 0 and phases finite");
                           }
                           total += a.weight;
                       }
                       if (std::abs(total - 1.0) > 1e-12) {
                           fail(ErrorKind::domain, "discrete phases: weights sum to " + text::format_exact(total) + ", not 1");
                       }
                   },
               },
               kind_);
}

PhaseDistribution PhaseDistribution::uniform() {
    return PhaseDistribution(UniformPhase{});
}

PhaseDistribution PhaseDistribution::von_mises(double mu, double kappa) {
    return PhaseDistribution(VonMisesPhase{mu, kappa});
}

PhaseDistribution PhaseDistribution::discrete(std::vector<PhaseAtom> atoms) {
    return PhaseDistribution(DiscretePhase{std::move(atoms)});
}

PhaseDistribution PhaseDistribution::delta(double phi) {
    return discrete({PhaseAtom{phi, 1.0}});
}

bool PhaseDistribution::is_uniform() const noexcept {
    return std::holds_alternative<UniformPhase>(kind_);
}

bool PhaseDistribution::is_continuous() const noexcept {
    return !std::holds_alternative<DiscretePhase>(kind_);
}

PhaseDistribution PhaseDistribution::parse(std::string_view input) {
    const auto colon = input.find(':');
    const std::string kind(input.substr(0, colon));
    try {
        if (kind == "uniform") {
            if (colon != std::string_view::npos) {
                text::parse_failure(input, colon, "uniform takes no parameters");
            }
            return uniform();
        }
        if (kind == "vonmises") {
            const auto parsed = text::split_kind(input);
            double mu = 0.0;
            double kappa = -1.0;
            for (const auto &f : parsed.fields) {
                if (f.key == "mu") {
                    mu = text::to_double(f, input);
                } else if (f.key == "kappa") {
                    kappa = text::to_double(f, input);
                } else {
                    text::parse_failure(input, f.position, "unknown key '" + f.key + "' for vonmises");
                }
            }
            if (kappa < 0.0) {
                text::parse_failure(input, input.size(), "vonmises needs kappa >= 0");
            }
            return von_mises(mu, kappa);
        }
        if (kind == "discrete") {
            if (colon == std::string_view::npos) {
                text::parse_failure(input, input.size(), "discrete needs atoms phi@weight");
            }
            std::vector<PhaseAtom> atoms;
            std::size_t pos = colon + 1;
            while (pos <= input.size()) {
                auto comma = input.find(',', pos);
                if (comma == std::string_view::npos) {
                    comma = input.size();
                }
                const auto item = input.substr(pos, comma - pos);
                const auto at = item.find('@');
                if (at == std::string_view::npos) {
                    text::parse_failure(input, pos, "expected phi@weight");
                }
                atoms.push_back(PhaseAtom{text::to_double(item.substr(0, at), pos, input),
                                          text::to_double(item.substr(at + 1), pos + at + 1, input)});
                pos = comma + 1;
                if (comma == input.size()) {
                    break;
                }
            }
            return discrete(std::move(atoms));
        }
    } catch (const Error &e) {
        if (e.kind() == ErrorKind::domain) {
            fail(ErrorKind::parse, std::string(e.what()) + " in '" + std::string(input) + "'");
        }
        throw;
    }
    text::parse_failure(input, 0, "unknown phase distribution '" + kind + "'");
}

std::string PhaseDistribution::to_string() const {
    return std::visit(overloaded{
                          [](const UniformPhase &) { return std::string("uniform"); },
                          [](const VonMisesPhase &v) {
                              return "vonmises:mu=" + text::format_exact(v.mu) + ",kappa=" + text::format_exact(v.kappa);
                          },
                          [](const DiscretePhase &d) {
                              std::string out = "discrete:";
                              for (std::size_t i = 0; i < d.atoms.size(); ++i) {
                                  if (i) {
                                      out += ",";
                                  }
                                  out += text::format_exact(d.atoms[i].phi) + "@" + text::format_exact(d.atoms[i].weight);
                              }
                              return out;
                          },
                      },
                      kind_);
}

std::vector<PhaseAtom> PhaseDistribution::quadrature(int nodes) const {
    return std::visit(overloaded{
                          [&](const UniformPhase &) {
                              if (nodes < 8) {
                                  fail(ErrorKind::quadrature, "phase quadrature needs at least 8 nodes");
                              }
                              std::vector<PhaseAtom> out(static_cast<std::size_t>(nodes));
                              for (int j = 0; j < nodes; ++j) {
                                  out[j] = PhaseAtom{kTwoPi * j / nodes, 1.0 / nodes};
                              }
                              return out;
                          },
                          [&](const VonMisesPhase &v) {
                              if (nodes < 8) {
                                  fail(ErrorKind::quadrature, "phase quadrature needs at least 8 nodes");
                              }
                              std::vector<PhaseAtom> out(static_cast<std::size_t>(nodes));
                              double total = 0.0;
                              for (int j = 0; j < nodes; ++j) {
                                  const double phi = kTwoPi * j / nodes;
                                  const double w = std::exp(v.kappa * (std::cos(phi - v.mu) - 1.0));
                                  out[j] = PhaseAtom{phi, w};
                                  total += w;
                              }
                              for (auto &a : out) {
                                  a.weight /= total;
                              }
                              return out;
                          },
                          [](const DiscretePhase &d) { return d.atoms; },
                      },
                      kind_);
}

double PhaseDistribution::sample(const std::function<double()> &next_uniform) const {
    return std::visit(overloaded{
                          [&](const UniformPhase &) { return kTwoPi * next_uniform(); },
                          [&](const VonMisesPhase &v) { return sample_von_mises(v.mu, v.kappa, next_uniform); },
                          [&](const DiscretePhase &d) {
                              const double u = next_uniform();
                              double acc = 0.0;
                              for (const auto &a : d.atoms) {
                                  acc += a.weight;
                                  if (u < acc) {
                                      return a.phi;
                                  }
                              }
                              return d.atoms.back().phi;
                          },
                      },
                      kind_);
}

int default_phase_nodes(FockDimension dim) {
    return std::max(64, 4 * dim.value());
}

CMat FixedAlphaDisplacement::matrix(double phi) const {
    const auto d = zero_phase_.rows();
    CVec q(d);
    for (Eigen::Index n = 0; n < d; ++n) {
        q[n] = std::polar(1.0, phi * static_cast<double>(n));
    }
    return q.asDiagonal() * zero_phase_ * q.conjugate().asDiagonal();
}

CVec FixedAlphaDisplacement::apply(double phi, const CVec &v) const {
    const auto d = zero_phase_.rows();
    if (v.size() != d) {
        fail(ErrorKind::shape, "displacement: vector dimension differs");
    }
    CVec q(d);
    for (Eigen::Index n = 0; n < d; ++n) {
        q[n] = std::polar(1.0, phi * static_cast<double>(n));
    }
    const CVec rotated = q.conjugate().cwiseProduct(v);
    const CVec moved = zero_phase_ * rotated;
    return q.cwiseProduct(moved);
}

CVec FixedAlphaDisplacement::overlap_coefficients(const CVec &psi) const {
    const auto d = zero_phase_.rows();
    if (psi.size() != d) {
        fail(ErrorKind::shape, "overlap coefficients: vector dimension differs");
    }
    CVec c = CVec::Zero(2 * d - 1);
    for (Eigen::Index m = 0; m < d; ++m) {
        const cplx left = std::conj(psi[m]);
        if (left == cplx(0.0, 0.0)) {
            continue;
        }
        for (Eigen::Index n = 0; n < d; ++n) {
            c[m - n + d - 1] += left * zero_phase_(m, n) * psi[n];
        }
    }
    return c;
}

Displacer::Displacer(FockDimension dim) {
    const int d = dim.value();
    RMat x = RMat::Zero(d, d);
    for (int n = 1; n < d; ++n) {
        x(n - 1, n) = x(n, n - 1) = std::sqrt(static_cast<double>(n));
    }
    Eigen::SelfAdjointEigenSolver<RMat> solver(x);
    if (solver.info() != Eigen::Success) {
        fail(ErrorKind::numeric, "displacer: eigendecomposition failed");
    }
    eigenvalues_ = solver.eigenvalues();
    eigenvectors_ = solver.eigenvectors();
}

FixedAlphaDisplacement Displacer::at(double alpha) const {
    require_nonnegative_alpha(alpha, "displacement");
    // a^dagger - a = S (-i X) S^dagger with S = diag(i^n), X = a + a^dagger, so
    // D(alpha, 0)_{mn} = Re(i^{m-n} [W e^{-i alpha Lambda} W^T]_{mn}), which is real.
    const auto d = eigenvalues_.size();
    RVec c(d);
    RVec s(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        c[j] = std::cos(alpha * eigenvalues_[j]);
        s[j] = std::sin(alpha * eigenvalues_[j]);
    }
    const RMat even = eigenvectors_ * c.asDiagonal() * eigenvectors_.transpose();
    const RMat odd = eigenvectors_ * s.asDiagonal() * eigenvectors_.transpose();
    CMat zero_phase(d, d);
    for (Eigen::Index n = 0; n < d; ++n) {
        for (Eigen::Index m = 0; m < d; ++m) {
            double v = 0.0;
            switch (((m - n) % 4 + 4) % 4) {
                case 0:
                    v = even(m, n);
                    break;
                case 1:
                    v = odd(m, n);
                    break;
                case 2:
                    v = -even(m, n);
                    break;
                default:
                    v = -odd(m, n);
                    break;
            }
            zero_phase(m, n) = v;
        }
    }
    return FixedAlphaDisplacement(alpha, std::move(zero_phase));
}

Operator Displacer::operator()(double alpha, double phi) const {
    return Operator(at(alpha).matrix(phi));
}

Operator displacement(double alpha, double phi, FockDimension dim) {
    require_nonnegative_alpha(alpha, "displacement");
    const auto ladder = make_ladder(dim);
    const Operator generator = std::polar(alpha, phi) * ladder.creation - std::polar(alpha, -phi) * ladder.annihilation;
    return mat_exp(generator);
}

Operator displacement_generator(double phi, FockDimension dim) {
    const auto ladder = make_ladder(dim);
    const Operator inner = std::polar(1.0, phi) * ladder.creation - std::polar(1.0, -phi) * ladder.annihilation;
    return cplx(0.0, -1.0) * inner;
}

DensityOperator apply_channel(const ProbeState &state, const ChannelSpec &spec) {
    const auto dim = std::visit([](const auto &s) { return s.dimension(); }, state);
    return apply_channel(state, spec, Displacer(dim));
}

DensityOperator apply_channel(const ProbeState &state, const ChannelSpec &spec, const Displacer &displacer) {
    require_nonnegative_alpha(spec.alpha, "apply_channel");
    const auto dim = std::visit([](const auto &s) { return s.dimension(); }, state);
    if (!(dim == displacer.dimension())) {
        fail(ErrorKind::shape, "apply_channel: displacer dimension differs from state");
    }
    if (spec.alpha == 0.0) {
        return std::visit(overloaded{
                              [](const StateVector &psi) { return DensityOperator::from_pure(psi); },
                              [](const DensityOperator &rho) { return rho; },
                          },
                          state);
    }
    const int nodes = spec.quadrature_nodes == 0 ? default_phase_nodes(dim) : spec.quadrature_nodes;
    if (spec.phases.is_continuous() && nodes < 8) {
        fail(ErrorKind::quadrature, "apply_channel: at least 8 quadrature nodes required");
    }
    const auto ensemble = pure_ensemble(state);
    const auto disp = displacer.at(spec.alpha);
    CMat rho = averaged_output(ensemble, spec.phases.quadrature(nodes), disp);
    if (spec.verify_convergence && spec.phases.is_continuous()) {
        const CMat refined = averaged_output(ensemble, spec.phases.quadrature(2 * nodes), disp);
        const double change = (refined - rho).cwiseAbs().maxCoeff();
        if (change > 1e-10) {
            fail(ErrorKind::quadrature, "apply_channel: doubling phase nodes changed the output by " +
                                            text::format_number(change) + "; increase quadrature_nodes");
        }
        rho = refined;
    }
    // Renormalize the truncated-space rounding; leakage stays visible on the diagonal.
    rho /= rho.trace().real();
    return DensityOperator(std::move(rho));
}

}  // namespace spreadchan
