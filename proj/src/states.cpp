#include "spreadchan/states.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

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

constexpr double kTailPopulation = 1e-12;

void require(bool ok, const std::string &message) {
    if (!ok) {
        fail(ErrorKind::domain, message);
    }
}

void validate(const StateKind &kind) {
    std::visit(overloaded{
                   [](const Vacuum &) {},
                   [](const FockState &s) { require(s.n >= 0, "fock: n must be >= 0"); },
                   [](const Coherent &s) {
                       require(std::isfinite(s.beta.real()) && std::isfinite(s.beta.imag()), "coherent: beta not finite");
                   },
                   [](const SqueezedVacuum &s) {
                       require(std::isfinite(s.r) && s.r >= 0.0, "squeezed vacuum: r must be >= 0");
                       require(std::isfinite(s.theta), "squeezed vacuum: theta not finite");
                   },
                   [](const MultiCat &s) {
                       require(s.components >= 1, "multi-cat: components must be >= 1");
                       require(std::isfinite(std::abs(s.beta)), "multi-cat: beta not finite");
                       require(std::isfinite(s.theta), "multi-cat: theta not finite");
                   },
                   [](const Thermal &s) { require(std::isfinite(s.nbar) && s.nbar >= 0.0, "thermal: nbar must be >= 0"); },
               },
               kind);
}

// log of |<n|beta>|^2 without the e^{-|beta|^2} factor
double log_poisson_kernel(int n, double mag2) {
    if (n == 0) {
        return 0.0;
    }
    if (mag2 == 0.0) {
        return -INFINITY;
    }
    return n * std::log(mag2) - std::lgamma(n + 1.0);
}

CVec coherent_amplitudes(cplx beta, int count) {
    CVec out(count);
    const double mag = std::abs(beta);
    const double arg = std::arg(beta);
    for (int n = 0; n < count; ++n) {
        if (mag == 0.0) {
            out[n] = n == 0 ? 1.0 : 0.0;
            continue;
        }
        const double logmag = -0.5 * mag * mag + n * std::log(mag) - 0.5 * std::lgamma(n + 1.0);
        out[n] = std::polar(std::exp(logmag), n * arg);
    }
    return out;
}

std::vector<double> cat_populations(const MultiCat &cat, int count) {
    // |sum_k e^{2 pi i k n / K}|^2 = K^2 [n = 0 mod K], so only multiples of K survive.
    const double mag2 = std::norm(cat.beta);
    std::vector<double> logw(static_cast<std::size_t>(count), -INFINITY);
    double top = -INFINITY;
    for (int n = 0; n < count; n += cat.components) {
        logw[n] = log_poisson_kernel(n, mag2);
        top = std::max(top, logw[n]);
    }
    std::vector<double> p(static_cast<std::size_t>(count), 0.0);
    double total = 0.0;
    for (int n = 0; n < count; ++n) {
        if (std::isfinite(logw[n])) {
            p[n] = std::exp(logw[n] - top);
            total += p[n];
        }
    }
    for (double &v : p) {
        v /= total;
    }
    return p;
}

// Closed-form populations long enough that the neglected tail is below kTailPopulation.
int tail_index(const StateSpec &spec) {
    int count = 64;
    for (int attempt = 0; attempt < 12; ++attempt) {
        const auto p = spec.populations(count);
        double tail = 0.0;
        int idx = count;
        for (int n = count - 1; n >= 0; --n) {
            tail += p[n];
            if (tail > kTailPopulation) {
                idx = n + 1;
                break;
            }
        }
        // Require the running tail to be decaying inside the window.
        if (idx < count - 8) {
            return idx;
        }
        count *= 2;
    }
    fail(ErrorKind::truncation, "state tail does not decay within 131072 levels: " + spec.to_string());
}

double energy_of_cat(int components, double mag, double theta, int count) {
    MultiCat cat{components, cplx(mag, 0.0), theta, std::nullopt};
    const auto p = cat_populations(cat, count);
    double e = 0.0;
    for (int n = 0; n < count; ++n) {
        e += n * p[n];
    }
    return e;
}

}  // namespace

StateSpec::StateSpec(StateKind kind) : kind_(std::move(kind)) {
    validate(kind_);
}

StateSpec StateSpec::vacuum() {
    return StateSpec(Vacuum{});
}

StateSpec StateSpec::fock(int n) {
    return StateSpec(FockState{n});
}

StateSpec StateSpec::coherent(cplx beta) {
    return StateSpec(Coherent{beta});
}

StateSpec StateSpec::squeezed(double r, double theta) {
    return StateSpec(SqueezedVacuum{r, theta});
}

StateSpec StateSpec::squeezed_with_energy(double nbar, double theta) {
    require(nbar >= 0.0, "squeezed vacuum: nbar must be >= 0");
    return squeezed(std::asinh(std::sqrt(nbar)), theta);
}

StateSpec StateSpec::multi_cat(int components, cplx beta, double theta) {
    return StateSpec(MultiCat{components, beta, theta, std::nullopt});
}

StateSpec StateSpec::multi_cat_with_energy(int components, double nbar, double theta) {
    require(components >= 1, "multi-cat: components must be >= 1");
    require(std::isfinite(nbar) && nbar >= 0.0, "multi-cat: nbar must be >= 0");
    if (nbar == 0.0) {
        return StateSpec(MultiCat{components, cplx(0.0, 0.0), theta, nbar});
    }
    const int count = static_cast<int>(std::ceil(4.0 * (nbar + 10.0 * std::sqrt(nbar + 1.0)))) + 8 * components + 64;
    // Energy is increasing in |beta| (it is the mean of an exponential family in log|beta|^2).
    double lo = 0.0;
    double hi = std::max(1.0, std::sqrt(nbar));
    while (energy_of_cat(components, hi, theta, count) < nbar) {
        hi *= 2.0;
        require(hi < 1e3, "multi-cat: cannot reach requested energy");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (energy_of_cat(components, mid, theta, count) < nbar) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return StateSpec(MultiCat{components, cplx(0.5 * (lo + hi), 0.0), theta, nbar});
}

StateSpec StateSpec::thermal(double nbar) {
    return StateSpec(Thermal{nbar});
}

bool StateSpec::is_pure() const noexcept {
    return !std::holds_alternative<Thermal>(kind_);
}

double StateSpec::nominal_energy() const {
    return std::visit(overloaded{
                          [](const Vacuum &) { return 0.0; },
                          [](const FockState &s) { return static_cast<double>(s.n); },
                          [](const Coherent &s) { return std::norm(s.beta); },
                          [](const SqueezedVacuum &s) { return std::sinh(s.r) * std::sinh(s.r); },
                          [](const MultiCat &s) {
                              if (s.target_nbar) {
                                  return *s.target_nbar;
                              }
                              const int count = static_cast<int>(std::ceil(4.0 * (std::norm(s.beta) + 10.0 * std::abs(s.beta) + 10.0))) +
                                                8 * s.components + 64;
                              return energy_of_cat(s.components, std::abs(s.beta), s.theta, count);
                          },
                          [](const Thermal &s) { return s.nbar; },
                      },
                      kind_);
}

std::vector<double> StateSpec::populations(int count) const {
    std::vector<double> p(static_cast<std::size_t>(std::max(count, 0)), 0.0);
    if (count <= 0) {
        return p;
    }
    std::visit(overloaded{
                   [&](const Vacuum &) { p[0] = 1.0; },
                   [&](const FockState &s) {
                       if (s.n < count) {
                           p[s.n] = 1.0;
                       }
                   },
                   [&](const Coherent &s) {
                       const double mag2 = std::norm(s.beta);
                       for (int n = 0; n < count; ++n) {
                           p[n] = std::exp(-mag2 + log_poisson_kernel(n, mag2));
                       }
                   },
                   [&](const SqueezedVacuum &s) {
                       const double t2 = std::tanh(s.r) * std::tanh(s.r);
                       double cur = 1.0 / std::cosh(s.r);
                       for (int n = 0; n < count; n += 2) {
                           p[n] = cur;
                           cur *= t2 * (n + 1.0) / (n + 2.0);
                       }
                   },
                   [&](const MultiCat &s) { p = cat_populations(s, count); },
                   [&](const Thermal &s) {
                       const double q = s.nbar / (s.nbar + 1.0);
                       double cur = 1.0 / (s.nbar + 1.0);
                       for (int n = 0; n < count; ++n) {
                           p[n] = cur;
                           cur *= q;
                       }
                   },
               },
               kind_);
    return p;
}

std::string StateSpec::to_string() const {
    using text::format_complex;
    using text::format_exact;
    return std::visit(overloaded{
                          [](const Vacuum &) { return std::string("vac"); },
                          [](const FockState &s) { return "fock:n=" + std::to_string(s.n); },
                          [](const Coherent &s) { return "coh:beta=" + format_complex(s.beta); },
                          [](const SqueezedVacuum &s) {
                              return "sq:r=" + format_exact(s.r) + ",theta=" + format_exact(s.theta);
                          },
                          [](const MultiCat &s) {
                              std::string out = "cat:k=" + std::to_string(s.components);
                              if (s.target_nbar) {
                                  out += ",nbar=" + format_exact(*s.target_nbar);
                              } else {
                                  out += ",beta=" + format_complex(s.beta);
                              }
                              return out + ",theta=" + format_exact(s.theta);
                          },
                          [](const Thermal &s) { return "thermal:nbar=" + format_exact(s.nbar); },
                      },
                      kind_);
}

std::string StateSpec::label() const {
    using text::format_number;
    return std::visit(overloaded{
                          [](const Vacuum &) { return std::string("vac"); },
                          [](const FockState &s) { return "fock_n" + std::to_string(s.n); },
                          [](const Coherent &s) { return "coh_nbar" + format_number(std::norm(s.beta)); },
                          [](const SqueezedVacuum &s) {
                              return "sq_nbar" + format_number(std::sinh(s.r) * std::sinh(s.r)) + "_theta" + format_number(s.theta);
                          },
                          [this](const MultiCat &s) {
                              return "cat_k" + std::to_string(s.components) + "_nbar" + format_number(nominal_energy()) +
                                     "_theta" + format_number(s.theta);
                          },
                          [](const Thermal &s) { return "thermal_nbar" + format_number(s.nbar); },
                      },
                      kind_);
}

StateSpec StateSpec::parse(std::string_view input) {
    const auto parsed = text::split_kind(input);
    const auto &kind = parsed.kind;
    auto field = [&](const std::string &key) -> const text::Field * {
        for (const auto &f : parsed.fields) {
            if (f.key == key) {
                return &f;
            }
        }
        return nullptr;
    };
    auto allow_only = [&](std::initializer_list<const char *> keys) {
        for (const auto &f : parsed.fields) {
            const bool known = std::any_of(keys.begin(), keys.end(), [&](const char *k) { return f.key == k; });
            if (!known) {
                text::parse_failure(input, f.position - f.key.size() - 1, "unknown key '" + f.key + "' for " + kind);
            }
        }
    };
    auto required = [&](const std::string &key) -> const text::Field & {
        const auto *f = field(key);
        if (f == nullptr) {
            text::parse_failure(input, input.size(), "missing key '" + key + "' for " + kind);
        }
        return *f;
    };
    auto optional_double = [&](const std::string &key, double fallback) {
        const auto *f = field(key);
        return f ? text::to_double(*f, input) : fallback;
    };

    try {
        if (kind == "vac" || kind == "vacuum") {
            allow_only({});
            return vacuum();
        }
        if (kind == "fock") {
            allow_only({"n"});
            return fock(text::to_int(required("n"), input));
        }
        if (kind == "coh" || kind == "coherent") {
            allow_only({"beta"});
            return coherent(text::to_complex(required("beta"), input));
        }
        if (kind == "sq" || kind == "squeezed") {
            allow_only({"r", "nbar", "theta"});
            const double theta = optional_double("theta", 0.0);
            if (field("r") && field("nbar")) {
                text::parse_failure(input, field("nbar")->position, "give either r or nbar");
            }
            if (field("nbar")) {
                return squeezed_with_energy(text::to_double(*field("nbar"), input), theta);
            }
            return squeezed(text::to_double(required("r"), input), theta);
        }
        if (kind == "cat") {
            allow_only({"k", "beta", "nbar", "theta"});
            const int k = text::to_int(required("k"), input);
            const double theta = optional_double("theta", 0.0);
            if (field("beta") && field("nbar")) {
                text::parse_failure(input, field("nbar")->position, "give either beta or nbar");
            }
            if (field("nbar")) {
                return multi_cat_with_energy(k, text::to_double(*field("nbar"), input), theta);
            }
            return multi_cat(k, text::to_complex(required("beta"), input), theta);
        }
        if (kind == "thermal") {
            allow_only({"nbar"});
            return thermal(text::to_double(required("nbar"), input));
        }
    } catch (const Error &e) {
        if (e.kind() == ErrorKind::domain) {
            fail(ErrorKind::parse, std::string(e.what()) + " in '" + std::string(input) + "'");
        }
        throw;
    }
    text::parse_failure(input, 0, "unknown state kind '" + kind + "'");
}

ProbeState build_state(const StateSpec &spec, FockDimension dim, const BuildOptions &options) {
    const int d = dim.value();
    ProbeState out = std::visit(
        overloaded{
            [&](const Vacuum &) -> ProbeState {
                CVec v = CVec::Zero(d);
                v[0] = 1.0;
                return StateVector(std::move(v));
            },
            [&](const FockState &s) -> ProbeState {
                if (s.n >= d) {
                    fail(ErrorKind::truncation, "fock state n=" + std::to_string(s.n) + " does not fit in dimension " +
                                                    std::to_string(d));
                }
                CVec v = CVec::Zero(d);
                v[s.n] = 1.0;
                return StateVector(std::move(v));
            },
            [&](const Coherent &s) -> ProbeState { return StateVector::normalized(coherent_amplitudes(s.beta, d)); },
            [&](const SqueezedVacuum &s) -> ProbeState {
                // c_{2m} = (cosh r)^{-1/2} (-e^{i theta} tanh r)^m sqrt((2m)!) / (2^m m!)
                CVec v = CVec::Zero(d);
                const cplx ratio = -std::polar(std::tanh(s.r), s.theta);
                cplx cur = 1.0 / std::sqrt(std::cosh(s.r));
                for (int n = 0; n < d; n += 2) {
                    v[n] = cur;
                    cur *= ratio * std::sqrt((n + 1.0) / (n + 2.0));
                }
                return StateVector::normalized(std::move(v));
            },
            [&](const MultiCat &s) -> ProbeState {
                CVec v = CVec::Zero(d);
                for (int k = 0; k < s.components; ++k) {
                    const double phase = kTwoPi * k / s.components + s.theta;
                    v += coherent_amplitudes(s.beta * std::polar(1.0, phase), d);
                }
                return StateVector::normalized(std::move(v));
            },
            [&](const Thermal &s) -> ProbeState {
                const auto p = spec.populations(d);
                const double total = std::accumulate(p.begin(), p.end(), 0.0);
                CMat m = CMat::Zero(d, d);
                for (int n = 0; n < d; ++n) {
                    m(n, n) = p[n] / total;
                }
                (void)s;
                return DensityOperator(std::move(m));
            },
        },
        spec.kind());

    const double leak = leakage(out);
    if (options.strict && leak > options.leakage_limit) {
        fail(ErrorKind::truncation, "leakage " + text::format_number(leak) + " exceeds " +
                                        text::format_number(options.leakage_limit) + " for " + spec.to_string() +
                                        " at dimension " + std::to_string(d));
    }
    return out;
}

StateVector build_pure_state(const StateSpec &spec, FockDimension dim, const BuildOptions &options) {
    if (!spec.is_pure()) {
        fail(ErrorKind::domain, "expected a pure probe, got " + spec.to_string());
    }
    return std::get<StateVector>(build_state(spec, dim, options));
}

double mean_energy(const ProbeState &state) {
    return std::visit([](const auto &s) { return mean_number(s); }, state);
}

double leakage(const ProbeState &state) {
    return std::visit([](const auto &s) { return s.leakage(); }, state);
}

FockDimension auto_dimension(const StateSpec &spec, double alpha_max) {
    require(alpha_max >= 0.0, "auto_dimension: alpha_max must be >= 0");
    const double n = spec.nominal_energy();
    const int heuristic = static_cast<int>(std::ceil(4.0 * (n + alpha_max * alpha_max + 3.0 * std::sqrt(n + 1.0)) + 20.0));
    // Displacing level m by alpha reaches roughly (sqrt(m) + alpha)^2; pad a few widths.
    const double edge = std::sqrt(static_cast<double>(tail_index(spec)));
    const int displaced = static_cast<int>(std::ceil((edge + alpha_max + 1.5) * (edge + alpha_max + 1.5))) + 8;
    return FockDimension(std::max({heuristic, displaced, 2}));
}

FockDimension auto_dimension(const std::vector<StateSpec> &specs, double alpha_max) {
    int best = 2;
    for (const auto &s : specs) {
        best = std::max(best, auto_dimension(s, alpha_max).value());
    }
    return FockDimension(best);
}

}  // namespace spreadchan
