#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <variant>

#include "CLI11.hpp"
#include "json.hpp"
#include "spreadchan/error.hpp"
#include "spreadchan/estimation.hpp"
#include "spreadchan/fisher.hpp"
#include "spreadchan/measurement.hpp"
#include "spreadchan/states.hpp"
#include "spreadchan/text.hpp"
#include "spreadchan/wigner.hpp"

namespace spreadchan::cli {

namespace {

using json = nlohmann::ordered_json;
using Cell = std::variant<std::monostate, double, std::int64_t, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

struct Manifest {
    std::string command;
    std::vector<std::string> argv;
    json config = json::object();
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> dims;
    std::vector<std::pair<std::string, double>> leakage;
    std::vector<std::string> notes;
    std::optional<std::string> timestamp;
};

struct Output {
    Manifest manifest;
    Table table;
    bool ambiguous = false;
};

// Right limit used where the self-projection CFI sits on a support change.
constexpr double kRightLimitAlpha = 1e-3;

std::string cell_text(const Cell &c) {
    return std::visit(
        [](const auto &v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
                return "";
            } else if constexpr (std::is_same_v<T, double>) {
                return text::format_number(v);
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
                return std::to_string(v);
            } else {
                return v;
            }
        },
        c);
}

json cell_json(const Cell &c) {
    return std::visit(
        [](const auto &v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
                return nullptr;
            } else if constexpr (std::is_same_v<T, double>) {
                if (!std::isfinite(v)) {
                    return nullptr;
                }
                // Same 12 significant digits as the CSV form.
                return std::stod(text::format_number(v));
            } else {
                return v;
            }
        },
        c);
}

json manifest_json(const Manifest &m) {
    json j;
    j["command"] = m.command;
    j["argv"] = m.argv;
    j["config"] = m.config;
    j["seed"] = m.seed;
    j["version"] = SPREADCHAN_VERSION;
    json dims = json::object();
    for (const auto &[label, d] : m.dims) {
        dims[label] = d;
    }
    j["dim"] = dims;
    json leak = json::object();
    for (const auto &[label, v] : m.leakage) {
        leak[label] = std::stod(text::format_number(v));
    }
    j["leakage"] = leak;
    j["notes"] = m.notes;
    if (m.timestamp) {
        j["timestamp"] = *m.timestamp;
    }
    return j;
}

std::string render_csv(const Output &o) {
    const Manifest &m = o.manifest;
    std::ostringstream os;
    os << "# command: " << m.command << '\n';
    os << "# argv: " << json(m.argv).dump() << '\n';
    os << "# config: " << m.config.dump() << '\n';
    os << "# seed: " << m.seed << '\n';
    os << "# version: " << SPREADCHAN_VERSION << '\n';
    for (const auto &[label, d] : m.dims) {
        os << "# dim: " << label << '=' << d << '\n';
    }
    for (const auto &[label, v] : m.leakage) {
        os << "# leakage: " << label << '=' << text::format_number(v) << '\n';
    }
    for (const auto &n : m.notes) {
        os << "# note: " << n << '\n';
    }
    if (m.timestamp) {
        os << "# timestamp: " << *m.timestamp << '\n';
    }
    for (std::size_t i = 0; i < o.table.columns.size(); ++i) {
        os << (i ? "," : "") << o.table.columns[i];
    }
    os << '\n';
    for (const auto &row : o.table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            os << (i ? "," : "") << cell_text(row[i]);
        }
        os << '\n';
    }
    return os.str();
}

std::string render_json(const Output &o) {
    json j;
    j["manifest"] = manifest_json(o.manifest);
    j["columns"] = o.table.columns;
    json rows = json::array();
    for (const auto &row : o.table.rows) {
        json r = json::array();
        for (const auto &c : row) {
            r.push_back(cell_json(c));
        }
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    return j.dump(2) + "\n";
}

std::optional<int> parse_dim(const std::string &text) {
    if (text == "auto") {
        return std::nullopt;
    }
    std::size_t used = 0;
    int d = 0;
    try {
        d = std::stoi(text, &used);
    } catch (const std::exception &) {
        used = 0;
    }
    if (used != text.size() || d < 2) {
        fail(ErrorKind::parse, "--dim expects 'auto' or an integer >= 2, got '" + text + "'");
    }
    return d;
}

std::vector<StateSpec> parse_states(const std::vector<std::string> &texts) {
    std::vector<StateSpec> out;
    out.reserve(texts.size());
    for (const auto &t : texts) {
        out.push_back(StateSpec::parse(t));
    }
    return out;
}

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

double max_of(const std::vector<double> &v) {
    return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

// Options shared by the commands that accept them.
struct Common {
    std::vector<std::string> states;
    std::string phases = "uniform";
    std::string alpha;
    std::string dim = "auto";
    std::uint64_t seed = 0;
    bool seed_given = false;
    double eps = 0.0;
    std::string out;
    std::string format = "csv";
    bool strict = false;
    bool timestamp = false;
};

void add_output_flags(CLI::App *cmd, Common &c) {
    cmd->add_option("--out", c.out, "Output file (stdout when omitted)");
    cmd->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_flag("--strict", c.strict, "Require --seed and fail with exit code 4 on ambiguous estimates");
    cmd->add_flag("--timestamp", c.timestamp, "Add a wall-clock line to the manifest (breaks byte identity)");
}

json base_config(const Common &c) {
    json j;
    j["state"] = c.states;
    j["phases"] = c.phases;
    j["alpha"] = c.alpha;
    j["format"] = c.format;
    j["strict"] = c.strict;
    return j;
}

// fidelity ---------------------------------------------------------------

struct FidelityArgs {
    Common c;
    std::optional<double> fixed_phase;
};

Output cmd_fidelity(const FidelityArgs &a) {
    const auto states = parse_states(a.c.states);
    const auto phases = a.fixed_phase ? PhaseDistribution::delta(*a.fixed_phase) : PhaseDistribution::parse(a.c.phases);
    const auto alphas = parse_range(a.c.alpha);
    const auto dim = parse_dim(a.c.dim);

    Output o;
    o.manifest.config = base_config(a.c);
    o.manifest.config["dim"] = a.c.dim;
    if (a.fixed_phase) {
        o.manifest.config.erase("phases");
        o.manifest.config["fixed_phase"] = text::format_exact(*a.fixed_phase);
        o.table.columns = {"alpha", "state_label", "phi", "fidelity", "overlap"};
    } else {
        o.table.columns = {"alpha", "state_label", "fidelity"};
    }
    for (const auto &spec : states) {
        const std::string label = spec.label();
        std::vector<double> values(alphas.size());
        const bool closed = !dim && p0_closed(spec, 0.0, phases).has_value();
        if (closed) {
            for (std::size_t i = 0; i < alphas.size(); ++i) {
                values[i] = *p0_closed(spec, alphas[i], phases);
            }
            o.manifest.dims.emplace_back(label, "closed-form");
        } else {
            const FockDimension d = dim ? FockDimension(*dim) : auto_dimension(spec, max_of(alphas));
            const SelfProjectionCurve curve(spec, phases, d);
            double leak = 0.0;
            for (std::size_t i = 0; i < alphas.size(); ++i) {
                const auto e = curve.evaluate(alphas[i]);
                values[i] = e.value;
                leak = std::max(leak, e.leakage);
            }
            o.manifest.dims.emplace_back(label, std::to_string(d.value()));
            o.manifest.leakage.emplace_back(label, leak);
        }
        for (std::size_t i = 0; i < alphas.size(); ++i) {
            if (a.fixed_phase) {
                o.table.rows.push_back({alphas[i], label, *a.fixed_phase, values[i], std::sqrt(std::max(0.0, values[i]))});
            } else {
                o.table.rows.push_back({alphas[i], label, values[i]});
            }
        }
    }
    return o;
}

// cfi --------------------------------------------------------------------

Output cmd_cfi(const Common &c) {
    const auto states = parse_states(c.states);
    const auto phases = PhaseDistribution::parse(c.phases);
    const auto alphas = parse_range(c.alpha);
    Output o;
    o.manifest.config = base_config(c);
    o.manifest.config["eps"] = text::format_exact(c.eps);
    o.table.columns = {"alpha", "state_label", "cfi"};
    bool limit_used = false;
    for (const auto &spec : states) {
        for (double alpha : alphas) {
            auto rep = cfi_self_projection(spec, phases, alpha, c.eps);
            if (rep.degenerate) {
                rep = cfi_self_projection(spec, phases, kRightLimitAlpha, c.eps);
                limit_used = true;
            }
            o.table.rows.push_back({alpha, spec.label(), rep.value});
        }
        o.manifest.dims.emplace_back(spec.label(), p0_closed(spec, 0.0, phases) ? "closed-form"
                                                                                 : std::to_string(auto_dimension(spec, max_of(alphas) + 1e-3).value()));
    }
    if (limit_used) {
        o.manifest.notes.push_back("rows where the outcome support changes (alpha = 0, eps = 0) report the right limit, "
                                   "evaluated at alpha = " + text::format_number(kRightLimitAlpha));
    }
    return o;
}

// homodyne ---------------------------------------------------------------

struct HomodyneArgs {
    Common c;
    double r = 1.5;
};

Output cmd_homodyne(const HomodyneArgs &a) {
    const auto phases = PhaseDistribution::parse(a.c.phases);
    const auto alphas = parse_range(a.c.alpha);
    const auto spec = StateSpec::squeezed(a.r);
    Output o;
    o.manifest.config = base_config(a.c);
    o.manifest.config.erase("state");
    o.manifest.config["r"] = text::format_exact(a.r);
    o.table.columns = {"alpha", "cfi_quadrature", "cfi_self_projection", "var_estimate_closed"};
    bool empty_var = false;
    bool limit_used = false;
    for (double alpha : alphas) {
        const auto quad = cfi_quadrature(spec, alpha, phases);
        auto self = cfi_self_projection(spec, phases, alpha);
        if (self.degenerate) {
            self = cfi_self_projection(spec, phases, kRightLimitAlpha);
            limit_used = true;
        }
        const auto moments = quadrature_moments_closed(a.r, alpha);
        Cell var;
        if (moments.var_estimate) {
            var = *moments.var_estimate;
        } else {
            empty_var = true;
        }
        o.table.rows.push_back({alpha, quad.value, self.value, var});
    }
    o.manifest.dims.emplace_back(spec.label(), std::to_string(auto_dimension(spec, 0.0).value()));
    o.manifest.notes.push_back("x grid: 4001 points over 8 max(1, e^r) + sqrt(2) alpha, verified on a grid of half the spacing");
    o.manifest.notes.push_back("var_estimate_closed = e^{-2r}(4 alpha^2 + e^{-2r})/(8 alpha^2), error propagation for "
                               "A = x^2 with the within-phase variance");
    if (empty_var) {
        o.manifest.notes.push_back("var_estimate_closed is empty at alpha = 0, where d<A>/dalpha vanishes");
    }
    if (limit_used) {
        o.manifest.notes.push_back("cfi_self_projection at alpha = 0 reports the right limit, evaluated at alpha = " +
                                   text::format_number(kRightLimitAlpha));
    }
    return o;
}

// wigner -----------------------------------------------------------------

struct WignerArgs {
    Common c;
    std::optional<double> half_width;
    int resolution = 201;
};

Output cmd_wigner(const WignerArgs &a, std::ostream &err) {
    if (a.c.states.size() != 1) {
        fail(ErrorKind::parse, "wigner takes exactly one --state");
    }
    const auto spec = StateSpec::parse(a.c.states.front());
    const auto dim = parse_dim(a.c.dim);
    GridSpec g;
    g.half_width = a.half_width ? *a.half_width : auto_half_width(spec);
    g.resolution = a.resolution;
    const FockDimension d = dim ? FockDimension(*dim) : auto_dimension(spec, 0.0);
    BuildOptions build;
    build.strict = false;
    const auto grid = wigner_grid(build_state(spec, d, build), g);

    Output o;
    o.manifest.config["state"] = a.c.states;
    o.manifest.config["half_width"] = text::format_exact(*g.half_width);
    o.manifest.config["resolution"] = a.resolution;
    o.manifest.config["dim"] = a.c.dim;
    o.manifest.config["format"] = a.c.format;
    o.manifest.dims.emplace_back(spec.label(), std::to_string(grid.dim));
    o.manifest.leakage.emplace_back(spec.label(), grid.leakage);
    o.manifest.notes.push_back("W(x, p) integrates to one over dx dp; integral on this grid " +
                               text::format_number(grid.integral()));
    for (const auto &w : grid.warnings) {
        o.manifest.notes.push_back("warning: " + w);
        err << "warning: " << w << '\n';
    }
    o.table.columns = {"x", "p", "W"};
    for (std::size_t i = 0; i < grid.x.size(); ++i) {
        for (std::size_t j = 0; j < grid.p.size(); ++j) {
            o.table.rows.push_back(
                {grid.x[i], grid.p[j], grid.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
        }
    }
    return o;
}

// mc ---------------------------------------------------------------------

struct McArgs {
    Common c;
    std::vector<std::int64_t> reps{10000};
    int trials = 500;
    int samples = 50;
    bool randomize_rotation = false;
};

void require_seed(const Common &c) {
    if (c.strict && !c.seed_given) {
        fail(ErrorKind::parse, "--strict requires --seed");
    }
}

json mc_config(const McArgs &a) {
    json j = base_config(a.c);
    j["seed"] = a.c.seed;
    j["eps"] = text::format_exact(a.c.eps);
    return j;
}

Output cmd_mc_simulate(const McArgs &a) {
    require_seed(a.c);
    const auto states = parse_states(a.c.states);
    const auto phases = PhaseDistribution::parse(a.c.phases);
    const auto alphas = parse_range(a.c.alpha);
    if (a.reps.size() != 1) {
        fail(ErrorKind::parse, "mc simulate takes a single --reps value");
    }
    Output o;
    o.manifest.config = mc_config(a);
    o.manifest.config["reps"] = a.reps;
    o.manifest.config["randomize_rotation"] = a.randomize_rotation;
    o.manifest.seed = a.c.seed;
    o.manifest.notes.push_back("state i uses seed + i; alpha index j uses trial j");
    o.table.columns = {"alpha", "state_label", "repetitions", "m0", "m1", "alpha_hat", "crb_sigma", "boundary", "ambiguous"};
    for (std::size_t s = 0; s < states.size(); ++s) {
        for (std::size_t j = 0; j < alphas.size(); ++j) {
            ExperimentConfig cfg;
            cfg.probe = states[s];
            cfg.phases = phases;
            cfg.alpha_true = alphas[j];
            cfg.repetitions = a.reps.front();
            cfg.seed = a.c.seed + s;
            cfg.trial = j;
            cfg.dark_noise = a.c.eps;
            cfg.randomize_rotation = a.randomize_rotation;
            const auto r = simulate(cfg);
            o.ambiguous = o.ambiguous || r.ambiguous;
            o.table.rows.push_back({alphas[j], states[s].label(), cfg.repetitions, r.m0, r.m1, r.alpha_hat, r.crb_sigma,
                                    std::int64_t{r.boundary}, std::int64_t{r.ambiguous}});
        }
        o.manifest.dims.emplace_back(states[s].label(), p0_closed(states[s], 0.0, phases)
                                                             ? "closed-form"
                                                             : std::to_string(auto_dimension(states[s], 3.0).value()));
    }
    return o;
}

Output cmd_mc_overlap(const McArgs &a) {
    require_seed(a.c);
    const auto states = parse_states(a.c.states);
    const auto alphas = parse_range(a.c.alpha);
    Output o;
    o.manifest.config = mc_config(a);
    o.manifest.config.erase("phases");
    o.manifest.config.erase("eps");
    o.manifest.config["samples"] = a.samples;
    o.manifest.seed = a.c.seed;
    o.manifest.notes.push_back("phases are uniform; rms is the spread of |overlap| over the sampled phases, not a standard error");
    o.table.columns = {"alpha", "state_label", "mean", "rms"};
    for (std::size_t s = 0; s < states.size(); ++s) {
        const auto rows = overlap_fluctuations(states[s], alphas, a.samples, a.c.seed + s);
        for (const auto &r : rows) {
            o.table.rows.push_back({r.alpha, states[s].label(), r.mean, r.rms});
        }
        o.manifest.dims.emplace_back(states[s].label(), std::to_string(auto_dimension(states[s], max_of(alphas)).value()));
    }
    return o;
}

Output cmd_mc_rmse(const McArgs &a) {
    require_seed(a.c);
    const auto states = parse_states(a.c.states);
    const auto phases = PhaseDistribution::parse(a.c.phases);
    const auto alphas = parse_range(a.c.alpha);
    Output o;
    o.manifest.config = mc_config(a);
    o.manifest.config["reps"] = a.reps;
    o.manifest.config["trials"] = a.trials;
    o.manifest.seed = a.c.seed;
    o.manifest.notes.push_back("state i uses seed + i; crb = 1/sqrt(M F_C(alpha))");
    o.table.columns = {"state_label", "alpha", "repetitions", "trials", "rmse", "crb", "ratio", "mean_estimate",
                       "ambiguous", "boundary"};
    const auto rows = rmse_sweep(states, alphas, a.reps, phases, a.trials, a.c.seed, a.c.eps);
    for (const auto &r : rows) {
        o.ambiguous = o.ambiguous || r.ambiguous > 0;
        o.table.rows.push_back({r.label, r.alpha, r.repetitions, std::int64_t{r.trials}, r.rmse, r.crb, r.ratio,
                                r.mean_estimate, std::int64_t{r.ambiguous}, std::int64_t{r.boundary}});
    }
    for (const auto &s : states) {
        o.manifest.dims.emplace_back(s.label(), p0_closed(s, 0.0, phases) ? "closed-form"
                                                                          : std::to_string(auto_dimension(s, 3.0).value()));
    }
    return o;
}

// plumbing ---------------------------------------------------------------

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::parse:
        case ErrorKind::domain:
        case ErrorKind::invalid_dimension:
        case ErrorKind::shape:
            return exit_parse;
        case ErrorKind::ambiguity:
            return exit_ambiguous;
        default:
            return exit_numeric;
    }
}

// argv without --out, which only names the destination.
std::vector<std::string> replay_args(const std::vector<std::string> &args) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--out") {
            ++i;
            continue;
        }
        if (args[i].rfind("--out=", 0) == 0) {
            continue;
        }
        out.push_back(args[i]);
    }
    return out;
}

std::vector<std::string> manifest_argv(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorKind::parse, "replay: cannot read '" + path + "'");
    }
    const std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        if (!content.empty() && content.front() == '{') {
            return json::parse(content).at("manifest").at("argv").get<std::vector<std::string>>();
        }
        std::istringstream lines(content);
        std::string line;
        const std::string key = "# argv: ";
        while (std::getline(lines, line) && line.rfind('#', 0) == 0) {
            if (line.rfind(key, 0) == 0) {
                return json::parse(line.substr(key.size())).get<std::vector<std::string>>();
            }
        }
    } catch (const json::exception &e) {
        fail(ErrorKind::parse, std::string("replay: malformed manifest: ") + e.what());
    }
    fail(ErrorKind::parse, "replay: no argv line in '" + path + "'");
}

void emit(const Output &o, const Common &c, std::ostream &out) {
    const std::string body = c.format == "json" ? render_json(o) : render_csv(o);
    if (c.out.empty()) {
        out << body;
        out.flush();
        return;
    }
    std::ofstream file(c.out, std::ios::binary | std::ios::trunc);
    if (!file) {
        fail(ErrorKind::parse, "cannot open '" + c.out + "' for writing");
    }
    file << body;
}

}  // namespace

std::vector<double> parse_range(std::string_view input) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (;;) {
        const auto colon = input.find(':', start);
        parts.push_back(input.substr(start, colon == std::string_view::npos ? std::string_view::npos : colon - start));
        if (colon == std::string_view::npos) {
            break;
        }
        start = colon + 1;
    }
    std::vector<std::size_t> offsets;
    std::size_t pos = 0;
    for (const auto &p : parts) {
        offsets.push_back(pos);
        pos += p.size() + 1;
    }
    if (parts.size() == 1) {
        const double v = text::to_double(parts[0], 0, input);
        if (!(v >= 0.0)) {
            text::parse_failure(input, 0, "alpha must be >= 0");
        }
        return {v};
    }
    if (parts.size() != 3) {
        text::parse_failure(input, 0, "expected start:step:stop");
    }
    const double first = text::to_double(parts[0], offsets[0], input);
    const double step = text::to_double(parts[1], offsets[1], input);
    const double last = text::to_double(parts[2], offsets[2], input);
    if (!(first >= 0.0)) {
        text::parse_failure(input, offsets[0], "start must be >= 0");
    }
    if (!(step > 0.0)) {
        text::parse_failure(input, offsets[1], "step must be > 0");
    }
    if (!(last >= first)) {
        text::parse_failure(input, offsets[2], "stop must be >= start");
    }
    const auto count = static_cast<std::size_t>(std::floor((last - first) / step + 1e-9)) + 1;
    if (count > 1000000) {
        text::parse_failure(input, offsets[1], "range has more than 10^6 points");
    }
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = first + static_cast<double>(i) * step;
    }
    return out;
}

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Displacement-channel metrology: fidelity, Fisher information, Monte Carlo and Wigner tables", "spreadchan"};
    app.set_version_flag("--version", SPREADCHAN_VERSION);
    app.require_subcommand(1);

    auto add_alpha = [](CLI::App *cmd, Common &c, const char *fallback) {
        c.alpha = fallback;
        cmd->add_option("--alpha", c.alpha, "start:step:stop (inclusive) or a single value")->capture_default_str();
    };
    auto add_states = [](CLI::App *cmd, Common &c) {
        cmd->add_option("--state", c.states, "Probe, e.g. sq:nbar=5, fock:n=5, coh:beta=2, cat:k=10,nbar=10, vac")
            ->required();
    };
    auto add_phases = [](CLI::App *cmd, Common &c) {
        cmd->add_option("--phases", c.phases, "uniform, vonmises:mu=0,kappa=5, discrete:phi@w,...")->capture_default_str();
    };
    auto add_seed = [](CLI::App *cmd, Common &c) {
        cmd->add_option("--seed", c.seed, "Random seed")->each([&c](const std::string &) { c.seed_given = true; });
    };

    FidelityArgs fid;
    auto *fidelity = app.add_subcommand("fidelity", "Self-projection fidelity p0(alpha)");
    add_states(fidelity, fid.c);
    add_phases(fidelity, fid.c);
    add_alpha(fidelity, fid.c, "0:0.02:1.5");
    fidelity->add_option("--dim", fid.c.dim, "auto or a Fock dimension")->capture_default_str();
    fidelity->add_option("--fixed-phase", fid.fixed_phase, "Displace along this phase only and add |overlap|");
    add_output_flags(fidelity, fid.c);

    Common cfi_args;
    auto *cfi = app.add_subcommand("cfi", "Self-projection classical Fisher information");
    add_states(cfi, cfi_args);
    add_phases(cfi, cfi_args);
    add_alpha(cfi, cfi_args, "0:0.02:1.5");
    cfi->add_option("--eps", cfi_args.eps, "Dark noise")->capture_default_str();
    add_output_flags(cfi, cfi_args);

    HomodyneArgs hom;
    auto *homodyne = app.add_subcommand("homodyne", "Quadrature versus self-projection for a squeezed probe");
    homodyne->add_option("--r", hom.r, "Squeezing parameter")->capture_default_str();
    add_phases(homodyne, hom.c);
    add_alpha(homodyne, hom.c, "0:0.1:1");
    add_output_flags(homodyne, hom.c);

    WignerArgs wig;
    auto *wigner = app.add_subcommand("wigner", "Wigner function on a square grid");
    add_states(wigner, wig.c);
    wigner->add_option("--half-width", wig.half_width, "Grid covers [-h, h]^2 (sized from the state by default)");
    wigner->add_option("--resolution", wig.resolution, "Points per axis")->capture_default_str();
    wigner->add_option("--dim", wig.c.dim, "auto or a Fock dimension")->capture_default_str();
    add_output_flags(wigner, wig.c);

    McArgs mca;
    auto *mc = app.add_subcommand("mc", "Monte Carlo experiments");
    mc->require_subcommand(1);
    auto add_mc = [&](CLI::App *cmd) {
        add_states(cmd, mca.c);
        add_alpha(cmd, mca.c, "0.1");
        add_seed(cmd, mca.c);
        add_output_flags(cmd, mca.c);
    };
    auto *sim = mc->add_subcommand("simulate", "One experiment of M binary shots per state and alpha");
    add_mc(sim);
    add_phases(sim, mca.c);
    sim->add_option("--reps", mca.reps, "Repetitions M")->capture_default_str();
    sim->add_option("--eps", mca.c.eps, "Dark noise")->capture_default_str();
    sim->add_flag("--randomize-rotation", mca.randomize_rotation, "Add a uniform random rotation per shot");
    auto *ov = mc->add_subcommand("overlap", "Mean and spread of |overlap| over random phases");
    add_mc(ov);
    ov->add_option("--samples", mca.samples, "Phases per alpha")->capture_default_str();
    auto *rm = mc->add_subcommand("rmse", "RMSE of the maximum-likelihood estimate against the Cramer-Rao bound");
    add_mc(rm);
    add_phases(rm, mca.c);
    rm->add_option("--reps", mca.reps, "Repetitions M (repeatable)")->capture_default_str();
    rm->add_option("--trials", mca.trials, "Independent experiments per point (>= 100)")->capture_default_str();
    rm->add_option("--eps", mca.c.eps, "Dark noise")->capture_default_str();

    std::string replay_path;
    Common replay_out;
    auto *replay = app.add_subcommand("replay", "Re-run the command recorded in an output's manifest");
    replay->add_option("manifest", replay_path, "CSV or JSON file written by this tool")->required();
    replay->add_option("--out", replay_out.out, "Output file (stdout when omitted)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_parse;
    }

    try {
        if (replay->parsed()) {
            auto recorded = manifest_argv(replay_path);
            if (!replay_out.out.empty()) {
                recorded.push_back("--out");
                recorded.push_back(replay_out.out);
            }
            return run(recorded, out, err);
        }

        Output o;
        const Common *common = nullptr;
        if (fidelity->parsed()) {
            o = cmd_fidelity(fid);
            o.manifest.command = "fidelity";
            common = &fid.c;
        } else if (cfi->parsed()) {
            o = cmd_cfi(cfi_args);
            o.manifest.command = "cfi";
            common = &cfi_args;
        } else if (homodyne->parsed()) {
            o = cmd_homodyne(hom);
            o.manifest.command = "homodyne";
            common = &hom.c;
        } else if (wigner->parsed()) {
            o = cmd_wigner(wig, err);
            o.manifest.command = "wigner";
            common = &wig.c;
        } else if (sim->parsed()) {
            o = cmd_mc_simulate(mca);
            o.manifest.command = "mc simulate";
            common = &mca.c;
        } else if (ov->parsed()) {
            o = cmd_mc_overlap(mca);
            o.manifest.command = "mc overlap";
            common = &mca.c;
        } else {
            o = cmd_mc_rmse(mca);
            o.manifest.command = "mc rmse";
            common = &mca.c;
        }
        o.manifest.argv = replay_args(args);
        if (common->timestamp) {
            o.manifest.timestamp = utc_now();
        }
        emit(o, *common, out);
        if (common->strict && o.ambiguous) {
            err << "error: ambiguous estimate in strict mode\n";
            return exit_ambiguous;
        }
        return exit_ok;
    } catch (const Error &e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return exit_numeric;
    }
}

}  // namespace spreadchan::cli
