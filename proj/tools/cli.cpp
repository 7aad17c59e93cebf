#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "dynmem/dynmem.hpp"

namespace dynmem::cli {

namespace {

using Params = std::map<std::string, double>;

struct SpecString {
    std::string name;
    Params params;
};

double parse_real(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw input_error(what + ": '" + s + "' is not a number");
    }
    if (used != s.size() || !std::isfinite(v)) throw input_error(what + ": '" + s + "' is not a finite number");
    return v;
}

/// "name:k=v,k=v" -> name and parameters.
SpecString parse_spec(const std::string& text, const std::string& what) {
    SpecString s;
    const auto colon = text.find(':');
    s.name = text.substr(0, colon);
    if (s.name.empty()) throw input_error(what + ": missing name in '" + text + "'");
    if (colon == std::string::npos) return s;
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw input_error(what + ": expected key=value, got '" + item + "'");
        const std::string key = item.substr(0, eq);
        if (s.params.count(key) != 0) throw input_error(what + ": duplicate key '" + key + "'");
        s.params[key] = parse_real(item.substr(eq + 1), what + " " + key);
    }
    return s;
}

/// Take the listed keys from a spec (with defaults), rejecting anything else.
class Reader {
public:
    Reader(SpecString s, std::string what) : s_(std::move(s)), what_(std::move(what)) {}

    double get(const std::string& key) {
        seen_.push_back(key);
        const auto it = s_.params.find(key);
        if (it == s_.params.end()) throw input_error(what_ + " '" + s_.name + "': missing parameter '" + key + "'");
        return it->second;
    }
    double get(const std::string& key, double fallback) {
        seen_.push_back(key);
        const auto it = s_.params.find(key);
        return it == s_.params.end() ? fallback : it->second;
    }
    void finish() const {
        for (const auto& [k, v] : s_.params) {
            if (std::find(seen_.begin(), seen_.end(), k) == seen_.end()) {
                throw input_error(what_ + " '" + s_.name + "': unknown parameter '" + k + "'");
            }
        }
    }
    [[nodiscard]] const std::string& name() const { return s_.name; }

private:
    SpecString s_;
    std::string what_;
    std::vector<std::string> seen_;
};

constexpr const char* kernel_help =
    "kernel spec name:key=value,... with names no_memory(m), fixed_lag(m,T), power_law(m,alpha), "
    "power_law_deriv(a,alpha), two_param(m_a,alpha,m_b,beta), two_param_deriv(a_a,alpha,a_b,beta), "
    "variable_order(m,a,b: alpha(t)=a+b*t), kober(m,alpha,eta), erdelyi_kober(m,alpha,eta,sigma), "
    "distributed_uniform(m,a1,a2), distributed_normal(m,mu,sigma,a1,a2)";

constexpr const char* order_help =
    "order spec: scalar(alpha), multi(a1,alpha1,a2,alpha2,...), variable(a,b: alpha(t)=a+b*t), "
    "uniform(a1,a2), normal(mu,sigma,a1,a2)";

constexpr const char* input_help =
    "test input: unit, heaviside(T), dirac(T,eps), power(mu: X=tau^(mu-1))";

std::function<double(double)> linear_alpha(double a, double b) {
    return [a, b](double t) { return a + b * t; };
}

MemoryKernel parse_kernel(const std::string& text) {
    Reader r(parse_spec(text, "kernel"), "kernel");
    MemoryKernel k;
    const std::string& n = r.name();
    if (n == "no_memory") {
        k = kernel::NoMemory{r.get("m", 1.0)};
    } else if (n == "fixed_lag") {
        k = kernel::FixedLag{r.get("m", 1.0), r.get("T")};
    } else if (n == "power_law") {
        k = kernel::PowerLaw{r.get("m", 1.0), r.get("alpha")};
    } else if (n == "power_law_deriv") {
        k = kernel::PowerLawDeriv{r.get("a", 1.0), r.get("alpha")};
    } else if (n == "two_param") {
        k = kernel::TwoParam{r.get("m_a"), r.get("alpha"), r.get("m_b"), r.get("beta")};
    } else if (n == "two_param_deriv") {
        k = kernel::TwoParamDeriv{r.get("a_a"), r.get("alpha"), r.get("a_b"), r.get("beta")};
    } else if (n == "variable_order") {
        const double m = r.get("m", 1.0);
        const double a = r.get("a");
        const double b = r.get("b", 0.0);
        k = kernel::VariableOrder{m, linear_alpha(a, b)};
    } else if (n == "kober") {
        k = kernel::Kober{r.get("m", 1.0), r.get("alpha"), r.get("eta", 0.0)};
    } else if (n == "erdelyi_kober") {
        k = kernel::ErdelyiKober{r.get("m", 1.0), r.get("alpha"), r.get("eta", 0.0), r.get("sigma", 1.0)};
    } else if (n == "distributed_uniform") {
        k = kernel::DistributedUniform{r.get("m", 1.0), r.get("a1"), r.get("a2")};
    } else if (n == "distributed_normal") {
        const double m = r.get("m", 1.0);
        TruncatedGaussian g{r.get("mu"), r.get("sigma"), r.get("a1", 0.0), r.get("a2", 2.0)};
        r.finish();
        return kernel::DistributedNormal(m, g);
    } else {
        throw input_error("unknown kernel '" + n + "'; " + kernel_help);
    }
    r.finish();
    validate(k);
    return k;
}

OrderSpec parse_order(const std::string& text) {
    Reader r(parse_spec(text, "order"), "order");
    OrderSpec o;
    const std::string& n = r.name();
    if (n == "scalar") {
        o = order::Scalar{r.get("alpha")};
    } else if (n == "multi") {
        order::MultiTerm mt;
        for (int i = 1;; ++i) {
            const std::string ai = "a" + std::to_string(i);
            const std::string al = "alpha" + std::to_string(i);
            const double none = -1e300;
            const double coef = r.get(ai, none);
            if (coef == none) break;
            mt.terms.push_back({coef, r.get(al)});
        }
        o = mt;
    } else if (n == "variable") {
        const double a = r.get("a");
        const double b = r.get("b", 0.0);
        o = order::Variable{linear_alpha(a, b)};
    } else if (n == "uniform") {
        o = order::DistributedUniform{r.get("a1"), r.get("a2")};
    } else if (n == "normal") {
        o = order::DistributedNormal{TruncatedGaussian{r.get("mu"), r.get("sigma"), r.get("a1", 0.0), r.get("a2", 2.0)}};
    } else {
        throw input_error("unknown order '" + n + "'; " + order_help);
    }
    r.finish();
    return o;
}

TestInput parse_input(const std::string& text) {
    Reader r(parse_spec(text, "input"), "input");
    TestInput in;
    const std::string& n = r.name();
    if (n == "unit") {
        in = TestInput::unit_constant();
    } else if (n == "heaviside") {
        in = TestInput::heaviside(r.get("T"));
    } else if (n == "dirac") {
        const double T = r.get("T");
        in = TestInput::dirac_approx(T, r.get("eps"));
    } else if (n == "power") {
        in = TestInput::power(r.get("mu"));
    } else {
        throw input_error("unknown input '" + n + "'; " + input_help);
    }
    r.finish();
    return in;
}

QuadratureScheme parse_scheme(const std::string& s) {
    if (s == "trapezoid") return QuadratureScheme::trapezoid();
    if (s == "rectangle") return QuadratureScheme::rectangle();
    if (s == "l1") return QuadratureScheme::l1();
    throw input_error("unknown scheme '" + s + "' (trapezoid, rectangle, l1)");
}

hd::Consumption parse_consumption(const std::string& text) {
    Reader r(parse_spec(text, "consumption"), "consumption");
    hd::Consumption c;
    const std::string& n = r.name();
    if (n == "zero") {
        c = hd::consumption::Zero{};
    } else if (n == "constant") {
        c = hd::consumption::Constant{r.get("C")};
    } else if (n == "power") {
        const double C = r.get("C");
        c = hd::consumption::PowerLaw{C, r.get("mu")};
    } else if (n == "proportional") {
        c = hd::consumption::Proportional{r.get("c")};
    } else {
        throw input_error("unknown consumption '" + n + "' (zero, constant(C), power(C,mu), proportional(c))");
    }
    r.finish();
    return c;
}

// ---------------------------------------------------------------------------
// Output

struct Sink {
    std::string output;
    std::string default_name;
    std::ostream* out = nullptr;

    void emit(const std::string& text) const {
        std::string path = output;
        const char* dir = std::getenv("DYNMEM_OUTPUT_DIR");
        if (path.empty() && dir != nullptr && *dir != '\0') path = default_name;
        if (path.empty()) {
            *out << text;
            return;
        }
        std::filesystem::path p(path);
        if (p.is_relative() && dir != nullptr && *dir != '\0') p = std::filesystem::path(dir) / p;
        std::ofstream f(p, std::ios::binary);
        if (!f) throw input_error("cannot open output file " + p.string());
        f << text;
        if (!f) throw input_error("write failed: " + p.string());
    }
};

std::string csv_text(const Trajectory& tr) {
    std::ostringstream os;
    write_csv(tr, os);
    return os.str();
}

// ---------------------------------------------------------------------------
// Commands

struct GridOpts {
    double t0 = 0.0;
    double t_end = 10.0;
    std::size_t n = 1025;
    double grading = 1.0;

    void add(CLI::App* a) {
        a->add_option("--t0", t0, "grid start")->capture_default_str();
        a->add_option("--t-end", t_end, "grid end")->capture_default_str();
        a->add_option("--n", n, "number of grid points")->capture_default_str();
        a->add_option("--grading", grading, "graded exponent r >= 1 (1 = uniform)")->capture_default_str();
    }
    [[nodiscard]] Grid grid() const {
        return make_grid(t0, t_end, n, grading == 1.0 ? Spacing::uniform() : Spacing::graded(grading));
    }
};

struct MlOpts {
    double alpha = 1.0;
    double beta = 1.0;
    std::vector<double> z;
    double z_from = 0.0;
    double z_to = 1.0;
    std::size_t samples = 0;
};

std::string run_ml(const MlOpts& o) {
    std::vector<double> zs = o.z;
    if (o.samples > 0) {
        if (o.samples == 1) {
            zs.push_back(o.z_from);
        } else {
            for (std::size_t i = 0; i < o.samples; ++i) {
                zs.push_back(o.z_from + (o.z_to - o.z_from) * static_cast<double>(i) /
                                            static_cast<double>(o.samples - 1));
            }
        }
    }
    if (zs.empty()) throw input_error("ml: give --z or --z-from/--z-to/--samples");
    std::ostringstream os;
    os << "z,value\n";
    for (double z : zs) os << format_double(z) << ',' << format_double(mittag_leffler(o.alpha, o.beta, z)) << '\n';
    return os.str();
}

struct ProbeOpts {
    std::string kernel;
    double tau = 1.0;
    double t_max = 1e7;
};

std::string run_probe(const ProbeOpts& o) {
    const MemoryKernel k = parse_kernel(o.kernel);
    ProbeSettings s;
    s.tau_fixed = o.tau;
    s.t_max = o.t_max;
    const KernelProbeReport r = probe_kernel(k, s);
    std::ostringstream os;
    os << "property,value\n";
    os << "kernel," << kernel_name(k) << '\n';
    os << "fading," << (r.fading ? "true" : "false") << '\n';
    os << "fading_ratio," << format_double(r.fading_evidence.ratio) << '\n';
    os << "alpha_hat," << format_double(r.fading_evidence.alpha_hat) << '\n';
    os << "stationary," << (r.stationary ? "true" : "false") << '\n';
    os << "stationary_max_deviation," << format_double(r.stationary_evidence.max_deviation) << '\n';
    os << "unit_preserving," << to_string(r.unit_preserving) << '\n';
    os << "unit_constant," << format_double(r.unit_constant) << '\n';
    return os.str();
}

struct ApplyOpts {
    std::string op = "multiplier";
    std::string kernel;
    std::string order;
    std::string input = "unit";
    std::string input_csv;
    std::string column;
    std::string scheme;
    int n_deriv = 1;
    GridOpts grid;
};

SampledSignal load_signal(const ApplyOpts& o) {
    if (!o.input_csv.empty()) {
        const Trajectory tr = read_csv(o.input_csv);
        const std::string col = o.column.empty() ? tr.names.at(0) : o.column;
        return signal_from_trajectory(tr, col);
    }
    return sample(parse_input(o.input), o.grid.grid());
}

std::string run_apply(const ApplyOpts& o) {
    const SampledSignal x = load_signal(o);
    Trajectory tr = to_trajectory(x, "X");
    auto scheme_or = [&](QuadratureScheme d) { return o.scheme.empty() ? d : parse_scheme(o.scheme); };
    auto need = [&](const std::string& v, const char* flag) {
        if (v.empty()) throw input_error("op apply --op " + o.op + " needs " + flag);
    };
    if (o.op == "multiplier") {
        need(o.kernel, "--kernel");
        tr.add("Y", multiplier(parse_kernel(o.kernel), x, scheme_or(QuadratureScheme::trapezoid())).values());
    } else if (o.op == "accelerator") {
        need(o.kernel, "--kernel");
        tr.add("Y", accelerator(parse_kernel(o.kernel), x, o.n_deriv, scheme_or(QuadratureScheme::l1())).values());
    } else if (o.op == "integral") {
        need(o.order, "--order");
        tr.add("Y", apply_integral(parse_order(o.order), x, scheme_or(QuadratureScheme::trapezoid())).values());
    } else if (o.op == "derivative") {
        need(o.order, "--order");
        tr.add("Y", apply_derivative(parse_order(o.order), x, scheme_or(QuadratureScheme::l1())).values());
    } else if (o.op == "distributed") {
        need(o.order, "--order");
        const OrderSpec spec = parse_order(o.order);
        const QuadratureScheme sc = scheme_or(QuadratureScheme::trapezoid());
        DistributedResult r;
        if (const auto* u = std::get_if<order::DistributedUniform>(&spec)) {
            r = distributed_integral(*u, x, sc);
        } else if (const auto* nd = std::get_if<order::DistributedNormal>(&spec)) {
            r = distributed_integral(*nd, x, sc);
        } else {
            throw input_error("op apply --op distributed needs a uniform or normal order");
        }
        tr.add("Y_order_first", r.order_first.values());
        tr.add("Y_time_first", r.time_first.values());
        tr.metadata.emplace_back("max_deviation", format_double(r.max_deviation));
    } else if (o.op == "ek_caputo") {
        need(o.kernel, "--kernel");
        const MemoryKernel k = parse_kernel(o.kernel);
        const auto* ek = std::get_if<kernel::ErdelyiKober>(&k);
        if (ek == nullptr) throw input_error("op apply --op ek_caputo needs an erdelyi_kober kernel");
        tr.add("Y", scaled(ek_caputo_derivative(ek->alpha, ek->eta, ek->sigma, x), ek->m).values());
    } else {
        throw input_error("unknown --op '" + o.op +
                          "' (multiplier, accelerator, integral, derivative, distributed, ek_caputo)");
    }
    tr.metadata.insert(tr.metadata.begin(), {"op", o.op});
    return csv_text(tr);
}

struct ResponseOpts {
    std::string family = "power_law";
    std::string input = "heaviside";
    double m = 1.0;
    double alpha = 0.5;
    double eta = 0.0;
    double sigma = 1.0;
    double T = 1.0;
    double t_from = 1.1;
    double t_to = 10.0;
    std::size_t samples = 100;
};

std::string run_response(const ResponseOpts& o) {
    if (o.samples == 0) throw input_error("op response: --samples must be positive");
    std::vector<double> ts;
    for (std::size_t i = 0; i < o.samples; ++i) {
        ts.push_back(o.samples == 1 ? o.t_from
                                    : o.t_from + (o.t_to - o.t_from) * static_cast<double>(i) /
                                                     static_cast<double>(o.samples - 1));
    }
    Trajectory tr;
    tr.t = ts;
    std::vector<double> v(ts.size());
    if (o.family == "power_law" && o.input == "heaviside") {
        for (std::size_t i = 0; i < ts.size(); ++i) v[i] = power_law_step_response(o.m, o.alpha, o.T, ts[i]);
        tr.add("value", v);
    } else if (o.family == "power_law" && o.input == "dirac") {
        for (std::size_t i = 0; i < ts.size(); ++i) v[i] = power_law_impulse_response(o.m, o.alpha, o.T, ts[i]);
        tr.add("value", v);
    } else if (o.family == "accelerator" && o.input == "heaviside") {
        std::vector<double> lit(ts.size());
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const auto r = accelerator_step_response(o.m, o.alpha, o.T, ts[i]);
            v[i] = r.value;
            lit[i] = r.literal_value;
        }
        tr.add("value", v);
        tr.add("literal_value", lit);
    } else if (o.family == "erdelyi_kober" && o.input == "dirac") {
        for (std::size_t i = 0; i < ts.size(); ++i) {
            v[i] = ek_impulse_response(o.m, o.alpha, o.eta, o.sigma, o.T, ts[i]);
        }
        tr.add("value", v);
    } else {
        throw input_error("op response: no closed form for family '" + o.family + "' with input '" + o.input +
                          "' (power_law+heaviside, power_law+dirac, accelerator+heaviside, erdelyi_kober+dirac)");
    }
    tr.metadata = {{"family", o.family}, {"input", o.input}};
    return csv_text(tr);
}

struct MapOpts {
    double alpha = 0.5;
    double m = 1.0;
    double T = 1.0;
    std::string input;
    std::string column;
    std::string mode = "recursive";
};

std::string run_map(const MapOpts& o) {
    const Trajectory in = read_csv(o.input);
    const std::vector<double>& x = o.column.empty() ? in.series.at(0) : in.column(o.column);
    Trajectory tr;
    for (std::size_t k = 0; k < x.size(); ++k) tr.t.push_back(static_cast<double>(k + 1) * o.T);
    if (o.mode == "recursive") {
        tr.add("Y", map_run(o.m, o.alpha, o.T, x, MapMode::recursive));
    } else if (o.mode == "direct") {
        tr.add("Y", map_run(o.m, o.alpha, o.T, x, MapMode::direct));
    } else if (o.mode == "both") {
        tr.add("Y_direct", map_run(o.m, o.alpha, o.T, x, MapMode::direct));
        tr.add("Y_recursive", map_run(o.m, o.alpha, o.T, x, MapMode::recursive));
    } else {
        throw input_error("map run: unknown --mode '" + o.mode + "' (recursive, direct, both)");
    }
    return csv_text(tr);
}

struct SimulateOpts {
    double B = 1.0;
    double alpha = 1.0;
    std::vector<double> y0 = {1.0};
    std::string consumption = "zero";
    double t_end = 5.0;
    std::size_t n = 1025;
    std::string method = "closed";
};

std::string run_simulate(const SimulateOpts& o) {
    hd::HDSpec spec{o.B, o.alpha, o.y0, parse_consumption(o.consumption)};
    spec.validate();
    const Grid g = make_grid(0.0, o.t_end, o.n);
    Trajectory tr;
    tr.t = g.points();
    const bool closed = o.method == "closed" || o.method == "both";
    const bool numeric = o.method == "numeric" || o.method == "both";
    if (!closed && !numeric) throw input_error("hd simulate: unknown --method '" + o.method + "' (closed, numeric, both)");
    if (closed) {
        std::vector<double> y(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) y[i] = hd::solve(spec, g[i]);
        tr.add("Y_closed", std::move(y));
    }
    if (numeric) tr.add("Y_numeric", hd::solve_numeric(spec, g).column("Y"));
    tr.metadata = {{"B", format_double(o.B)}, {"alpha", format_double(o.alpha)}, {"consumption", o.consumption}};
    return csv_text(tr);
}

struct RatesOpts {
    std::vector<double> B;
    std::vector<double> alpha;
};

std::string run_rates(const RatesOpts& o) {
    if (o.B.empty() || o.alpha.empty()) throw input_error("hd rates: give --B and --alpha");
    std::ostringstream os;
    os << "B,alpha,lambda,lambda_eff,verdict\n";
    for (const auto& row : hd::classify_principles(o.B, o.alpha)) {
        os << format_double(row.rate.B) << ',' << format_double(row.rate.alpha) << ','
           << format_double(row.rate.lambda_classic) << ',' << format_double(row.rate.lambda_eff) << ','
           << hd::to_string(row.rate.verdict) << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Application

struct Leaf {
    CLI::App* app = nullptr;
    std::string config;
    std::string output;
    std::function<std::string()> run;
    std::string default_name;
};

struct Cli {
    CLI::App app{"Economic dynamics with memory: operators, responses, maps and growth models", "dynmem"};
    MlOpts ml;
    ProbeOpts probe;
    ApplyOpts apply;
    ResponseOpts response;
    MapOpts map;
    SimulateOpts simulate;
    RatesOpts rates;
    std::vector<std::unique_ptr<Leaf>> leaves;

    Leaf* leaf(CLI::App* parent, const std::string& name, const std::string& desc, std::string file) {
        auto l = std::make_unique<Leaf>();
        l->app = parent->add_subcommand(name, desc);
        l->app->add_option("--config", l->config, "JSON file of option values (flags override it)");
        l->app->add_option("--output", l->output,
                           "output CSV path (relative paths resolve against DYNMEM_OUTPUT_DIR)");
        l->default_name = std::move(file);
        leaves.push_back(std::move(l));
        return leaves.back().get();
    }

    explicit Cli(bool strict) {
        auto req = [strict](CLI::Option* o) { o->required(strict); };
        app.require_subcommand(1);
        {
            Leaf* l = leaf(&app, "ml", "tabulate the Mittag-Leffler function E_{alpha,beta}(z)", "ml.csv");
            auto* a = l->app;
            req(a->add_option("--alpha", ml.alpha, "alpha > 0"));
            a->add_option("--beta", ml.beta, "beta")->capture_default_str();
            a->add_option("--z", ml.z, "argument(s), comma separated")->delimiter(',');
            a->add_option("--z-from", ml.z_from, "range start")->capture_default_str();
            a->add_option("--z-to", ml.z_to, "range end")->capture_default_str();
            a->add_option("--samples", ml.samples, "number of range samples");
            l->run = [this] { return run_ml(ml); };
        }
        {
            auto* kernel_cmd = app.add_subcommand("kernel", "memory kernel tools");
            kernel_cmd->require_subcommand(1);
            Leaf* l = leaf(kernel_cmd, "probe", "fading / stationarity / unit-preservation probes", "probe.csv");
            req(l->app->add_option("--kernel", probe.kernel, kernel_help));
            l->app->add_option("--tau", probe.tau, "fixed tau for the fading ladder")->capture_default_str();
            l->app->add_option("--t-max", probe.t_max, "end of the fading ladder")->capture_default_str();
            l->run = [this] { return run_probe(probe); };
        }
        {
            auto* op = app.add_subcommand("op", "operators with memory");
            op->require_subcommand(1);
            Leaf* l = leaf(op, "apply", "apply an operator to a test input or CSV signal", "apply.csv");
            auto* a = l->app;
            a->add_option("--op", apply.op,
                          "multiplier, accelerator, integral, derivative, distributed, ek_caputo")
                ->capture_default_str();
            a->add_option("--kernel", apply.kernel, kernel_help);
            a->add_option("--order", apply.order, order_help);
            a->add_option("--input", apply.input, input_help)->capture_default_str();
            a->add_option("--input-csv", apply.input_csv, "CSV signal (t column plus series)");
            a->add_option("--column", apply.column, "series name in --input-csv");
            a->add_option("--scheme", apply.scheme, "trapezoid, rectangle, l1");
            a->add_option("--n-deriv", apply.n_deriv, "derivative order n for accelerators")->capture_default_str();
            apply.grid.add(a);
            l->run = [this] { return run_apply(apply); };

            Leaf* r = leaf(op, "response", "closed-form step and impulse responses", "response.csv");
            auto* b = r->app;
            b->add_option("--family", response.family, "power_law, accelerator, erdelyi_kober")->capture_default_str();
            b->add_option("--input", response.input, "heaviside, dirac")->capture_default_str();
            b->add_option("--m", response.m, "multiplier m (accelerator a)")->capture_default_str();
            b->add_option("--alpha", response.alpha, "order")->capture_default_str();
            b->add_option("--eta", response.eta, "Erdelyi-Kober eta")->capture_default_str();
            b->add_option("--sigma", response.sigma, "Erdelyi-Kober sigma")->capture_default_str();
            b->add_option("--T", response.T, "impact time")->capture_default_str();
            b->add_option("--t-from", response.t_from, "first evaluation time")->capture_default_str();
            b->add_option("--t-to", response.t_to, "last evaluation time")->capture_default_str();
            b->add_option("--samples", response.samples, "number of evaluation times")->capture_default_str();
            r->run = [this] { return run_response(response); };
        }
        {
            auto* m = app.add_subcommand("map", "discrete map with power-law memory");
            m->require_subcommand(1);
            Leaf* l = leaf(m, "run", "run the map on an x series", "map.csv");
            auto* a = l->app;
            req(a->add_option("--alpha", map.alpha, "alpha > 0"));
            a->add_option("--m", map.m, "multiplier coefficient")->capture_default_str();
            a->add_option("--T", map.T, "sampling period")->capture_default_str();
            req(a->add_option("--input", map.input, "CSV with the x series"));
            a->add_option("--column", map.column, "series name (default: first series)");
            a->add_option("--mode", map.mode, "recursive, direct, both")->capture_default_str();
            l->run = [this] { return run_map(map); };
        }
        {
            auto* h = app.add_subcommand("hd", "Harrod-Domar model with memory");
            h->require_subcommand(1);
            Leaf* l = leaf(h, "simulate", "solve the model on [0, t_end]", "simulate.csv");
            auto* a = l->app;
            a->add_option("--B", simulate.B, "capital intensity B > 0")->capture_default_str();
            a->add_option("--alpha", simulate.alpha, "memory order alpha > 0")->capture_default_str();
            a->add_option("--y0", simulate.y0, "initial values Y^(k)(0), k<n, comma separated")->delimiter(',');
            a->add_option("--consumption", simulate.consumption,
                          "zero, constant:C=., power:C=.,mu=., proportional:c=.")
                ->capture_default_str();
            a->add_option("--t-end", simulate.t_end, "horizon")->capture_default_str();
            a->add_option("--n", simulate.n, "grid points")->capture_default_str();
            a->add_option("--method", simulate.method, "closed, numeric, both")->capture_default_str();
            l->run = [this] { return run_simulate(simulate); };

            Leaf* r = leaf(h, "rates", "growth rates lambda = 1/B and lambda_eff = B^(-1/alpha)", "rates.csv");
            req(r->app->add_option("--B", rates.B, "capital intensities, comma separated")->delimiter(','));
            req(r->app->add_option("--alpha", rates.alpha, "orders, comma separated")->delimiter(','));
            r->run = [this] { return run_rates(rates); };
        }
    }

    Leaf* selected() {
        for (auto& l : leaves) {
            if (l->app->parsed()) return l.get();
        }
        return nullptr;
    }
};

std::string json_token(const nlohmann::json& v, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return format_double(v.get<double>());
    if (v.is_array()) {
        std::string s;
        for (const auto& e : v) {
            if (!s.empty()) s += ',';
            s += json_token(e, key);
        }
        return s;
    }
    throw input_error("config key '" + key + "': unsupported value type");
}

void do_parse(Cli& c, std::vector<std::string> args) {
    std::reverse(args.begin(), args.end());
    c.app.parse(std::move(args));
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        auto c = std::make_unique<Cli>(false);
        try {
            do_parse(*c, args);
            Leaf* l = c->selected();
            if (l != nullptr && !l->config.empty()) {
                std::ifstream f(l->config);
                if (!f) throw input_error("cannot open config file " + l->config);
                nlohmann::json j;
                try {
                    j = nlohmann::json::parse(f);
                } catch (const nlohmann::json::exception& e) {
                    throw input_error("config " + l->config + ": " + e.what());
                }
                if (!j.is_object()) throw input_error("config " + l->config + ": expected a JSON object");
                std::vector<std::string> extra;
                for (const auto& [key, value] : j.items()) {
                    std::string name = key;
                    std::replace(name.begin(), name.end(), '_', '-');
                    const CLI::Option* opt = l->app->get_option_no_throw("--" + name);
                    if (opt == nullptr || name == "config") {
                        throw input_error("config " + l->config + ": unknown key '" + key + "'");
                    }
                    if (opt->count() == 0) {
                        extra.push_back("--" + name);
                        extra.push_back(json_token(value, key));
                    }
                }
                std::vector<std::string> all = args;
                all.insert(all.end(), extra.begin(), extra.end());
                c = std::make_unique<Cli>(true);
                do_parse(*c, all);
                l = c->selected();
            } else {
                c = std::make_unique<Cli>(true);
                do_parse(*c, args);
                l = c->selected();
            }
            if (l == nullptr) throw input_error("no command given; see --help");
            Sink sink{l->output, l->default_name, &out};
            sink.emit(l->run());
        } catch (const CLI::ParseError& e) {
            if (e.get_exit_code() == 0) {
                // --help and friends
                std::ostringstream tmp;
                auto strict = std::make_unique<Cli>(true);
                try {
                    do_parse(*strict, args);
                    c->app.exit(e, tmp, tmp);
                } catch (const CLI::ParseError& e2) {
                    strict->app.exit(e2, tmp, tmp);
                }
                out << tmp.str();
                return 0;
            }
            err << "error: " << e.what() << '\n';
            return 1;
        }
    } catch (const convergence_error& e) {
        err << "convergence error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace dynmem::cli
