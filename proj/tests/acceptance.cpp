// Acceptance run: one PASS/FAIL line per criterion.

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "dynmem/dynmem.hpp"

using namespace dynmem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

Outcome rl_unit() {
    double worst = 0.0;
    for (double a : {0.3, 0.5, 1.0, 1.5}) {
        const auto x = sample(TestInput::unit_constant(), make_grid(0, 10, 2049));
        const auto y = rl_integral(a, x);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double t = x.grid()[i];
            if (t < 0.1) continue;
            worst = std::max(worst, rel(y[i], std::pow(t, a) * rgamma(a + 1)));
        }
    }
    return {worst <= 1e-5, "max rel err " + fmt(worst)};
}

Outcome step_response() {
    const auto x = sample(TestInput::heaviside(1.0), make_grid(0, 10, 2049));
    double worst = 0.0;
    for (double a : {0.3, 0.5, 0.8, 1.5}) {
        const auto y = multiplier(kernel::PowerLaw{1, a}, x);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double t = x.grid()[i];
            if (t < 1.1) continue;
            worst = std::max(worst, rel(y[i], power_law_step_response(1, a, 1, t)));
        }
    }
    return {worst <= 1e-4, "max rel err " + fmt(worst)};
}

Outcome ek_unit() {
    double worst = 0.0;
    const auto x = sample(TestInput::unit_constant(), make_grid(0, 10, 401));
    for (double a : {0.5, 1.2}) {
        for (double eta : {0.0, 0.7}) {
            for (double s : {1.0, 2.0}) {
                const auto y = multiplier(kernel::ErdelyiKober{1, a, eta, s}, x);
                const double c = dynmem::gamma(eta + 1) / dynmem::gamma(eta + a + 1);
                for (std::size_t i = 0; i < x.size(); ++i) {
                    if (x.grid()[i] >= 0.5) worst = std::max(worst, std::abs(y[i] - c));
                }
            }
        }
    }
    return {worst <= 1e-6, "max deviation " + fmt(worst)};
}

Outcome worked_example() {
    std::ostringstream out, err;
    const int code = cli::run_cli({"hd", "rates", "--B", "0.5", "--alpha", "0.2"}, out, err);
    // B,alpha,lambda,lambda_eff,verdict
    std::istringstream is(out.str());
    std::string line, row;
    while (std::getline(is, line)) {
        if (!line.empty() && line[0] != '#' && line[0] != 'B') row = line;
    }
    double b = 0, a = 0, lam = 0, eff = 0;
    char verdict[32] = {};
    const int got = std::sscanf(row.c_str(), "%lf,%lf,%lf,%lf,%31s", &b, &a, &lam, &eff, verdict);
    const bool ok = code == 0 && got == 5 && lam == 2.0 && eff == 32.0 && eff / lam == 16.0 &&
                    std::string(verdict) == "increase";
    return {ok, "lambda=" + fmt(lam) + " lambda_eff=" + fmt(eff) + " ratio=" + fmt(eff / lam)};
}

Outcome memoryless_consumption() {
    double worst = 0.0;
    const double B = 1.5, C = 0.4, y0 = 2.0;
    const hd::HDSpec s{B, 1.0, {y0}, hd::consumption::PowerLaw{C, 1.0}};
    for (int i = 0; i <= 500; ++i) {
        const double t = 0.01 * i;
        const double e = std::exp(t / B);
        worst = std::max(worst, rel(hd::solve_power_consumption(s, t), C * (1 - e) + y0 * e));
    }
    return {worst <= 1e-10, "max rel err " + fmt(worst)};
}

Outcome asymptotic_rate() {
    double worst = 0.0;
    for (double B : {0.5, 2.0}) {
        for (double a : {0.5, 0.8, 1.2}) {
            const hd::HDSpec s{B, a, a > 1 ? std::vector<double>{1, 0} : std::vector<double>{1}};
            // least-squares slope of log Y on t in [30, 50]
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            int n = 0;
            for (double t = 30; t <= 50 + 1e-9; t += 0.5) {
                const double y = std::log(hd::solve_closed(s, t));
                sx += t;
                sy += y;
                sxx += t * t;
                sxy += t * y;
                ++n;
            }
            const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
            worst = std::max(worst, rel(slope, std::pow(B, -1 / a)));
        }
    }
    return {worst <= 0.02, "max rel deviation " + fmt(worst)};
}

Outcome map_equivalence() {
    std::mt19937_64 rng(35);
    std::uniform_real_distribution<double> ua(0.1, 2.0), ux(-1, 1), um(0.2, 3), uT(0.05, 2);
    std::uniform_int_distribution<int> un(1, 1000);
    double worst = 0.0;
    for (int c = 0; c < 500; ++c) {
        const double a = ua(rng), m = um(rng), T = uT(rng);
        std::vector<double> x(un(rng));
        for (auto& v : x) v = ux(rng);
        MapState s = make_map_state(m, a, T);
        for (double v : x) s = map_step(std::move(s), v);
        const double d = map_direct(m, a, T, x);
        worst = std::max(worst, std::abs(s.y - d) / (1 + std::abs(d)));
    }
    return {worst <= 1e-9, "500 cases, max scaled diff " + fmt(worst)};
}

Outcome normal_limit() {
    const auto x = sample(TestInput::power(2), make_grid(0, 2, 513));
    const double mu = 1.0;
    const auto ref = rl_integral(mu, x);
    std::vector<double> dev;
    for (double s : {0.2, 0.1, 0.05}) {
        const TruncatedGaussian g{mu, s, 0, 2};
        const auto r = distributed_integral(order::DistributedNormal{g}, x);
        double m = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x.grid()[i] < 0.5) continue;
            m = std::max(m, rel(r.order_first[i], ref[i] / g.normalization()));
        }
        dev.push_back(m);
    }
    const bool ok = dev[2] <= 1e-2 && dev[0] > dev[1] && dev[1] > dev[2];
    return {ok, "deviation " + fmt(dev[0]) + " > " + fmt(dev[1]) + " > " + fmt(dev[2])};
}

Outcome permutation() {
    double worst = 0.0;
    for (double mu : {1.0, 2.0, 3.0, 4.0}) {
        const auto x = sample(TestInput::power(mu), make_grid(0, 2, 129));
        worst = std::max(worst, distributed_integral(order::DistributedUniform{0.2, 1.4}, x).max_deviation);
        worst = std::max(worst,
                         distributed_integral(order::DistributedNormal{TruncatedGaussian{0.8, 0.2, 0.1, 2}}, x).max_deviation);
        worst = std::max(worst, distributed_integral(order::DistributedUniform{0.0, 1.0}, x).max_deviation);
        worst = std::max(worst,
                         distributed_integral(order::DistributedNormal{TruncatedGaussian{1.0, 0.3, 0, 2}}, x).max_deviation);
    }
    return {worst <= 1e-6, "max |order-first - time-first| " + fmt(worst)};
}

Outcome duality() {
    double worst = 0.0, worst_ratio = INFINITY;
    for (double mu : {2.0, 3.0}) {
        for (double a : {0.3, 0.5, 0.8}) {
            const double d1 = duality_check(a, sample(TestInput::power(mu), make_grid(0, 1, 1025)));
            const double d0 = duality_check(a, sample(TestInput::power(mu), make_grid(0, 1, 513)));
            worst = std::max(worst, d1);
            worst_ratio = std::min(worst_ratio, d0 / d1);
        }
    }
    return {worst <= 5e-3 && worst_ratio >= 1.5, "max deviation " + fmt(worst) + ", min halving ratio " + fmt(worst_ratio)};
}

Outcome principles() {
    const auto rows = hd::classify_principles({0.5, 2}, {0.5, 1, 1.5});
    bool ok = rows.size() == 6;
    std::string cells;
    for (const auto& r : rows) {
        ok = ok && r.consistent;
        if (r.rate.alpha == 1.0) ok = ok && r.rate.verdict == hd::Verdict::unchanged;
        cells += (cells.empty() ? "" : " ") + hd::to_string(r.rate.verdict);
    }
    return {ok, cells};
}

Outcome properties() {
    std::vector<std::string> failed;
    const Grid g = make_grid(0, 2, 513);
    std::vector<double> v1(g.size()), v2(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        v1[i] = std::sin(3 * g[i]);
        v2[i] = 1 + g[i] * g[i];
    }
    const SampledSignal x1(g, v1), x2(g, v2);
    // linearity
    const std::vector<MemoryKernel> ks = {kernel::PowerLaw{1, 0.5}, kernel::TwoParam{1, 0.3, 2, 1.2},
                                          kernel::Kober{1, 0.5, 0.4}, kernel::ErdelyiKober{1, 0.8, 0.1, 2},
                                          kernel::DistributedUniform{1, 0.2, 0.9}};
    for (const auto& k : ks) {
        const auto l = multiplier(k, combine(1.3, x1, -0.6, x2));
        const auto a = multiplier(k, x1);
        const auto b = multiplier(k, x2);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double r = 1.3 * a[i] - 0.6 * b[i];
            if (std::abs(l[i] - r) > 1e-12 * std::max(1.0, std::abs(r))) {
                failed.push_back("linearity " + kernel_name(k));
                break;
            }
        }
    }
    // semigroup: error of the composition converges at order alpha + beta
    double sg = 0.0;
    for (auto [a, b] : {std::pair{0.3, 0.5}, {0.6, 0.8}, {0.2, 0.9}}) {
        double e[2];
        for (int r = 0; r < 2; ++r) {
            const Grid gg = make_grid(0, 2, r == 0 ? 513 : 1025);
            std::vector<double> v(gg.size());
            for (std::size_t i = 0; i < gg.size(); ++i) v[i] = 1 + gg[i] - 0.5 * gg[i] * gg[i];
            const SampledSignal x(gg, v);
            const auto lhs = rl_integral(a, rl_integral(b, x));
            const auto rhs = rl_integral(a + b, x);
            e[r] = 0.0;
            for (std::size_t i = 0; i < gg.size(); ++i) e[r] = std::max(e[r], std::abs(lhs[i] - rhs[i]));
        }
        sg = std::max(sg, e[1]);
        if (e[1] > 1e-3 || std::abs(std::log2(e[0] / e[1]) - std::min(a + b, 2.0)) > 0.15) {
            failed.push_back("semigroup " + fmt(e[1]));
        }
    }
    // Caputo of a constant
    for (double a : {0.2, 0.5, 0.9}) {
        for (const auto y = caputo_derivative(a, sample(TestInput::unit_constant(), g)); double v : y.values()) {
            if (v != 0.0) {
                failed.push_back("caputo-of-constant");
                break;
            }
        }
    }
    // homogeneity probe
    const std::vector<double> shifts = {0.5, 1.0, 3.0};
    const std::vector<MemoryKernel> stationary = {kernel::PowerLaw{1, 0.5}, kernel::TwoParam{1, 0.5, 1, 1.5},
                                                  kernel::DistributedUniform{1, 0.2, 0.9},
                                                  kernel::DistributedNormal(1, TruncatedGaussian{0.6, 0.1, 0, 2})};
    for (const auto& k : stationary) {
        if (!probe_stationary(k, shifts).stationary) failed.push_back("homogeneity " + kernel_name(k));
    }
    for (const MemoryKernel& k : std::vector<MemoryKernel>{kernel::Kober{1, 0.5, 0.3}, kernel::ErdelyiKober{1, 0.5, 0.3, 2}}) {
        if (probe_stationary(k, shifts).stationary) failed.push_back("inhomogeneity " + kernel_name(k));
    }
    std::string d = failed.empty() ? "linearity, semigroup (" + fmt(sg) + "), caputo-of-constant, homogeneity probe" : "";
    for (const auto& f : failed) d += (d.empty() ? "" : "; ") + f;
    return {failed.empty(), d};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"RL integral of unit input", rl_unit},
        {"power-law step response", step_response},
        {"Erdelyi-Kober unit preservation", ek_unit},
        {"hd rates worked example", worked_example},
        {"memoryless constant consumption", memoryless_consumption},
        {"asymptotic growth rate", asymptotic_rate},
        {"discrete map equivalence", map_equivalence},
        {"distributed normal limit", normal_limit},
        {"order/time permutation", permutation},
        {"integral/derivative duality", duality},
        {"principles II/III table", principles},
        {"property suites", properties},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o{false, ""};
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    }
    return failures == 0 ? 0 : 1;
}
