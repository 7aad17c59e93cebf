#pragma once

// Memory-function catalog M(t, tau) and property probes.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "dynmem/errors.hpp"
#include "dynmem/quadrature.hpp"
#include "dynmem/specfun.hpp"

namespace dynmem {

namespace kernel {

struct NoMemory {
    double m = 1.0;
};
struct FixedLag {
    double m = 1.0;
    double T = 1.0;
};
/// m (t-tau)^{alpha-1} / Gamma(alpha)
struct PowerLaw {
    double m = 1.0;
    double alpha = 1.0;
};
/// Accelerator kernel a (t-tau)^{n-alpha-1} / Gamma(n-alpha) acting on X^{(n)}.
/// Integer alpha is the distributional limit with n = alpha.
struct PowerLawDeriv {
    double a = 1.0;
    double alpha = 0.5;
    [[nodiscard]] int n() const {
        const double f = std::floor(alpha);
        return f == alpha ? static_cast<int>(f) : static_cast<int>(f) + 1;
    }
};
struct TwoParam {
    double m_a = 1.0;
    double alpha = 0.5;
    double m_b = 1.0;
    double beta = 0.5;
};
struct TwoParamDeriv {
    double a_a = 1.0;
    double alpha = 0.5;
    double a_b = 1.0;
    double beta = 0.5;
};
struct VariableOrder {
    double m = 1.0;
    std::function<double(double)> alpha_fn;
};
/// (t^{-alpha-eta}/Gamma(alpha)) m tau^eta (t-tau)^{alpha-1}
struct Kober {
    double m = 1.0;
    double alpha = 0.5;
    double eta = 0.0;
};
/// (sigma t^{-sigma(alpha+eta)}/Gamma(alpha)) m tau^{sigma(eta+1)-1} (t^sigma - tau^sigma)^{alpha-1}
struct ErdelyiKober {
    double m = 1.0;
    double alpha = 0.5;
    double eta = 0.0;
    double sigma = 1.0;
};
struct DistributedUniform {
    double m = 1.0;
    double a1 = 0.0;
    double a2 = 1.0;
};

/// Truncated-Gaussian distributed order. The order integral uses a fixed
/// 64-node Gauss-Legendre rule on the effective support, built once.
class DistributedNormal {
public:
    DistributedNormal() : DistributedNormal(1.0, TruncatedGaussian{}) {}
    DistributedNormal(double m, TruncatedGaussian g) : m_(m), g_(g) {
        g_.validate();
        const auto& rule = detail::gl64();
        const double lo = g_.effective_lo();
        const double hi = g_.effective_hi();
        const double mid = 0.5 * (lo + hi);
        const double half = 0.5 * (hi - lo);
        const double norm = g_.normalization();
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double a = mid + half * rule.nodes[i];
            orders_.push_back(a);
            weights_.push_back(half * rule.weights[i] * g_.density(a) / norm);
        }
    }

    [[nodiscard]] double m() const { return m_; }
    [[nodiscard]] const TruncatedGaussian& gaussian() const { return g_; }
    /// Order nodes alpha_i and weights w_i with sum_i w_i f(alpha_i) ~ int rho/N f dalpha.
    [[nodiscard]] const std::vector<double>& orders() const { return orders_; }
    [[nodiscard]] const std::vector<double>& weights() const { return weights_; }

private:
    double m_;
    TruncatedGaussian g_;
    std::vector<double> orders_;
    std::vector<double> weights_;
};

}  // namespace kernel

using MemoryKernel =
    std::variant<kernel::NoMemory, kernel::FixedLag, kernel::PowerLaw, kernel::PowerLawDeriv,
                 kernel::TwoParam, kernel::TwoParamDeriv, kernel::VariableOrder, kernel::Kober,
                 kernel::ErdelyiKober, kernel::DistributedUniform, kernel::DistributedNormal>;

inline std::string kernel_name(const MemoryKernel& k) {
    static const char* names[] = {"no_memory",       "fixed_lag",      "power_law",
                                  "power_law_deriv", "two_param",      "two_param_deriv",
                                  "variable_order",  "kober",          "erdelyi_kober",
                                  "distributed_uniform", "distributed_normal"};
    return names[k.index()];
}

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline void check_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw domain_error(std::string(what) + " must be finite");
}

inline void power_law_m_check(double a, const char* who) {
    if (!(a > 0.0)) throw domain_error(std::string(who) + ": alpha must be positive");
}

inline double power_law_value(double m, double alpha, double d) {
    return m * std::pow(d, alpha - 1.0) * rgamma(alpha);
}

// Accelerator term a d^{n-alpha-1}/Gamma(n-alpha) with n = floor(alpha)+1.
inline double deriv_term(double a, double alpha, double d) {
    const double n = std::floor(alpha) + 1.0;
    return a * std::pow(d, n - alpha - 1.0) * rgamma(n - alpha);
}

// d = t - tau is passed separately so that t^sigma - tau^sigma keeps its digits as tau -> t.
inline double erdelyi_kober_value(double m, double alpha, double eta, double sigma, double t,
                                  double tau, double d) {
    const double gap = -std::pow(t, sigma) * std::expm1(sigma * std::log1p(-d / t));
    return sigma * std::pow(t, -sigma * (alpha + eta)) * rgamma(alpha) * m *
           std::pow(tau, sigma * (eta + 1.0) - 1.0) * std::pow(gap, alpha - 1.0);
}

}  // namespace detail

/// Check the parameter ranges of a kernel.
inline void validate(const MemoryKernel& k) {
    using namespace kernel;
    std::visit(detail::overloaded{
                   [](const NoMemory& v) { detail::check_finite(v.m, "m"); },
                   [](const FixedLag& v) {
                       detail::check_finite(v.m, "m");
                       detail::require(v.T >= 0.0, "fixed_lag: T must be >= 0");
                   },
                   [](const PowerLaw& v) {
                       detail::check_finite(v.m, "m");
                       detail::power_law_m_check(v.alpha, "power_law");
                   },
                   [](const PowerLawDeriv& v) {
                       detail::check_finite(v.a, "a");
                       detail::require(v.alpha >= 0.0, "power_law_deriv: alpha must be >= 0");
                   },
                   [](const TwoParam& v) {
                       detail::check_finite(v.m_a, "m_a");
                       detail::check_finite(v.m_b, "m_b");
                       detail::require(v.alpha > 0.0 && v.beta > 0.0,
                                       "two_param: orders must be positive");
                   },
                   [](const TwoParamDeriv& v) {
                       detail::check_finite(v.a_a, "a_a");
                       detail::check_finite(v.a_b, "a_b");
                       detail::require(v.alpha >= 0.0 && v.beta >= 0.0,
                                       "two_param_deriv: orders must be >= 0");
                   },
                   [](const VariableOrder& v) {
                       detail::check_finite(v.m, "m");
                       detail::require(static_cast<bool>(v.alpha_fn),
                                       "variable_order: alpha_fn missing");
                   },
                   [](const Kober& v) {
                       detail::check_finite(v.m, "m");
                       detail::check_finite(v.eta, "eta");
                       detail::power_law_m_check(v.alpha, "kober");
                   },
                   [](const ErdelyiKober& v) {
                       detail::check_finite(v.m, "m");
                       detail::check_finite(v.eta, "eta");
                       detail::power_law_m_check(v.alpha, "erdelyi_kober");
                       detail::require(v.sigma > 0.0, "erdelyi_kober: sigma must be positive");
                   },
                   [](const DistributedUniform& v) {
                       detail::check_finite(v.m, "m");
                       detail::require(v.a1 >= 0.0 && v.a2 > v.a1,
                                       "distributed_uniform: requires a2 > a1 >= 0");
                   },
                   [](const DistributedNormal& v) {
                       detail::check_finite(v.m(), "m");
                       v.gaussian().validate();
                   },
               },
               k);
}

inline bool is_pointwise(const MemoryKernel& k) {
    if (std::holds_alternative<kernel::NoMemory>(k) || std::holds_alternative<kernel::FixedLag>(k)) {
        return false;
    }
    if (const auto* d = std::get_if<kernel::PowerLawDeriv>(&k)) {
        return d->alpha != std::floor(d->alpha);
    }
    return true;
}

namespace detail {
// M(t, tau) with the lag d = t - tau supplied by the caller, so both ends keep their digits.
inline double kernel_value(const MemoryKernel& k, double t, double tau, double d) {
    using namespace kernel;
    if (!is_pointwise(k)) {
        throw integrability_error("eval_kernel: " + kernel_name(k) +
                                  " is distributional and has no pointwise value");
    }
    if (!(tau >= 0.0) || !(d > 0.0)) throw domain_error("eval_kernel: requires 0 <= tau < t");
    return std::visit(
        detail::overloaded{
            [](const NoMemory&) { return 0.0; },
            [](const FixedLag&) { return 0.0; },
            [d](const PowerLaw& v) { return detail::power_law_value(v.m, v.alpha, d); },
            [d](const PowerLawDeriv& v) { return detail::deriv_term(v.a, v.alpha, d); },
            [d](const TwoParam& v) {
                return detail::power_law_value(v.m_a, v.alpha, d) +
                       detail::power_law_value(v.m_b, v.beta, d);
            },
            [d](const TwoParamDeriv& v) {
                return detail::deriv_term(v.a_a, v.alpha, d) + detail::deriv_term(v.a_b, v.beta, d);
            },
            [d, t](const VariableOrder& v) {
                const double a = v.alpha_fn(t);
                if (!(a > 0.0)) throw domain_error("variable_order: alpha(t) must be positive");
                return detail::power_law_value(v.m, a, d);
            },
            [t, tau, d](const Kober& v) {
                return detail::erdelyi_kober_value(v.m, v.alpha, v.eta, 1.0, t, tau, d);
            },
            [t, tau, d](const ErdelyiKober& v) {
                return detail::erdelyi_kober_value(v.m, v.alpha, v.eta, v.sigma, t, tau, d);
            },
            [d](const DistributedUniform& v) {
                return v.m * vi(v.a1, v.a2, d) / ((v.a2 - v.a1) * d);
            },
            [d](const DistributedNormal& v) {
                const auto& a = v.orders();
                const auto& w = v.weights();
                const double ld = std::log(d);
                double s = 0.0;
                for (std::size_t i = 0; i < a.size(); ++i) {
                    s += w[i] * std::exp((a[i] - 1.0) * ld) * rgamma(a[i]);
                }
                return v.m() * s;
            },
        },
        k);
}

}  // namespace detail

/// M(t, tau) for 0 <= tau < t.
inline double eval_kernel(const MemoryKernel& k, double t, double tau) {
    if (!(tau >= 0.0) || !(tau < t)) throw domain_error("eval_kernel: requires 0 <= tau < t");
    return detail::kernel_value(k, t, tau, t - tau);
}

/// Power exponents of the kernel at tau -> 0 and tau -> t used to pick the
/// quadrature substitution; values <= -1 mean non-integrable.
struct EndpointExponents {
    double at_zero = 0.0;
    double at_t = 0.0;
};

inline EndpointExponents endpoint_exponents(const MemoryKernel& k, double t) {
    using namespace kernel;
    return std::visit(
        detail::overloaded{
            [](const NoMemory&) { return EndpointExponents{}; },
            [](const FixedLag&) { return EndpointExponents{}; },
            [](const PowerLaw& v) { return EndpointExponents{0.0, v.alpha - 1.0}; },
            [](const PowerLawDeriv& v) {
                const double n = std::floor(v.alpha) + 1.0;
                return EndpointExponents{0.0, n - v.alpha - 1.0};
            },
            [](const TwoParam& v) {
                return EndpointExponents{0.0, std::min(v.alpha, v.beta) - 1.0};
            },
            [](const TwoParamDeriv& v) {
                const double ea = std::floor(v.alpha) - v.alpha;
                const double eb = std::floor(v.beta) - v.beta;
                return EndpointExponents{0.0, std::min(ea, eb)};
            },
            [t](const VariableOrder& v) { return EndpointExponents{0.0, v.alpha_fn(t) - 1.0}; },
            [](const Kober& v) { return EndpointExponents{v.eta, v.alpha - 1.0}; },
            [](const ErdelyiKober& v) {
                return EndpointExponents{v.sigma * (v.eta + 1.0) - 1.0, v.alpha - 1.0};
            },
            // Near a1 = 0 the order integral only gives a logarithmic gain; treat the
            // kernel as if it behaved like d^{-0.95}.
            [](const DistributedUniform& v) {
                return EndpointExponents{0.0, std::max(v.a1, 0.05) - 1.0};
            },
            [](const DistributedNormal& v) {
                return EndpointExponents{0.0, std::max(v.orders().front(), 0.05) - 1.0};
            },
        },
        k);
}

/// int_0^t M(t, tau) dtau. Symbolic kernels integrate their sifting action on X = 1.
inline double normalization_integral(const MemoryKernel& k, double t) {
    detail::require(t > 0.0, "normalization_integral: requires t > 0");
    validate(k);
    if (const auto* v = std::get_if<kernel::NoMemory>(&k)) return v->m;
    if (const auto* v = std::get_if<kernel::FixedLag>(&k)) return t > v->T ? v->m : 0.0;
    if (!is_pointwise(k)) {
        throw integrability_error("normalization_integral: " + kernel_name(k) +
                                  " is distributional");
    }
    const auto ex = endpoint_exponents(k, t);
    if (ex.at_zero <= -1.0 || ex.at_t <= -1.0) {
        throw integrability_error("normalization_integral: " + kernel_name(k) +
                                  " is not integrable on (0, t)");
    }
    // Near tau = 0 integrate in tau, near tau = t in the lag d = t - tau.
    const double mid = 0.5 * t;
    auto near_zero = [&](double tau) { return detail::kernel_value(k, t, tau, t - tau); };
    auto near_t = [&](double d) { return d <= 0.0 ? 0.0 : detail::kernel_value(k, t, t - d, d); };
    const AdaptiveOptions opt{1e-11, 1e-11, 60};
    return integrate_endpoint_singular(near_zero, 0.0, mid, ex.at_zero, true, opt) +
           integrate_endpoint_singular(near_t, 0.0, mid, ex.at_t, true, opt);
}

// ---------------------------------------------------------------------------
// Probes

struct FadingEvidence {
    double tau = 0.0;
    std::vector<double> t;       // ladder of evaluation times
    std::vector<double> values;  // M(t, tau)
    double ratio = 0.0;          // last / first
    double ratio_threshold = 1e-3;
    bool monotone_tail = false;  // strictly decreasing over the last decade
    bool monotone = false;       // non-increasing over the whole ladder
    double slope = 0.0;          // log-log slope over the last decade
    double alpha_hat = 0.0;      // 1 + slope
    bool fading = false;
};

struct StationaryEvidence {
    std::vector<double> shifts;
    double max_deviation = 0.0;  // max |M(t+s, tau+s) - M(t, tau)| / (1 + |M(t, tau)|)
    double tolerance = 1e-12;
    std::size_t lattice_points = 0;
    bool stationary = false;
};

enum class UnitPreservation { yes, yes_up_to_constant, no };

struct UnitEvidence {
    std::vector<double> t;
    std::vector<double> integrals;
    UnitPreservation verdict = UnitPreservation::no;
    double constant = 0.0;
};

struct KernelProbeReport {
    bool fading = false;
    bool stationary = false;
    UnitPreservation unit_preserving = UnitPreservation::no;
    double unit_constant = 0.0;
    FadingEvidence fading_evidence;
    StationaryEvidence stationary_evidence;
    UnitEvidence unit_evidence;
};

inline std::string to_string(UnitPreservation u) {
    switch (u) {
        case UnitPreservation::yes: return "yes";
        case UnitPreservation::yes_up_to_constant: return "yes_up_to_constant";
        case UnitPreservation::no: return "no";
    }
    return "no";
}

/// Evaluate M(t, tau_fixed) on a geometric ladder of t - tau_fixed (10 points per
/// decade, ending at t_max) and classify fading.
inline FadingEvidence probe_fading(const MemoryKernel& k, double tau_fixed, double t_max) {
    detail::require(tau_fixed >= 0.0 && t_max > tau_fixed, "probe_fading: requires t_max > tau >= 0");
    FadingEvidence ev;
    ev.tau = tau_fixed;
    const double span = t_max - tau_fixed;
    const double d0 = span > 10.0 ? 1.0 : span * 1e-3;
    const double decades = std::log10(span / d0);
    const int npts = std::max(11, static_cast<int>(std::ceil(decades * 10.0)) + 1);
    for (int i = 0; i < npts; ++i) {
        const double d = d0 * std::pow(span / d0, static_cast<double>(i) / (npts - 1));
        const double t = i == npts - 1 ? t_max : tau_fixed + d;
        ev.t.push_back(t);
        ev.values.push_back(eval_kernel(k, t, tau_fixed));
    }
    const double first = ev.values.front();
    const double last = ev.values.back();
    ev.ratio = first != 0.0 ? last / first : 0.0;
    // Last decade: points with t - tau >= span/10.
    std::vector<std::size_t> tail;
    for (std::size_t i = 0; i < ev.t.size(); ++i) {
        if (ev.t[i] - tau_fixed >= span / 10.0 * (1.0 - 1e-12)) tail.push_back(i);
    }
    ev.monotone_tail = tail.size() >= 2;
    for (std::size_t j = 1; j < tail.size(); ++j) {
        if (!(ev.values[tail[j]] < ev.values[tail[j - 1]])) ev.monotone_tail = false;
    }
    ev.monotone = true;
    for (std::size_t i = 1; i < ev.values.size(); ++i) {
        if (ev.values[i] > ev.values[i - 1]) ev.monotone = false;
    }
    // Least-squares slope of log M against log(t - tau) on the tail.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double cnt = 0;
    for (std::size_t i : tail) {
        if (!(ev.values[i] > 0.0)) continue;
        const double x = std::log(ev.t[i] - tau_fixed);
        const double y = std::log(ev.values[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        cnt += 1;
    }
    if (cnt >= 2) {
        ev.slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
        ev.alpha_hat = 1.0 + ev.slope;
    }
    ev.fading = std::abs(last) < ev.ratio_threshold * std::abs(first) && ev.monotone_tail;
    return ev;
}

/// Compare M(t+s, tau+s) with M(t, tau) on a fixed lattice of (t, tau).
inline StationaryEvidence probe_stationary(const MemoryKernel& k, const std::vector<double>& shifts) {
    StationaryEvidence ev;
    ev.shifts = shifts;
    static const double ts[] = {0.5, 1.0, 2.0, 3.5, 5.0, 8.0};
    static const double fr[] = {0.05, 0.1, 0.3, 0.5, 0.7, 0.9};
    for (double t : ts) {
        for (double f : fr) {
            const double tau = f * t;
            const double base = eval_kernel(k, t, tau);
            for (double s : shifts) {
                if (tau + s < 0.0) continue;
                const double moved = eval_kernel(k, t + s, tau + s);
                const double dev = std::abs(moved - base) / (1.0 + std::abs(base));
                ev.max_deviation = std::max(ev.max_deviation, dev);
                ++ev.lattice_points;
            }
        }
    }
    ev.stationary = ev.lattice_points > 0 && ev.max_deviation <= ev.tolerance;
    return ev;
}

/// Normalization integrals at several t: unit preserving if all equal 1, up to a
/// constant if all equal some c != 1 (relative spread below `tol`).
inline UnitEvidence probe_unit_preserving(const MemoryKernel& k, const std::vector<double>& t_values,
                                          double tol = 1e-7) {
    UnitEvidence ev;
    ev.t = t_values;
    for (double t : t_values) ev.integrals.push_back(normalization_integral(k, t));
    if (ev.integrals.empty()) return ev;
    const double c = ev.integrals.front();
    bool constant = true;
    for (double v : ev.integrals) {
        if (std::abs(v - c) > tol * std::max(1.0, std::abs(c))) constant = false;
    }
    ev.constant = c;
    if (!constant || c == 0.0) {
        ev.verdict = UnitPreservation::no;
    } else if (std::abs(c - 1.0) <= tol) {
        ev.verdict = UnitPreservation::yes;
    } else {
        ev.verdict = UnitPreservation::yes_up_to_constant;
    }
    return ev;
}

struct ProbeSettings {
    double tau_fixed = 1.0;  // tau = 0 is degenerate for Kober and Erdelyi-Kober kernels
    double t_max = 1e7;
    std::vector<double> shifts = {0.5, 1.0, 3.0};
    std::vector<double> unit_t = {0.5, 1.0, 2.0, 5.0};
};

inline KernelProbeReport probe_kernel(const MemoryKernel& k, const ProbeSettings& s = {}) {
    validate(k);
    KernelProbeReport r;
    r.fading_evidence = probe_fading(k, s.tau_fixed, s.t_max);
    r.stationary_evidence = probe_stationary(k, s.shifts);
    r.unit_evidence = probe_unit_preserving(k, s.unit_t);
    r.fading = r.fading_evidence.fading;
    r.stationary = r.stationary_evidence.stationary;
    r.unit_preserving = r.unit_evidence.verdict;
    r.unit_constant = r.unit_evidence.constant;
    return r;
}

}  // namespace dynmem
