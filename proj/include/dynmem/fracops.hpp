#pragma once

// Operator engine: multiplier and accelerator with memory, Riemann-Liouville and
// Caputo operators, Kober / Erdelyi-Kober operators, variable, multi-term and
// distributed order.
//
// Inputs are represented as piecewise-linear functions on the grid (plus any jump
// times); the power-law factor is integrated exactly on every piece.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dynmem/errors.hpp"
#include "dynmem/kernels.hpp"
#include "dynmem/quadrature.hpp"
#include "dynmem/signal.hpp"
#include "dynmem/specfun.hpp"

namespace dynmem {

struct QuadratureScheme {
    enum class Kind { product_rectangle, product_trapezoid, l1_caputo };
    Kind kind = Kind::product_trapezoid;
    double tolerance = 1e-10;  // used by the adaptive time-first paths
    double grading = 1.0;      // grid grading a caller should pair with this scheme

    static QuadratureScheme rectangle() { return {Kind::product_rectangle}; }
    static QuadratureScheme trapezoid() { return {Kind::product_trapezoid}; }
    static QuadratureScheme l1() { return {Kind::l1_caputo}; }

    /// Declared convergence order (for the L1 scheme it depends on alpha).
    [[nodiscard]] double declared_order(double alpha = 0.5) const {
        switch (kind) {
            case Kind::product_rectangle: return 1.0;
            case Kind::product_trapezoid: return 2.0;
            case Kind::l1_caputo: return 2.0 - alpha;
        }
        return 0.0;
    }
};

inline std::string to_string(QuadratureScheme::Kind k) {
    switch (k) {
        case QuadratureScheme::Kind::product_rectangle: return "product_rectangle";
        case QuadratureScheme::Kind::product_trapezoid: return "product_trapezoid";
        case QuadratureScheme::Kind::l1_caputo: return "l1_caputo";
    }
    return "?";
}

namespace order {
struct Scalar {
    double alpha = 0.5;
};
struct Term {
    double coef = 1.0;
    double alpha = 0.5;
};
struct MultiTerm {
    std::vector<Term> terms;
};
struct Variable {
    std::function<double(double)> alpha_fn;
};
struct DistributedUniform {
    double a1 = 0.0;
    double a2 = 1.0;
};
struct DistributedNormal {
    TruncatedGaussian gaussian;
};
}  // namespace order

using OrderSpec = std::variant<order::Scalar, order::MultiTerm, order::Variable,
                               order::DistributedUniform, order::DistributedNormal>;

namespace detail {

// ---------------------------------------------------------------------------
// Piecewise-linear representation

struct Knots {
    std::vector<double> t;
    std::vector<double> left;   // X(t_j-)
    std::vector<double> right;  // X(t_j+)
    std::vector<std::size_t> of_grid;  // knot index of each grid point
    bool has_jumps = false;
};

inline Knots make_knots(const SampledSignal& x) {
    const Grid& g = x.grid();
    Knots k;
    const auto& jumps = x.jumps();
    std::size_t jn = 0;
    k.of_grid.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        while (jn < jumps.size() && jumps[jn].t < g[i]) {
            k.t.push_back(jumps[jn].t);
            k.left.push_back(jumps[jn].left);
            k.right.push_back(jumps[jn].right);
            ++jn;
        }
        if (jn < jumps.size() && jumps[jn].t == g[i]) {
            k.t.push_back(g[i]);
            k.left.push_back(jumps[jn].left);
            k.right.push_back(jumps[jn].right);
            ++jn;
        } else {
            k.t.push_back(g[i]);
            k.left.push_back(x[i]);
            k.right.push_back(x[i]);
        }
        k.of_grid[i] = k.t.size() - 1;
    }
    k.has_jumps = !jumps.empty();
    return k;
}

inline void require_origin(const Grid& g, const char* who) {
    if (g.t0() != 0.0) {
        throw domain_error(std::string(who) + ": grid must start at t = 0 (lower limit 0+)");
    }
}

/// ua^p - ub^p for ua = ub + d > ub >= 0, accurate when d << ub.
inline double pow_diff(double ua, double ub, double d, double p) {
    if (ub == 0.0) return std::pow(ua, p);
    return std::pow(ub, p) * std::expm1(p * std::log1p(d / ub));
}

/// Per-segment weights of the product rules for I^alpha at an output time:
/// p0 = int (t-tau)^{alpha-1}/Gamma(alpha) over the segment,
/// q  = int (t-tau)^{alpha-1}/Gamma(alpha) (tau - a) over the segment.
struct SegmentWeights {
    double p0;
    double q;
};

struct PowerFactors {
    double g1;  // 1/Gamma(alpha+1)
    double g2;  // alpha/Gamma(alpha+2)
    double alpha;
};

inline PowerFactors power_factors(double alpha) {
    return {rgamma(alpha + 1.0), alpha * rgamma(alpha + 2.0), alpha};
}

inline SegmentWeights segment_weights(const PowerFactors& f, double ua, double ub, double d) {
    const double p0 = pow_diff(ua, ub, d, f.alpha) * f.g1;
    const double p1 = pow_diff(ua, ub, d, f.alpha + 1.0) * f.g2;
    return {p0, ua * p0 - p1};
}

// One output value of I^alpha on knots 0..last, using the product trapezoid
// (linear pieces) or product rectangle (left values).
inline double rl_row(const PowerFactors& f, const Knots& k, std::size_t last, bool trapezoid) {
    const double t = k.t[last];
    double sum = 0.0;
    for (std::size_t j = 0; j < last; ++j) {
        const double a = k.t[j];
        const double b = k.t[j + 1];
        const double d = b - a;
        const SegmentWeights w = segment_weights(f, t - a, t - b, d);
        const double xa = k.right[j];
        if (trapezoid) {
            const double slope = (k.left[j + 1] - xa) / d;
            sum += xa * w.p0 + slope * w.q;
        } else {
            sum += xa * w.p0;
        }
    }
    return sum;
}

inline std::vector<double> rl_values(double alpha, const SampledSignal& x, bool trapezoid) {
    require_origin(x.grid(), "rl_integral");
    const Grid& g = x.grid();
    const std::size_t n = g.size();
    std::vector<double> y(n, 0.0);
    const PowerFactors f = power_factors(alpha);
    if (g.uniform() && x.jumps().empty()) {
        // Toeplitz structure: segment weights depend only on the index distance.
        const double h = g.h();
        std::vector<double> wa(n), wb(n);
        for (std::size_t m = 1; m < n; ++m) {
            const double ua = static_cast<double>(m) * h;
            const double ub = static_cast<double>(m - 1) * h;
            const SegmentWeights w = segment_weights(f, ua, ub, h);
            if (trapezoid) {
                wb[m] = w.q / h;
                wa[m] = w.p0 - wb[m];
            } else {
                wa[m] = w.p0;
                wb[m] = 0.0;
            }
        }
        const auto& v = x.values();
        for (std::size_t i = 1; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < i; ++j) {
                const std::size_t m = i - j;
                s += wa[m] * v[j] + wb[m] * v[j + 1];
            }
            y[i] = s;
        }
        return y;
    }
    const Knots k = make_knots(x);
    for (std::size_t i = 1; i < n; ++i) y[i] = rl_row(f, k, k.of_grid[i], trapezoid);
    return y;
}

// ---------------------------------------------------------------------------
// Derivatives of inputs

inline std::vector<double> fd_first(const std::vector<double>& v, double h) {
    const std::size_t n = v.size();
    std::vector<double> d(n);
    if (n < 3) {
        const double s = (v[1] - v[0]) / h;
        std::fill(d.begin(), d.end(), s);
        return d;
    }
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    return d;
}

inline std::vector<double> fd_second(const std::vector<double>& v, double h) {
    const std::size_t n = v.size();
    if (n < 4) throw missing_derivative_error("finite differences: need at least 4 grid points");
    std::vector<double> d(n);
    const double h2 = h * h;
    d[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2;
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2;
    d[n - 1] = (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / h2;
    return d;
}

inline std::vector<double> fd_derivative(std::vector<double> v, double h, int order) {
    while (order >= 2) {
        v = fd_second(v, h);
        order -= 2;
    }
    if (order == 1) v = fd_first(v, h);
    return v;
}

}  // namespace detail

/// A point mass c * delta(t - T) produced by differentiating a jump.
struct PointMass {
    double t = 0.0;
    double mass = 0.0;
};

/// X^{(n)} as a regular signal plus the point masses of the distributional part.
struct DerivativeSignal {
    SampledSignal regular;
    std::vector<PointMass> masses;
};

/// Order-n derivative of X: analytic when available, otherwise second-order finite
/// differences on a uniform grid. Jumps of X become point masses for n = 1.
inline DerivativeSignal derivative_signal(const SampledSignal& x, int n) {
    detail::require(n >= 0, "derivative_signal: order must be >= 0");
    if (n == 0) return {x, {}};
    if (!x.jumps().empty() && n >= 2) {
        throw missing_derivative_error(
            "derivative of order >= 2 of a discontinuous input is not a measure");
    }
    const Grid& g = x.grid();
    DerivativeSignal out;
    if (x.has_derivative(n)) {
        std::vector<double> v(g.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = x.derivative(n, g[i]);
        out.regular = SampledSignal(g, std::move(v));
        const DerivativeFn f = x.analytic();
        const int rest = x.max_order() - n;
        out.regular.with_derivatives([f, n](int k, double t) { return f(k + n, t); }, rest);
    } else {
        if (!x.jumps().empty()) {
            throw missing_derivative_error(
                "finite differences across a jump: supply an analytic derivative");
        }
        if (!g.uniform()) {
            throw missing_derivative_error("derivative of order " + std::to_string(n) +
                                           " needs an analytic provider or a uniform grid");
        }
        out.regular = SampledSignal(g, detail::fd_derivative(x.values(), g.h(), n));
    }
    for (const auto& j : x.jumps()) out.masses.push_back({j.t, j.right - j.left});
    return out;
}

inline SampledSignal scaled(const SampledSignal& x, double c) {
    std::vector<double> v = x.values();
    for (double& e : v) e *= c;
    SampledSignal out(x.grid(), std::move(v));
    if (x.max_order() >= 0) {
        DerivativeFn f = x.analytic();
        out.with_derivatives([f, c](int k, double t) { return c * f(k, t); }, x.max_order());
    }
    if (!x.jumps().empty()) {
        std::vector<Jump> js = x.jumps();
        for (auto& j : js) {
            j.left *= c;
            j.right *= c;
        }
        out.with_jumps(std::move(js));
    }
    return out;
}

namespace detail {

inline SampledSignal values_on(const Grid& g, std::vector<double> v) {
    return SampledSignal(g, std::move(v));
}

inline void add_into(std::vector<double>& acc, const std::vector<double>& v, double c = 1.0) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += c * v[i];
}

// m * sum_k mass_k * M(t, T_k) over masses strictly before t.
template <class F>
void add_masses(std::vector<double>& y, const Grid& g, const std::vector<PointMass>& masses, F&& kernel) {
    for (const auto& pm : masses) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (pm.t < g[i]) y[i] += pm.mass * kernel(g[i], pm.t);
        }
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Riemann-Liouville and Caputo

/// (I^alpha X)(t_i) by product integration on the grid of X.
inline SampledSignal rl_integral(double alpha, const SampledSignal& x,
                                 const QuadratureScheme& scheme = {}) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw domain_error("rl_integral: alpha must be > 0");
    const bool trap = scheme.kind != QuadratureScheme::Kind::product_rectangle;
    return detail::values_on(x.grid(), detail::rl_values(alpha, x, trap));
}

/// Caputo derivative of order alpha >= 0. Integer alpha returns X^{(alpha)}.
/// L1 scheme: piecewise-linear X^{(n-1)} with exact power-law weights.
/// Product schemes: I^{n-alpha} applied to X^{(n)}.
/// Jumps of X (n = 1) contribute their exact point-mass terms; the value at a jump
/// time is the left limit.
inline SampledSignal caputo_derivative(double alpha, const SampledSignal& x,
                                       const QuadratureScheme& scheme = QuadratureScheme::l1()) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw domain_error("caputo_derivative: alpha must be >= 0");
    }
    const Grid& g = x.grid();
    const double fl = std::floor(alpha);
    if (alpha == fl) {
        const int n = static_cast<int>(fl);
        if (n == 0) return x;
        const DerivativeSignal d = derivative_signal(x, n);
        if (!d.masses.empty()) {
            throw missing_derivative_error("integer-order derivative of a jump is a distribution");
        }
        return d.regular;
    }
    detail::require_origin(g, "caputo_derivative");
    const int n = static_cast<int>(fl) + 1;
    const double beta = static_cast<double>(n) - alpha;
    std::vector<double> y(g.size(), 0.0);
    std::vector<PointMass> masses;
    if (scheme.kind == QuadratureScheme::Kind::l1_caputo) {
        const DerivativeSignal dn1 = derivative_signal(x, n - 1);
        const SampledSignal& v = dn1.regular;
        masses = dn1.masses;
        if (n == 1) {
            for (const auto& j : x.jumps()) masses.push_back({j.t, j.right - j.left});
        }
        const detail::Knots k = detail::make_knots(v);
        const detail::PowerFactors f = detail::power_factors(beta);
        if (g.uniform() && v.jumps().empty()) {
            const double h = g.h();
            std::vector<double> w(g.size());
            for (std::size_t m = 1; m < g.size(); ++m) {
                const double ua = static_cast<double>(m) * h;
                w[m] = detail::pow_diff(ua, ua - h, h, beta) * f.g1 / h;
            }
            for (std::size_t i = 1; i < g.size(); ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < i; ++j) s += w[i - j] * (v[j + 1] - v[j]);
                y[i] = s;
            }
        } else {
            for (std::size_t i = 1; i < g.size(); ++i) {
                const std::size_t last = k.of_grid[i];
                const double t = k.t[last];
                double s = 0.0;
                for (std::size_t j = 0; j < last; ++j) {
                    const double d = k.t[j + 1] - k.t[j];
                    const double slope = (k.left[j + 1] - k.right[j]) / d;
                    s += slope * detail::pow_diff(t - k.t[j], t - k.t[j + 1], d, beta) * f.g1;
                }
                y[i] = s;
            }
        }
    } else {
        const DerivativeSignal dn = derivative_signal(x, n);
        masses = dn.masses;
        y = detail::rl_values(beta, dn.regular,
                              scheme.kind == QuadratureScheme::Kind::product_trapezoid);
    }
    const double rg = rgamma(beta);
    detail::add_masses(y, g, masses, [beta, rg](double t, double T) {
        return std::pow(t - T, beta - 1.0) * rg;
    });
    return detail::values_on(g, std::move(y));
}

/// Riemann-Liouville integral of variable order with alpha frozen at the outer time.
inline SampledSignal variable_order_integral(const std::function<double(double)>& alpha_fn,
                                             const SampledSignal& x,
                                             const QuadratureScheme& scheme = {}) {
    detail::require(static_cast<bool>(alpha_fn), "variable_order_integral: alpha_fn missing");
    const Grid& g = x.grid();
    detail::require_origin(g, "variable_order_integral");
    for (double t : g.points()) {
        const double a = alpha_fn(t);
        if (!(a > 0.0) || !std::isfinite(a)) {
            throw domain_error("variable_order_integral: alpha(t) must stay positive (t=" +
                               std::to_string(t) + ")");
        }
    }
    const bool trap = scheme.kind != QuadratureScheme::Kind::product_rectangle;
    const detail::Knots k = detail::make_knots(x);
    std::vector<double> y(g.size(), 0.0);
    for (std::size_t i = 1; i < g.size(); ++i) {
        y[i] = detail::rl_row(detail::power_factors(alpha_fn(g[i])), k, k.of_grid[i], trap);
    }
    return detail::values_on(g, std::move(y));
}

/// Sum of coefficient-weighted Caputo derivatives.
inline SampledSignal multi_term_accelerator(const order::MultiTerm& spec, const SampledSignal& x,
                                            const QuadratureScheme& scheme = QuadratureScheme::l1()) {
    if (spec.terms.empty()) throw domain_error("multi_term_accelerator: term list is empty");
    std::vector<double> y(x.size(), 0.0);
    for (const auto& term : spec.terms) {
        if (!(term.alpha >= 0.0)) throw domain_error("multi_term_accelerator: orders must be >= 0");
        if (term.coef == 0.0) continue;
        detail::add_into(y, caputo_derivative(term.alpha, x, scheme).values(), term.coef);
    }
    return detail::values_on(x.grid(), std::move(y));
}

// ---------------------------------------------------------------------------
// Kober and Erdelyi-Kober

namespace detail {

// Kober integral on knots (u_j, left_j, right_j) evaluated at s = u_last:
// (s^{-alpha-eta}/Gamma(alpha)) int_0^s u^eta (s-u)^{alpha-1} X(u) du with X linear
// between knots, via incomplete Beta functions of u/s.
inline double kober_row(double alpha, double eta, const std::vector<double>& u,
                        const std::vector<double>& left, const std::vector<double>& right,
                        std::size_t last) {
    const double s = u[last];
    const double p0 = eta + 1.0;
    const double q = alpha;
    const double b0 = beta(p0, q);
    const double b1 = b0 * p0 / (p0 + q);  // B(eta+2, alpha)
    auto at = [&](double x) {
        // Both orders at x; the (eta+2) part from the recurrence
        // B_x(p+1,q) = (p B_x(p,q) - x^p (1-x)^q)/(p+q) and its upper analogue.
        IncompleteBeta one = incomplete_beta(x, p0, q, b0);
        IncompleteBeta two;
        const double fpow = (x == 0.0 || x == 1.0) ? 0.0 : std::exp(p0 * std::log(x) + q * std::log1p(-x));
        two.direct_lower = one.direct_lower;
        if (one.direct_lower) {
            two.lower = (p0 * one.lower - fpow) / (p0 + q);
            two.upper = b1 - two.lower;
        } else {
            two.upper = (p0 * one.upper + fpow) / (p0 + q);
            two.lower = b1 - two.upper;
        }
        if (x == 0.0) {
            two = {0.0, b1, true};
        } else if (x == 1.0) {
            two = {b1, 0.0, false};
        }
        return std::pair{one, two};
    };
    double sum = 0.0;
    auto prev = at(0.0);
    for (std::size_t j = 0; j < last; ++j) {
        const double x_next = j + 1 == last ? 1.0 : std::min(1.0, u[j + 1] / s);
        auto next = at(x_next);
        const double db0 = incomplete_beta_difference(prev.first, next.first);
        const double db1 = incomplete_beta_difference(prev.second, next.second);
        const double a = u[j];
        const double d = u[j + 1] - a;
        const double xa = right[j];
        const double slope = (left[j + 1] - xa) / d;
        sum += xa * db0 + slope * (s * db1 - a * db0);
        prev = next;
    }
    return sum * rgamma(alpha);
}

inline std::vector<double> kober_values(double alpha, double eta, double sigma, const SampledSignal& x) {
    if (!(alpha > 0.0)) throw domain_error("kober: alpha must be positive");
    if (!(eta > -1.0)) throw integrability_error("kober: eta must exceed -1 for integrability");
    if (!(sigma > 0.0)) throw domain_error("erdelyi_kober: sigma must be positive");
    require_origin(x.grid(), "kober");
    const Knots k = make_knots(x);
    std::vector<double> u(k.t.size());
    for (std::size_t j = 0; j < u.size(); ++j) u[j] = std::pow(k.t[j], sigma);
    const Grid& g = x.grid();
    std::vector<double> y(g.size());
    // Limit at t = 0: X(0) Gamma(eta+1)/Gamma(eta+alpha+1).
    y[0] = k.right[0] * gamma(eta + 1.0) * rgamma(eta + alpha + 1.0);
    for (std::size_t i = 1; i < g.size(); ++i) {
        y[i] = kober_row(alpha, eta, u, k.left, k.right, k.of_grid[i]);
    }
    return y;
}

}  // namespace detail

/// (I^alpha_{0+;eta} X)(t) = (t^{-alpha-eta}/Gamma(alpha)) int_0^t tau^eta (t-tau)^{alpha-1} X dtau.
inline SampledSignal kober_integral(double alpha, double eta, const SampledSignal& x,
                                    const QuadratureScheme& = {}) {
    return detail::values_on(x.grid(), detail::kober_values(alpha, eta, 1.0, x));
}

/// (I^alpha_{0+;sigma,eta} X)(t), reduced to the Kober form by u = tau^sigma; X is
/// interpreted as linear in u between knots.
inline SampledSignal erdelyi_kober_integral(double alpha, double eta, double sigma,
                                            const SampledSignal& x, const QuadratureScheme& = {}) {
    return detail::values_on(x.grid(), detail::kober_values(alpha, eta, sigma, x));
}

namespace detail {

inline double stirling2(int n, int k) {
    if (n == k) return 1.0;
    if (k == 0 || k > n) return 0.0;
    return static_cast<double>(k) * stirling2(n - 1, k) + stirling2(n - 1, k - 1);
}

// Coefficients d_i of X_new = sum_i d_i tau^i X^{(i)} for
// prod_{k=1}^n (theta/sigma + eta + k), theta = tau d/dtau.
inline std::vector<double> ek_coefficients(int n, double eta, double sigma) {
    std::vector<double> c = {1.0};  // polynomial in theta
    for (int k = 1; k <= n; ++k) {
        std::vector<double> next(c.size() + 1, 0.0);
        for (std::size_t j = 0; j < c.size(); ++j) {
            next[j] += c[j] * (eta + k);
            next[j + 1] += c[j] / sigma;
        }
        c = std::move(next);
    }
    std::vector<double> d(n + 1, 0.0);
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= j; ++i) d[i] += c[j] * stirling2(j, i);
    }
    return d;
}

}  // namespace detail

/// X_new(tau) = prod_{k=1}^n (tau/sigma d/dtau + eta + k) X(tau), sampled on the grid of X.
inline SampledSignal ek_transform(const SampledSignal& x, int n, double eta, double sigma) {
    detail::require(n >= 0, "ek_transform: n must be >= 0");
    detail::require(sigma > 0.0, "ek_transform: sigma must be positive");
    if (n > 0 && !x.has_derivative(n)) {
        throw missing_derivative_error("ek_caputo_derivative: needs analytic derivatives up to order " +
                                       std::to_string(n));
    }
    if (!x.jumps().empty() && n > 0) {
        throw missing_derivative_error("ek_caputo_derivative: discontinuous input");
    }
    const auto d = detail::ek_coefficients(n, eta, sigma);
    const Grid& g = x.grid();
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double t = g[i];
        double s = 0.0;
        double tp = 1.0;
        for (int k = 0; k <= n; ++k) {
            const double xk = k == 0 ? x[i] : x.derivative(k, t);
            if (d[k] != 0.0) s += d[k] * tp * xk;
            tp *= t;
        }
        v[i] = s;
    }
    return SampledSignal(g, std::move(v));
}

/// Caputo-type Erdelyi-Kober derivative: X_new integrated against the kernel
/// M^{n-alpha, eta+alpha}_sigma, n - 1 < alpha <= n.
inline SampledSignal ek_caputo_derivative(double alpha, double eta, double sigma, const SampledSignal& x,
                                          const QuadratureScheme& scheme = {}) {
    if (!(alpha > 0.0)) throw domain_error("ek_caputo_derivative: alpha must be positive");
    const int n = static_cast<int>(std::ceil(alpha));
    const SampledSignal xn = ek_transform(x, n, eta, sigma);
    if (static_cast<double>(n) == alpha) return xn;
    return erdelyi_kober_integral(static_cast<double>(n) - alpha, eta + alpha, sigma, xn, scheme);
}

// ---------------------------------------------------------------------------
// Distributed order

/// Order nodes and normalized weights for a distributed-order integral or derivative.
struct OrderQuadrature {
    std::vector<double> orders;
    std::vector<double> weights;
};

inline OrderQuadrature order_quadrature(const order::DistributedUniform& u) {
    if (!(u.a1 >= 0.0 && u.a2 > u.a1)) throw domain_error("distributed order: requires a2 > a1 >= 0");
    OrderQuadrature q;
    const auto& rule = detail::gl64();
    const double mid = 0.5 * (u.a1 + u.a2);
    const double half = 0.5 * (u.a2 - u.a1);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        q.orders.push_back(mid + half * rule.nodes[i]);
        q.weights.push_back(half * rule.weights[i] / (u.a2 - u.a1));
    }
    return q;
}

/// Truncated normal weight; the effective support is split at integers so that no
/// sub-rule straddles a change of n in the Caputo case.
inline OrderQuadrature order_quadrature(const order::DistributedNormal& nd, bool split_at_integers) {
    const auto& g = nd.gaussian;
    g.validate();
    OrderQuadrature q;
    const double lo = g.effective_lo();
    const double hi = g.effective_hi();
    std::vector<double> cuts = {lo};
    if (split_at_integers) {
        for (double k = std::floor(lo) + 1.0; k < hi; k += 1.0) cuts.push_back(k);
    }
    cuts.push_back(hi);
    const double norm = g.normalization();
    const auto& rule = detail::gl64();
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        const double mid = 0.5 * (cuts[c] + cuts[c + 1]);
        const double half = 0.5 * (cuts[c + 1] - cuts[c]);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double a = mid + half * rule.nodes[i];
            q.orders.push_back(a);
            q.weights.push_back(half * rule.weights[i] * g.density(a) / norm);
        }
    }
    return q;
}

/// Check of the normalization condition int rho = 1 for a weight.
inline double weight_mass(const OrderQuadrature& q) {
    CompensatedSum s;
    for (double w : q.weights) s.add(w);
    return s.value();
}

struct DistributedResult {
    SampledSignal order_first;  // int rho(alpha) (I^alpha X)(t) dalpha
    SampledSignal time_first;   // int_0^t M(t - tau) X(tau) dtau
    double max_deviation = 0.0;
};

namespace detail {

inline void check_mass(const OrderQuadrature& q) {
    const double m = weight_mass(q);
    if (std::abs(m - 1.0) > 1e-10) {
        throw domain_error("distributed order: weight normalization violated (mass " +
                           std::to_string(m) + ")");
    }
}

inline std::vector<double> order_first(const OrderQuadrature& q, const SampledSignal& x,
                                       const QuadratureScheme& scheme) {
    std::vector<double> y(x.size(), 0.0);
    for (std::size_t i = 0; i < q.orders.size(); ++i) {
        if (q.weights[i] == 0.0) continue;
        add_into(y, rl_integral(q.orders[i], x, scheme).values(), q.weights[i]);
    }
    return y;
}

// int_0^delta d^{a-1}/Gamma(a) dd and int_0^delta d^a/Gamma(a) dd, summed over the orders.
struct LagMoments {
    double m0 = 0.0;
    double m1 = 0.0;
};

inline LagMoments lag_moments(const std::vector<double>& orders, const std::vector<double>& weights, double delta) {
    LagMoments r;
    for (std::size_t i = 0; i < orders.size(); ++i) {
        const double a = orders[i];
        const double p = std::pow(delta, a);
        r.m0 += weights[i] * p * rgamma(a + 1.0);
        r.m1 += weights[i] * a * p * delta * rgamma(a + 2.0);
    }
    return r;
}

// Time-first: int_0^t M(t - tau) X(tau) dtau for a convolution kernel M(d),
// adaptive quadrature against the piecewise-linear X on each piece; the piece
// ending at tau = t uses the endpoint substitution for d^{exponent}.
// When orders reach down to 0 the mass of M near d = 0 decays only like
// 1/|log d|, so the sliver [0, 1e-6 w] of that piece is taken from `moments`.
template <class M, class Moments>
std::vector<double> time_first(M&& kernel, double exponent, Moments&& moments, const SampledSignal& x,
                               double tol) {
    const Grid& g = x.grid();
    require_origin(g, "distributed_integral");
    const std::size_t n = g.size();
    std::vector<double> y(n, 0.0);
    const AdaptiveOptions opt{tol * 1e-2, tol * 1e-2, 60};
    auto piece = [&](double ub, double ua, bool touches) {
        // Returns int over d in [ub, ua] of M(d) * (d - ub)/(ua - ub) and * (ua - d)/(ua - ub).
        const double w = ua - ub;
        auto fa = [&](double d) { return kernel(d) * (d - ub) / w; };
        auto fb = [&](double d) { return kernel(d) * (ua - d) / w; };
        if (touches) {
            const double delta = 1e-6 * w;
            const LagMoments m = moments(delta);
            return std::pair{m.m1 / w + integrate_endpoint_singular(fa, delta, ua, exponent, true, opt),
                             m.m0 - m.m1 / w + integrate_endpoint_singular(fb, delta, ua, exponent, true, opt)};
        }
        return std::pair{integrate(fa, ub, ua, opt), integrate(fb, ub, ua, opt)};
    };
    if (g.uniform() && x.jumps().empty()) {
        const double h = g.h();
        std::vector<double> wa(n), wb(n);
        for (std::size_t m = 1; m < n; ++m) {
            const auto [a, b] = piece(static_cast<double>(m - 1) * h, static_cast<double>(m) * h, m == 1);
            wa[m] = a;  // weight of the earlier knot (d = ua side)
            wb[m] = b;  // weight of the later knot (d = ub side)
        }
        const auto& v = x.values();
        for (std::size_t i = 1; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < i; ++j) s += wa[i - j] * v[j] + wb[i - j] * v[j + 1];
            y[i] = s;
        }
        return y;
    }
    const Knots k = make_knots(x);
    for (std::size_t i = 1; i < n; ++i) {
        const std::size_t last = k.of_grid[i];
        const double t = k.t[last];
        double s = 0.0;
        for (std::size_t j = 0; j < last; ++j) {
            const auto [a, b] = piece(t - k.t[j + 1], t - k.t[j], j + 1 == last);
            s += a * k.right[j] + b * k.left[j + 1];
        }
        y[i] = s;
    }
    return y;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace detail

/// Distributed-order Riemann-Liouville integral, computed order-first and time-first.
inline DistributedResult distributed_integral(const order::DistributedUniform& spec, const SampledSignal& x,
                                              const QuadratureScheme& scheme = {}) {
    const OrderQuadrature q = order_quadrature(spec);
    detail::check_mass(q);
    DistributedResult r;
    r.order_first = detail::values_on(x.grid(), detail::order_first(q, x, scheme));
    const kernel::DistributedUniform k{1.0, spec.a1, spec.a2};
    const MemoryKernel mk = k;
    const double ex = endpoint_exponents(mk, 1.0).at_t;
    auto m = [&](double d) { return vi(spec.a1, spec.a2, d) / ((spec.a2 - spec.a1) * d); };
    auto mom = [&](double delta) { return detail::lag_moments(q.orders, q.weights, delta); };
    r.time_first = detail::values_on(x.grid(), detail::time_first(m, ex, mom, x, scheme.tolerance));
    r.max_deviation = detail::max_abs_diff(r.order_first.values(), r.time_first.values());
    return r;
}

inline DistributedResult distributed_integral(const order::DistributedNormal& spec, const SampledSignal& x,
                                              const QuadratureScheme& scheme = {}) {
    const OrderQuadrature q = order_quadrature(spec, false);
    detail::check_mass(q);
    DistributedResult r;
    r.order_first = detail::values_on(x.grid(), detail::order_first(q, x, scheme));
    const kernel::DistributedNormal k(1.0, spec.gaussian);
    const MemoryKernel mk = k;
    const double ex = endpoint_exponents(mk, 1.0).at_t;
    auto m = [&](double d) { return eval_kernel(mk, d, 0.0); };
    auto mom = [&](double delta) { return detail::lag_moments(k.orders(), k.weights(), delta); };
    r.time_first = detail::values_on(x.grid(), detail::time_first(m, ex, mom, x, scheme.tolerance));
    r.max_deviation = detail::max_abs_diff(r.order_first.values(), r.time_first.values());
    return r;
}

/// Distributed-order Caputo derivative int rho(alpha) (D^alpha X)(t) dalpha.
/// Uniform weight: [a1, a2] must lie within one [n-1, n].
inline SampledSignal distributed_caputo(const order::DistributedUniform& spec, const SampledSignal& x,
                                        const QuadratureScheme& scheme = QuadratureScheme::l1()) {
    const double n = std::max(1.0, std::ceil(spec.a2));
    if (spec.a1 < n - 1.0) {
        throw unsupported_range_error("distributed_caputo: [a1, a2] = [" + std::to_string(spec.a1) +
                                      ", " + std::to_string(spec.a2) +
                                      "] spans an integer; only floor(a1) = floor(a2) is supported");
    }
    const OrderQuadrature q = order_quadrature(spec);
    detail::check_mass(q);
    std::vector<double> y(x.size(), 0.0);
    for (std::size_t i = 0; i < q.orders.size(); ++i) {
        detail::add_into(y, caputo_derivative(q.orders[i], x, scheme).values(), q.weights[i]);
    }
    return detail::values_on(x.grid(), std::move(y));
}

/// Normal weight: the order range is split at integers, each piece using its own n.
inline SampledSignal distributed_caputo(const order::DistributedNormal& spec, const SampledSignal& x,
                                        const QuadratureScheme& scheme = QuadratureScheme::l1()) {
    const OrderQuadrature q = order_quadrature(spec, true);
    detail::check_mass(q);
    std::vector<double> y(x.size(), 0.0);
    for (std::size_t i = 0; i < q.orders.size(); ++i) {
        if (q.weights[i] == 0.0) continue;
        detail::add_into(y, caputo_derivative(q.orders[i], x, scheme).values(), q.weights[i]);
    }
    return detail::values_on(x.grid(), std::move(y));
}

// ---------------------------------------------------------------------------
// Multiplier and accelerator with memory

namespace detail {

// X(t - T) with zero extension; analytic when possible, else linear interpolation.
inline std::vector<double> lagged(const SampledSignal& x, double T) {
    const Grid& g = x.grid();
    std::vector<double> y(g.size(), 0.0);
    const Knots k = make_knots(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double s = g[i] - T;
        if (s < g.t0()) continue;
        if (x.has_derivative(0)) {
            y[i] = x.derivative(0, s);
            continue;
        }
        const auto it = std::upper_bound(k.t.begin(), k.t.end(), s);
        const std::size_t j = it == k.t.begin() ? 0 : static_cast<std::size_t>(it - k.t.begin()) - 1;
        if (j + 1 >= k.t.size() || k.t[j] == s) {
            y[i] = k.left[j];
            continue;
        }
        const double w = (s - k.t[j]) / (k.t[j + 1] - k.t[j]);
        y[i] = (1.0 - w) * k.right[j] + w * k.left[j + 1];
    }
    return y;
}

}  // namespace detail

/// Y(t) = int_0^t M(t, tau) X(tau) dtau.
inline SampledSignal multiplier(const MemoryKernel& k, const SampledSignal& x,
                                const QuadratureScheme& scheme = {}) {
    using namespace kernel;
    validate(k);
    const Grid& g = x.grid();
    return std::visit(
        detail::overloaded{
            [&](const NoMemory& v) { return scaled(x, v.m); },
            [&](const FixedLag& v) {
                auto y = detail::lagged(x, v.T);
                for (double& e : y) e *= v.m;
                return detail::values_on(g, std::move(y));
            },
            [&](const PowerLaw& v) { return scaled(rl_integral(v.alpha, x, scheme), v.m); },
            [&](const PowerLawDeriv& v) {
                const double b = static_cast<double>(v.n()) - v.alpha;
                if (b == 0.0) return scaled(x, v.a);
                return scaled(rl_integral(b, x, scheme), v.a);
            },
            [&](const TwoParam& v) {
                auto y = rl_integral(v.alpha, x, scheme).values();
                for (double& e : y) e *= v.m_a;
                detail::add_into(y, rl_integral(v.beta, x, scheme).values(), v.m_b);
                return detail::values_on(g, std::move(y));
            },
            [&](const TwoParamDeriv& v) {
                const double ba = std::floor(v.alpha) + 1.0 - v.alpha;
                const double bb = std::floor(v.beta) + 1.0 - v.beta;
                auto y = rl_integral(ba, x, scheme).values();
                for (double& e : y) e *= v.a_a;
                detail::add_into(y, rl_integral(bb, x, scheme).values(), v.a_b);
                return detail::values_on(g, std::move(y));
            },
            [&](const VariableOrder& v) {
                return scaled(variable_order_integral(v.alpha_fn, x, scheme), v.m);
            },
            [&](const Kober& v) { return scaled(kober_integral(v.alpha, v.eta, x, scheme), v.m); },
            [&](const ErdelyiKober& v) {
                return scaled(erdelyi_kober_integral(v.alpha, v.eta, v.sigma, x, scheme), v.m);
            },
            [&](const DistributedUniform& v) {
                const auto q = order_quadrature(order::DistributedUniform{v.a1, v.a2});
                return scaled(detail::values_on(g, detail::order_first(q, x, scheme)), v.m);
            },
            [&](const DistributedNormal& v) {
                const auto q = order_quadrature(order::DistributedNormal{v.gaussian()}, false);
                return scaled(detail::values_on(g, detail::order_first(q, x, scheme)), v.m());
            },
        },
        k);
}

/// Y(t) = int_0^t M(t, tau) X^{(n)}(tau) dtau. Derivative-type kernels (PowerLawDeriv,
/// TwoParamDeriv) applied at their own order give the Caputo derivatives; jumps of X
/// enter as exact point masses for n = 1.
inline SampledSignal accelerator(const MemoryKernel& k, const SampledSignal& x, int n,
                                 const QuadratureScheme& scheme = QuadratureScheme::l1()) {
    using namespace kernel;
    validate(k);
    detail::require(n >= 1, "accelerator: n must be >= 1");
    const Grid& g = x.grid();
    if (const auto* v = std::get_if<PowerLawDeriv>(&k); v != nullptr && v->n() == n) {
        return scaled(caputo_derivative(v->alpha, x, scheme), v->a);
    }
    if (const auto* v = std::get_if<TwoParamDeriv>(&k)) {
        return multi_term_accelerator(order::MultiTerm{{{v->a_a, v->alpha}, {v->a_b, v->beta}}}, x, scheme);
    }
    const DerivativeSignal d = derivative_signal(x, n);
    if (!d.masses.empty() && !is_pointwise(k)) {
        throw missing_derivative_error("accelerator: " + kernel_name(k) +
                                       " applied to a point mass has no pointwise value");
    }
    const QuadratureScheme inner = scheme.kind == QuadratureScheme::Kind::l1_caputo
                                       ? QuadratureScheme::trapezoid()
                                       : scheme;
    std::vector<double> y = multiplier(k, d.regular, inner).values();
    detail::add_masses(y, g, d.masses, [&](double t, double T) { return eval_kernel(k, t, T); });
    return detail::values_on(g, std::move(y));
}

// ---------------------------------------------------------------------------
// Order-spec front ends

inline SampledSignal apply_integral(const OrderSpec& spec, const SampledSignal& x,
                                    const QuadratureScheme& scheme = {}) {
    return std::visit(
        detail::overloaded{
            [&](const order::Scalar& s) { return rl_integral(s.alpha, x, scheme); },
            [&](const order::MultiTerm& m) {
                if (m.terms.empty()) throw domain_error("multi-term order: empty term list");
                std::vector<double> y(x.size(), 0.0);
                for (const auto& t : m.terms) detail::add_into(y, rl_integral(t.alpha, x, scheme).values(), t.coef);
                return detail::values_on(x.grid(), std::move(y));
            },
            [&](const order::Variable& v) { return variable_order_integral(v.alpha_fn, x, scheme); },
            [&](const order::DistributedUniform& u) { return distributed_integral(u, x, scheme).order_first; },
            [&](const order::DistributedNormal& nd) { return distributed_integral(nd, x, scheme).order_first; },
        },
        spec);
}

inline SampledSignal apply_derivative(const OrderSpec& spec, const SampledSignal& x,
                                      const QuadratureScheme& scheme = QuadratureScheme::l1()) {
    return std::visit(
        detail::overloaded{
            [&](const order::Scalar& s) { return caputo_derivative(s.alpha, x, scheme); },
            [&](const order::MultiTerm& m) { return multi_term_accelerator(m, x, scheme); },
            [&](const order::Variable& v) -> SampledSignal {
                // Frozen-order Caputo: alpha(t) per output row.
                const Grid& g = x.grid();
                std::vector<double> y(g.size(), 0.0);
                for (std::size_t i = 0; i < g.size(); ++i) {
                    const double a = v.alpha_fn(g[i]);
                    if (!(a >= 0.0)) throw domain_error("variable order: alpha(t) must be >= 0");
                    y[i] = caputo_derivative(a, x, scheme)[i];
                }
                return detail::values_on(g, std::move(y));
            },
            [&](const order::DistributedUniform& u) { return distributed_caputo(u, x, scheme); },
            [&](const order::DistributedNormal& nd) { return distributed_caputo(nd, x, scheme); },
        },
        spec);
}

/// max over the grid of |D^alpha (I^alpha X) - X|.
inline double duality_check(double alpha, const SampledSignal& x,
                            const QuadratureScheme& scheme = {}) {
    const SampledSignal y = rl_integral(alpha, x, scheme);
    const SampledSignal back = caputo_derivative(alpha, y, QuadratureScheme::l1());
    double m = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(back[i] - x[i]));
    return m;
}

}  // namespace dynmem
