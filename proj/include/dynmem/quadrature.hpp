#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "dynmem/errors.hpp"

namespace dynmem {

struct QuadratureRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

/// Gauss-Legendre nodes and weights by Newton iteration on P_n.
inline QuadratureRule gauss_legendre_rule(std::size_t n) {
    detail::require(n >= 1, "gauss_legendre_rule: n must be >= 1");
    if (n == 1) return {{0.0}, {2.0}};
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double kk = static_cast<double>(k);
                const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

namespace detail {

inline const QuadratureRule& gl10() {
    static const QuadratureRule rule = gauss_legendre_rule(10);
    return rule;
}

inline const QuadratureRule& gl64() {
    static const QuadratureRule rule = gauss_legendre_rule(64);
    return rule;
}

template <class F>
double apply_rule(const QuadratureRule& rule, F&& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    }
    return sum * half;
}

struct AdaptiveBudget {
    long panels_left = 0;
};

template <class F>
double adaptive_step(F& f, double a, double b, double whole, double tol, int depth,
                     int max_depth, AdaptiveBudget& budget) {
    const double mid = 0.5 * (a + b);
    const double left = apply_rule(gl10(), f, a, mid);
    const double right = apply_rule(gl10(), f, mid, b);
    const double refined = left + right;
    const double diff = std::abs(refined - whole);
    // Differences at the rounding level of the panel cannot be reduced further.
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(refined);
    if (diff <= tol || diff <= floor || std::abs(b - a) < 1e-300) return refined;
    if (depth >= max_depth || --budget.panels_left < 0) {
        throw convergence_error("adaptive quadrature: subdivision limit reached on [" +
                                std::to_string(a) + ", " + std::to_string(b) + "]");
    }
    return adaptive_step(f, a, mid, left, 0.5 * tol, depth + 1, max_depth, budget) +
           adaptive_step(f, mid, b, right, 0.5 * tol, depth + 1, max_depth, budget);
}

}  // namespace detail

struct AdaptiveOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    int max_depth = 60;
    long max_panels = 200000;
};

/// Adaptive Gauss-Legendre: a 10-point panel is accepted when it agrees with the
/// sum over its two halves; otherwise both halves are bisected recursively.
template <class F>
double integrate(F&& f, double a, double b, AdaptiveOptions opt = {}) {
    if (a == b) return 0.0;
    const double whole = detail::apply_rule(detail::gl10(), f, a, b);
    const double tol = std::max(opt.abs_tol, opt.rel_tol * std::abs(whole));
    detail::AdaptiveBudget budget{opt.max_panels};
    return detail::adaptive_step(f, a, b, whole, tol, 0, opt.max_depth, budget);
}

/// Integral over [a, b] of a function with a weak power singularity at one end.
/// The substitution x = end -/+ (b-a) s^k with k = ceil(2/(1+exponent)) makes the
/// transformed integrand vanish at the singular end before adaptive integration.
/// Integer exponents and exponents >= 1 are left alone.
template <class F>
double integrate_endpoint_singular(F&& f, double a, double b, double exponent, bool at_left,
                                   AdaptiveOptions opt = {}) {
    detail::require(exponent > -1.0, "integrate_endpoint_singular: exponent must exceed -1");
    if (a == b) return 0.0;
    const bool smooth = exponent >= 1.0 || exponent == std::floor(exponent);
    const double k = smooth ? 1.0 : std::min(40.0, std::ceil(2.0 / (1.0 + exponent)));
    const double w = b - a;
    auto g = [&](double s) {
        const double sk = std::pow(s, k);
        const double jac = k * std::pow(s, k - 1.0) * w;
        const double x = at_left ? a + w * sk : b - w * sk;
        return f(x) * jac;
    };
    return integrate(g, 0.0, 1.0, opt);
}

/// Neumaier compensated accumulator.
class CompensatedSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    [[nodiscard]] double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace dynmem
