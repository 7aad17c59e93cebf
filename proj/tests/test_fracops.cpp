#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dynmem/fracops.hpp"

using namespace dynmem;

namespace {

SampledSignal on(const TestInput& in, double t_end = 2.0, std::size_t n = 401) {
    return sample(in, make_grid(0, t_end, n));
}

SampledSignal custom(const Grid& g, std::function<double(double)> f) {
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = f(g[i]);
    return SampledSignal(g, std::move(v));
}

double max_rel(const SampledSignal& y, const std::function<double(double)>& exact, double from = 0.0) {
    double m = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double t = y.grid()[i];
        if (t < from || t == 0.0) continue;
        const double e = exact(t);
        m = std::max(m, std::abs(y[i] - e) / std::max(std::abs(e), 1e-300));
    }
    return m;
}

double max_abs(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Error at t = 1 of I^alpha tau^{mu-1} on [0, 1] with n points.
double rl_error(double alpha, double mu, std::size_t n, const QuadratureScheme& s) {
    const auto x = sample(TestInput::power(mu), make_grid(0, 1, n));
    const double exact = dynmem::gamma(mu) / dynmem::gamma(mu + alpha);
    return std::abs(rl_integral(alpha, x, s).values().back() - exact);
}

}  // namespace

TEST(Riemann, UnitInput) {
    for (double a : {0.3, 0.5, 1.0, 1.5}) {
        const auto y = rl_integral(a, on(TestInput::unit_constant(), 10, 257));
        EXPECT_LT(max_rel(y, [a](double t) { return std::pow(t, a) * rgamma(a + 1); }), 1e-13) << a;
        EXPECT_EQ(y[0], 0.0);
    }
}

TEST(Riemann, OrderOneIsRunningIntegral) {
    const Grid g = make_grid(0, 3, 301);
    const auto x = custom(g, [](double t) { return std::cos(t); });
    const auto y = rl_integral(1.0, x);
    EXPECT_LT(max_rel(y, [](double t) { return std::sin(t); }, 0.1), 1e-4);
    // the trapezoid rule itself
    double s = 0.0;
    for (std::size_t i = 1; i < g.size(); ++i) {
        s += 0.5 * (x[i] + x[i - 1]) * (g[i] - g[i - 1]);
        EXPECT_NEAR(y[i], s, 1e-13);
    }
}

TEST(Riemann, LinearInput) {
    // mpmath quadrature at t = 2: 2.1276921621409743
    const auto y = rl_integral(0.5, on(TestInput::power(2)));
    EXPECT_NEAR(y.values().back(), 2.1276921621409743, 1e-12);
    EXPECT_LT(max_rel(y, [](double t) { return 0.7522527780636750 * std::pow(t, 1.5); }), 1e-12);
}

TEST(Riemann, PowerRule) {
    // mpmath at t = 2: 2.7150025789840826
    const auto x = sample(TestInput::power(2.5), make_grid(0, 2, 2049));
    const auto y = rl_integral(0.4, x);
    EXPECT_NEAR(y.values().back(), 2.7150025789840826, 1e-6);
    for (double a : {0.3, 0.8, 1.4}) {
        auto err = [a](double mu, std::size_t n) {
            const auto z = rl_integral(a, sample(TestInput::power(mu), make_grid(0, 2, n)));
            const double c = dynmem::gamma(mu) / dynmem::gamma(mu + a);
            return max_rel(z, [&](double t) { return c * std::pow(t, mu + a - 1); }, 0.1);
        };
        EXPECT_LT(err(2.0, 1025), 1e-13) << a;
        // tau^{1/2} and tau^2: orders 3/2 and 2
        EXPECT_LT(err(1.5, 1025), 2e-3) << a;
        EXPECT_NEAR(std::log2(err(1.5, 1025) / err(1.5, 2049)), 1.5, 0.1) << a;
        EXPECT_LT(err(3.0, 1025), 5e-4) << a;
        EXPECT_NEAR(std::log2(err(3.0, 1025) / err(3.0, 2049)), 2.0, 0.1) << a;
    }
}

TEST(Riemann, GradedGrid) {
    const double c = dynmem::gamma(1.5) / dynmem::gamma(1.8);
    auto err = [c](std::size_t n, Spacing s) {
        const auto y = rl_integral(0.3, sample(TestInput::power(1.5), make_grid(0, 2, n, s)));
        return max_rel(y, [&](double t) { return c * std::pow(t, 0.8); }, 1e-3);
    };
    const double g1 = err(513, Spacing::graded(2));
    const double g2 = err(1025, Spacing::graded(2));
    EXPECT_LT(g2, 5e-4);
    EXPECT_GT(std::log2(g1 / g2), 1.7);
    EXPECT_LT(10 * g2, err(1025, Spacing::uniform()));
}

TEST(Riemann, Semigroup) {
    // The sampled inner integral behaves like t^beta at the origin, so the
    // composition converges at order alpha + beta (capped at 2).
    auto err = [](double a, double b, std::size_t n) {
        const Grid g = make_grid(0, 2, n);
        const auto x = custom(g, [](double t) { return 1 + t - 0.5 * t * t; });
        return max_abs(rl_integral(a, rl_integral(b, x)).values(), rl_integral(a + b, x).values());
    };
    for (auto [a, b] : {std::pair{0.3, 0.5}, {0.6, 0.8}, {0.2, 0.9}}) {
        const double e1 = err(a, b, 513);
        const double e2 = err(a, b, 1025);
        EXPECT_LT(e2, 1e-3) << a << " " << b;
        EXPECT_NEAR(std::log2(e1 / e2), std::min(a + b, 2.0), 0.15) << a << " " << b;
    }
}

TEST(Riemann, Linearity) {
    const Grid g = make_grid(0, 3, 301);
    const auto x1 = custom(g, [](double t) { return std::sin(t); });
    const auto x2 = custom(g, [](double t) { return std::exp(-t) + t * t; });
    const double a = 1.7, b = -0.4;
    const auto lhs = rl_integral(0.6, combine(a, x1, b, x2));
    const auto r1 = rl_integral(0.6, x1);
    const auto r2 = rl_integral(0.6, x2);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double rhs = a * r1[i] + b * r2[i];
        EXPECT_NEAR(lhs[i], rhs, 1e-12 * std::max(1.0, std::abs(rhs)));
    }
}

TEST(Riemann, ConvergenceOrders) {
    // Exact on constants, so measured on tau and tau^2.
    for (const auto& [s, mu] : {std::pair{QuadratureScheme::rectangle(), 2.0}, {QuadratureScheme::trapezoid(), 3.0}}) {
        for (double a : {0.3, 0.5, 0.8}) {
            const double e1 = rl_error(a, mu, 257, s);
            const double e2 = rl_error(a, mu, 513, s);
            const double p = std::log2(e1 / e2);
            EXPECT_NEAR(p, s.declared_order(a), 0.2) << to_string(s.kind) << " alpha=" << a;
        }
    }
}

TEST(Riemann, Rejects) {
    EXPECT_THROW(rl_integral(0.0, on(TestInput::unit_constant())), domain_error);
    EXPECT_THROW(rl_integral(-0.5, on(TestInput::unit_constant())), domain_error);
}

TEST(Caputo, ConstantIsZero) {
    for (double a : {0.1, 0.5, 0.9, 1.0}) {
        const auto y = caputo_derivative(a, on(TestInput::unit_constant()));
        for (double v : y.values()) EXPECT_EQ(v, 0.0);
    }
    const auto y = caputo_derivative(1.5, on(TestInput::unit_constant()), QuadratureScheme::trapezoid());
    for (double v : y.values()) EXPECT_EQ(v, 0.0);
}

TEST(Caputo, IntegerOrder) {
    const auto y = caputo_derivative(1.0, on(TestInput::power(3)));
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_DOUBLE_EQ(y[i], 2 * y.grid()[i]);
}

TEST(Caputo, Quadratic) {
    // mpmath at t = 2: 4.2553843242819485
    const auto x = on(TestInput::power(3), 2, 2049);
    const auto l1 = caputo_derivative(0.5, x);
    EXPECT_NEAR(l1.values().back(), 4.2553843242819485, 1e-4);
    const auto tr = caputo_derivative(0.5, x, QuadratureScheme::trapezoid());
    EXPECT_NEAR(tr.values().back(), 4.2553843242819485, 1e-12);
    EXPECT_LT(max_rel(l1, [](double t) { return 1.5045055561273501 * std::pow(t, 1.5); }, 0.1), 1e-3);
}

TEST(Caputo, HeavisideStep) {
    // D^alpha H(T - t) = -(t-T)^{-alpha}/Gamma(1-alpha) after the jump
    const auto x = sample(TestInput::heaviside(0.7), make_grid(0, 2, 201));
    const auto y = caputo_derivative(0.5, x);
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double t = y.grid()[i];
        const double e = t > 0.7 ? -std::pow(t - 0.7, -0.5) * rgamma(0.5) : 0.0;
        EXPECT_NEAR(y[i], e, 1e-12) << t;
    }
}

TEST(Caputo, L1Order) {
    for (double a : {0.3, 0.5, 0.7}) {
        auto err = [a](std::size_t n) {
            const auto x = sample(TestInput::power(3), make_grid(0, 1, n));
            const double exact = 2 * rgamma(3 - a);
            return std::abs(caputo_derivative(a, x).values().back() - exact);
        };
        const double p = std::log2(err(257) / err(513));
        EXPECT_NEAR(p, QuadratureScheme::l1().declared_order(a), 0.2) << a;
    }
}

TEST(Caputo, FiniteDifferenceFallback) {
    const Grid g = make_grid(0, 2, 2049);
    const auto x = custom(g, [](double t) { return t * t * t; });
    const auto y = caputo_derivative(1.5, x, QuadratureScheme::trapezoid());
    const double c = 6 * rgamma(2.5);
    EXPECT_LT(max_rel(y, [c](double t) { return c * std::pow(t, 1.5); }, 0.2), 1e-4);
}

TEST(Caputo, NeedsOrigin) {
    EXPECT_THROW(caputo_derivative(0.5, sample(TestInput::power(2), make_grid(1, 2, 11))), domain_error);
}

TEST(Caputo, Linearity) {
    const Grid g = make_grid(0, 3, 301);
    const auto x1 = sample(TestInput::power(3), g);
    const auto x2 = sample(TestInput::power(2.5), g);
    const auto lhs = caputo_derivative(0.4, combine(2.0, x1, -3.0, x2));
    const auto r1 = caputo_derivative(0.4, x1);
    const auto r2 = caputo_derivative(0.4, x2);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double rhs = 2 * r1[i] - 3 * r2[i];
        EXPECT_NEAR(lhs[i], rhs, 1e-12 * std::max(1.0, std::abs(rhs)));
    }
}

TEST(Multiplier, NoMemoryEchoes) {
    const Grid g = make_grid(0, 5, 101);
    const auto x = custom(g, [](double t) { return std::sin(t); });
    const auto y = multiplier(kernel::NoMemory{2}, x);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_DOUBLE_EQ(y[i], 2 * std::sin(g[i]));
}

TEST(Multiplier, FixedLag) {
    const Grid g = make_grid(0, 4, 401);
    const auto x = sample(TestInput::power(2), g);
    const auto y = multiplier(kernel::FixedLag{3, 1.5}, x);
    for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_NEAR(y[i], g[i] >= 1.5 ? 3 * (g[i] - 1.5) : 0.0, 1e-12);
    }
}

TEST(Multiplier, PowerLawUnit) {
    const auto y = multiplier(kernel::PowerLaw{1, 0.5}, on(TestInput::unit_constant(), 10, 1025));
    EXPECT_LT(max_rel(y, [](double t) { return std::sqrt(t) * rgamma(1.5); }), 1e-13);
}

TEST(Multiplier, LinearityAllKernels) {
    const Grid g = make_grid(0, 2, 129);
    const auto x1 = sample(TestInput::power(2), g);
    const auto x2 = custom(g, [](double t) { return std::cos(3 * t); });
    const std::vector<MemoryKernel> ks = {
        kernel::NoMemory{2},
        kernel::FixedLag{1, 0.3},
        kernel::PowerLaw{1, 0.5},
        kernel::TwoParam{1, 0.4, 0.5, 1.3},
        kernel::VariableOrder{1, [](double t) { return 0.4 + 0.1 * t; }},
        kernel::Kober{1, 0.5, 0.3},
        kernel::ErdelyiKober{1, 0.7, 0.2, 2},
        kernel::DistributedUniform{1, 0.2, 0.8},
        kernel::DistributedNormal(1, TruncatedGaussian{0.5, 0.1, 0, 1})};
    for (const auto& k : ks) {
        const auto lhs = multiplier(k, combine(0.7, x1, -2.0, x2));
        const auto r1 = multiplier(k, x1);
        const auto r2 = multiplier(k, x2);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double rhs = 0.7 * r1[i] - 2.0 * r2[i];
            EXPECT_NEAR(lhs[i], rhs, 1e-12 * std::max(1.0, std::abs(rhs))) << kernel_name(k);
        }
    }
}

TEST(Accelerator, NoMemoryDifferentiates) {
    const auto y = accelerator(kernel::NoMemory{1}, on(TestInput::power(3)), 1);
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_DOUBLE_EQ(y[i], 2 * y.grid()[i]);
}

TEST(Accelerator, PowerLawDerivIsCaputo) {
    const auto x = on(TestInput::power(3), 2, 513);
    const auto y = accelerator(kernel::PowerLawDeriv{2.5, 0.5}, x, 1);
    const auto c = caputo_derivative(0.5, x);
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_DOUBLE_EQ(y[i], 2.5 * c[i]);
}

TEST(Accelerator, ConstantInput) {
    for (const MemoryKernel& k : std::vector<MemoryKernel>{kernel::PowerLaw{1, 0.6}, kernel::PowerLawDeriv{1, 0.4},
                                                          kernel::Kober{1, 0.5, 0}}) {
        for (const auto y = accelerator(k, on(TestInput::unit_constant()), 1); double v : y.values()) EXPECT_EQ(v, 0.0);
    }
}

TEST(MultiTerm, Cases) {
    const auto x = on(TestInput::power(2), 2, 401);
    const order::MultiTerm one{{{1.0, 0.4}}};
    EXPECT_EQ(multi_term_accelerator(one, x).values(), accelerator(kernel::PowerLawDeriv{1, 0.4}, x, 1).values());
    const auto y = multi_term_accelerator({{{1, 0.3}, {1, 0.7}}}, x);
    // mpmath at t = 2: 3.1596379743899062
    EXPECT_NEAR(y.values().back(), 3.1596379743899062, 1e-12);
    auto exact = [](double t) { return std::pow(t, 0.7) * rgamma(1.7) + std::pow(t, 0.3) * rgamma(1.3); };
    EXPECT_LT(max_rel(y, exact), 1e-12);
    for (const auto y = multi_term_accelerator({{{0, 0.3}, {0, 0.7}}}, x); double v : y.values()) EXPECT_EQ(v, 0.0);
    EXPECT_THROW(multi_term_accelerator({}, x), domain_error);
}

TEST(VariableOrder, ConstantOrderIsRl) {
    const auto x = on(TestInput::power(2.5), 2, 257);
    const auto a = variable_order_integral([](double) { return 0.6; }, x);
    EXPECT_LT(max_abs(a.values(), rl_integral(0.6, x).values()), 1e-14);
    const auto b = variable_order_integral([](double) { return 1.0; }, x);
    EXPECT_LT(max_abs(b.values(), rl_integral(1.0, x).values()), 1e-14);
}

TEST(VariableOrder, UnitInputFreezesOrder) {
    auto af = [](double t) { return 0.3 + 0.2 * t; };
    const auto y = variable_order_integral(af, on(TestInput::unit_constant(), 3, 301));
    EXPECT_LT(max_rel(y, [&](double t) { return std::pow(t, af(t)) * rgamma(af(t) + 1); }), 1e-13);
    EXPECT_THROW(variable_order_integral([](double t) { return 0.5 - t; }, on(TestInput::unit_constant())),
                 domain_error);
}

TEST(Kober, ReducesToScaledRl) {
    const auto x = on(TestInput::power(2.5), 2, 513);
    const auto k = kober_integral(0.6, 0.0, x);
    const auto r = rl_integral(0.6, x);
    for (std::size_t i = 1; i < x.size(); ++i) {
        EXPECT_NEAR(k[i], std::pow(x.grid()[i], -0.6) * r[i], 1e-8) << i;
    }
}

TEST(Kober, UnitInputIsConstant) {
    for (double a : {0.5, 1.2}) {
        for (double eta : {0.0, 0.7}) {
            const double c = dynmem::gamma(eta + 1) / dynmem::gamma(eta + a + 1);
            const auto y = kober_integral(a, eta, on(TestInput::unit_constant(), 10, 101));
            for (double v : y.values()) EXPECT_NEAR(v, c, 1e-12);
        }
    }
}

TEST(Kober, SigmaOneIsErdelyiKober) {
    const auto x = on(TestInput::power(3), 2, 201);
    EXPECT_LT(max_abs(kober_integral(0.5, 0.7, x).values(), erdelyi_kober_integral(0.5, 0.7, 1.0, x).values()),
              1e-15);
    // mpmath at t = 2: 2.1507380253141065
    const auto fine = kober_integral(0.5, 0.7, on(TestInput::power(3), 2, 4097));
    EXPECT_NEAR(fine.values().back(), 2.1507380253141065, 1e-6);
}

TEST(ErdelyiKober, UnitInput) {
    // mpmath: alpha 1.2, eta 0.7, sigma 2 at t = 3 -> 0.49724256795400334
    const auto y = erdelyi_kober_integral(1.2, 0.7, 2.0, on(TestInput::unit_constant(), 3, 31));
    EXPECT_NEAR(y.values().back(), 0.49724256795400334, 1e-13);
    EXPECT_NEAR(y[0], 0.49724256795400334, 1e-13);
}

TEST(ErdelyiKober, BetaIdentity) {
    // int_0^t tau^{s(eta+1)-1}(t^s - tau^s)^{alpha-1} dtau = t^{s(alpha+eta)} B(eta+1, alpha)/s
    const double a = 0.6, eta = 0.4, s = 2.5, t = 1.7;
    // written in the lag d = t - tau: t^s - tau^s = -t^s expm1(s log1p(-d/t))
    auto f = [&](double d) {
        const double gap = -std::pow(t, s) * std::expm1(s * std::log1p(-d / t));
        return std::pow(t - d, s * (eta + 1) - 1) * std::pow(gap, a - 1);
    };
    const double lhs = integrate_endpoint_singular(f, 0.0, t, a - 1, true, {1e-13, 1e-13, 60});
    const double rhs = std::pow(t, s * (a + eta)) * dynmem::beta(eta + 1, a) / s;
    EXPECT_NEAR(lhs, rhs, 1e-10 * rhs);
}

TEST(ErdelyiKober, PowerInput) {
    // exact: t^{s p} Gamma(eta+p+1)/Gamma(eta+p+alpha+1) for X = tau^{s p}
    const auto y = erdelyi_kober_integral(0.5, 0.0, 2.0, on(TestInput::power(3), 2, 101));
    EXPECT_LT(max_rel(y, [](double t) { return t * t * dynmem::gamma(2) / dynmem::gamma(2.5); }), 1e-12);
}

TEST(EkCaputo, ReducesToCaputoOfWeighted) {
    // eta = 0, sigma = 1: D^alpha_{1,0} X = D^alpha [tau^alpha X]; for X = tau^2 both equal
    // Gamma(3.5)/Gamma(3) t^2. Compared away from the origin, where the schemes are second order.
    const double c = dynmem::gamma(3.5) / dynmem::gamma(3);
    auto errs = [c](std::size_t n) {
        const Grid g = make_grid(0, 2, n);
        const auto y = ek_caputo_derivative(0.5, 0.0, 1.0, sample(TestInput::power(3), g));
        const auto w = caputo_derivative(0.5, sample(TestInput::power(3.5), g), QuadratureScheme::trapezoid());
        auto exact = [c](double t) { return c * t * t; };
        return std::pair{max_rel(y, exact, 0.25), max_rel(w, exact, 0.25)};
    };
    const auto [y1, w1] = errs(513);
    const auto [y2, w2] = errs(1025);
    EXPECT_LT(y2, 5e-5);
    EXPECT_LT(w2, 5e-5);
    EXPECT_NEAR(std::log2(y1 / y2), 2.0, 0.1);
    EXPECT_NEAR(std::log2(w1 / w2), 2.0, 0.1);
}

TEST(EkCaputo, Annihilated) {
    // X = tau^{-sigma(eta+1)} is killed by (tau/sigma d/dtau + eta + 1)
    const double eta = 0.2, sigma = 1.5;
    const Grid g = make_grid(0.5, 3, 11);
    const double e = -sigma * (eta + 1);
    SampledSignal x(g, [&] {
        std::vector<double> v;
        for (double t : g.points()) v.push_back(std::pow(t, e));
        return v;
    }());
    x.with_derivatives([e](int k, double t) {
        double c = 1;
        for (int j = 0; j < k; ++j) c *= e - j;
        return c * std::pow(t, e - k);
    }, 2);
    for (const auto y = ek_transform(x, 1, eta, sigma); double v : y.values()) EXPECT_NEAR(v, 0.0, 1e-14);
}

TEST(EkCaputo, QuadratureOracle) {
    // mpmath of the defining integrals, alpha 0.5, eta 0, sigma 2, X = tau^2, t = 2
    const auto y = ek_caputo_derivative(0.5, 0.0, 2.0, on(TestInput::power(3), 2, 65));
    EXPECT_NEAR(y.values().back(), 5.317361552716548, 1e-12);
    EXPECT_THROW(ek_caputo_derivative(0.5, 0.0, 2.0, SampledSignal(make_grid(0, 1, 3), {0, 1, 2})),
                 missing_derivative_error);
}

TEST(Distributed, UniformUnitInput) {
    // mpmath: int_{0.3}^{0.9} 2^a/Gamma(a+1) da / 0.6
    const auto r = distributed_integral(order::DistributedUniform{0.3, 0.9}, on(TestInput::unit_constant(), 2, 65));
    EXPECT_NEAR(r.order_first.values().back(), 1.6828223346140498, 1e-12);
    EXPECT_NEAR(r.time_first.values().back(), 1.6828223346140498, 1e-9);
}

TEST(Distributed, UniformKernelMatchesViPath) {
    const auto x = on(TestInput::power(2), 2, 257);
    const auto viaK = multiplier(kernel::DistributedUniform{1, 0.3, 0.9}, x);
    const auto viaO = distributed_integral(order::DistributedUniform{0.3, 0.9}, x);
    EXPECT_LT(max_abs(viaK.values(), viaO.order_first.values()), 1e-6);
}

TEST(Distributed, NarrowNormal) {
    const auto x = on(TestInput::power(2), 2, 513);
    const auto r = distributed_integral(order::DistributedNormal{TruncatedGaussian{0.6, 0.01, 0, 2}}, x);
    const auto ref = rl_integral(0.6, x);
    EXPECT_LT(max_abs(r.order_first.values(), ref.values()), 1e-3);
}

TEST(Distributed, Permutation) {
    for (double mu : {1.0, 2.0, 3.0}) {
        const auto x = on(TestInput::power(mu), 2, 129);
        EXPECT_LT(distributed_integral(order::DistributedUniform{0.2, 1.4}, x).max_deviation, 1e-6);
        EXPECT_LT(distributed_integral(order::DistributedNormal{TruncatedGaussian{0.8, 0.2, 0.1, 2}}, x).max_deviation,
                  1e-6);
        // windows reaching order 0
        EXPECT_LT(distributed_integral(order::DistributedUniform{0.0, 1.0}, x).max_deviation, 1e-6);
        EXPECT_LT(distributed_integral(order::DistributedNormal{TruncatedGaussian{0.2, 0.3, 0, 2}}, x).max_deviation,
                  1e-6);
    }
}

TEST(Distributed, CaputoCases) {
    const auto c = on(TestInput::unit_constant());
    for (const auto y = distributed_caputo(order::DistributedUniform{0.2, 0.9}, c); double v : y.values()) EXPECT_EQ(v, 0.0);
    EXPECT_THROW(distributed_caputo(order::DistributedUniform{0.5, 1.5}, c), unsupported_range_error);
    const auto x = on(TestInput::power(3), 2, 513);
    const auto narrow = distributed_caputo(order::DistributedNormal{TruncatedGaussian{0.5, 0.005, 0, 1}}, x);
    const auto single = caputo_derivative(0.5, x);
    EXPECT_LT(max_abs(narrow.values(), single.values()), 1e-3);
}

TEST(Distributed, CaputoFirstOrderLimit) {
    const auto x = on(TestInput::power(3), 2, 513);
    double prev = INFINITY;
    for (double s : {0.2, 0.1, 0.05}) {
        const auto y = distributed_caputo(order::DistributedNormal{TruncatedGaussian{1.0, s, 0, 2}}, x);
        double dev = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x.grid()[i] < 0.5) continue;
            dev = std::max(dev, std::abs(y[i] - 2 * x.grid()[i]));
        }
        EXPECT_LT(dev, prev) << s;
        prev = dev;
    }
}

TEST(Duality, Bounds) {
    const auto t1 = on(TestInput::power(2), 1, 1025);
    EXPECT_LE(duality_check(0.5, t1), 5e-3);
    EXPECT_LE(duality_check(1.0, t1), 1e-10);
    const double d1 = duality_check(0.3, on(TestInput::power(3), 1, 513));
    const double d2 = duality_check(0.3, on(TestInput::power(3), 1, 1025));
    EXPECT_GE(d1 / d2, 1.5);
}

TEST(Front, OrderSpecs) {
    const auto x = on(TestInput::power(2), 2, 129);
    EXPECT_EQ(apply_integral(order::Scalar{0.4}, x).values(), rl_integral(0.4, x).values());
    EXPECT_EQ(apply_derivative(order::Scalar{0.4}, x).values(), caputo_derivative(0.4, x).values());
    EXPECT_NO_THROW(apply_integral(order::Variable{[](double) { return 0.5; }}, x));
}
