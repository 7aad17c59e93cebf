#pragma once

// Harrod-Domar growth model with power-law memory:
//   Y(t) = B (D^alpha Y)(t) + C(t),  i.e.  (D^alpha Y) - Y/B = -C/B.

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "dynmem/errors.hpp"
#include "dynmem/fracops.hpp"
#include "dynmem/signal.hpp"
#include "dynmem/specfun.hpp"

namespace dynmem::hd {

namespace consumption {
struct Zero {};
struct Constant {
    double C = 0.0;
};
struct PowerLaw {
    double C = 0.0;
    double mu = 1.0;  // C(t) = C t^{mu-1}
};
struct Proportional {
    double c = 0.0;  // C(t) = c Y(t), 0 <= c < 1
};
}  // namespace consumption

using Consumption =
    std::variant<consumption::Zero, consumption::Constant, consumption::PowerLaw, consumption::Proportional>;

struct HDSpec {
    double B = 1.0;
    double alpha = 1.0;
    std::vector<double> y0 = {1.0};  // Y^{(k)}(0), k = 0..n-1
    Consumption consumption = consumption::Zero{};

    /// n - 1 < alpha <= n.
    [[nodiscard]] int n() const { return static_cast<int>(std::ceil(alpha)); }

    void validate() const {
        if (!(B > 0.0) || !std::isfinite(B)) throw domain_error("hd: B must be positive");
        if (!(alpha > 0.0) || !std::isfinite(alpha)) throw domain_error("hd: alpha must be positive");
        if (static_cast<int>(y0.size()) != n()) {
            throw domain_error("hd: alpha=" + format_double(alpha) + " needs " + std::to_string(n()) +
                               " initial values Y^(k)(0), got " + std::to_string(y0.size()));
        }
        if (const auto* p = std::get_if<consumption::PowerLaw>(&consumption); p && !(p->mu > 0.0)) {
            throw domain_error("hd: consumption exponent mu must be positive");
        }
        if (const auto* p = std::get_if<consumption::Proportional>(&consumption);
            p && !(p->c >= 0.0 && p->c < 1.0)) {
            throw domain_error("hd: propensity c must lie in [0, 1)");
        }
    }

    /// Effective capital intensity: B/(1-c) for proportional consumption, else B.
    [[nodiscard]] double effective_B() const {
        if (const auto* p = std::get_if<consumption::Proportional>(&consumption)) return B / (1.0 - p->c);
        return B;
    }

    /// (C, mu) of the exogenous consumption, C = 0 when there is none.
    [[nodiscard]] std::pair<double, double> power_consumption() const {
        if (const auto* p = std::get_if<consumption::Constant>(&consumption)) return {p->C, 1.0};
        if (const auto* p = std::get_if<consumption::PowerLaw>(&consumption)) return {p->C, p->mu};
        return {0.0, 1.0};
    }

    [[nodiscard]] double consumption_at(double t) const {
        const auto [C, mu] = power_consumption();
        if (C == 0.0) return 0.0;
        return mu == 1.0 ? C : C * std::pow(t, mu - 1.0);
    }
};

/// sum_{k=0}^{n-1} Y^{(k)}(0) t^k E_{alpha,k+1}[t^alpha / B].
inline double homogeneous_part(double B, double alpha, const std::vector<double>& y0, double t) {
    detail::require(t >= 0.0, "hd: t must be >= 0");
    const double z = std::pow(t, alpha) / B;
    double s = 0.0;
    double tk = 1.0;
    for (std::size_t k = 0; k < y0.size(); ++k) {
        if (y0[k] != 0.0) s += y0[k] * tk * mittag_leffler(alpha, static_cast<double>(k) + 1.0, z);
        tk *= t;
    }
    return s;
}

/// Closed model (no exogenous consumption); proportional consumption enters through B/(1-c).
inline double solve_closed(const HDSpec& spec, double t) {
    spec.validate();
    if (spec.power_consumption().first != 0.0) {
        throw domain_error("solve_closed: spec has exogenous consumption; use solve_power_consumption");
    }
    return homogeneous_part(spec.effective_B(), spec.alpha, spec.y0, t);
}

/// Consumption part Y_C for C(t) = C t^{mu-1}, convolution form:
/// -C Gamma(mu)/B t^{alpha+mu-1} E_{alpha,alpha+mu}[t^alpha/B].
inline double consumption_part_convolution(double B, double alpha, double C, double mu, double t) {
    if (C == 0.0 || t == 0.0) {
        if (C != 0.0 && alpha + mu - 1.0 < 0.0) return -std::copysign(INFINITY, C);
        return 0.0;
    }
    return -C * gamma(mu) / B * std::pow(t, alpha + mu - 1.0) *
           mittag_leffler(alpha, alpha + mu, std::pow(t, alpha) / B);
}

/// Rearranged form: C t^{mu-1} (1 - Gamma(mu) E_{alpha,mu}[t^alpha/B]).
inline double consumption_part_rearranged(double B, double alpha, double C, double mu, double t) {
    if (C == 0.0) return 0.0;
    detail::require(t > 0.0 || mu >= 1.0, "hd: t^{mu-1} undefined at t = 0 for mu < 1");
    const double tp = mu == 1.0 ? 1.0 : std::pow(t, mu - 1.0);
    return C * tp * (1.0 - gamma(mu) * mittag_leffler(alpha, mu, std::pow(t, alpha) / B));
}

/// Solution with C(t) = C t^{mu-1}: C t^{mu-1}(1 - Gamma(mu)E_{alpha,mu}) + homogeneous part.
/// Where 1 - Gamma(mu)E loses more than half its digits to cancellation (small t) the
/// equivalent convolution form is used instead.
inline double solve_power_consumption(const HDSpec& spec, double t) {
    spec.validate();
    if (std::holds_alternative<consumption::Proportional>(spec.consumption)) return solve_closed(spec, t);
    const auto [C, mu] = spec.power_consumption();
    double yc = 0.0;
    if (C != 0.0) {
        const double g = t > 0.0 ? gamma(mu) * mittag_leffler(spec.alpha, mu, std::pow(t, spec.alpha) / spec.B)
                                 : 1.0;
        yc = std::abs(1.0 - g) < 1e-8 ? consumption_part_convolution(spec.B, spec.alpha, C, mu, t)
                                      : consumption_part_rearranged(spec.B, spec.alpha, C, mu, t);
    }
    return yc + homogeneous_part(spec.B, spec.alpha, spec.y0, t);
}

/// Closed-form solution for any consumption type.
inline double solve(const HDSpec& spec, double t) {
    return spec.power_consumption().first != 0.0 ? solve_power_consumption(spec, t) : solve_closed(spec, t);
}

struct NumericOptions {
    int max_corrector_iterations = 20;
    double corrector_tolerance = 1e-14;
};

/// Adams-Bashforth-Moulton predictor-corrector for D^alpha Y = (Y - C(t))/B on a
/// uniform grid starting at 0, 0 < alpha <= 2. Returns columns Y and C.
inline Trajectory solve_numeric(const HDSpec& spec, const Grid& grid, const NumericOptions& opt = {}) {
    spec.validate();
    if (!(spec.alpha <= 2.0)) throw domain_error("solve_numeric: requires 0 < alpha <= 2");
    if (!grid.uniform()) throw domain_error("solve_numeric: requires a uniform grid");
    if (grid.t0() != 0.0) throw domain_error("solve_numeric: grid must start at t = 0");
    const auto [C, mu] = spec.power_consumption();
    if (C != 0.0 && mu < 1.0) {
        throw domain_error("solve_numeric: C t^{mu-1} is unbounded at t = 0 for mu < 1");
    }
    const double B = spec.effective_B();
    const double a = spec.alpha;
    const double h = grid.h();
    const std::size_t N = grid.size();
    auto cons = [&](double t) { return spec.consumption_at(t); };
    auto f = [&](double t, double y) { return (y - cons(t)) / B; };
    auto taylor = [&](double t) {
        double s = 0.0;
        double term = 1.0;
        for (std::size_t k = 0; k < spec.y0.size(); ++k) {
            s += spec.y0[k] * term;
            term *= t / static_cast<double>(k + 1);
        }
        return s;
    };
    const double hp1 = std::pow(h, a) * rgamma(a + 1.0);
    const double hp2 = std::pow(h, a) * rgamma(a + 2.0);
    if (!(hp2 / B < 1.0)) {
        throw convergence_error("solve_numeric: step too large for the corrector (h^alpha/(B Gamma(alpha+2)) = " +
                                format_double(hp2 / B) + "); refine the grid");
    }
    std::vector<double> bw(N), pw(N + 1);
    for (std::size_t m = 0; m < N; ++m) {
        const double md = static_cast<double>(m);
        bw[m] = std::pow(md + 1.0, a) - std::pow(md, a);
    }
    for (std::size_t m = 0; m <= N; ++m) pw[m] = std::pow(static_cast<double>(m), a + 1.0);

    // Starting weights (Lubich): on the first nodes, corrections that make the
    // corrector quadrature exact for f = 1, t and t^alpha, the leading terms of the
    // solution's expansion at t = 0.
    std::vector<double> gammas = {0.0, 1.0};
    if (std::abs(a - std::round(a)) >= 0.1) gammas.push_back(a);
    std::sort(gammas.begin(), gammas.end());
    std::vector<std::vector<double>> tpow(gammas.size(), std::vector<double>(N));
    for (std::size_t g = 0; g < gammas.size(); ++g) {
        for (std::size_t k = 0; k < N; ++k) tpow[g][k] = gammas[g] == 0.0 ? 1.0 : std::pow(grid[k], gammas[g]);
    }

    std::vector<double> y(N), fv(N);
    y[0] = spec.y0[0];
    fv[0] = f(0.0, y[0]);
    std::vector<double> qg(gammas.size());
    for (std::size_t j = 0; j + 1 < N; ++j) {
        const std::size_t n = j + 1;
        const double tn = grid[n];
        const double base = taylor(tn);
        double pred = 0.0;
        double corr = 0.0;
        std::fill(qg.begin(), qg.end(), 0.0);
        const double jd = static_cast<double>(j);
        for (std::size_t k = 0; k <= j; ++k) {
            pred += bw[j - k] * fv[k];
            double ak;
            if (k == 0) {
                ak = pw[j] - (jd - a) * std::pow(jd + 1.0, a);
            } else {
                const std::size_t d = j - k;
                ak = pw[d + 2] + pw[d] - 2.0 * pw[d + 1];
            }
            corr += ak * fv[k];
            for (std::size_t g = 0; g < gammas.size(); ++g) qg[g] += ak * tpow[g][k];
        }
        // Correction weights on nodes 0..min(n, |gammas|-1).
        const std::size_t s = std::min(n + 1, gammas.size());
        std::vector<double> w(s, 0.0);
        {
            std::vector<std::vector<double>> M(s, std::vector<double>(s + 1));
            for (std::size_t g = 0; g < s; ++g) {
                const double exact = gamma(gammas[g] + 1.0) * rgamma(gammas[g] + 1.0 + a) *
                                     std::pow(tn, gammas[g] + a);
                const double quad = hp2 * (qg[g] + tpow[g][n]);
                for (std::size_t c = 0; c < s; ++c) M[g][c] = tpow[g][c];
                M[g][s] = exact - quad;
            }
            // Gaussian elimination with partial pivoting (s <= 3).
            for (std::size_t c = 0; c < s; ++c) {
                std::size_t piv = c;
                for (std::size_t r = c + 1; r < s; ++r) {
                    if (std::abs(M[r][c]) > std::abs(M[piv][c])) piv = r;
                }
                std::swap(M[c], M[piv]);
                for (std::size_t r = c + 1; r < s; ++r) {
                    const double fct = M[r][c] / M[c][c];
                    for (std::size_t q = c; q <= s; ++q) M[r][q] -= fct * M[c][q];
                }
            }
            for (std::size_t c = s; c-- > 0;) {
                double v = M[c][s];
                for (std::size_t q = c + 1; q < s; ++q) v -= M[c][q] * w[q];
                w[c] = v / M[c][c];
            }
        }
        double known = 0.0;
        for (std::size_t c = 0; c < s && c < n; ++c) known += w[c] * fv[c];
        const double w_self = s > n ? w[n] : 0.0;
        double yn = base + hp1 * pred;
        for (int it = 0; it < opt.max_corrector_iterations; ++it) {
            const double fn = f(tn, yn);
            const double next = base + hp2 * (corr + fn) + known + w_self * fn;
            const bool done = std::abs(next - yn) <= opt.corrector_tolerance * (1.0 + std::abs(next));
            yn = next;
            if (done) break;
        }
        if (!std::isfinite(yn)) {
            throw convergence_error("solve_numeric: solution left the floating-point range at t=" +
                                    format_double(tn) + "; shorten the horizon or refine the grid");
        }
        y[n] = yn;
        fv[n] = f(tn, yn);
    }
    Trajectory tr;
    tr.t = grid.points();
    std::vector<double> cv(N);
    for (std::size_t i = 0; i < N; ++i) cv[i] = std::holds_alternative<consumption::Proportional>(spec.consumption)
                                                    ? std::get<consumption::Proportional>(spec.consumption).c * y[i]
                                                    : cons(grid[i]);
    tr.add("Y", std::move(y));
    tr.add("C", std::move(cv));
    tr.metadata = {{"B", format_double(spec.B)}, {"alpha", format_double(a)}};
    return tr;
}

enum class ResidualForm { integral, caputo };

/// Max residual of a sampled solution over t_i > 0.
/// integral: |Y - sum_k Y_k t^k/k! - I^alpha[(Y - C)/B]|, the Volterra form of the equation.
/// caputo:   |(D^alpha Y) - (Y - C)/B| with the L1 Caputo scheme; for solutions that
///           behave like t^alpha at the origin the first nodes keep an O(1) error.
inline double equation_residual(const HDSpec& spec, const SampledSignal& y,
                                ResidualForm form = ResidualForm::integral) {
    spec.validate();
    const Grid& g = y.grid();
    const double B = spec.effective_B();
    std::vector<double> rhs(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double c = std::holds_alternative<consumption::Proportional>(spec.consumption)
                             ? 0.0
                             : spec.consumption_at(g[i]);
        rhs[i] = (y[i] - c) / B;
    }
    double m = 0.0;
    if (form == ResidualForm::caputo) {
        const SampledSignal d = caputo_derivative(spec.alpha, y, QuadratureScheme::l1());
        for (std::size_t i = 1; i < y.size(); ++i) m = std::max(m, std::abs(d[i] - rhs[i]));
        return m;
    }
    const SampledSignal iv = rl_integral(spec.alpha, SampledSignal(g, std::move(rhs)));
    for (std::size_t i = 1; i < y.size(); ++i) {
        double taylor = 0.0;
        double term = 1.0;
        for (std::size_t k = 0; k < spec.y0.size(); ++k) {
            taylor += spec.y0[k] * term;
            term *= g[i] / static_cast<double>(k + 1);
        }
        m = std::max(m, std::abs(y[i] - taylor - iv[i]));
    }
    return m;
}

struct AsymptoticTerms {
    double value = 0.0;
    double leading = 0.0;         // exponential part
    double first_neglected = 0.0; // magnitude of the j = m+1 algebraic term
};

/// Large-t expansion of the solution for 0 < alpha < 2:
/// sum_k Y_k [B^{k/alpha}/alpha e^{t B^{-1/alpha}} - sum_{j=1}^m B^j t^{k-alpha j}/Gamma(k+1-alpha j)]
/// plus, for C(t) = C t^{mu-1},
/// -C Gamma(mu) B^{(mu-1)/alpha}/alpha e^{t B^{-1/alpha}} + sum_{j=1}^m C Gamma(mu) B^{j-1} t^{alpha(1-j)+mu-1}/Gamma(alpha(1-j)+mu).
inline AsymptoticTerms asymptotic_terms(const HDSpec& spec, double t, int m_terms) {
    spec.validate();
    const double a = spec.alpha;
    if (!(a > 0.0 && a < 2.0)) {
        throw unsupported_range_error("asymptotic_solution: expansion valid only for 0 < alpha < 2");
    }
    detail::require(t > 0.0, "asymptotic_solution: t must be positive");
    detail::require(m_terms >= 0, "asymptotic_solution: m_terms must be >= 0");
    const double B = spec.effective_B();
    const double growth = std::exp(t * std::pow(B, -1.0 / a));
    AsymptoticTerms r;
    double alg = 0.0;
    for (std::size_t k = 0; k < spec.y0.size(); ++k) {
        const double yk = spec.y0[k];
        if (yk == 0.0) continue;
        const double kd = static_cast<double>(k);
        r.leading += yk * std::pow(B, kd / a) / a * growth;
        for (int j = 1; j <= m_terms + 1; ++j) {
            const double term = yk * std::pow(B, j) * std::pow(t, kd - a * j) * rgamma(kd + 1.0 - a * j);
            if (j <= m_terms) {
                alg -= term;
            } else {
                r.first_neglected = std::max(r.first_neglected, std::abs(term));
            }
        }
    }
    const auto [C, mu] = spec.power_consumption();
    if (C != 0.0) {
        const double gm = gamma(mu);
        r.leading += -C * gm * std::pow(B, (mu - 1.0) / a) / a * growth;
        for (int j = 1; j <= m_terms + 1; ++j) {
            const double e = a * (1.0 - j) + mu;
            const double term = C * gm * std::pow(B, j - 1.0) * std::pow(t, e - 1.0) * rgamma(e);
            if (j <= m_terms) {
                alg += term;
            } else {
                r.first_neglected = std::max(r.first_neglected, std::abs(term));
            }
        }
    }
    r.value = r.leading + alg;
    return r;
}

/// Asymptotic value; refuses t where the first neglected algebraic term exceeds 1% of
/// the exponential term.
inline double asymptotic_solution(const HDSpec& spec, double t, int m_terms = 3) {
    const AsymptoticTerms r = asymptotic_terms(spec, t, m_terms);
    if (r.first_neglected > 0.01 * std::abs(r.leading)) {
        throw domain_error("asymptotic_solution: t=" + format_double(t) +
                           " too small for the expansion (next term " + format_double(r.first_neglected) +
                           " vs leading " + format_double(r.leading) + ")");
    }
    return r.value;
}

enum class Verdict { increase, decrease, unchanged };

inline std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::increase: return "increase";
        case Verdict::decrease: return "decrease";
        case Verdict::unchanged: return "unchanged";
    }
    return "?";
}

struct RateReport {
    double B = 1.0;
    double alpha = 1.0;
    double lambda_classic = 1.0;
    double lambda_eff = 1.0;
    Verdict verdict = Verdict::unchanged;
};

/// lambda = 1/B and lambda_eff(alpha) = B^{-1/alpha}.
inline RateReport effective_growth_rate(double B, double alpha) {
    if (!(B > 0.0) || !std::isfinite(B)) throw domain_error("effective_growth_rate: B must be positive");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw domain_error("effective_growth_rate: alpha must be positive");
    RateReport r;
    r.B = B;
    r.alpha = alpha;
    r.lambda_classic = 1.0 / B;
    r.lambda_eff = std::pow(1.0 / B, 1.0 / alpha);
    r.verdict = r.lambda_eff > r.lambda_classic   ? Verdict::increase
                : r.lambda_eff < r.lambda_classic ? Verdict::decrease
                                                  : Verdict::unchanged;
    return r;
}

struct PrincipleRow {
    RateReport rate;
    std::string principle;  // "II" (lambda < 1), "III" (lambda > 1), "boundary" (lambda = 1 or alpha = 1)
    Verdict expected = Verdict::unchanged;
    bool consistent = true;
};

/// Verdicts over a (B, alpha) grid, each checked against:
/// lambda < 1: alpha < 1 decreases, alpha > 1 increases the rate;
/// lambda > 1: alpha < 1 increases, alpha > 1 decreases it.
inline std::vector<PrincipleRow> classify_principles(const std::vector<double>& B_grid,
                                                     const std::vector<double>& alpha_grid) {
    std::vector<PrincipleRow> rows;
    for (double B : B_grid) {
        for (double a : alpha_grid) {
            PrincipleRow row;
            row.rate = effective_growth_rate(B, a);
            const double lam = row.rate.lambda_classic;
            if (a == 1.0 || lam == 1.0) {
                row.principle = "boundary";
                row.expected = Verdict::unchanged;
            } else if (lam < 1.0) {
                row.principle = "II";
                row.expected = a < 1.0 ? Verdict::decrease : Verdict::increase;
            } else {
                row.principle = "III";
                row.expected = a < 1.0 ? Verdict::increase : Verdict::decrease;
            }
            row.consistent = row.expected == row.rate.verdict;
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace dynmem::hd
