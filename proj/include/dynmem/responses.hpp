#pragma once

// Closed-form responses to step and impulse inputs for power-law and
// Erdelyi-Kober memory.

#include <cmath>
#include <string>

#include "dynmem/errors.hpp"
#include "dynmem/specfun.hpp"

namespace dynmem {

namespace detail {
inline void check_times(double T, double t, bool allow_equal, const char* who) {
    if (!(T >= 0.0) || !std::isfinite(T) || !std::isfinite(t)) {
        throw domain_error(std::string(who) + ": requires finite T >= 0");
    }
    if (allow_equal ? !(t >= T) : !(t > T)) {
        throw domain_error(std::string(who) + ": requires t " + (allow_equal ? ">=" : ">") + " T");
    }
}
}  // namespace detail

/// Response of the power-law multiplier to H(T - tau):
/// m/Gamma(alpha+1) * (t^alpha - (t-T)^alpha), t >= T.
inline double power_law_step_response(double m, double alpha, double T, double t) {
    detail::check_times(T, t, true, "power_law_step_response");
    detail::require(T > 0.0, "power_law_step_response: requires T > 0");
    detail::require(alpha > 0.0, "power_law_step_response: alpha must be positive");
    // t^a - (t-T)^a without cancellation for T << t.
    const double d = t - T;
    const double diff = d == 0.0 ? std::pow(t, alpha) : std::pow(d, alpha) * std::expm1(alpha * std::log1p(T / d));
    return m * diff * rgamma(alpha + 1.0);
}

/// Response of the power-law multiplier to delta(tau - T): m/Gamma(alpha) * (t-T)^{alpha-1}.
inline double power_law_impulse_response(double m, double alpha, double T, double t) {
    detail::check_times(T, t, false, "power_law_impulse_response");
    detail::require(alpha > 0.0, "power_law_impulse_response: alpha must be positive");
    return m * std::pow(t - T, alpha - 1.0) * rgamma(alpha);
}

struct AcceleratorStepResponse {
    double value = 0.0;          // -a/Gamma(1-alpha) (t-T)^{-alpha}, from the Caputo definition
    double literal_value = 0.0;  // a/Gamma(-alpha) (t-T)^{-alpha}, as printed
};

/// Response of the power-law accelerator (0 < alpha < 1) to H(T - tau).
/// The Caputo integral picks up X' = -delta(tau - T), giving -a (t-T)^{-alpha}/Gamma(1-alpha).
inline AcceleratorStepResponse accelerator_step_response(double a, double alpha, double T, double t) {
    detail::check_times(T, t, false, "accelerator_step_response");
    detail::require(alpha > 0.0 && alpha < 1.0, "accelerator_step_response: alpha must lie in (0, 1)");
    const double p = std::pow(t - T, -alpha);
    return {-a * p * rgamma(1.0 - alpha), a * p * rgamma(-alpha)};
}

/// Response of the Erdelyi-Kober multiplier to delta(tau - T):
/// sigma m T^{sigma(eta+1)-1}/Gamma(alpha) t^{-sigma(alpha+eta)} (t^sigma - T^sigma)^{alpha-1}.
inline double ek_impulse_response(double m, double alpha, double eta, double sigma, double T, double t) {
    detail::check_times(T, t, false, "ek_impulse_response");
    detail::require(T > 0.0, "ek_impulse_response: requires T > 0");
    detail::require(alpha > 0.0 && sigma > 0.0, "ek_impulse_response: alpha and sigma must be positive");
    const double ts = std::pow(t, sigma);
    const double Ts = std::pow(T, sigma);
    return sigma * m * std::pow(T, sigma * (eta + 1.0) - 1.0) * rgamma(alpha) *
           std::pow(t, -sigma * (alpha + eta)) * std::pow(ts - Ts, alpha - 1.0);
}

}  // namespace dynmem
