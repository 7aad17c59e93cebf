#pragma once

// Discrete multiplier with power-law memory: the direct sum and the recursive form.

#include <cmath>
#include <vector>

#include "dynmem/errors.hpp"
#include "dynmem/quadrature.hpp"
#include "dynmem/specfun.hpp"

namespace dynmem {

/// V_alpha(z) = (z+1)^{alpha-1} - z^{alpha-1}.
inline double v_alpha(double alpha, double z) {
    if (!(z > 0.0)) throw domain_error("v_alpha: z must be positive");
    if (alpha == 1.0) return 0.0;
    // z^{a-1} * expm1((a-1) log1p(1/z)) keeps precision for large z.
    return std::pow(z, alpha - 1.0) * std::expm1((alpha - 1.0) * std::log1p(1.0 / z));
}

namespace detail {
inline void check_map_params(double alpha, double T) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw domain_error("discrete map: alpha must be positive");
    if (!(T > 0.0) || !std::isfinite(T)) throw domain_error("discrete map: T must be positive");
}
inline double map_coefficient(double m, double alpha, double T) {
    return m * std::pow(T, alpha - 1.0) * rgamma(alpha);
}
}  // namespace detail

/// Y_{N+1} = m T^{alpha-1}/Gamma(alpha) * sum_{k=0}^{N} (N+1-k)^{alpha-1} x_k.
inline double map_direct(double m, double alpha, double T, const std::vector<double>& x) {
    detail::check_map_params(alpha, T);
    if (x.empty()) throw domain_error("map_direct: empty history");
    const std::size_t n1 = x.size();
    CompensatedSum s;
    for (std::size_t k = 0; k < n1; ++k) {
        s.add(std::pow(static_cast<double>(n1 - k), alpha - 1.0) * x[k]);
    }
    return detail::map_coefficient(m, alpha, T) * s.value();
}

/// State after N inputs: history x_0..x_{N-1} and Y_N (Y_0 = 0).
struct MapState {
    double m = 1.0;
    double alpha = 0.5;
    double T = 1.0;
    std::vector<double> history;
    double y = 0.0;

    [[nodiscard]] std::size_t steps() const { return history.size(); }
};

inline MapState make_map_state(double m, double alpha, double T) {
    detail::check_map_params(alpha, T);
    return MapState{m, alpha, T, {}, 0.0};
}

/// Y_{N+1} = Y_N + c x_N + c sum_{k=0}^{N-1} V_alpha(N-k) x_k, c = m T^{alpha-1}/Gamma(alpha).
inline MapState map_step(MapState s, double x_n) {
    detail::check_map_params(s.alpha, s.T);
    const double c = detail::map_coefficient(s.m, s.alpha, s.T);
    const std::size_t n = s.history.size();
    CompensatedSum acc;
    acc.add(x_n);
    if (s.alpha != 1.0) {
        for (std::size_t k = 0; k < n; ++k) acc.add(v_alpha(s.alpha, static_cast<double>(n - k)) * s.history[k]);
    }
    s.y += c * acc.value();
    s.history.push_back(x_n);
    return s;
}

enum class MapMode { direct, recursive };

/// Y_1..Y_{N+1} for inputs x_0..x_N.
inline std::vector<double> map_run(double m, double alpha, double T, const std::vector<double>& x,
                                   MapMode mode = MapMode::recursive) {
    detail::check_map_params(alpha, T);
    if (x.empty()) throw domain_error("map_run: empty history");
    std::vector<double> y;
    y.reserve(x.size());
    if (mode == MapMode::direct) {
        std::vector<double> prefix;
        prefix.reserve(x.size());
        for (double v : x) {
            prefix.push_back(v);
            y.push_back(map_direct(m, alpha, T, prefix));
        }
        return y;
    }
    MapState s = make_map_state(m, alpha, T);
    for (double v : x) {
        s = map_step(std::move(s), v);
        y.push_back(s.y);
    }
    return y;
}

}  // namespace dynmem
