#pragma once

// Time grids, sampled signals, standard test inputs and CSV trajectories.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dynmem/errors.hpp"

namespace dynmem {

struct Spacing {
    enum class Kind { uniform, graded };
    Kind kind = Kind::uniform;
    double r = 1.0;

    static Spacing uniform() { return {}; }
    static Spacing graded(double r) { return {Kind::graded, r}; }
};

class Grid {
public:
    Grid() = default;

    /// Arbitrary strictly increasing points on [t0, t_end], t0 >= 0.
    explicit Grid(std::vector<double> points) : points_(std::move(points)) {
        validate();
        const double h = (t_end() - t0()) / static_cast<double>(points_.size() - 1);
        bool uni = true;
        for (std::size_t i = 0; i < points_.size() && uni; ++i) {
            const double expect = t0() + h * static_cast<double>(i);
            uni = std::abs(points_[i] - expect) <= 1e-12 * std::max(1.0, std::abs(t_end()));
        }
        uniform_ = uni;
        h_ = uni ? h : 0.0;
    }

    [[nodiscard]] double t0() const { return points_.front(); }
    [[nodiscard]] double t_end() const { return points_.back(); }
    [[nodiscard]] std::size_t size() const { return points_.size(); }
    [[nodiscard]] const std::vector<double>& points() const { return points_; }
    double operator[](std::size_t i) const { return points_[i]; }
    [[nodiscard]] bool uniform() const { return uniform_; }

    /// Step of a uniform grid.
    [[nodiscard]] double h() const {
        if (!uniform_) throw domain_error("Grid::h: grid is not uniform");
        return h_;
    }

    /// Largest spacing among the segments meeting [a, b].
    [[nodiscard]] double max_spacing(double a, double b) const {
        double m = 0.0;
        for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
            if (points_[i + 1] >= a && points_[i] <= b) {
                m = std::max(m, points_[i + 1] - points_[i]);
            }
        }
        return m;
    }

    bool operator==(const Grid& o) const { return points_ == o.points_; }

private:
    friend Grid make_grid(double, double, std::size_t, Spacing);

    void validate() const {
        if (points_.size() < 2) throw domain_error("Grid: needs at least 2 points");
        if (!(points_.front() >= 0.0)) throw domain_error("Grid: t0 must be >= 0");
        for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
            if (!std::isfinite(points_[i + 1]) || !(points_[i + 1] > points_[i])) {
                throw domain_error("Grid: points must be finite and strictly increasing (index " +
                                   std::to_string(i + 1) + ")");
            }
        }
    }

    std::vector<double> points_;
    bool uniform_ = false;
    double h_ = 0.0;
};

inline Grid make_grid(double t0, double t_end, std::size_t n, Spacing spacing = Spacing::uniform()) {
    if (!(t0 >= 0.0) || !(t_end > t0) || !std::isfinite(t_end)) {
        throw domain_error("make_grid: requires t_end > t0 >= 0");
    }
    if (n < 2) throw domain_error("make_grid: requires n >= 2");
    if (spacing.kind == Spacing::Kind::graded && !(spacing.r >= 1.0)) {
        throw domain_error("make_grid: graded exponent must be >= 1");
    }
    const bool uni = spacing.kind == Spacing::Kind::uniform || spacing.r == 1.0;
    std::vector<double> pts(n);
    const double len = t_end - t0;
    const double den = static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = static_cast<double>(i) / den;
        pts[i] = t0 + len * (uni ? s : std::pow(s, spacing.r));
    }
    pts.back() = t_end;
    Grid g;
    g.points_ = std::move(pts);
    g.validate();
    g.uniform_ = uni;
    g.h_ = uni ? len / den : 0.0;
    return g;
}

/// Discontinuity of a signal: X(t-) = left, X(t+) = right.
struct Jump {
    double t = 0.0;
    double left = 0.0;
    double right = 0.0;
};

/// Analytic form: derivative(order, t) for order 0..max_order.
using DerivativeFn = std::function<double(int, double)>;

class SampledSignal {
public:
    SampledSignal() = default;

    SampledSignal(Grid grid, std::vector<double> values)
        : grid_(std::move(grid)), values_(std::move(values)) {
        if (values_.size() != grid_.size()) {
            throw domain_error("SampledSignal: values length " + std::to_string(values_.size()) +
                               " differs from grid length " + std::to_string(grid_.size()));
        }
    }

    /// Attach analytic derivatives up to `max_order`; each must be finite on the grid.
    SampledSignal& with_derivatives(DerivativeFn fn, int max_order) {
        if (max_order < 0) throw domain_error("SampledSignal: derivative order must be >= 0");
        for (int k = 0; k <= max_order; ++k) {
            for (double t : grid_.points()) {
                if (!std::isfinite(fn(k, t))) {
                    throw domain_error("SampledSignal: derivative of order " + std::to_string(k) +
                                       " is not finite at t=" + std::to_string(t));
                }
            }
        }
        deriv_ = std::move(fn);
        max_order_ = max_order;
        return *this;
    }

    SampledSignal& with_jumps(std::vector<Jump> jumps) {
        std::sort(jumps.begin(), jumps.end(), [](const Jump& a, const Jump& b) { return a.t < b.t; });
        for (const auto& j : jumps) {
            if (!(j.t > grid_.t0() && j.t < grid_.t_end())) {
                throw domain_error("SampledSignal: jump outside the open grid interval");
            }
        }
        jumps_ = std::move(jumps);
        return *this;
    }

    [[nodiscard]] const Grid& grid() const { return grid_; }
    [[nodiscard]] const std::vector<double>& values() const { return values_; }
    [[nodiscard]] std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    [[nodiscard]] const std::vector<Jump>& jumps() const { return jumps_; }

    [[nodiscard]] int max_order() const { return deriv_ ? max_order_ : -1; }
    [[nodiscard]] bool has_derivative(int order) const { return deriv_ && order <= max_order_; }

    /// Analytic derivative of the given order at time t.
    [[nodiscard]] double derivative(int order, double t) const {
        if (!has_derivative(order)) {
            throw domain_error("SampledSignal: no analytic derivative of order " +
                               std::to_string(order));
        }
        return deriv_(order, t);
    }

    /// Analytic evaluation handle (may be empty).
    [[nodiscard]] const DerivativeFn& analytic() const { return deriv_; }

private:
    Grid grid_;
    std::vector<double> values_;
    DerivativeFn deriv_;
    int max_order_ = -1;
    std::vector<Jump> jumps_;
};

/// Pointwise linear combination a*x + b*y on a shared grid. Analytic forms and
/// jumps combine when both operands carry them.
inline SampledSignal combine(double a, const SampledSignal& x, double b, const SampledSignal& y) {
    if (!(x.grid() == y.grid())) throw domain_error("combine: signals live on different grids");
    std::vector<double> v(x.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a * x[i] + b * y[i];
    SampledSignal out(x.grid(), std::move(v));
    const int order = std::min(x.max_order(), y.max_order());
    if (order >= 0) {
        DerivativeFn fx = x.analytic();
        DerivativeFn fy = y.analytic();
        out.with_derivatives([=](int k, double t) { return a * fx(k, t) + b * fy(k, t); }, order);
    }
    if (!x.jumps().empty() || !y.jumps().empty()) {
        // Merge jump lists; coincident times combine.
        std::vector<Jump> js;
        auto value_at = [](const SampledSignal& s, double t, bool left) {
            if (s.has_derivative(0)) {
                for (const auto& j : s.jumps()) {
                    if (j.t == t) return left ? j.left : j.right;
                }
                return s.derivative(0, t);
            }
            return 0.0;
        };
        std::vector<double> times;
        for (const auto& j : x.jumps()) times.push_back(j.t);
        for (const auto& j : y.jumps()) times.push_back(j.t);
        std::sort(times.begin(), times.end());
        times.erase(std::unique(times.begin(), times.end()), times.end());
        if ((!x.jumps().empty() && !x.has_derivative(0)) || (!y.jumps().empty() && !y.has_derivative(0))) {
            throw domain_error("combine: jumps require an analytic form");
        }
        for (double t : times) {
            js.push_back({t, a * value_at(x, t, true) + b * value_at(y, t, true),
                          a * value_at(x, t, false) + b * value_at(y, t, false)});
        }
        out.with_jumps(std::move(js));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Test inputs

struct TestInput {
    enum class Kind { UnitConstant, Heaviside, DiracApprox, Power, Custom };
    Kind kind = Kind::UnitConstant;
    double T = 0.0;
    double eps = 0.0;
    double mu = 1.0;
    std::function<double(double)> fn;  // Custom value
    DerivativeFn custom_derivatives;   // optional for Custom
    int custom_max_order = -1;

    static TestInput unit_constant() { return {}; }
    static TestInput heaviside(double T) {
        TestInput in;
        in.kind = Kind::Heaviside;
        in.T = T;
        return in;
    }
    static TestInput dirac_approx(double T, double eps) {
        TestInput in;
        in.kind = Kind::DiracApprox;
        in.T = T;
        in.eps = eps;
        return in;
    }
    /// X(t) = t^{mu-1}.
    static TestInput power(double mu) {
        TestInput in;
        in.kind = Kind::Power;
        in.mu = mu;
        return in;
    }
    static TestInput custom(std::function<double(double)> f, DerivativeFn derivs = {},
                            int max_order = -1) {
        TestInput in;
        in.kind = Kind::Custom;
        in.fn = std::move(f);
        in.custom_max_order = derivs ? max_order : -1;
        in.custom_derivatives = std::move(derivs);
        return in;
    }
};

namespace detail {

// Probabilists' Hermite polynomial He_k(u).
inline double hermite_he(int k, double u) {
    double h0 = 1.0;
    if (k == 0) return h0;
    double h1 = u;
    for (int j = 1; j < k; ++j) {
        const double h2 = u * h1 - static_cast<double>(j) * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

inline constexpr int analytic_order_cap = 8;

}  // namespace detail

inline DerivativeFn analytic_form(const TestInput& in) {
    using K = TestInput::Kind;
    switch (in.kind) {
        case K::UnitConstant:
            return [](int k, double) { return k == 0 ? 1.0 : 0.0; };
        case K::Heaviside: {
            const double T = in.T;
            return [T](int k, double t) { return k == 0 ? (t <= T ? 1.0 : 0.0) : 0.0; };
        }
        case K::DiracApprox: {
            const double T = in.T;
            const double e = in.eps;
            return [T, e](int k, double t) {
                const double u = (t - T) / e;
                const double g = std::exp(-0.5 * u * u) / (e * std::sqrt(2.0 * std::numbers::pi));
                const double sign = (k % 2 == 0) ? 1.0 : -1.0;
                return sign * detail::hermite_he(k, u) * g / std::pow(e, k);
            };
        }
        case K::Power: {
            const double mu = in.mu;
            return [mu](int k, double t) {
                double c = 1.0;
                for (int j = 1; j <= k; ++j) c *= (mu - static_cast<double>(j));
                if (c == 0.0) return 0.0;
                return c * std::pow(t, mu - 1.0 - static_cast<double>(k));
            };
        }
        case K::Custom:
            if (in.custom_derivatives) return in.custom_derivatives;
            if (in.fn) {
                auto f = in.fn;
                return [f](int k, double t) {
                    if (k != 0) throw domain_error("custom input: no derivatives supplied");
                    return f(t);
                };
            }
            return {};
    }
    return {};
}

/// Evaluate a test input on a grid. Heaviside steps are recorded as jumps so that the
/// operator engine integrates them exactly.
inline SampledSignal sample(const TestInput& in, const Grid& grid) {
    using K = TestInput::Kind;
    if (in.kind == K::DiracApprox) {
        if (!(in.eps > 0.0)) throw domain_error("DiracApprox: eps must be positive");
        const double h = grid.max_spacing(in.T - 5.0 * in.eps, in.T + 5.0 * in.eps);
        if (in.eps < 3.0 * h) {
            throw resolution_error("DiracApprox: eps=" + std::to_string(in.eps) +
                                   " under-resolved; needs eps >= 3h with h=" + std::to_string(h));
        }
    }
    if (in.kind == K::Power && !(in.mu > 0.0)) throw domain_error("Power: mu must be positive");
    if (in.kind == K::Custom && !in.fn && !in.custom_derivatives) {
        throw domain_error("Custom input: no function supplied");
    }
    const DerivativeFn f = analytic_form(in);
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = in.kind == K::Custom && in.fn ? in.fn(grid[i]) : f(0, grid[i]);
        if (!std::isfinite(v[i])) {
            throw domain_error("sample: input is not finite at t=" + std::to_string(grid[i]));
        }
    }
    SampledSignal s(grid, std::move(v));
    int order = detail::analytic_order_cap;
    if (in.kind == K::Custom) order = in.custom_derivatives ? in.custom_max_order : -1;
    if (in.kind == K::Power) {
        // Derivatives blow up at t = 0 once the exponent turns negative.
        int k = 0;
        while (k < detail::analytic_order_cap && std::isfinite(f(k + 1, grid.t0()))) ++k;
        order = k;
    }
    if (order >= 0) s.with_derivatives(f, order);
    if (in.kind == K::Heaviside && in.T > grid.t0() && in.T < grid.t_end()) {
        s.with_jumps({{in.T, 1.0, 0.0}});
    }
    return s;
}

/// Trapezoid rule over the grid samples.
inline double trapezoid(const SampledSignal& x) {
    const auto& g = x.grid();
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < g.size(); ++i) s += 0.5 * (g[i + 1] - g[i]) * (x[i] + x[i + 1]);
    return s;
}

// ---------------------------------------------------------------------------
// Trajectories and CSV

struct Trajectory {
    std::vector<double> t;
    std::vector<std::string> names;           // one per series column
    std::vector<std::vector<double>> series;  // series[c][i]
    std::vector<std::pair<std::string, std::string>> metadata;

    void add(std::string name, std::vector<double> values) {
        if (values.size() != t.size()) {
            throw domain_error("Trajectory: column '" + name + "' has wrong length");
        }
        names.push_back(std::move(name));
        series.push_back(std::move(values));
    }

    [[nodiscard]] const std::vector<double>& column(const std::string& name) const {
        for (std::size_t c = 0; c < names.size(); ++c) {
            if (names[c] == name) return series[c];
        }
        throw input_error("Trajectory: no column named '" + name + "'");
    }

    bool operator==(const Trajectory& o) const = default;
};

inline Trajectory to_trajectory(const SampledSignal& s, const std::string& name = "value") {
    Trajectory tr;
    tr.t = s.grid().points();
    tr.add(name, s.values());
    return tr;
}

/// 17 significant digits, so every value round-trips and golden files stay stable.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return {buf, res.ptr};
}

inline void write_csv(const Trajectory& tr, std::ostream& os) {
    if (tr.t.empty()) throw input_error("write_csv: empty trajectory");
    for (const auto& col : tr.series) {
        if (col.size() != tr.t.size()) throw input_error("write_csv: ragged trajectory");
    }
    for (const auto& [k, v] : tr.metadata) os << "# " << k << '=' << v << '\n';
    os << 't';
    for (const auto& n : tr.names) os << ',' << n;
    os << '\n';
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        os << format_double(tr.t[i]);
        for (const auto& col : tr.series) os << ',' << format_double(col[i]);
        os << '\n';
    }
}

inline void write_csv(const Trajectory& tr, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw input_error("write_csv: cannot open '" + path + "' for writing");
    write_csv(tr, f);
    if (!f) throw input_error("write_csv: write to '" + path + "' failed");
}

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline double parse_number(std::string_view tok, std::size_t row, std::size_t line,
                           const std::string& source) {
    tok = trim(tok);
    double v = 0.0;
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || res.ec != std::errc() || res.ptr != tok.data() + tok.size() || !std::isfinite(v)) {
        throw input_error(source + ": row " + std::to_string(row) + " (line " + std::to_string(line) +
                          "): invalid number '" + std::string(tok) + "'");
    }
    return v;
}

}  // namespace detail

inline Trajectory read_csv(std::istream& is, const std::string& source = "csv") {
    Trajectory tr;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    std::size_t ncols = 0;
    std::size_t row = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string_view lv = detail::trim(line);
        if (!have_header) {
            if (lv.empty()) continue;
            if (lv.front() == '#') {
                lv.remove_prefix(1);
                lv = detail::trim(lv);
                const auto eq = lv.find('=');
                if (eq != std::string_view::npos) {
                    tr.metadata.emplace_back(std::string(detail::trim(lv.substr(0, eq))),
                                             std::string(detail::trim(lv.substr(eq + 1))));
                }
                continue;
            }
            const auto cols = detail::split_commas(lv);
            if (detail::trim(cols[0]) != "t") {
                throw input_error(source + ": line " + std::to_string(lineno) +
                                  ": header must start with column 't'");
            }
            if (cols.size() < 2) {
                throw input_error(source + ": line " + std::to_string(lineno) +
                                  ": header needs at least one series column");
            }
            for (std::size_t c = 1; c < cols.size(); ++c) {
                tr.names.emplace_back(detail::trim(cols[c]));
            }
            ncols = cols.size();
            tr.series.resize(ncols - 1);
            have_header = true;
            continue;
        }
        if (lv.empty()) continue;
        ++row;
        const auto cols = detail::split_commas(lv);
        if (cols.size() != ncols) {
            throw input_error(source + ": row " + std::to_string(row) + " (line " +
                              std::to_string(lineno) + "): expected " + std::to_string(ncols) +
                              " fields, got " + std::to_string(cols.size()));
        }
        tr.t.push_back(detail::parse_number(cols[0], row, lineno, source));
        for (std::size_t c = 1; c < ncols; ++c) {
            tr.series[c - 1].push_back(detail::parse_number(cols[c], row, lineno, source));
        }
    }
    if (!have_header) throw input_error(source + ": missing header");
    if (tr.t.empty()) throw input_error(source + ": no data rows");
    return tr;
}

inline Trajectory read_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw input_error("read_csv: cannot open '" + path + "'");
    return read_csv(f, path);
}

/// Column of a trajectory as a signal on the trajectory's time grid.
inline SampledSignal signal_from_trajectory(const Trajectory& tr, const std::string& name) {
    return SampledSignal(Grid(tr.t), tr.column(name));
}

}  // namespace dynmem
