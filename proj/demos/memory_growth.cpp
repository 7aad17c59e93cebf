// Output of the Harrod-Domar model with B = 2 for several memory orders,
// next to the effective growth rate that the long-run slope approaches.

#include <cmath>
#include <cstdio>
#include <vector>

#include "dynmem/dynmem.hpp"

using namespace dynmem;

int main() {
    const double B = 2.0;
    const std::vector<double> orders = {0.5, 0.8, 1.0, 1.2, 1.5};

    std::printf("%-6s %-10s %-10s %-10s\n", "alpha", "lambda", "lambda_eff", "verdict");
    for (double a : orders) {
        const auto r = hd::effective_growth_rate(B, a);
        std::printf("%-6.2f %-10.4f %-10.4f %s\n", a, r.lambda_classic, r.lambda_eff, hd::to_string(r.verdict).c_str());
    }

    std::printf("\n%-6s", "t");
    for (double a : orders) std::printf(" Y(a=%.1f)   ", a);
    std::printf("\n");
    for (double t = 0.0; t <= 20.0; t += 2.5) {
        std::printf("%-6.1f", t);
        for (double a : orders) {
            std::vector<double> y0 = {1.0};
            if (a > 1.0) y0.push_back(0.0);
            const hd::HDSpec spec{B, a, y0};
            std::printf(" %-12.5g", hd::solve_closed(spec, t));
        }
        std::printf("\n");
    }

    // log-slope over [30, 50] against B^{-1/alpha}
    std::printf("\n%-6s %-12s %-12s\n", "alpha", "slope", "B^(-1/a)");
    for (double a : orders) {
        std::vector<double> y0 = {1.0};
        if (a > 1.0) y0.push_back(0.0);
        const hd::HDSpec spec{B, a, y0};
        const double slope = (std::log(hd::solve_closed(spec, 50)) - std::log(hd::solve_closed(spec, 30))) / 20;
        std::printf("%-6.2f %-12.6f %-12.6f\n", a, slope, std::pow(B, -1 / a));
    }
}
