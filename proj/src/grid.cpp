#include "qgcc/grid.hpp"

#include <cmath>

namespace qgcc {

std::vector<double> default_theta_grid() { return make_grid(0.0, 1.0, 0.05); }

std::vector<double> make_grid(double from, double to, double step) {
    if (!(step > 0.0) || !(from <= to) || !std::isfinite(from) || !std::isfinite(to)) {
        throw NonPositiveParameter("grid needs from <= to and step > 0");
    }
    std::vector<double> grid;
    // Index-based so 0.05 steps do not accumulate drift.
    const auto count = static_cast<long>(std::floor((to - from) / step + 1e-3));
    for (long i = 0; i <= count; ++i) grid.push_back(from + static_cast<double>(i) * step);
    if (std::abs(grid.back() - to) <= step * 1e-3) grid.back() = to;
    return grid;
}

}  // namespace qgcc
