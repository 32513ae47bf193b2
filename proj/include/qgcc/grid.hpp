#pragma once

#include <vector>

#include "qgcc/lmi.hpp"

namespace qgcc {

/// Default theta grid 0:0.05:1.
std::vector<double> default_theta_grid();

/// Inclusive grid from..to; points are from + i*step so long grids do not drift,
/// and the last point snaps to `to` when it lands within step/1000.
std::vector<double> make_grid(double from, double to, double step);

/// Smallest finite bound on a theta curve, first point on ties (grids ascend, so the
/// smaller theta wins). Throws NumericalFailure when nothing is feasible and some
/// point failed numerically; otherwise an all-infeasible curve returns its first point.
template <class Outcome>
Outcome select_best(const std::vector<Outcome>& curve) {
    if (curve.empty()) {
        throw DimensionMismatch("empty theta grid");
    }
    const Outcome* best = nullptr;
    bool failed = false;
    for (const auto& point : curve) {
        if (point.solver.status == lmi::SolveStatus::NumericalFailure) failed = true;
        if (!point.feasible) continue;
        if (best == nullptr || point.bound < best->bound) best = &point;
    }
    if (best != nullptr) return *best;
    if (failed) {
        throw NumericalFailure("solver failed on the theta grid and no point was feasible");
    }
    return curve.front();
}

}  // namespace qgcc
