#pragma once

#include <optional>
#include <vector>

#include "qgcc/lmi.hpp"
#include "qgcc/qmodel.hpp"

namespace qgcc::synthesis {

/// Coherent controller K = Y/q with its guaranteed cost.
struct SynthesisOutcome {
    Method method = Method::SmallGain;
    bool feasible = false;
    double q = 0.0;
    DoubledMatrix Y;
    /// tau^2 (small gain only).
    double t = 0.0;
    double theta = 0.0;
    DoubledMatrix K;
    /// xi* for small gain, xi'* + popov_offset for Popov; +inf when infeasible.
    double bound = 0.0;
    /// Largest real part of F - iJK (only meaningful when the solver succeeded).
    double closed_loop_abscissa = 0.0;
    lmi::SdpSolution solver;
};

/// Where each quantity lives in the decision vector. Y is absent when the
/// controller is fixed, in which case Y = q K_fixed.
struct VariableLayout {
    Index q = 0;
    Index y_first = -1;
    Index y_count = 0;
    Index t = -1;
    Index xi = 0;
};

struct SynthesisProgram {
    lmi::LmiProgram program;
    VariableLayout layout;
};

struct SynthesisOptions {
    double epsilon = lmi::kDefaultMargin;
    lmi::SolverOptions solver;
    /// Pins the controller: Y := q K, leaving (q, t, xi) free.
    std::optional<DoubledMatrix> fixed_controller;
};

/// Closed-loop margin demanded of F - iJK after extraction.
inline constexpr double kHurwitzMargin = 1e-8;

/**
 * Main LMI, with A = qF^dag + Fq + iYJ - iJY:
 *
 *   [ A + 4t J E^dag E J   Y        q R^1/2   q E^dag      ]
 *   [ Y                    -I/rho   0         0            ]
 *   [ q R^1/2              0        -I        0            ]
 *   [ q E                  0        0         -gamma^2 t I ]  <= -eps I
 *
 * plus [[-xi, sqrt(delta), sqrt(Tr D)], [sqrt(delta), -t, 0], [sqrt(Tr D), 0, -q]] <= 0.
 */
SynthesisProgram assemble_smallgain_synthesis(const UncertainSystem& sys, const CostSpec& cost,
                                              const SynthesisOptions& options = {});

SynthesisOutcome synth_smallgain(const UncertainSystem& sys, const CostSpec& cost,
                                 const SynthesisOptions& options = {});

/**
 * Main LMI, with A = Fq + qF^dag - iJY + iYJ and B = 2iEJ + Eq + theta EFq - i theta EJY:
 *
 *   [ A         B^dag      Y        q R^1/2 ]
 *   [ B         -gamma I   0        0       ]
 *   [ Y         0          -I/rho   0       ]
 *   [ q R^1/2   0          0        -I      ]  <= -eps I
 *
 * plus [[-xi', sqrt(Tr D)], [sqrt(Tr D), -q]] <= 0.
 */
SynthesisProgram assemble_popov_synthesis(const UncertainSystem& sys, const CostSpec& cost,
                                          double theta, const SynthesisOptions& options = {});

SynthesisOutcome synth_popov_at(const UncertainSystem& sys, const CostSpec& cost, double theta,
                                const SynthesisOptions& options = {});

std::vector<SynthesisOutcome> popov_synthesis_curve(const UncertainSystem& sys,
                                                    const CostSpec& cost,
                                                    const std::vector<double>& theta_grid,
                                                    const SynthesisOptions& options = {});

/// Grid argmin of the bound; ties go to the smaller theta.
SynthesisOutcome synth_popov(const UncertainSystem& sys, const CostSpec& cost,
                             const std::vector<double>& theta_grid,
                             const SynthesisOptions& options = {});

/// Principal Hermitian square root of a positive definite matrix.
CMatrix hermitian_sqrt(const CMatrix& R);

}  // namespace qgcc::synthesis
