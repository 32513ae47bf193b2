#pragma once

#include <vector>

#include "qgcc/grid.hpp"
#include "qgcc/lmi.hpp"
#include "qgcc/qmodel.hpp"

namespace qgcc::analysis {

/// Guaranteed cost of the uncertain plant without a controller.
struct AnalysisOutcome {
    Method method = Method::SmallGain;
    bool feasible = false;
    DoubledMatrix P;
    /// s = 1/tau^2 for small gain, theta for Popov.
    double s_or_theta = 0.0;
    /// +inf when infeasible.
    double bound = 0.0;
    lmi::SdpSolution solver;
};

struct AnalysisOptions {
    double epsilon = lmi::kDefaultMargin;
    lmi::SolverOptions solver;
};

/**
 * Variables: real parameters of the doubled-Hermitian P, then s = 1/tau^2.
 *
 *   [ F^dag P + P F + (s/gamma^2) E^dag E + R    2 P J E^dag ]
 *   [ 2 E J P                                    -s I        ]  <= -eps I
 *
 * with P >= eps I, s >= eps, minimizing Tr(P D) + delta s.
 */
lmi::LmiProgram assemble_smallgain_analysis(const UncertainSystem& sys, const CMatrix& R,
                                            double epsilon = lmi::kDefaultMargin);

AnalysisOutcome analyze_smallgain(const UncertainSystem& sys, const CMatrix& R,
                                  const AnalysisOptions& options = {});

/**
 * Variables: P only.
 *
 *   [ P F + F^dag P + R           -2i P J E^dag + E^dag + theta F^dag E^dag ]
 *   [ 2i E J P + E + theta E F    -gamma I                                  ]  <= -eps I
 *
 * with P >= eps I, minimizing Tr(P D).
 */
lmi::LmiProgram assemble_popov_analysis(const UncertainSystem& sys, const CMatrix& R, double theta,
                                        double epsilon = lmi::kDefaultMargin);

/// One theta; bound = Tr(P* D) + popov_offset(sys, theta).
AnalysisOutcome analyze_popov_at(const UncertainSystem& sys, const CMatrix& R, double theta,
                                 const AnalysisOptions& options = {});

/// Every grid point in grid order (the Popov bound-versus-theta curve).
std::vector<AnalysisOutcome> popov_analysis_curve(const UncertainSystem& sys, const CMatrix& R,
                                                  const std::vector<double>& theta_grid,
                                                  const AnalysisOptions& options = {});

/// Grid-best theta; ties go to the smaller theta.
AnalysisOutcome analyze_popov(const UncertainSystem& sys, const CMatrix& R,
                              const std::vector<double>& theta_grid,
                              const AnalysisOptions& options = {});

}  // namespace qgcc::analysis
