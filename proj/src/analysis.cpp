#include "qgcc/analysis.hpp"

#include <cmath>
#include <limits>

#include "checks.hpp"

namespace qgcc::analysis {

using lmi::AffineMatrix;
using lmi::LmiProgram;
using detail::require_class;
using detail::require_hurwitz;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_cost_matrix(const CMatrix& R, Index n) {
    if (R.rows() != 2 * n || R.cols() != 2 * n) {
        throw DimensionMismatch("R must be " + std::to_string(2 * n) + " square");
    }
    if (max_abs(R - R.adjoint()) > kStructureTolerance * std::max(1.0, max_abs(R))) {
        throw NotHermitian("R is not Hermitian");
    }
}

void name_p_variables(LmiProgram& program, Index count) {
    for (Index i = 0; i < count; ++i) program.var_names[i] = "p" + std::to_string(i);
}

AnalysisOutcome extract(Method method, const UncertainSystem& sys, const LmiProgram& program,
                        lmi::SdpSolution sol, double s_or_theta) {
    AnalysisOutcome out;
    out.method = method;
    out.s_or_theta = s_or_theta;
    const Index n = sys.n_modes();
    const auto basis = doubled_hermitian_basis(n);
    if (!sol.ok()) {
        out.bound = kInf;
        out.P = DoubledMatrix::zero(n, n);
        out.solver = std::move(sol);
        return out;
    }
    const CMatrix P = lmi::expand(basis, 0, sol.x);
    out.P = DoubledMatrix::from_assembled(P, MatrixKind::Hermitian, 1e-9);
    const double trace_term = (P * compute_D(sys.N)).trace().real();
    if (method == Method::SmallGain) {
        out.s_or_theta = sol.x[program.num_vars - 1];
        out.bound = trace_term + sys.delta * out.s_or_theta;
    } else {
        out.bound = trace_term + popov_offset(sys, s_or_theta);
    }
    out.feasible = std::isfinite(out.bound);
    out.solver = std::move(sol);
    return out;
}

}  // namespace

LmiProgram assemble_smallgain_analysis(const UncertainSystem& sys, const CMatrix& R,
                                       double epsilon) {
    require_class(sys, Method::SmallGain);
    const Index n = sys.n_modes();
    require_cost_matrix(R, n);
    const CMatrix F = compute_F(sys);
    require_hurwitz(F);

    const auto basis = doubled_hermitian_basis(n);
    const Index np = static_cast<Index>(basis.size());
    const Index k = np + 1;
    const Index s_var = np;
    const Index mp = 2 * sys.perturbation_dim();

    LmiProgram program(k);
    program.strictness_margin = epsilon;
    name_p_variables(program, np);
    program.var_names[s_var] = "s";

    const CMatrix J = commutation_matrix(n);
    const CMatrix E = sys.E.assembled();
    const CMatrix D = compute_D(sys.N);
    const AffineMatrix P = lmi::expansion(basis, 0, k);
    const AffineMatrix s_id = AffineMatrix::variable(CMatrix::Identity(mp, mp), s_var, k);

    const AffineMatrix top_left = CMatrix(F.adjoint()) * P + P * F +
                                  AffineMatrix::variable(E.adjoint() * E / (sys.gamma * sys.gamma),
                                                         s_var, k) +
                                  AffineMatrix::constant(R, k);
    const AffineMatrix top_right = Complex(2.0) * (P * CMatrix(J * E.adjoint()));
    program.add_constraint(
        AffineMatrix::blocks({{top_left, top_right}, {top_right.adjoint(), -s_id}}), true,
        "robust performance");
    program.add_constraint(-P, true, "P positive");

    for (Index i = 0; i < np; ++i) {
        program.objective[i] = (basis[static_cast<std::size_t>(i)] * D).trace().real();
    }
    program.objective[s_var] = sys.delta;
    program.var_bounds[static_cast<std::size_t>(s_var)].lower = epsilon;
    return program;
}

AnalysisOutcome analyze_smallgain(const UncertainSystem& sys, const CMatrix& R,
                                  const AnalysisOptions& options) {
    const LmiProgram program = assemble_smallgain_analysis(sys, R, options.epsilon);
    lmi::SdpSolution sol = lmi::solve(program, options.solver);
    if (sol.status == lmi::SolveStatus::NumericalFailure) {
        throw NumericalFailure("small gain analysis: solver did not reach a certified point");
    }
    return extract(Method::SmallGain, sys, program, std::move(sol), 0.0);
}

LmiProgram assemble_popov_analysis(const UncertainSystem& sys, const CMatrix& R, double theta,
                                   double epsilon) {
    require_class(sys, Method::Popov);
    detail::require_theta(theta);
    const Index n = sys.n_modes();
    require_cost_matrix(R, n);
    const CMatrix F = compute_F(sys);
    require_hurwitz(F);

    const auto basis = doubled_hermitian_basis(n);
    const Index k = static_cast<Index>(basis.size());
    const Index mp = 2 * sys.perturbation_dim();

    LmiProgram program(k);
    program.strictness_margin = epsilon;
    name_p_variables(program, k);

    const Complex i(0.0, 1.0);
    const CMatrix J = commutation_matrix(n);
    const CMatrix E = sys.E.assembled();
    const CMatrix D = compute_D(sys.N);
    const AffineMatrix P = lmi::expansion(basis, 0, k);

    const AffineMatrix top_left = P * F + CMatrix(F.adjoint()) * P + AffineMatrix::constant(R, k);
    const AffineMatrix bottom_left = (2.0 * i) * (CMatrix(E * J) * P) +
                                     AffineMatrix::constant(E + theta * E * F, k);
    const AffineMatrix corner = AffineMatrix::constant(-sys.gamma * CMatrix::Identity(mp, mp), k);
    program.add_constraint(
        AffineMatrix::blocks({{top_left, bottom_left.adjoint()}, {bottom_left, corner}}), true,
        "robust performance");
    program.add_constraint(-P, true, "P positive");

    for (Index v = 0; v < k; ++v) {
        program.objective[v] = (basis[static_cast<std::size_t>(v)] * D).trace().real();
    }
    return program;
}

AnalysisOutcome analyze_popov_at(const UncertainSystem& sys, const CMatrix& R, double theta,
                                 const AnalysisOptions& options) {
    const LmiProgram program = assemble_popov_analysis(sys, R, theta, options.epsilon);
    return extract(Method::Popov, sys, program, lmi::solve(program, options.solver), theta);
}

std::vector<AnalysisOutcome> popov_analysis_curve(const UncertainSystem& sys, const CMatrix& R,
                                                  const std::vector<double>& theta_grid,
                                                  const AnalysisOptions& options) {
    if (theta_grid.empty()) {
        throw DimensionMismatch("empty theta grid");
    }
    std::vector<AnalysisOutcome> curve;
    curve.reserve(theta_grid.size());
    for (double theta : theta_grid) curve.push_back(analyze_popov_at(sys, R, theta, options));
    return curve;
}

AnalysisOutcome analyze_popov(const UncertainSystem& sys, const CMatrix& R,
                              const std::vector<double>& theta_grid,
                              const AnalysisOptions& options) {
    return select_best(popov_analysis_curve(sys, R, theta_grid, options));
}

}  // namespace qgcc::analysis
