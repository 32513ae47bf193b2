#include "qgcc/synthesis.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "checks.hpp"
#include "qgcc/grid.hpp"

namespace qgcc::synthesis {

using lmi::AffineMatrix;
using lmi::LmiProgram;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Decision vector: q, then Y (unless pinned), then t (small gain only), then xi.
VariableLayout make_layout(Index n, bool fixed, bool with_t) {
    VariableLayout layout;
    layout.q = 0;
    Index next = 1;
    if (!fixed) {
        layout.y_first = next;
        layout.y_count = static_cast<Index>(doubled_hermitian_basis(n).size());
        next += layout.y_count;
    }
    if (with_t) layout.t = next++;
    layout.xi = next++;
    return layout;
}

Index num_vars(const VariableLayout& layout) { return layout.xi + 1; }

LmiProgram make_program(const VariableLayout& layout, double epsilon) {
    LmiProgram program(num_vars(layout));
    program.strictness_margin = epsilon;
    program.var_names[layout.q] = "q";
    for (Index i = 0; i < layout.y_count; ++i) {
        program.var_names[layout.y_first + i] = "y" + std::to_string(i);
    }
    if (layout.t >= 0) {
        program.var_names[layout.t] = "t";
        program.var_bounds[static_cast<std::size_t>(layout.t)].lower = epsilon;
    }
    program.var_names[layout.xi] = "xi";
    program.var_bounds[static_cast<std::size_t>(layout.q)].lower = epsilon;
    program.objective[layout.xi] = 1.0;
    return program;
}

void check_fixed_controller(const std::optional<DoubledMatrix>& K, Index n) {
    if (!K) return;
    if (K->kind() != MatrixKind::Hermitian || K->block_rows() != n || K->block_cols() != n) {
        throw DimensionMismatch("fixed controller must be a doubled Hermitian " +
                                std::to_string(2 * n) + " square matrix");
    }
}

AffineMatrix controller_term(const VariableLayout& layout, const SynthesisOptions& options,
                             Index n) {
    const Index k = num_vars(layout);
    if (options.fixed_controller) {
        return AffineMatrix::variable(options.fixed_controller->assembled(), layout.q, k);
    }
    return lmi::expansion(doubled_hermitian_basis(n), layout.y_first, k);
}

AffineMatrix scaled_identity(Index size, Index var, Index k, double scale) {
    return AffineMatrix::variable(scale * CMatrix::Identity(size, size), var, k);
}

AffineMatrix constant_identity(Index size, Index k, double scale) {
    return AffineMatrix::constant(scale * CMatrix::Identity(size, size), k);
}

AffineMatrix zeros(Index rows, Index cols, Index k) { return AffineMatrix::zero(rows, cols, k); }

// Schur form of Tr(D)/q (+ delta/t) <= xi.
AffineMatrix objective_block(const VariableLayout& layout, double trace_D, double delta) {
    const Index k = num_vars(layout);
    const Index size = layout.t >= 0 ? 3 : 2;
    const Index last = size - 1;
    CMatrix constant = CMatrix::Zero(size, size);
    constant(0, last) = constant(last, 0) = std::sqrt(trace_D);
    CMatrix xi_coeff = CMatrix::Zero(size, size);
    xi_coeff(0, 0) = -1.0;
    CMatrix q_coeff = CMatrix::Zero(size, size);
    q_coeff(last, last) = -1.0;
    AffineMatrix block = AffineMatrix::constant(constant, k) +
                         AffineMatrix::variable(xi_coeff, layout.xi, k) +
                         AffineMatrix::variable(q_coeff, layout.q, k);
    if (layout.t >= 0) {
        CMatrix delta_part = CMatrix::Zero(size, size);
        delta_part(0, 1) = delta_part(1, 0) = std::sqrt(delta);
        CMatrix t_coeff = CMatrix::Zero(size, size);
        t_coeff(1, 1) = -1.0;
        block += AffineMatrix::constant(delta_part, k) + AffineMatrix::variable(t_coeff, layout.t, k);
    }
    return block;
}

SynthesisOutcome extract(Method method, const UncertainSystem& sys, const SynthesisProgram& sp,
                         const SynthesisOptions& options, lmi::SdpSolution sol, double theta) {
    SynthesisOutcome out;
    out.method = method;
    out.theta = theta;
    const Index n = sys.n_modes();
    out.bound = kInf;
    out.Y = DoubledMatrix::zero(n, n);
    out.K = DoubledMatrix::zero(n, n);
    if (!sol.ok()) {
        out.solver = std::move(sol);
        return out;
    }
    const VariableLayout& layout = sp.layout;
    out.q = sol.x[layout.q];
    if (layout.t >= 0) out.t = sol.x[layout.t];
    CMatrix Y;
    if (options.fixed_controller) {
        Y = out.q * options.fixed_controller->assembled();
    } else {
        Y = lmi::expand(doubled_hermitian_basis(n), layout.y_first, sol.x);
    }
    out.Y = DoubledMatrix::from_assembled(Y, MatrixKind::Hermitian, 1e-9);
    out.K = DoubledMatrix::from_assembled(Y / out.q, MatrixKind::Hermitian, 1e-9);

    const CMatrix J = commutation_matrix(n);
    const Complex i(0.0, 1.0);
    out.closed_loop_abscissa = spectral_abscissa(compute_F(sys) - i * J * out.K.assembled());
    out.bound = sol.x[layout.xi];
    if (method == Method::Popov) out.bound += popov_offset(sys, theta);
    // The proof implies stability; re-checked because the solver works to a tolerance.
    out.feasible = out.closed_loop_abscissa <= -kHurwitzMargin && std::isfinite(out.bound);
    if (!out.feasible) out.bound = kInf;
    out.solver = std::move(sol);
    return out;
}

}  // namespace

CMatrix hermitian_sqrt(const CMatrix& R) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (R + R.adjoint()));
    if (!(es.eigenvalues().minCoeff() > 0.0)) {
        throw NonPositiveParameter("R has an eigenvalue <= 0");
    }
    return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
           es.eigenvectors().adjoint();
}

SynthesisProgram assemble_smallgain_synthesis(const UncertainSystem& sys, const CostSpec& cost,
                                              const SynthesisOptions& options) {
    detail::require_class(sys, Method::SmallGain);
    const Index n = sys.n_modes();
    cost.validate(n);
    check_fixed_controller(options.fixed_controller, n);

    SynthesisProgram sp{LmiProgram(0), make_layout(n, options.fixed_controller.has_value(), true)};
    sp.program = make_program(sp.layout, options.epsilon);
    const VariableLayout& L = sp.layout;
    const Index k = num_vars(L);
    const Index d = 2 * n;
    const Index mp = 2 * sys.perturbation_dim();

    const Complex i(0.0, 1.0);
    const CMatrix F = compute_F(sys);
    const CMatrix J = commutation_matrix(n);
    const CMatrix E = sys.E.assembled();
    const CMatrix Rh = hermitian_sqrt(cost.R);
    const AffineMatrix Y = controller_term(L, options, n);

    const AffineMatrix A = AffineMatrix::variable(F.adjoint() + F, L.q, k) + i * (Y * J) -
                           i * (J * Y);
    const AffineMatrix top_left =
        A + AffineMatrix::variable(4.0 * J * E.adjoint() * E * J, L.t, k);
    const AffineMatrix qRh = AffineMatrix::variable(Rh, L.q, k);
    const AffineMatrix qEt = AffineMatrix::variable(E.adjoint(), L.q, k);

    sp.program.add_constraint(
        AffineMatrix::blocks({
            {top_left, Y, qRh, qEt},
            {Y, constant_identity(d, k, -1.0 / cost.rho), zeros(d, d, k), zeros(d, mp, k)},
            {qRh, zeros(d, d, k), constant_identity(d, k, -1.0), zeros(d, mp, k)},
            {qEt.adjoint(), zeros(mp, d, k), zeros(mp, d, k),
             scaled_identity(mp, L.t, k, -sys.gamma * sys.gamma)},
        }),
        true, "robust performance");
    sp.program.add_constraint(
        objective_block(L, compute_D(sys.N).trace().real(), sys.delta), false, "cost bound");
    return sp;
}

SynthesisOutcome synth_smallgain(const UncertainSystem& sys, const CostSpec& cost,
                                 const SynthesisOptions& options) {
    const SynthesisProgram sp = assemble_smallgain_synthesis(sys, cost, options);
    return extract(Method::SmallGain, sys, sp, options, lmi::solve(sp.program, options.solver),
                   0.0);
}

SynthesisProgram assemble_popov_synthesis(const UncertainSystem& sys, const CostSpec& cost,
                                          double theta, const SynthesisOptions& options) {
    detail::require_class(sys, Method::Popov);
    detail::require_theta(theta);
    const Index n = sys.n_modes();
    cost.validate(n);
    check_fixed_controller(options.fixed_controller, n);

    SynthesisProgram sp{LmiProgram(0), make_layout(n, options.fixed_controller.has_value(), false)};
    sp.program = make_program(sp.layout, options.epsilon);
    const VariableLayout& L = sp.layout;
    const Index k = num_vars(L);
    const Index d = 2 * n;
    const Index mp = 2 * sys.perturbation_dim();

    const Complex i(0.0, 1.0);
    const CMatrix F = compute_F(sys);
    const CMatrix J = commutation_matrix(n);
    const CMatrix E = sys.E.assembled();
    const CMatrix Rh = hermitian_sqrt(cost.R);
    const AffineMatrix Y = controller_term(L, options, n);

    const AffineMatrix A = AffineMatrix::variable(F + F.adjoint(), L.q, k) - i * (J * Y) +
                           i * (Y * J);
    const AffineMatrix B = AffineMatrix::constant(2.0 * i * E * J, k) +
                           AffineMatrix::variable(E + theta * E * F, L.q, k) -
                           (i * theta) * (CMatrix(E * J) * Y);
    const AffineMatrix qRh = AffineMatrix::variable(Rh, L.q, k);

    sp.program.add_constraint(
        AffineMatrix::blocks({
            {A, B.adjoint(), Y, qRh},
            {B, constant_identity(mp, k, -sys.gamma), zeros(mp, d, k), zeros(mp, d, k)},
            {Y, zeros(d, mp, k), constant_identity(d, k, -1.0 / cost.rho), zeros(d, d, k)},
            {qRh, zeros(d, mp, k), zeros(d, d, k), constant_identity(d, k, -1.0)},
        }),
        true, "robust performance");
    sp.program.add_constraint(objective_block(L, compute_D(sys.N).trace().real(), 0.0), false,
                              "cost bound");
    return sp;
}

SynthesisOutcome synth_popov_at(const UncertainSystem& sys, const CostSpec& cost, double theta,
                                const SynthesisOptions& options) {
    const SynthesisProgram sp = assemble_popov_synthesis(sys, cost, theta, options);
    return extract(Method::Popov, sys, sp, options, lmi::solve(sp.program, options.solver), theta);
}

std::vector<SynthesisOutcome> popov_synthesis_curve(const UncertainSystem& sys,
                                                    const CostSpec& cost,
                                                    const std::vector<double>& theta_grid,
                                                    const SynthesisOptions& options) {
    if (theta_grid.empty()) {
        throw DimensionMismatch("empty theta grid");
    }
    std::vector<SynthesisOutcome> curve;
    curve.reserve(theta_grid.size());
    for (double theta : theta_grid) curve.push_back(synth_popov_at(sys, cost, theta, options));
    return curve;
}

SynthesisOutcome synth_popov(const UncertainSystem& sys, const CostSpec& cost,
                             const std::vector<double>& theta_grid,
                             const SynthesisOptions& options) {
    return select_best(popov_synthesis_curve(sys, cost, theta_grid, options));
}

}  // namespace qgcc::synthesis
