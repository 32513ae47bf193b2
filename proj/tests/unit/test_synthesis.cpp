#include <doctest.h>

#include "qgcc/analysis.hpp"
#include "qgcc/grid.hpp"
#include "qgcc/synthesis.hpp"
#include "test_helpers.hpp"
#include "test_helpers_oracle.hpp"

using namespace qgcc;
using namespace qgcc::synthesis;

namespace {

const Complex I1(0.0, 1.0);

// Guaranteed-cost of the small-gain design for the amplifier with R = I, gamma = 1:
// with K = Y/q restricted to the off-diagonal squeezing direction the program reduces to
// a scalar problem whose optimum is kappa (1 + rho/4) / (kappa - 4).
double smallgain_closed_form(double kappa, double rho) { return kappa * (1.0 + rho / 4.0) / (kappa - 4.0); }

// Closed-loop cost with perturbation Delta, computed without the library oracle.
double closed_loop_cost(const UncertainSystem& sys, const CMatrix& delta, const CMatrix& K,
                        const CostSpec& cost) {
    const CMatrix J = commutation_matrix(sys.n_modes());
    const CMatrix E = sys.E.assembled();
    const CMatrix F = compute_F(sys) - I1 * J * (E.adjoint() * delta * E + K);
    const CMatrix X = testutil::lyapunov_by_eigenbasis(F, compute_D(sys.N));
    return ((cost.R + cost.rho * K * K) * X).trace().real();
}

CMatrix smallgain_block(const UncertainSystem& sys, const CostSpec& cost, double q, const CMatrix& Y,
                        double t) {
    const CMatrix F = compute_F(sys);
    const CMatrix J = commutation_matrix(sys.n_modes());
    const CMatrix E = sys.E.assembled();
    const Index n2 = F.rows(), m2 = E.rows();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(cost.R);
    const CMatrix Rh = es.operatorSqrt();
    const CMatrix A = q * F.adjoint() + F * q + I1 * Y * J - I1 * J * Y;
    const Index size = 3 * n2 + m2;
    CMatrix G = CMatrix::Zero(size, size);
    G.block(0, 0, n2, n2) = A + 4.0 * t * J * E.adjoint() * E * J;
    G.block(0, n2, n2, n2) = Y;
    G.block(n2, 0, n2, n2) = Y;
    G.block(n2, n2, n2, n2) = -CMatrix::Identity(n2, n2) / cost.rho;
    G.block(0, 2 * n2, n2, n2) = q * Rh;
    G.block(2 * n2, 0, n2, n2) = q * Rh;
    G.block(2 * n2, 2 * n2, n2, n2) = -CMatrix::Identity(n2, n2);
    G.block(0, 3 * n2, n2, m2) = q * E.adjoint();
    G.block(3 * n2, 0, m2, n2) = q * E;
    G.block(3 * n2, 3 * n2, m2, m2) = -sys.gamma * sys.gamma * t * CMatrix::Identity(m2, m2);
    return G;
}

}  // namespace

TEST_SUITE("synthesis") {

TEST_CASE("small-gain program shape") {
    const auto sys = dpa_fixture(4.5).system;
    const auto sp = assemble_smallgain_synthesis(sys, CostSpec::identity(1));
    CHECK(sp.program.num_vars == 6);
    CHECK(sp.layout.q == 0);
    CHECK(sp.layout.y_first == 1);
    CHECK(sp.layout.y_count == 3);
    CHECK(sp.layout.t == 4);
    CHECK(sp.layout.xi == 5);
    REQUIRE(sp.program.constraints.size() == 2);
    CHECK(sp.program.constraints[0].G.rows() == 8);
    CHECK(sp.program.constraints[0].strict);
    CHECK(sp.program.constraints[1].G.rows() == 3);
    CHECK_FALSE(sp.program.constraints[1].strict);

    SynthesisOptions fixed;
    fixed.fixed_controller = dpa_controller();
    const auto pinned = assemble_smallgain_synthesis(sys, CostSpec::identity(1), fixed);
    CHECK(pinned.program.num_vars == 3);
    CHECK(pinned.layout.y_count == 0);

    const auto popov = assemble_popov_synthesis(dpa_fixture(4.5, UncertaintyClass::PositiveBound).system,
                                                CostSpec::identity(1), 0.2);
    CHECK(popov.program.num_vars == 5);
    CHECK(popov.layout.t == -1);
    CHECK(popov.program.constraints[0].G.rows() == 8);
    CHECK(popov.program.constraints[1].G.rows() == 2);
}

TEST_CASE("small-gain bound follows the closed form") {
    for (double kappa : {4.5, 5.0, 6.0, 8.0, 10.0}) {
        CAPTURE(kappa);
        const auto out = synth_smallgain(dpa_fixture(kappa).system, CostSpec::identity(1));
        REQUIRE(out.feasible);
        CHECK(out.bound == doctest::Approx(smallgain_closed_form(kappa, 0.1)).epsilon(1e-4));
    }
}

TEST_CASE("small-gain design at kappa 4.5") {
    const auto sys = dpa_fixture(4.5).system;
    const CostSpec cost = CostSpec::identity(1);
    const auto out = synth_smallgain(sys, cost);
    REQUIRE(out.feasible);
    CHECK(max_abs(out.K.assembled() - dpa_controller().assembled()) < 1e-4);
    CHECK(max_abs(out.q * out.K.assembled() - out.Y.assembled()) < 1e-12);
    CHECK(out.closed_loop_abscissa <= -kHurwitzMargin);
    CHECK(testutil::lambda_max(smallgain_block(sys, cost, out.q, out.Y.assembled(), out.t)) < 0.0);
    // xi sits on Tr(D)/q + delta/t at the optimum.
    CHECK(out.bound == doctest::Approx(compute_D(sys.N).trace().real() / out.q).epsilon(1e-5));
}

TEST_CASE("small-gain infeasible at kappa 3.8, pinned controller feasible at 4.5") {
    CHECK_FALSE(synth_smallgain(dpa_fixture(3.8).system, CostSpec::identity(1)).feasible);
    SynthesisOptions fixed;
    fixed.fixed_controller = dpa_controller();
    const auto out = synth_smallgain(dpa_fixture(4.5).system, CostSpec::identity(1), fixed);
    REQUIRE(out.feasible);
    CHECK(out.bound == doctest::Approx(9.2252).epsilon(1e-4));
    CHECK(max_abs(out.K.assembled() - dpa_controller().assembled()) < 1e-12);
}

TEST_CASE("popov synthesis") {
    const auto cost = CostSpec::identity(1);
    const auto sys38 = dpa_fixture(3.8, UncertaintyClass::PositiveBound).system;
    const auto at0 = synth_popov_at(sys38, cost, 0.0);
    REQUIRE(at0.feasible);
    CHECK(at0.bound == doctest::Approx(2.18818).epsilon(1e-4));
    const auto single = synth_popov(sys38, cost, {0.0});
    CHECK(single.bound == doctest::Approx(at0.bound));
    const auto at1 = synth_popov_at(sys38, cost, 0.1);
    REQUIRE(at1.feasible);
    CHECK(at1.bound == doctest::Approx(at1.solver.x[at1.solver.x.size() - 1] + popov_offset(sys38, 0.1)));

    const auto grid = default_theta_grid();
    const auto curve = popov_synthesis_curve(sys38, cost, grid);
    REQUIRE(curve.size() == grid.size());
    const auto best = synth_popov(sys38, cost, grid);
    for (const auto& point : curve) {
        if (point.feasible) CHECK(best.bound <= point.bound);
    }
}

TEST_CASE("popov coupling block ignores Y at theta 0") {
    const auto sys = dpa_fixture(4.5, UncertaintyClass::PositiveBound).system;
    const auto sp = assemble_popov_synthesis(sys, CostSpec::identity(1), 0.0);
    const auto& G = sp.program.constraints[0].G;
    for (Index v = sp.layout.y_first; v < sp.layout.y_first + sp.layout.y_count; ++v) {
        CHECK(max_abs(G.coefficient(v).block(2, 0, 2, 2)) == 0.0);
    }
    const auto sp1 = assemble_popov_synthesis(sys, CostSpec::identity(1), 0.5);
    double coupled = 0.0;
    for (Index v = sp1.layout.y_first; v < sp1.layout.y_first + sp1.layout.y_count; ++v) {
        coupled = std::max(coupled, max_abs(sp1.program.constraints[0].G.coefficient(v).block(2, 0, 2, 2)));
    }
    CHECK(coupled > 0.0);
}

TEST_CASE("synthesis never loses to analysis") {
    const auto cost = CostSpec::identity(1);
    const CMatrix R = cost.R;
    for (double kappa : {6.0, 8.0}) {
        const auto sg = dpa_fixture(kappa).system;
        CHECK(synth_smallgain(sg, cost).bound <= analysis::analyze_smallgain(sg, R).bound + 1e-5);
        const auto pp = dpa_fixture(kappa, UncertaintyClass::PositiveBound).system;
        CHECK(synth_popov_at(pp, cost, 0.0).bound <= analysis::analyze_popov_at(pp, R, 0.0).bound + 1e-5);
    }
    // With K pinned to zero only the scalar Lyapunov variable remains, which is a
    // restriction of the analysis program: it can tie but never beat it.
    SynthesisOptions zero;
    zero.fixed_controller = DoubledMatrix::zero(1, 1);
    const auto pp = dpa_fixture(6.0, UncertaintyClass::PositiveBound).system;
    const auto pinned = synth_popov_at(pp, cost, 0.0, zero);
    REQUIRE(pinned.feasible);
    CHECK(pinned.bound >= analysis::analyze_popov_at(pp, R, 0.0).bound - 1e-6);
    CHECK(max_abs(pinned.Y.assembled()) == 0.0);
}

TEST_CASE("bounds hold on the example perturbation") {
    const auto cost = CostSpec::identity(1);
    for (double kappa : {4.5, 6.0, 8.0}) {
        CAPTURE(kappa);
        const auto sg = synth_smallgain(dpa_fixture(kappa).system, cost);
        REQUIRE(sg.feasible);
        CHECK(closed_loop_cost(dpa_fixture(kappa).system, dpa_delta().assembled(), sg.K.assembled(), cost) <=
              sg.bound);
        const auto pp_sys = dpa_fixture(kappa, UncertaintyClass::PositiveBound).system;
        const auto pp = synth_popov(pp_sys, cost, default_theta_grid());
        REQUIRE(pp.feasible);
        CHECK(closed_loop_cost(pp_sys, dpa_delta().assembled(), pp.K.assembled(), cost) <= pp.bound);
    }
}

TEST_CASE("input validation") {
    const auto sys = dpa_fixture(6.0).system;
    CHECK_THROWS_AS(synth_smallgain(sys, CostSpec{-CMatrix::Identity(2, 2), 0.1}), NonPositiveParameter);
    CHECK_THROWS_AS(synth_smallgain(sys, CostSpec{CMatrix::Identity(2, 2), 0.0}), NonPositiveParameter);
    CHECK_THROWS_AS(synth_popov_at(sys, CostSpec::identity(1), 0.0), ClassMismatch);
    CHECK_THROWS_AS(hermitian_sqrt(-CMatrix::Identity(2, 2)), NonPositiveParameter);
    const CMatrix R = testutil::mat2(2.0, I1, -I1, 3.0);
    const CMatrix h = hermitian_sqrt(R);
    CHECK(max_abs(h * h - R) < 1e-12);
    CHECK(max_abs(h - h.adjoint()) < 1e-14);
}

}  // TEST_SUITE
