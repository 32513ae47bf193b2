#include <doctest.h>

#include "qgcc/analysis.hpp"
#include "qgcc/grid.hpp"
#include "test_helpers.hpp"
#include "test_helpers_oracle.hpp"

using namespace qgcc;
using namespace qgcc::analysis;
using testutil::mat2;

namespace {

const CMatrix kR = CMatrix::Identity(2, 2);

// The small-gain block matrix rebuilt by hand from (P, s).
CMatrix smallgain_block(const UncertainSystem& sys, const CMatrix& P, double s) {
    const CMatrix F = compute_F(sys);
    const CMatrix E = sys.E.assembled();
    const CMatrix J = commutation_matrix(sys.n_modes());
    const Index n2 = F.rows(), m2 = E.rows();
    CMatrix G(n2 + m2, n2 + m2);
    G.topLeftCorner(n2, n2) = F.adjoint() * P + P * F + (s / (sys.gamma * sys.gamma)) * E.adjoint() * E + kR;
    G.topRightCorner(n2, m2) = 2.0 * P * J * E.adjoint();
    G.bottomLeftCorner(m2, n2) = 2.0 * E * J * P;
    G.bottomRightCorner(m2, m2) = -s * CMatrix::Identity(m2, m2);
    return G;
}

CMatrix popov_block(const UncertainSystem& sys, const CMatrix& P, double theta) {
    const Complex i(0.0, 1.0);
    const CMatrix F = compute_F(sys);
    const CMatrix E = sys.E.assembled();
    const CMatrix J = commutation_matrix(sys.n_modes());
    const Index n2 = F.rows(), m2 = E.rows();
    const CMatrix lower = 2.0 * i * E * J * P + E + theta * E * F;
    CMatrix G(n2 + m2, n2 + m2);
    G.topLeftCorner(n2, n2) = P * F + F.adjoint() * P + kR;
    G.topRightCorner(n2, m2) = lower.adjoint();
    G.bottomLeftCorner(m2, n2) = lower;
    G.bottomRightCorner(m2, m2) = -sys.gamma * CMatrix::Identity(m2, m2);
    return G;
}

UncertainSystem without_perturbation(double kappa) {
    auto sys = dpa_fixture(kappa).system;
    sys.E = DoubledMatrix::zero(1, 1);
    return sys;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("small-gain program shape") {
    const auto sys = dpa_fixture(6.0).system;
    const auto p = assemble_smallgain_analysis(sys, kR);
    CHECK(p.num_vars == 4);  // three reals for P, one for s
    REQUIRE(p.constraints.size() == 2);
    CHECK(p.constraints[0].G.rows() == 4);
    CHECK(p.constraints[1].G.rows() == 2);
    CHECK(p.var_bounds[3].lower == lmi::kDefaultMargin);
    // Objective is Tr(P D): D = diag(kappa, 0) picks the first diagonal coordinate only.
    CHECK(p.objective[0] == doctest::Approx(6.0));
    CHECK(p.objective[3] == 0.0);

    const auto p0 = assemble_smallgain_analysis(without_perturbation(6.0), kR);
    const lmi::Vector x = lmi::Vector::Constant(4, 0.3);
    // E = 0 leaves the off-diagonal blocks constant at zero.
    CHECK(max_abs(p0.constraints[0].G.evaluate(x).topRightCorner(2, 2)) == 0.0);
}

TEST_CASE("rejections") {
    CHECK_THROWS_AS(analyze_smallgain(dpa_fixture(0.0).system, kR), NotHurwitz);
    const auto popov_sys = dpa_fixture(6.0, UncertaintyClass::PositiveBound).system;
    CHECK_THROWS_AS(analyze_smallgain(popov_sys, kR), ClassMismatch);
    CHECK_THROWS_AS(analyze_popov_at(dpa_fixture(6.0).system, kR, 0.0), ClassMismatch);
    CHECK_THROWS(analyze_popov_at(popov_sys, kR, -0.5));
    CHECK_THROWS_AS(analyze_smallgain(dpa_fixture(6.0).system, mat2(1.0, 2.0, 3.0, 1.0)), Error);
}

TEST_CASE("unperturbed bound equals the Lyapunov cost") {
    // With E = 0 the program is min Tr(PD) s.t. F^dag P + P F + R <= 0, whose value
    // is Tr(R X) for the controllability Gramian X.
    for (double kappa : {4.5, 6.0, 8.0}) {
        const auto sys = without_perturbation(kappa);
        const auto out = analyze_smallgain(sys, kR);
        REQUIRE(out.feasible);
        const CMatrix X = testutil::lyapunov_by_eigenbasis(compute_F(sys), compute_D(sys.N));
        CHECK(out.bound == doctest::Approx(X.trace().real()).epsilon(1e-4));
    }
}

TEST_CASE("small-gain certificate") {
    const auto sys = dpa_fixture(6.0).system;
    const auto out = analyze_smallgain(sys, kR);
    REQUIRE(out.feasible);
    CHECK(out.bound == doctest::Approx(3.87185).epsilon(1e-5));
    const CMatrix P = out.P.assembled();
    CHECK(testutil::lambda_min(P) > 0.0);
    CHECK(testutil::lambda_max(smallgain_block(sys, P, out.s_or_theta)) < 0.0);
    CHECK((P * compute_D(sys.N)).trace().real() == doctest::Approx(out.bound));
    CHECK(lmi::certify(assemble_smallgain_analysis(sys, kR), out.solver.x).certified);
}

TEST_CASE("small-gain infeasible below the threshold") {
    for (double kappa : {3.8, 4.5}) {
        const auto out = analyze_smallgain(dpa_fixture(kappa).system, kR);
        CHECK_FALSE(out.feasible);
        CHECK(std::isinf(out.bound));
    }
}

TEST_CASE("a norm-bounded perturbation destabilizes the open loop at kappa 4.5") {
    // ||Delta|| = 2 = 2/gamma, so it is admissible, and it pushes an eigenvalue of the
    // perturbed drift into the right half plane. No finite small-gain bound can exist.
    const auto sys = dpa_fixture(4.5).system;
    const auto witness = DoubledMatrix::validate(CMatrix::Zero(1, 1),
                                                 CMatrix::Constant(1, 1, Complex(0.0, 2.0)),
                                                 MatrixKind::Hermitian);
    CHECK(delta_membership(witness, UncertaintyClass::NormBound, sys.gamma));
    const Complex i(0.0, 1.0);
    const CMatrix J = commutation_matrix(1);
    const CMatrix Fp = compute_F(sys) - i * J * witness.assembled();
    CHECK(spectral_abscissa(Fp) > 0.0);
}

TEST_CASE("monotone in delta and gamma") {
    auto sys = dpa_fixture(6.0).system;
    double previous = 0.0;
    for (double delta : {0.0, 0.1, 0.5, 1.0}) {
        sys.delta = delta;
        const auto out = analyze_smallgain(sys, kR);
        REQUIRE(out.feasible);
        CHECK(out.bound >= previous - 1e-6);
        previous = out.bound;
    }
    sys.delta = 0.0;
    previous = std::numeric_limits<double>::infinity();
    for (double gamma : {1.0, 2.0, 4.0}) {
        sys.gamma = gamma;
        const auto out = analyze_smallgain(sys, kR);
        REQUIRE(out.feasible);
        CHECK(out.bound <= previous + 1e-6);
        previous = out.bound;
    }
}

TEST_CASE("popov analysis") {
    const auto sys = dpa_fixture(4.5, UncertaintyClass::PositiveBound).system;
    const auto at0 = analyze_popov_at(sys, kR, 0.0);
    REQUIRE(at0.feasible);
    CHECK(at0.bound == doctest::Approx(2.37826).epsilon(1e-5));
    CHECK(testutil::lambda_max(popov_block(sys, at0.P.assembled(), 0.0)) < 0.0);

    const auto p = assemble_popov_analysis(sys, kR, 0.3);
    CHECK(p.num_vars == 3);
    const auto at3 = analyze_popov_at(sys, kR, 0.3);
    if (at3.feasible) {
        CHECK(testutil::lambda_max(popov_block(sys, at3.P.assembled(), 0.3)) < 0.0);
        CHECK(at3.bound == doctest::Approx((at3.P.assembled() * compute_D(sys.N)).trace().real() +
                                           popov_offset(sys, 0.3)));
    }

    const auto single = analyze_popov(sys, kR, {0.0});
    CHECK(single.bound == doctest::Approx(at0.bound));
    const auto grid = default_theta_grid();
    const auto curve = popov_analysis_curve(sys, kR, grid);
    REQUIRE(curve.size() == grid.size());
    const auto best = analyze_popov(sys, kR, grid);
    for (const auto& point : curve) {
        if (point.feasible) CHECK(best.bound <= point.bound);
    }
    CHECK_FALSE(analyze_popov(dpa_fixture(3.8, UncertaintyClass::PositiveBound).system, kR, grid).feasible);
}

TEST_CASE("popov bound covers the example perturbation") {
    // Nominal plus E^dag Delta E equals the full amplifier, so the bound must exceed its cost.
    for (double kappa : {4.5, 6.0}) {
        const auto sys = dpa_fixture(kappa, UncertaintyClass::PositiveBound).system;
        const auto out = analyze_popov(sys, kR, default_theta_grid());
        REQUIRE(out.feasible);
        const Complex i(0.0, 1.0);
        const CMatrix Fp = compute_F(sys) - i * commutation_matrix(1) * dpa_delta().assembled();
        const CMatrix X = testutil::lyapunov_by_eigenbasis(Fp, compute_D(sys.N));
        CHECK(X.trace().real() <= out.bound);
    }
}

}  // TEST_SUITE
