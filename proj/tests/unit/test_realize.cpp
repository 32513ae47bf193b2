#include <doctest.h>

#include <algorithm>

#include "qgcc/oracle.hpp"
#include "qgcc/realize.hpp"
#include "test_helpers.hpp"

using namespace qgcc;
using namespace qgcc::realize;
using testutil::mat2;

namespace {

const Complex I1(0.0, 1.0);

DoubledMatrix controller(double k1, Complex k2) {
    return DoubledMatrix::validate(CMatrix::Constant(1, 1, k1), CMatrix::Constant(1, 1, k2),
                                   MatrixKind::Hermitian);
}

CMatrix target_term(const DoubledMatrix& K) { return -I1 * commutation_matrix(1) * K.assembled(); }

// Root search over u = sinh r using only cosh^2 - sinh^2 = 1: for a trial u the
// off-diagonal entry fixes the scale c = -|w|/u, the diagonal entries then fix
// cosh r (cos alpha, sin alpha), and the residual is how far that cosh r is from sqrt(1 + u^2).
std::vector<SqueezerRealization> bracketed_realizations(const DoubledMatrix& K, double kt) {
    const CouplingTarget tgt = coupling_target(K);
    const double aw = std::abs(tgt.w);
    auto residual = [&](double u) {
        const double c = -aw / u;
        const double x = 1.0 - kt / (2.0 * c);
        const double y = -tgt.p / c;
        return std::hypot(x, y) - std::sqrt(1.0 + u * u);
    };
    std::vector<SqueezerRealization> found;
    const int cells = 10000;
    auto at = [&](int i) { return -10.0 + 20.0 * (i + 0.5) / cells; };  // skips u = 0
    for (int i = 0; i + 1 < cells; ++i) {
        double lo = at(i), hi = at(i + 1);
        if (lo < 0.0 && hi > 0.0) continue;
        double flo = residual(lo);
        if ((flo > 0.0) == (residual(hi) > 0.0)) continue;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = residual(mid);
            if ((fm > 0.0) == (flo > 0.0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        const double u = 0.5 * (lo + hi);
        const double c = -aw / u;
        SqueezerRealization s;
        s.r = std::asinh(u);
        s.alpha = std::atan2(-tgt.p / c, 1.0 - kt / (2.0 * c));
        s.beta = aw > 0.0 ? std::arg(-tgt.w / (c * u)) : 0.0;
        s.kappa_tilde = kt;
        s.B = bogoliubov_B(s.r, s.alpha, s.beta);
        found.push_back(s);
    }
    return found;
}

}  // namespace

TEST_SUITE("realize") {

TEST_CASE("reference squeezer for the amplifier controller") {
    const auto s = solve_squeezer(dpa_controller(), 1.0 / 3.0);
    CHECK(std::sinh(s.r) == doctest::Approx(-0.75).epsilon(1e-12));
    CHECK(s.alpha == 0.0);
    CHECK(s.beta == 0.0);
    CHECK(max_abs(s.B - mat2(1.25, -0.75, -0.75, 1.25)) < 1e-12);
    CHECK(bogoliubov_defect(s.B) < 1e-12);
    CHECK(max_abs(realized_coupling_term(s) - mat2(0.0, -0.5, -0.5, 0.0)) < 1e-12);
    CHECK(max_abs(realized_coupling_term(s) - target_term(dpa_controller())) < 1e-12);
}

TEST_CASE("Bogoliubov matrices") {
    CHECK(max_abs(bogoliubov_B(0.0, 0.0, 0.0) - CMatrix::Identity(2, 2)) == 0.0);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> r(-3.0, 3.0), angle(-M_PI, M_PI);
    for (int i = 0; i < 1000; ++i) {
        const CMatrix B = bogoliubov_B(r(rng), angle(rng), angle(rng));
        const CMatrix J = commutation_matrix(1);
        REQUIRE(max_abs(B.adjoint() * J * B - J) <= 1e-10 * std::max(1.0, max_abs(B) * max_abs(B)));
    }
    CHECK(bogoliubov_defect(2.0 * CMatrix::Identity(2, 2)) == doctest::Approx(3.0));
}

TEST_CASE("closed form agrees with the bracketed search") {
    std::mt19937_64 rng(29);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> kt_dist(0.05, 4.0);
    int compared = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const auto K = controller(normal(rng), Complex(normal(rng), normal(rng)));
        const double kt = kt_dist(rng);
        SqueezerRealization closed;
        try {
            closed = solve_squeezer(K, kt);
        } catch (const Unrealizable&) {
            continue;
        }
        CHECK(max_abs(realized_coupling_term(closed) - target_term(K)) < 1e-9);
        CHECK(bogoliubov_defect(closed.B) < 1e-9 * std::max(1.0, std::cosh(2.0 * closed.r)));
        CHECK(std::sinh(closed.r) <= 0.0);
        const auto roots = bracketed_realizations(K, kt);
        if (std::abs(std::sinh(closed.r)) > 9.9) continue;  // outside the bracket
        bool matched = false;
        for (const auto& s : roots) {
            if (std::abs(std::abs(std::sinh(s.r)) - std::abs(std::sinh(closed.r))) < 1e-8 &&
                max_abs(realized_coupling_term(s) - realized_coupling_term(closed)) < 1e-7) {
                matched = true;
            }
        }
        CHECK(matched);
        for (const auto& s : roots) CHECK(max_abs(realized_coupling_term(s) - target_term(K)) < 1e-7);
        ++compared;
    }
    CHECK(compared > 30);
}

TEST_CASE("closed loop with the squeezer") {
    const auto s = solve_squeezer(dpa_controller(), 1.0 / 3.0);
    const CMatrix A = closed_loop_qsde(4.5, s);
    Eigen::ComplexEigenSolver<CMatrix> es(A);
    std::vector<double> eig{es.eigenvalues()[0].real(), es.eigenvalues()[1].real()};
    std::sort(eig.begin(), eig.end());
    CHECK(eig[0] == doctest::Approx(-2.75));
    CHECK(eig[1] == doctest::Approx(-1.75));
    for (double kappa : {4.5, 6.0, 8.0}) {
        const auto fx = dpa_fixture(kappa);
        const CMatrix F = oracle::closed_loop_drift(fx.system, fx.delta, fx.controller);
        CHECK(max_abs(closed_loop_qsde(kappa, s) - F) < 1e-12);
    }
    const auto kts = kappa_tilde_for_squeeze(dpa_controller(), s.r);
    REQUIRE(kts.size() == 2);
    CHECK(kts[0] == doctest::Approx(1.0 / 3.0));
    CHECK(kts[1] == doctest::Approx(3.0));
    for (double kt : kts) {
        CHECK(std::sinh(solve_squeezer(dpa_controller(), kt).r) == doctest::Approx(-0.75));
    }
}

TEST_CASE("edge cases") {
    CHECK_THROWS_AS(solve_squeezer(DoubledMatrix::zero(1, 1), 1.0), NoControllerNeeded);
    CHECK_THROWS_AS(solve_squeezer(dpa_controller(), 0.0), NonPositiveParameter);
    CHECK_THROWS_AS(solve_squeezer(dpa_controller(), -1.0), NonPositiveParameter);
    // c = 0 when kappa_tilde = 2 sqrt(|w|^2 - p^2) = 1 for the reference controller.
    CHECK_THROWS_AS(solve_squeezer(dpa_controller(), 1.0), Unrealizable);
    CHECK_THROWS_AS(coupling_target(DoubledMatrix::identity(2)), Unsupported);
    CHECK_THROWS_AS(solve_squeezer(DoubledMatrix::identity(2), 1.0), Unsupported);
    // A purely diagonal controller needs no squeezing.
    const auto s = solve_squeezer(controller(0.7, 0.0), 0.5);
    CHECK(s.r == 0.0);
    CHECK(max_abs(realized_coupling_term(s) - target_term(controller(0.7, 0.0))) < 1e-12);
    SqueezerRealization identity;
    identity.B = bogoliubov_B(0.0, 0.0, 0.0);
    identity.kappa_tilde = 1.0;
    CHECK_THROWS_AS(realized_coupling_term(identity), SingularSqueezer);
}

}  // TEST_SUITE
