#include "qgcc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace qgcc::oracle {

namespace {

// Doubled matrix with complex standard normal blocks; Hermitian kind gets X1
// Hermitian and X2 symmetric.
DoubledMatrix random_structured(Index m, MatrixKind kind, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    auto draw = [&] {
        CMatrix X(m, m);
        for (Index c = 0; c < m; ++c) {
            for (Index r = 0; r < m; ++r) {
                const double re = normal(rng);
                const double im = normal(rng);
                X(r, c) = Complex(re, im);
            }
        }
        return X;
    };
    CMatrix x1 = draw();
    CMatrix x2 = draw();
    if (kind == MatrixKind::Hermitian) {
        x1 = 0.5 * (x1 + x1.adjoint()).eval();
        x2 = 0.5 * (x2 + x2.transpose()).eval();
    }
    return DoubledMatrix::validate(x1, x2, kind);
}

}  // namespace

CMatrix closed_loop_drift(const UncertainSystem& sys, const DoubledMatrix& delta,
                          const DoubledMatrix& K) {
    const Index n = sys.n_modes();
    if (delta.block_rows() != sys.perturbation_dim() || delta.block_cols() != sys.perturbation_dim()) {
        throw DimensionMismatch("Delta must be " + std::to_string(2 * sys.perturbation_dim()) +
                                " square");
    }
    if (K.block_rows() != n || K.block_cols() != n) {
        throw DimensionMismatch("K must be " + std::to_string(2 * n) + " square");
    }
    const CMatrix E = sys.E.assembled();
    const CMatrix H = sys.M.assembled() + E.adjoint() * delta.assembled() * E + K.assembled();
    const CMatrix J = commutation_matrix(n);
    const CMatrix N = sys.N.doubled();
    return Complex(0.0, -1.0) * J * H - 0.5 * J * N.adjoint() * J * N;
}

ClosedLoop make_closed_loop(const UncertainSystem& sys, const DoubledMatrix& delta,
                            const std::optional<DoubledMatrix>& K, const CostSpec& cost) {
    const Index n = sys.n_modes();
    const DoubledMatrix controller = K ? *K : DoubledMatrix::zero(n, n);
    ClosedLoop cl;
    cl.F_cl = closed_loop_drift(sys, delta, controller);
    cl.D = compute_D(sys.N);
    cl.R_cost = cost.R;
    if (K) {
        const CMatrix k = K->assembled();
        cl.R_cost += cost.rho * k * k;
    }
    return cl;
}

CMatrix steady_covariance(const CMatrix& F, const CMatrix& D) {
    const Index d = F.rows();
    if (F.cols() != d || D.rows() != d || D.cols() != d) {
        throw DimensionMismatch("Lyapunov operands must be square and of equal size");
    }
    const double abscissa = spectral_abscissa(F);
    if (!(abscissa < 0.0)) {
        std::ostringstream os;
        os << "closed loop not Hurwitz (spectral abscissa " << abscissa << ")";
        throw NotHurwitz(os.str());
    }
    // Column-major vec: vec(F S + S F^dag) = (I (x) F + conj(F) (x) I) vec(S).
    const CMatrix I = CMatrix::Identity(d, d);
    CMatrix L = CMatrix::Zero(d * d, d * d);
    for (Index a = 0; a < d; ++a) {
        for (Index b = 0; b < d; ++b) {
            L.block(a * d, b * d, d, d) += I(a, b) * F;
            L.block(a * d, b * d, d, d) += std::conj(F(a, b)) * I;
        }
    }
    const Eigen::Map<const Eigen::VectorXcd> rhs(D.data(), d * d);
    const Eigen::VectorXcd vec_sigma = L.fullPivLu().solve(-rhs);
    CMatrix sigma = Eigen::Map<const CMatrix>(vec_sigma.data(), d, d);
    sigma = 0.5 * (sigma + sigma.adjoint()).eval();

    const double residual = max_abs(F * sigma + sigma * F.adjoint() + D);
    if (!(residual <= 1e-8 * std::max(1.0, max_abs(D)))) {
        std::ostringstream os;
        os << "Lyapunov residual " << residual << " too large";
        throw IllConditioned(os.str());
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(sigma, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8) {
        throw NumericalFailure("steady-state covariance is not positive semidefinite");
    }
    return sigma;
}

double lyapunov_cost(const ClosedLoop& cl) {
    const CMatrix sigma = steady_covariance(cl.F_cl, cl.D);
    const Complex cost = (cl.R_cost * sigma).trace();
    if (std::abs(cost.imag()) > 1e-10 * std::max(1.0, std::abs(cost.real()))) {
        throw NumericalFailure("cost has an imaginary part; R_cost is not Hermitian");
    }
    return cost.real();
}

DoubledMatrix sample_delta(UncertaintyClass cls, double gamma, Index m_prime, std::mt19937_64& rng) {
    if (!(gamma > 0.0)) {
        throw NonPositiveParameter("gamma must be positive");
    }
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    if (cls == UncertaintyClass::NormBound) {
        const DoubledMatrix raw = random_structured(m_prime, MatrixKind::Hermitian, rng);
        const double u = uniform(rng);
        Eigen::SelfAdjointEigenSolver<CMatrix> es(raw.assembled(), Eigen::EigenvaluesOnly);
        const double norm = es.eigenvalues().cwiseAbs().maxCoeff();
        if (norm == 0.0) return DoubledMatrix::zero(m_prime, m_prime);
        return (u * (2.0 / gamma) / norm) * raw;
    }
    const DoubledMatrix G = random_structured(m_prime, MatrixKind::General, rng);
    const double u = uniform(rng);
    const CMatrix gram = G.adjoint().assembled() * G.assembled();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (gram + gram.adjoint()), Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues().maxCoeff();
    if (top == 0.0) return DoubledMatrix::zero(m_prime, m_prime);
    // G^dag G is doubled; re-validated as Hermitian after scaling.
    const DoubledMatrix delta = DoubledMatrix::from_assembled(
        (u * (4.0 / gamma) / top) * 0.5 * (gram + gram.adjoint()), MatrixKind::Hermitian);
    return delta;
}

DoubledMatrix sample_delta(UncertaintyClass cls, double gamma, Index m_prime, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sample_delta(cls, gamma, m_prime, rng);
}

VerificationReport verify_bound(const UncertainSystem& sys, const std::optional<DoubledMatrix>& K,
                                const CostSpec& cost, double bound, int num_samples,
                                std::uint64_t seed) {
    sys.validate();
    if (num_samples < 0) {
        throw NonPositiveParameter("sample count must be non-negative");
    }
    const Index mp = sys.perturbation_dim();
    VerificationReport report;
    report.seed = seed;
    report.worst_margin = -std::numeric_limits<double>::infinity();

    auto evaluate = [&](const DoubledMatrix& delta) {
        ++report.samples;
        const ClosedLoop cl = make_closed_loop(sys, delta, K, cost);
        double value = 0.0;
        try {
            value = lyapunov_cost(cl);
        } catch (const Error&) {
            // Unstable or too close to the imaginary axis to evaluate reliably.
            ++report.unstable_samples;
            return;
        }
        report.worst_cost = std::max(report.worst_cost, value);
        report.worst_margin = std::max(report.worst_margin, value - bound);
        if (value > bound + kViolationSlack) ++report.violations;
    };

    const DoubledMatrix anchor = dpa_delta();
    if (anchor.block_rows() == mp &&
        delta_membership(anchor, sys.uncertainty_class, sys.gamma)) {
        evaluate(anchor);
    }
    evaluate(DoubledMatrix::zero(mp, mp));
    std::mt19937_64 rng(seed);
    for (int i = 0; i < num_samples; ++i) {
        evaluate(sample_delta(sys.uncertainty_class, sys.gamma, mp, rng));
    }
    return report;
}

}  // namespace qgcc::oracle
