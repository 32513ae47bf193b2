#include "qgcc/qmodel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace qgcc {

namespace {

std::string shape(const CMatrix& A) {
    std::ostringstream os;
    os << A.rows() << "x" << A.cols();
    return os.str();
}

}  // namespace

const char* to_string(UncertaintyClass cls) {
    return cls == UncertaintyClass::NormBound ? "norm_bound" : "positive_bound";
}

const char* to_string(Method method) {
    return method == Method::SmallGain ? "smallgain" : "popov";
}

UncertaintyClass required_class(Method method) {
    return method == Method::SmallGain ? UncertaintyClass::NormBound
                                       : UncertaintyClass::PositiveBound;
}

double max_abs(const CMatrix& A) {
    return A.size() == 0 ? 0.0 : A.cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// DoubledMatrix

DoubledMatrix DoubledMatrix::validate(const CMatrix& block1, const CMatrix& block2, MatrixKind kind,
                                      double tol) {
    if (block1.rows() != block2.rows() || block1.cols() != block2.cols()) {
        throw DimensionMismatch("doubled blocks differ in shape: " + shape(block1) + " vs " +
                                shape(block2));
    }
    if (kind == MatrixKind::Hermitian) {
        if (block1.rows() != block1.cols()) {
            throw DimensionMismatch("Hermitian doubled matrix needs square blocks, got " +
                                    shape(block1));
        }
        const double scale = std::max(1.0, std::max(max_abs(block1), max_abs(block2)));
        if (max_abs(block1 - block1.adjoint()) > tol * scale) {
            throw StructureViolation("block X1 is not Hermitian");
        }
        if (max_abs(block2 - block2.transpose()) > tol * scale) {
            throw StructureViolation("block X2 is not symmetric");
        }
    }
    return DoubledMatrix(block1, block2, kind);
}

DoubledMatrix DoubledMatrix::from_assembled(const CMatrix& full, MatrixKind kind, double tol) {
    if (full.rows() % 2 != 0 || full.cols() % 2 != 0) {
        throw DimensionMismatch("doubled matrix needs even dimensions, got " + shape(full));
    }
    const Index p = full.rows() / 2;
    const Index q = full.cols() / 2;
    const CMatrix x1 = full.topLeftCorner(p, q);
    const CMatrix x2 = full.topRightCorner(p, q);
    const double scale = std::max(1.0, max_abs(full));
    if (max_abs(full.bottomLeftCorner(p, q) - x2.conjugate()) > tol * scale ||
        max_abs(full.bottomRightCorner(p, q) - x1.conjugate()) > tol * scale) {
        throw StructureViolation("matrix does not have the doubled block pattern");
    }
    return validate(x1, x2, kind, tol);
}

DoubledMatrix DoubledMatrix::zero(Index rows, Index cols) {
    const MatrixKind kind = rows == cols ? MatrixKind::Hermitian : MatrixKind::General;
    return DoubledMatrix(CMatrix::Zero(rows, cols), CMatrix::Zero(rows, cols), kind);
}

DoubledMatrix DoubledMatrix::identity(Index n) {
    return DoubledMatrix(CMatrix::Identity(n, n), CMatrix::Zero(n, n), MatrixKind::Hermitian);
}

CMatrix DoubledMatrix::assembled() const {
    const Index p = block1_.rows();
    const Index q = block1_.cols();
    CMatrix full(2 * p, 2 * q);
    full << block1_, block2_, block2_.conjugate(), block1_.conjugate();
    return full;
}

DoubledMatrix DoubledMatrix::adjoint() const {
    return DoubledMatrix(block1_.adjoint(), block2_.transpose(), kind_);
}

DoubledMatrix operator+(const DoubledMatrix& a, const DoubledMatrix& b) {
    if (a.block1_.rows() != b.block1_.rows() || a.block1_.cols() != b.block1_.cols()) {
        throw DimensionMismatch("doubled sum: " + shape(a.block1_) + " + " + shape(b.block1_));
    }
    const MatrixKind kind = (a.kind_ == MatrixKind::Hermitian && b.kind_ == MatrixKind::Hermitian)
                                ? MatrixKind::Hermitian
                                : MatrixKind::General;
    return DoubledMatrix(a.block1_ + b.block1_, a.block2_ + b.block2_, kind);
}

DoubledMatrix operator-(const DoubledMatrix& a, const DoubledMatrix& b) {
    return a + (-1.0) * b;
}

DoubledMatrix operator*(const DoubledMatrix& a, const DoubledMatrix& b) {
    if (a.block1_.cols() != b.block1_.rows()) {
        throw DimensionMismatch("doubled product: " + shape(a.block1_) + " * " + shape(b.block1_));
    }
    // [[A1, A2], [A2#, A1#]] [[B1, B2], [B2#, B1#]] keeps the pattern blockwise.
    CMatrix c1 = a.block1_ * b.block1_ + a.block2_ * b.block2_.conjugate();
    CMatrix c2 = a.block1_ * b.block2_ + a.block2_ * b.block1_.conjugate();
    return DoubledMatrix(std::move(c1), std::move(c2), MatrixKind::General);
}

DoubledMatrix operator*(double s, const DoubledMatrix& a) {
    return DoubledMatrix(s * a.block1_, s * a.block2_, a.kind_);
}

// ---------------------------------------------------------------------------
// Coupling, system, cost

CMatrix CouplingOperator::doubled() const {
    const Index m = N1.rows();
    const Index n = N1.cols();
    CMatrix full(2 * m, 2 * n);
    full << N1, N2, N2.conjugate(), N1.conjugate();
    return full;
}

CMatrix CouplingOperator::tilde() const {
    CMatrix t(N1.rows(), 2 * N1.cols());
    t << N1, N2;
    return t;
}

void UncertainSystem::validate() const {
    const Index n = n_modes();
    if (n <= 0) {
        throw DimensionMismatch("system has no modes");
    }
    if (M.kind() != MatrixKind::Hermitian || M.block_cols() != n) {
        throw StructureViolation("M must be a square Hermitian doubled matrix");
    }
    if (N.N1.cols() != n || N.N2.cols() != n || N.N1.rows() != N.N2.rows()) {
        throw DimensionMismatch("coupling blocks must be m x " + std::to_string(n));
    }
    if (E.block_cols() != n || E.block_rows() <= 0) {
        throw DimensionMismatch("E must be 2m' x " + std::to_string(2 * n));
    }
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw NonPositiveParameter("gamma must be positive");
    }
    if (!(delta >= 0.0) || !std::isfinite(delta)) {
        throw NonPositiveParameter("delta must be non-negative");
    }
}

CostSpec CostSpec::identity(Index n, double rho) {
    return CostSpec{CMatrix::Identity(2 * n, 2 * n), rho};
}

void CostSpec::validate(Index n_modes) const {
    if (R.rows() != 2 * n_modes || R.cols() != 2 * n_modes) {
        throw DimensionMismatch("R must be " + std::to_string(2 * n_modes) + " square, got " +
                                shape(R));
    }
    if (max_abs(R - R.adjoint()) > kStructureTolerance * std::max(1.0, max_abs(R))) {
        throw NotHermitian("R is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(R, Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues().minCoeff() > 0.0)) {
        throw NonPositiveParameter("R must be positive definite");
    }
    if (!(rho > 0.0) || !std::isfinite(rho)) {
        throw NonPositiveParameter("rho must be positive");
    }
}

// ---------------------------------------------------------------------------
// Constants and derived matrices

CMatrix commutation_matrix(Index n) {
    CMatrix J = CMatrix::Zero(2 * n, 2 * n);
    J.topLeftCorner(n, n).setIdentity();
    J.bottomRightCorner(n, n) = -CMatrix::Identity(n, n);
    return J;
}

CMatrix swap_matrix(Index n) {
    CMatrix S = CMatrix::Zero(2 * n, 2 * n);
    S.topRightCorner(n, n).setIdentity();
    S.bottomLeftCorner(n, n).setIdentity();
    return S;
}

double spectral_abscissa(const CMatrix& A) {
    Eigen::ComplexEigenSolver<CMatrix> es(A, false);
    if (es.info() != Eigen::Success) {
        throw NumericalFailure("eigenvalue computation did not converge");
    }
    return es.eigenvalues().real().maxCoeff();
}

bool is_hurwitz(const CMatrix& A, double margin) {
    return spectral_abscissa(A) <= -margin;
}

CMatrix compute_F(const DoubledMatrix& M, const CouplingOperator& N) {
    const Index n = M.block_rows();
    if (M.block_cols() != n || N.N1.cols() != n || N.N2.cols() != n) {
        throw DimensionMismatch("compute_F: M is " + shape(M.assembled()) + ", N1 is " +
                                shape(N.N1));
    }
    const CMatrix J = commutation_matrix(n);
    const CMatrix Nd = N.doubled();
    const CMatrix Jm = commutation_matrix(N.N1.rows());
    const Complex i(0.0, 1.0);
    return -i * J * M.assembled() - 0.5 * J * Nd.adjoint() * Jm * Nd;
}

CMatrix compute_F(const UncertainSystem& sys) {
    return compute_F(sys.M, sys.N);
}

CMatrix compute_D(const CouplingOperator& N) {
    const Index m = N.N1.rows();
    const Index n = N.N1.cols();
    const CMatrix J = commutation_matrix(n);
    const CMatrix Nd = N.doubled();
    CMatrix upper = CMatrix::Zero(2 * m, 2 * m);
    upper.topLeftCorner(m, m).setIdentity();
    CMatrix D = J * Nd.adjoint() * upper * Nd * J;
    return 0.5 * (D + D.adjoint());
}

CMatrix commutator_zL(const DoubledMatrix& E, const CouplingOperator& N) {
    const Index n = E.block_cols();
    if (N.N1.cols() != n) {
        throw DimensionMismatch("commutator_zL: E acts on " + std::to_string(2 * n) +
                                " but N1 is " + shape(N.N1));
    }
    return E.assembled() * commutation_matrix(n) * swap_matrix(n) * N.tilde().transpose();
}

double popov_offset(const UncertainSystem& sys, double theta) {
    if (theta < 0.0) {
        throw NonPositiveParameter("theta must be non-negative");
    }
    const CMatrix zl = commutator_zL(sys.E, sys.N);
    // N~# Sigma J E^dag E J Sigma N~^T = [z,L]^dag [z,L]
    const double c = (zl.adjoint() * zl).trace().real();
    return 4.0 * theta / sys.gamma * c;
}

bool delta_membership(const DoubledMatrix& delta, UncertaintyClass cls, double gamma) {
    const CMatrix D = delta.assembled();
    if (D.rows() != D.cols()) {
        return false;
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (D + D.adjoint()), Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    if (cls == UncertaintyClass::NormBound) {
        const double norm = std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
        return norm <= 2.0 / gamma + 1e-12;
    }
    return ev.minCoeff() >= -1e-12 && ev.maxCoeff() <= 4.0 / gamma + 1e-12;
}

std::vector<CMatrix> doubled_hermitian_basis(Index n) {
    const Complex i(0.0, 1.0);
    std::vector<CMatrix> basis;
    auto push = [&](const CMatrix& b1, const CMatrix& b2) {
        CMatrix full(2 * n, 2 * n);
        full << b1, b2, b2.conjugate(), b1.conjugate();
        basis.push_back(std::move(full));
    };
    const CMatrix zero = CMatrix::Zero(n, n);
    // X1: diagonal reals, then real and imaginary parts above the diagonal.
    for (Index a = 0; a < n; ++a) {
        CMatrix b = zero;
        b(a, a) = 1.0;
        push(b, zero);
    }
    for (Index a = 0; a < n; ++a) {
        for (Index c = a + 1; c < n; ++c) {
            CMatrix re = zero, im = zero;
            re(a, c) = re(c, a) = 1.0;
            im(a, c) = i;
            im(c, a) = -i;
            push(re, zero);
            push(im, zero);
        }
    }
    // X2: symmetric, real and imaginary parts on and above the diagonal.
    for (Index a = 0; a < n; ++a) {
        for (Index c = a; c < n; ++c) {
            CMatrix re = zero, im = zero;
            re(a, c) = re(c, a) = 1.0;
            im(a, c) = im(c, a) = i;
            push(zero, re);
            push(zero, im);
        }
    }
    return basis;
}

std::vector<double> doubled_hermitian_coordinates(const DoubledMatrix& X) {
    if (X.kind() != MatrixKind::Hermitian) {
        throw StructureViolation("coordinates need a Hermitian doubled matrix");
    }
    const Index n = X.block_rows();
    const CMatrix& x1 = X.block1();
    const CMatrix& x2 = X.block2();
    std::vector<double> coords;
    for (Index a = 0; a < n; ++a) coords.push_back(x1(a, a).real());
    for (Index a = 0; a < n; ++a) {
        for (Index c = a + 1; c < n; ++c) {
            coords.push_back(x1(a, c).real());
            coords.push_back(x1(a, c).imag());
        }
    }
    for (Index a = 0; a < n; ++a) {
        for (Index c = a; c < n; ++c) {
            coords.push_back(x2(a, c).real());
            coords.push_back(x2(a, c).imag());
        }
    }
    return coords;
}

// ---------------------------------------------------------------------------
// Example fixture

DoubledMatrix dpa_delta() {
    CMatrix d1(1, 1), d2(1, 1);
    d1 << 1.0;
    d2 << Complex(0.0, 0.5);
    return DoubledMatrix::validate(d1, d2, MatrixKind::Hermitian);
}

DoubledMatrix dpa_controller() {
    CMatrix k1(1, 1), k2(1, 1);
    k1 << 0.0;
    k2 << Complex(0.0, -0.5);
    return DoubledMatrix::validate(k1, k2, MatrixKind::Hermitian);
}

DpaFixture dpa_fixture(double kappa, UncertaintyClass cls) {
    // kappa = 0 is a closed cavity: valid input, rejected later as not Hurwitz.
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
        throw NonPositiveParameter("kappa must be non-negative");
    }
    CMatrix m1(1, 1), m2(1, 1);
    m1 << -1.0;
    m2 << Complex(0.0, 0.5);

    UncertainSystem sys;
    sys.M = DoubledMatrix::validate(m1, m2, MatrixKind::Hermitian);
    sys.N.N1 = CMatrix::Constant(1, 1, std::sqrt(kappa));
    sys.N.N2 = CMatrix::Zero(1, 1);
    sys.E = DoubledMatrix::identity(1);
    sys.gamma = cls == UncertaintyClass::NormBound ? 1.0 : 2.0;
    sys.delta = 0.0;
    sys.uncertainty_class = cls;
    sys.validate();
    return DpaFixture{sys, dpa_delta(), dpa_controller()};
}

}  // namespace qgcc
