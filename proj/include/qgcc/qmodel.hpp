#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "qgcc/errors.hpp"

namespace qgcc {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Tolerance for Hermitian / symmetric block checks. Fixture data is exact, so
/// this only has to absorb round-off.
inline constexpr double kStructureTolerance = 1e-10;

enum class MatrixKind { Hermitian, General };

/// W3 (norm bounded, small gain path) or W4 (positive bounded, Popov path).
enum class UncertaintyClass { NormBound, PositiveBound };

const char* to_string(UncertaintyClass cls);

/// Robustness method: small gain pairs with NormBound, Popov with PositiveBound.
enum class Method { SmallGain, Popov };

const char* to_string(Method method);
UncertaintyClass required_class(Method method);

/**
 * A complex matrix in doubled form
 *
 *     [ X1   X2  ]
 *     [ X2#  X1# ]
 *
 * acting on the stacked vector [a; a#]. Carries the Hamiltonian matrices M and K,
 * the Lyapunov matrix P, the perturbation Delta and the output/coupling matrices E, N.
 *
 * Hamiltonian matrices are stored without the 1/2 prefactor of the quadratic form
 * H = 1/2 [a^dag a^T] M [a; a#]. Every formula consumes M and K exactly as stored.
 */
class DoubledMatrix {
public:
    DoubledMatrix() = default;

    /// Checks the block shapes and, for Hermitian kind, X1 = X1^dag and X2 = X2^T.
    /// Throws StructureViolation / DimensionMismatch.
    static DoubledMatrix validate(const CMatrix& block1, const CMatrix& block2, MatrixKind kind,
                                  double tol = kStructureTolerance);

    /// Splits an assembled 2p x 2q matrix and checks that the lower blocks are the
    /// conjugates of the upper ones.
    static DoubledMatrix from_assembled(const CMatrix& full, MatrixKind kind,
                                        double tol = kStructureTolerance);

    static DoubledMatrix zero(Index rows, Index cols);
    static DoubledMatrix identity(Index n);

    const CMatrix& block1() const { return block1_; }
    const CMatrix& block2() const { return block2_; }
    MatrixKind kind() const { return kind_; }

    Index block_rows() const { return block1_.rows(); }
    Index block_cols() const { return block1_.cols(); }
    Index rows() const { return 2 * block1_.rows(); }
    Index cols() const { return 2 * block1_.cols(); }

    CMatrix assembled() const;
    DoubledMatrix adjoint() const;

    friend DoubledMatrix operator+(const DoubledMatrix& a, const DoubledMatrix& b);
    friend DoubledMatrix operator-(const DoubledMatrix& a, const DoubledMatrix& b);
    friend DoubledMatrix operator*(const DoubledMatrix& a, const DoubledMatrix& b);
    friend DoubledMatrix operator*(double s, const DoubledMatrix& a);

private:
    DoubledMatrix(CMatrix block1, CMatrix block2, MatrixKind kind)
        : block1_(std::move(block1)), block2_(std::move(block2)), kind_(kind) {}

    CMatrix block1_;
    CMatrix block2_;
    MatrixKind kind_ = MatrixKind::General;
};

/// L = N1 a + N2 a#, with N1, N2 of shape m x n.
struct CouplingOperator {
    CMatrix N1;
    CMatrix N2;

    Index channels() const { return N1.rows(); }
    Index modes() const { return N1.cols(); }

    /// [[N1, N2], [N2#, N1#]], shape 2m x 2n.
    CMatrix doubled() const;
    /// [N1 N2], shape m x 2n.
    CMatrix tilde() const;
};

/// Nominal plant (M, N), perturbation channel E, uncertainty class and level gamma,
/// sector offset delta. The scattering matrix is the identity throughout.
struct UncertainSystem {
    DoubledMatrix M;
    CouplingOperator N;
    DoubledMatrix E;
    double gamma = 1.0;
    double delta = 0.0;
    UncertaintyClass uncertainty_class = UncertaintyClass::NormBound;

    Index n_modes() const { return M.block_rows(); }
    /// Dimension m' of the perturbation channel (Delta is 2m' x 2m').
    Index perturbation_dim() const { return E.block_rows(); }

    /// Throws DimensionMismatch, StructureViolation or NonPositiveParameter.
    void validate() const;
};

/// Quadratic cost weight R (Hermitian positive definite) and controller weight rho.
struct CostSpec {
    CMatrix R;
    double rho = 0.1;

    static CostSpec identity(Index n, double rho = 0.1);
    /// Throws NonPositiveParameter / DimensionMismatch.
    void validate(Index n_modes) const;
};

/// J = diag(I, -I), 2n x 2n.
CMatrix commutation_matrix(Index n);
/// Sigma = [[0, I], [I, 0]], 2n x 2n.
CMatrix swap_matrix(Index n);

double spectral_abscissa(const CMatrix& A);
bool is_hurwitz(const CMatrix& A, double margin);

/// F = -iJM - 1/2 J N^dag J N.
CMatrix compute_F(const DoubledMatrix& M, const CouplingOperator& N);
CMatrix compute_F(const UncertainSystem& sys);

/// D = J N^dag diag(I, 0) N J, so that Tr(P D) is the constant term of L(V).
CMatrix compute_D(const CouplingOperator& N);

/// [z, L] = E J Sigma N~^T, a constant 2m' x m matrix.
CMatrix commutator_zL(const DoubledMatrix& E, const CouplingOperator& N);

/// (4 theta / gamma) * trace(N~# Sigma J E^dag E J Sigma N~^T).
double popov_offset(const UncertainSystem& sys, double theta);

/// NormBound: ||Delta|| <= 2/gamma. PositiveBound: 0 <= Delta <= (4/gamma) I.
bool delta_membership(const DoubledMatrix& delta, UncertaintyClass cls, double gamma);

/// Degenerate parametric amplifier: H = 1/2 i((a^dag)^2 - a^2), L = sqrt(kappa) a,
/// split into nominal M and the perturbation Delta, plus its reference controller.
struct DpaFixture {
    UncertainSystem system;
    DoubledMatrix delta;
    DoubledMatrix controller;
};

/// gamma defaults to 1 for NormBound and 2 for PositiveBound (the example's choices).
DpaFixture dpa_fixture(double kappa, UncertaintyClass cls = UncertaintyClass::NormBound);

DoubledMatrix dpa_delta();
DoubledMatrix dpa_controller();

/**
 * Real basis of the doubled Hermitian matrices of size 2n: the real/imaginary parts of
 * the Hermitian block X1 (n^2 reals) followed by those of the symmetric block X2
 * (n(n+1) reals). Any doubled Hermitian X equals sum_i x_i basis[i] for a unique real x.
 */
std::vector<CMatrix> doubled_hermitian_basis(Index n);

/// Inverse of the basis expansion: coordinates of a doubled Hermitian matrix.
std::vector<double> doubled_hermitian_coordinates(const DoubledMatrix& X);

/// Largest entry magnitude.
double max_abs(const CMatrix& A);

}  // namespace qgcc
