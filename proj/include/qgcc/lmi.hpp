#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qgcc/qmodel.hpp"

namespace qgcc::lmi {

using Vector = Eigen::VectorXd;

inline constexpr double kDefaultMargin = 1e-6;
inline constexpr double kDefaultBound = 1e6;

/**
 * Complex matrix-valued affine function of a real decision vector:
 *
 *     G(x) = G0 + sum_i x_i G_i
 *
 * Used to assemble block LMIs term by term. Constant matrices multiply from either
 * side, blocks are concatenated with `blocks`.
 */
class AffineMatrix {
public:
    AffineMatrix() = default;
    AffineMatrix(Index rows, Index cols, Index num_vars);

    static AffineMatrix constant(const CMatrix& value, Index num_vars);
    /// x_var * basis
    static AffineMatrix variable(const CMatrix& basis, Index var, Index num_vars);
    static AffineMatrix zero(Index rows, Index cols, Index num_vars) {
        return AffineMatrix(rows, cols, num_vars);
    }

    /// Row-major grid of blocks; every row must agree in height, every column in width.
    static AffineMatrix blocks(const std::vector<std::vector<AffineMatrix>>& grid);

    Index rows() const { return constant_.rows(); }
    Index cols() const { return constant_.cols(); }
    Index num_vars() const { return static_cast<Index>(coefficients_.size()); }

    const CMatrix& constant_term() const { return constant_; }
    const CMatrix& coefficient(Index var) const { return coefficients_[var]; }

    CMatrix evaluate(const Vector& x) const;
    AffineMatrix adjoint() const;

    AffineMatrix& operator+=(const AffineMatrix& other);
    AffineMatrix& operator-=(const AffineMatrix& other);

    friend AffineMatrix operator+(AffineMatrix a, const AffineMatrix& b) { return a += b; }
    friend AffineMatrix operator-(AffineMatrix a, const AffineMatrix& b) { return a -= b; }
    friend AffineMatrix operator-(const AffineMatrix& a);
    friend AffineMatrix operator*(Complex s, const AffineMatrix& a);
    friend AffineMatrix operator*(const CMatrix& left, const AffineMatrix& a);
    friend AffineMatrix operator*(const AffineMatrix& a, const CMatrix& right);

private:
    CMatrix constant_;
    std::vector<CMatrix> coefficients_;
};

/// sum_i x_{first+i} basis[i]; used for structured matrix variables such as P and Y.
AffineMatrix expansion(const std::vector<CMatrix>& basis, Index first, Index num_vars);

/// Values of the structured variable back from a decision vector.
CMatrix expand(const std::vector<CMatrix>& basis, Index first, const Vector& x);

/// G(x) <= -margin*I when strict, G(x) <= 0 otherwise.
struct AffineConstraint {
    AffineMatrix G;
    bool strict = true;
    std::string label;
};

struct VarBound {
    double lower = -kDefaultBound;
    double upper = kDefaultBound;
};

/// minimize c^T x subject to Hermitian affine constraints and box bounds.
struct LmiProgram {
    Index num_vars = 0;
    Vector objective;
    std::vector<AffineConstraint> constraints;
    std::vector<VarBound> var_bounds;
    double strictness_margin = kDefaultMargin;
    std::vector<std::string> var_names;

    explicit LmiProgram(Index k = 0);

    /// Appends G <= -margin*I (strict) or G <= 0. Symmetrizes G after checking it is
    /// Hermitian to 1e-12 (relative); throws NotHermitian otherwise.
    void add_constraint(const AffineMatrix& G, bool strict, std::string label);

    double margin_for(const AffineConstraint& c) const { return c.strict ? strictness_margin : 0.0; }

    /// Throws DimensionMismatch / NotHermitian.
    void validate() const;
};

enum class SolveStatus { Optimal, Feasible, Infeasible, NumericalFailure };

const char* to_string(SolveStatus status);

struct SdpSolution {
    SolveStatus status = SolveStatus::NumericalFailure;
    Vector x;
    double objective_value = 0.0;
    /// max_j lambda_max(G_j(x)) + margin_j, evaluated by the certifier.
    double max_constraint_eig = 0.0;
    /// Phase-1 optimum w* = u* + margin (feasible with margin iff w* < 0).
    double phase1_value = 0.0;
    int iterations = 0;

    bool ok() const { return status == SolveStatus::Optimal || status == SolveStatus::Feasible; }
};

struct SolverOptions {
    int max_iterations = 500;    // Newton steps per phase
    double gap_tolerance = 1e-8; // barrier duality measure m/t
    double newton_tolerance = 1e-10;
    double barrier_growth = 10.0;
};

/// [[Re H, -Im H], [Im H, Re H]]; throws NotHermitian when H is not Hermitian to 1e-12.
RMatrix real_embed(const CMatrix& H);

/// Phase 1 finds a point with every G_j(x) + margin_j I < 0 (or declares Infeasible),
/// phase 2 follows the log-det barrier central path. Every returned Optimal/Feasible
/// point has passed `certify`.
SdpSolution solve(const LmiProgram& program, const SolverOptions& options = {});

struct Certification {
    bool certified = false;
    /// max_j lambda_max(G_j(x)) + margin_j; also positive if a box bound is violated.
    double worst = 0.0;
};

/// Evaluates every constraint at x with a complex Hermitian eigensolver. Strict
/// constraints pass when lambda_max <= -margin/2, non-strict ones when lambda_max <= 0.
Certification certify(const LmiProgram& program, const Vector& x);

}  // namespace qgcc::lmi
