#include "qgcc/lmi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace qgcc::lmi {

// ---------------------------------------------------------------------------
// AffineMatrix

AffineMatrix::AffineMatrix(Index rows, Index cols, Index num_vars)
    : constant_(CMatrix::Zero(rows, cols)),
      coefficients_(static_cast<std::size_t>(num_vars), CMatrix::Zero(rows, cols)) {}

AffineMatrix AffineMatrix::constant(const CMatrix& value, Index num_vars) {
    AffineMatrix a(value.rows(), value.cols(), num_vars);
    a.constant_ = value;
    return a;
}

AffineMatrix AffineMatrix::variable(const CMatrix& basis, Index var, Index num_vars) {
    if (var < 0 || var >= num_vars) {
        throw DimensionMismatch("variable index out of range");
    }
    AffineMatrix a(basis.rows(), basis.cols(), num_vars);
    a.coefficients_[static_cast<std::size_t>(var)] = basis;
    return a;
}

AffineMatrix AffineMatrix::blocks(const std::vector<std::vector<AffineMatrix>>& grid) {
    if (grid.empty() || grid.front().empty()) {
        throw DimensionMismatch("empty block grid");
    }
    const Index k = grid.front().front().num_vars();
    std::vector<Index> heights, widths;
    for (const auto& row : grid) {
        if (row.size() != grid.front().size()) {
            throw DimensionMismatch("ragged block grid");
        }
        heights.push_back(row.front().rows());
    }
    for (const auto& cell : grid.front()) {
        widths.push_back(cell.cols());
    }
    Index total_rows = 0, total_cols = 0;
    for (Index h : heights) total_rows += h;
    for (Index w : widths) total_cols += w;

    AffineMatrix out(total_rows, total_cols, k);
    Index r0 = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        Index c0 = 0;
        for (std::size_t j = 0; j < grid[i].size(); ++j) {
            const AffineMatrix& cell = grid[i][j];
            if (cell.rows() != heights[i] || cell.cols() != widths[j] || cell.num_vars() != k) {
                throw DimensionMismatch("block (" + std::to_string(i) + "," + std::to_string(j) +
                                        ") does not fit the grid");
            }
            out.constant_.block(r0, c0, heights[i], widths[j]) = cell.constant_;
            for (Index v = 0; v < k; ++v) {
                out.coefficients_[v].block(r0, c0, heights[i], widths[j]) = cell.coefficients_[v];
            }
            c0 += widths[j];
        }
        r0 += heights[i];
    }
    return out;
}

CMatrix AffineMatrix::evaluate(const Vector& x) const {
    if (x.size() != num_vars()) {
        throw DimensionMismatch("decision vector has wrong length");
    }
    CMatrix out = constant_;
    for (Index v = 0; v < num_vars(); ++v) {
        if (x[v] != 0.0) {
            out += x[v] * coefficients_[v];
        }
    }
    return out;
}

AffineMatrix AffineMatrix::adjoint() const {
    AffineMatrix out;
    out.constant_ = constant_.adjoint();
    out.coefficients_.reserve(coefficients_.size());
    for (const auto& c : coefficients_) {
        out.coefficients_.push_back(c.adjoint());
    }
    return out;
}

AffineMatrix& AffineMatrix::operator+=(const AffineMatrix& other) {
    if (rows() != other.rows() || cols() != other.cols() || num_vars() != other.num_vars()) {
        throw DimensionMismatch("affine sum shape mismatch");
    }
    constant_ += other.constant_;
    for (std::size_t v = 0; v < coefficients_.size(); ++v) {
        coefficients_[v] += other.coefficients_[v];
    }
    return *this;
}

AffineMatrix& AffineMatrix::operator-=(const AffineMatrix& other) {
    return *this += -other;
}

AffineMatrix operator-(const AffineMatrix& a) {
    return Complex(-1.0, 0.0) * a;
}

AffineMatrix operator*(Complex s, const AffineMatrix& a) {
    AffineMatrix out = a;
    out.constant_ *= s;
    for (auto& c : out.coefficients_) c *= s;
    return out;
}

AffineMatrix operator*(const CMatrix& left, const AffineMatrix& a) {
    if (left.cols() != a.rows()) {
        throw DimensionMismatch("affine left product shape mismatch");
    }
    AffineMatrix out;
    out.constant_ = left * a.constant_;
    out.coefficients_.reserve(a.coefficients_.size());
    for (const auto& c : a.coefficients_) out.coefficients_.push_back(left * c);
    return out;
}

AffineMatrix operator*(const AffineMatrix& a, const CMatrix& right) {
    if (a.cols() != right.rows()) {
        throw DimensionMismatch("affine right product shape mismatch");
    }
    AffineMatrix out;
    out.constant_ = a.constant_ * right;
    out.coefficients_.reserve(a.coefficients_.size());
    for (const auto& c : a.coefficients_) out.coefficients_.push_back(c * right);
    return out;
}

AffineMatrix expansion(const std::vector<CMatrix>& basis, Index first, Index num_vars) {
    if (basis.empty()) {
        throw DimensionMismatch("empty basis");
    }
    AffineMatrix out(basis.front().rows(), basis.front().cols(), num_vars);
    for (std::size_t i = 0; i < basis.size(); ++i) {
        out += AffineMatrix::variable(basis[i], first + static_cast<Index>(i), num_vars);
    }
    return out;
}

CMatrix expand(const std::vector<CMatrix>& basis, Index first, const Vector& x) {
    CMatrix out = CMatrix::Zero(basis.front().rows(), basis.front().cols());
    for (std::size_t i = 0; i < basis.size(); ++i) {
        out += x[first + static_cast<Index>(i)] * basis[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// LmiProgram

namespace {

bool hermitian_within(const CMatrix& A, double tol) {
    return max_abs(A - A.adjoint()) <= tol * std::max(1.0, max_abs(A));
}

CMatrix hermitian_part(const CMatrix& A) {
    return 0.5 * (A + A.adjoint());
}

double lambda_max(const CMatrix& H) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(H, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

}  // namespace

LmiProgram::LmiProgram(Index k)
    : num_vars(k), objective(Vector::Zero(k)), var_bounds(static_cast<std::size_t>(k)) {
    var_names.reserve(static_cast<std::size_t>(k));
    for (Index i = 0; i < k; ++i) var_names.push_back("x" + std::to_string(i));
}

void LmiProgram::add_constraint(const AffineMatrix& G, bool strict, std::string label) {
    if (G.num_vars() != num_vars || G.rows() != G.cols()) {
        throw DimensionMismatch("constraint '" + label + "' has the wrong shape");
    }
    if (!hermitian_within(G.constant_term(), 1e-12)) {
        throw NotHermitian("constraint '" + label + "': constant term is not Hermitian");
    }
    AffineMatrix sym(G.rows(), G.cols(), num_vars);
    sym += AffineMatrix::constant(hermitian_part(G.constant_term()), num_vars);
    for (Index v = 0; v < num_vars; ++v) {
        if (!hermitian_within(G.coefficient(v), 1e-12)) {
            throw NotHermitian("constraint '" + label + "': coefficient of " + var_names[v] +
                               " is not Hermitian");
        }
        CMatrix basis = hermitian_part(G.coefficient(v));
        sym += AffineMatrix::variable(basis, v, num_vars);
    }
    constraints.push_back(AffineConstraint{std::move(sym), strict, std::move(label)});
}

void LmiProgram::validate() const {
    if (objective.size() != num_vars || static_cast<Index>(var_bounds.size()) != num_vars) {
        throw DimensionMismatch("objective / bounds do not match the number of variables");
    }
    if (!(strictness_margin > 0.0)) {
        throw NonPositiveParameter("strictness margin must be positive");
    }
    for (const auto& b : var_bounds) {
        if (!(b.lower < b.upper)) {
            throw DimensionMismatch("empty variable box");
        }
    }
    for (const auto& c : constraints) {
        if (c.G.num_vars() != num_vars || c.G.rows() != c.G.cols()) {
            throw DimensionMismatch("constraint '" + c.label + "' has the wrong shape");
        }
        if (!hermitian_within(c.G.constant_term(), 1e-12)) {
            throw NotHermitian("constraint '" + c.label + "' is not Hermitian");
        }
        for (Index v = 0; v < num_vars; ++v) {
            if (!hermitian_within(c.G.coefficient(v), 1e-12)) {
                throw NotHermitian("constraint '" + c.label + "' is not Hermitian");
            }
        }
    }
}

const char* to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Feasible: return "feasible";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Embedding and certification

RMatrix real_embed(const CMatrix& H) {
    if (H.rows() != H.cols() || !hermitian_within(H, 1e-12)) {
        throw NotHermitian("real_embed needs a Hermitian matrix");
    }
    const Index d = H.rows();
    RMatrix out(2 * d, 2 * d);
    const RMatrix re = H.real();
    const RMatrix im = H.imag();
    out << re, -im, im, re;
    return out;
}

Certification certify(const LmiProgram& program, const Vector& x) {
    Certification cert;
    cert.certified = x.size() == program.num_vars && x.allFinite();
    if (!cert.certified) {
        cert.worst = std::numeric_limits<double>::infinity();
        return cert;
    }
    cert.worst = -std::numeric_limits<double>::infinity();
    for (Index v = 0; v < program.num_vars; ++v) {
        const auto& b = program.var_bounds[static_cast<std::size_t>(v)];
        const double violation = std::max(b.lower - x[v], x[v] - b.upper);
        if (violation > 0.0) {
            cert.certified = false;
            cert.worst = std::max(cert.worst, violation);
        }
    }
    for (const auto& c : program.constraints) {
        const double margin = program.margin_for(c);
        const double lmax = lambda_max(hermitian_part(c.G.evaluate(x)));
        const double threshold = c.strict ? -0.5 * margin : 0.0;
        if (!(lmax <= threshold)) {
            cert.certified = false;
        }
        cert.worst = std::max(cert.worst, lmax + margin);
    }
    return cert;
}

}  // namespace qgcc::lmi
