#include "qgcc/realize.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qgcc::realize {

namespace {

constexpr double kSingularDenominator = 1e-12;

SqueezerRealization finish(double u, double alpha, double beta, double kappa_tilde) {
    SqueezerRealization s;
    s.r = std::asinh(u);
    s.alpha = alpha;
    s.beta = beta;
    s.kappa_tilde = kappa_tilde;
    s.B = bogoliubov_B(s.r, alpha, beta);
    return s;
}

}  // namespace

CMatrix bogoliubov_B(double r, double alpha, double beta) {
    const Complex i(0.0, 1.0);
    const double ch = std::cosh(r);
    const double sh = std::sinh(r);
    CMatrix B(2, 2);
    B << ch * std::exp(i * alpha), sh * std::exp(i * beta), sh * std::exp(-i * beta),
        ch * std::exp(-i * alpha);
    return B;
}

double bogoliubov_defect(const CMatrix& B) {
    const CMatrix J = commutation_matrix(B.rows() / 2);
    return max_abs(B.adjoint() * J * B - J);
}

CMatrix realized_coupling_term(const SqueezerRealization& s) {
    const Complex i(0.0, 1.0);
    const double ch = std::cosh(s.r);
    const double sh = std::sinh(s.r);
    const double denominator = 2.0 - 2.0 * ch * std::cos(s.alpha);
    if (std::abs(denominator) < kSingularDenominator) {
        throw SingularSqueezer("B^-1 - I is singular (cosh r cos alpha = 1)");
    }
    const double c = s.kappa_tilde / denominator;
    CMatrix term(2, 2);
    term << i * ch * std::sin(s.alpha), sh * std::exp(i * s.beta), sh * std::exp(-i * s.beta),
        -i * ch * std::sin(s.alpha);
    return -c * term;
}

CouplingTarget coupling_target(const DoubledMatrix& K) {
    if (K.kind() != MatrixKind::Hermitian) {
        throw StructureViolation("controller must be doubled Hermitian");
    }
    if (K.block_rows() != 1 || K.block_cols() != 1) {
        throw Unsupported("squeezer realization covers a single mode only, got " +
                          std::to_string(K.rows()) + "x" + std::to_string(K.cols()));
    }
    // -iJK with K = [[k1, k2], [k2#, k1]]: diagonal -i k1, off-diagonal -i k2.
    const Complex k1 = K.block1()(0, 0);
    const Complex k2 = K.block2()(0, 0);
    return CouplingTarget{-k1.real(), Complex(0.0, -1.0) * k2};
}

SqueezerRealization solve_squeezer(const DoubledMatrix& K, double kappa_tilde) {
    if (!(kappa_tilde > 0.0) || !std::isfinite(kappa_tilde)) {
        throw NonPositiveParameter("kappa_tilde must be positive");
    }
    const CouplingTarget target = coupling_target(K);
    const double p = target.p;
    const double w_abs = std::abs(target.w);
    if (p == 0.0 && w_abs == 0.0) {
        throw NoControllerNeeded("K = 0: the zero target needs r = 0, where B^-1 - I is singular");
    }
    const double c = (p * p + 0.25 * kappa_tilde * kappa_tilde - w_abs * w_abs) / kappa_tilde;
    const double scale = std::max({1.0, p * p, w_abs * w_abs});
    if (std::abs(c) * kappa_tilde <= 1e-14 * scale) {
        std::ostringstream os;
        os << "kappa_tilde = " << kappa_tilde
           << " sends the loop gain to infinity; any kappa_tilde other than "
           << 2.0 * std::sqrt(std::max(0.0, w_abs * w_abs - p * p)) << " is realizable";
        throw Unrealizable(os.str());
    }
    const double u = -w_abs / std::abs(c);
    const double ch = std::sqrt(1.0 + u * u);
    const double cos_alpha = std::clamp((1.0 - kappa_tilde / (2.0 * c)) / ch, -1.0, 1.0);
    const double sin_alpha = std::clamp(-p / (c * ch), -1.0, 1.0);
    // "+ 0.0" folds a negative zero into +0 for the serialized artifacts.
    const double alpha = std::atan2(sin_alpha, cos_alpha) + 0.0;
    // -c sinh r e^{i beta} = w.
    const double beta = w_abs == 0.0 ? 0.0 : std::arg(target.w / (-c * u)) + 0.0;
    return finish(u, alpha, beta, kappa_tilde);
}

std::vector<double> kappa_tilde_for_squeeze(const DoubledMatrix& K, double r) {
    const CouplingTarget target = coupling_target(K);
    const double p = target.p;
    const double w2 = std::norm(target.w);
    const double sh = std::abs(std::sinh(r));
    std::vector<double> roots;
    if (sh == 0.0 || w2 == 0.0) return roots;
    // |c| = |w| / |sinh r|; kappa_tilde^2/4 - c kappa_tilde + p^2 - |w|^2 = 0 for c = +-|c|.
    const double magnitude = std::sqrt(w2) / sh;
    for (double c : {-magnitude, magnitude}) {
        const double disc = c * c - p * p + w2;
        if (disc < 0.0) continue;
        for (double sign : {-1.0, 1.0}) {
            const double kt = 2.0 * (c + sign * std::sqrt(disc));
            if (kt > 0.0) roots.push_back(kt);
        }
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end(),
                            [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, b); }),
                roots.end());
    return roots;
}

CMatrix closed_loop_qsde(double kappa, const SqueezerRealization& s) {
    CMatrix open(2, 2);
    open << -0.5 * kappa, 1.0, 1.0, -0.5 * kappa;
    return open + realized_coupling_term(s);
}

}  // namespace qgcc::realize
