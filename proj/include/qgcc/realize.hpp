#pragma once

#include <vector>

#include "qgcc/qmodel.hpp"

namespace qgcc::realize {

/// Static Bogoliubov squeezer closing a loop around a single mode with coupling
/// strength kappa_tilde.
struct SqueezerRealization {
    double r = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double kappa_tilde = 0.0;
    CMatrix B;
};

/// [[cosh r e^{i alpha}, sinh r e^{i beta}], [sinh r e^{-i beta}, cosh r e^{-i alpha}]]
CMatrix bogoliubov_B(double r, double alpha, double beta);

/// max |B^dag J B - J|.
double bogoliubov_defect(const CMatrix& B);

/// Drift added by the squeezer loop once the -kappa_tilde/2 damping cancels:
///   -c [[i cosh r sin alpha, sinh r e^{i beta}], [sinh r e^{-i beta}, -i cosh r sin alpha]]
/// with c = kappa_tilde / (2 - 2 cosh r cos alpha). Throws SingularSqueezer when the
/// denominator is below 1e-12.
CMatrix realized_coupling_term(const SqueezerRealization& s);

/// The drift a single-mode controller must add: -iJK = [[i p, w], [conj(w), -i p]].
struct CouplingTarget {
    double p = 0.0;
    Complex w;
};

/// Throws Unsupported for more than one mode.
CouplingTarget coupling_target(const DoubledMatrix& K);

/**
 * Parameters (r, alpha, beta) reproducing -iJK for the given kappa_tilde. Matching
 * the entries gives the coupling scale in closed form,
 *
 *     c = (p^2 + kappa_tilde^2/4 - |w|^2) / kappa_tilde,
 *
 * after which |sinh r| = |w|/|c|, cosh r cos alpha = 1 - kappa_tilde/(2c) and
 * cosh r sin alpha = -p/c. The sign ambiguity between sinh r and e^{i beta} is
 * resolved with sinh r <= 0.
 *
 * Throws NoControllerNeeded for K = 0, Unrealizable when c = 0 (kappa_tilde equals
 * 2 sqrt(|w|^2 - p^2)), NonPositiveParameter when kappa_tilde <= 0.
 */
SqueezerRealization solve_squeezer(const DoubledMatrix& K, double kappa_tilde);

/// Inverse direction: every kappa_tilde > 0 whose realization has the given |sinh r|,
/// ascending. Empty when the target has no off-diagonal part and r != 0.
std::vector<double> kappa_tilde_for_squeeze(const DoubledMatrix& K, double r);

/// Example loop: [[-kappa/2, 1], [1, -kappa/2]] plus the squeezer term.
CMatrix closed_loop_qsde(double kappa, const SqueezerRealization& s);

}  // namespace qgcc::realize
