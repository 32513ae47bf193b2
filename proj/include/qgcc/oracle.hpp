#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "qgcc/qmodel.hpp"

namespace qgcc::oracle {

/// dSigma/dt = F_cl Sigma + Sigma F_cl^dag + D; the running cost is Tr(R_cost Sigma).
struct ClosedLoop {
    CMatrix F_cl;
    CMatrix D;
    CMatrix R_cost;
};

/// -iJ(M + E^dag Delta E + K) - 1/2 J N^dag J N.
CMatrix closed_loop_drift(const UncertainSystem& sys, const DoubledMatrix& delta,
                          const DoubledMatrix& K);

/// Closed loop for a perturbation and an optional controller. R_cost = R + rho K^2
/// when a controller is present, R otherwise.
ClosedLoop make_closed_loop(const UncertainSystem& sys, const DoubledMatrix& delta,
                            const std::optional<DoubledMatrix>& K, const CostSpec& cost);

/// Sigma with F Sigma + Sigma F^dag + D = 0, by a direct solve of the vectorized
/// equation. Throws NotHurwitz, IllConditioned when the residual exceeds
/// 1e-8 max(1, |D|_max), NumericalFailure when Sigma is not PSD to -1e-8.
CMatrix steady_covariance(const CMatrix& F, const CMatrix& D);

/// Tr(R_cost Sigma_ss).
double lyapunov_cost(const ClosedLoop& cl);

/// Structured admissible perturbation of size 2m'. NormBound: ||Delta|| = u 2/gamma;
/// PositiveBound: Delta = G^dag G with lambda_max = u 4/gamma; u uniform on [0, 1].
DoubledMatrix sample_delta(UncertaintyClass cls, double gamma, Index m_prime, std::mt19937_64& rng);
DoubledMatrix sample_delta(UncertaintyClass cls, double gamma, Index m_prime, std::uint64_t seed);

inline constexpr double kViolationSlack = 1e-6;

struct VerificationReport {
    int samples = 0;
    /// cost > bound + 1e-6
    int violations = 0;
    /// max over stable samples of cost - bound
    double worst_margin = 0.0;
    double worst_cost = 0.0;
    int unstable_samples = 0;
    std::uint64_t seed = 0;

    bool passed() const { return violations == 0 && unstable_samples == 0; }
};

/**
 * Samples Delta from sys.uncertainty_class at level sys.gamma. The example's fixed
 * perturbation (when admissible and of matching size) and Delta = 0 are evaluated
 * first, then `num_samples` random draws from one generator seeded with `seed`.
 */
VerificationReport verify_bound(const UncertainSystem& sys, const std::optional<DoubledMatrix>& K,
                                const CostSpec& cost, double bound, int num_samples,
                                std::uint64_t seed);

}  // namespace qgcc::oracle
