// Dense log-det barrier engine for the small LMI programs built by the analysis
// and synthesis modules. Complex constraints are embedded into real symmetric
// ones; the certifier in lmi.cpp re-checks results on the complex matrices.

#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "qgcc/lmi.hpp"

namespace qgcc::lmi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// S(z) = base + sum_i z_i coeff[i], required positive definite.
struct Block {
    RMatrix base;
    std::vector<RMatrix> coeff;
    std::vector<Index> active;
};

struct BarrierProblem {
    Vector cost;
    std::vector<Block> blocks;
    Vector lower;
    Vector upper;

    Index dim() const { return cost.size(); }

    double degree() const {
        double m = 0.0;
        for (const auto& b : blocks) m += static_cast<double>(b.base.rows());
        for (Index i = 0; i < dim(); ++i) {
            if (std::isfinite(lower[i])) m += 1.0;
            if (std::isfinite(upper[i])) m += 1.0;
        }
        return m;
    }
};

RMatrix slack(const Block& b, const Vector& z) {
    RMatrix S = b.base;
    for (Index i : b.active) S += z[i] * b.coeff[static_cast<std::size_t>(i)];
    return S;
}

enum class PathOutcome { Converged, Stopped, IterationLimit, Stalled };

class BarrierSolver {
public:
    BarrierSolver(const BarrierProblem& problem, const SolverOptions& options)
        : problem_(problem), options_(options) {}

    int iterations() const { return iterations_; }

    /// Checked after every accepted Newton step; true ends the path immediately.
    std::function<bool(const Vector&)> early_exit;

    /// Follows the central path from a strictly feasible z. `stop` is consulted after
    /// every centering with the current duality measure m/t.
    PathOutcome follow(Vector& z, double t, const std::function<bool(const Vector&, double)>& stop) {
        const double m = problem_.degree();
        while (true) {
            const PathOutcome inner = center(z, t);
            const double gap = m / t;
            if (inner == PathOutcome::IterationLimit || inner == PathOutcome::Stopped) return inner;
            if (inner == PathOutcome::Stalled) {
                // Round-off stalls late on the path are the normal end of the road.
                return gap <= 1e-6 ? PathOutcome::Converged : PathOutcome::Stalled;
            }
            if (stop && stop(z, gap)) return PathOutcome::Stopped;
            if (gap <= options_.gap_tolerance) return PathOutcome::Converged;
            t *= options_.barrier_growth;
        }
    }

private:
    /// Barrier part only (without t c^T z); false when z is not strictly inside.
    bool barrier(const Vector& z, double& value) const {
        value = 0.0;
        for (Index i = 0; i < problem_.dim(); ++i) {
            if (std::isfinite(problem_.lower[i])) {
                const double d = z[i] - problem_.lower[i];
                if (!(d > 0.0)) return false;
                value -= std::log(d);
            }
            if (std::isfinite(problem_.upper[i])) {
                const double d = problem_.upper[i] - z[i];
                if (!(d > 0.0)) return false;
                value -= std::log(d);
            }
        }
        for (const auto& b : problem_.blocks) {
            Eigen::LLT<RMatrix> llt(slack(b, z));
            if (llt.info() != Eigen::Success) return false;
            const Vector diag = llt.matrixLLT().diagonal();
            for (Index r = 0; r < diag.size(); ++r) {
                if (!(diag[r] > 0.0)) return false;
                value -= 2.0 * std::log(diag[r]);
            }
        }
        return std::isfinite(value);
    }

    bool newton_system(const Vector& z, double t, Vector& g, RMatrix& H) const {
        const Index p = problem_.dim();
        g = t * problem_.cost;
        H = RMatrix::Zero(p, p);
        for (Index i = 0; i < p; ++i) {
            if (std::isfinite(problem_.lower[i])) {
                const double d = z[i] - problem_.lower[i];
                g[i] -= 1.0 / d;
                H(i, i) += 1.0 / (d * d);
            }
            if (std::isfinite(problem_.upper[i])) {
                const double d = problem_.upper[i] - z[i];
                g[i] += 1.0 / d;
                H(i, i) += 1.0 / (d * d);
            }
        }
        std::vector<RMatrix> Z(static_cast<std::size_t>(p));
        for (const auto& b : problem_.blocks) {
            Eigen::LLT<RMatrix> llt(slack(b, z));
            if (llt.info() != Eigen::Success) return false;
            for (Index i : b.active) {
                Z[static_cast<std::size_t>(i)] = llt.solve(b.coeff[static_cast<std::size_t>(i)]);
                g[i] -= Z[static_cast<std::size_t>(i)].trace();
            }
            for (std::size_t a = 0; a < b.active.size(); ++a) {
                const Index i = b.active[a];
                for (std::size_t c = a; c < b.active.size(); ++c) {
                    const Index k = b.active[c];
                    const double h = Z[static_cast<std::size_t>(i)]
                                         .transpose()
                                         .cwiseProduct(Z[static_cast<std::size_t>(k)])
                                         .sum();
                    H(i, k) += h;
                    if (k != i) H(k, i) += h;
                }
            }
        }
        return g.allFinite() && H.allFinite();
    }

    static Vector newton_direction(const Vector& g, const RMatrix& H) {
        // Jacobi scaling keeps the factorization usable when the Hessian spans many
        // orders of magnitude near the end of the path.
        const Vector d = H.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
        RMatrix Hs = d.asDiagonal() * H * d.asDiagonal();
        Hs = 0.5 * (Hs + Hs.transpose());
        Eigen::LDLT<RMatrix> ldlt(Hs);
        Vector step = -(d.asDiagonal() * ldlt.solve(d.asDiagonal() * g));
        if (ldlt.info() != Eigen::Success || !step.allFinite()) {
            Hs.diagonal().array() += 1e-12;
            Eigen::LDLT<RMatrix> reg(Hs);
            step = -(d.asDiagonal() * reg.solve(d.asDiagonal() * g));
        }
        return step;
    }

    PathOutcome center(Vector& z, double t) {
        // Late on the path the Newton direction can sit on a round-off floor above the
        // tolerance; a bounded number of steps per centering turns that into a stall.
        constexpr int kStepsPerCentering = 60;
        for (int steps = 0;; ++steps) {
            if (steps == kStepsPerCentering) return PathOutcome::Stalled;
            Vector g;
            RMatrix H;
            double phi0 = 0.0;
            if (!newton_system(z, t, g, H) || !barrier(z, phi0)) return PathOutcome::Stalled;
            const Vector dz = newton_direction(g, H);
            const double decrement = -g.dot(dz);
            if (!std::isfinite(decrement)) return PathOutcome::Stalled;
            if (decrement * 0.5 <= options_.newton_tolerance) return PathOutcome::Converged;
            if (++iterations_ > options_.max_iterations) return PathOutcome::IterationLimit;

            // Backtracking: stay strictly inside, then Armijo on t c^T z + phi(z).
            const double linear = t * problem_.cost.dot(dz);
            double s = 1.0;
            bool accepted = false;
            // Inside the quadratic region a full step stays feasible for a
            // self-concordant barrier, and comparing barrier values there only
            // measures round-off, so the Armijo test is skipped.
            const bool quadratic_region = decrement < 0.25;
            while (s > 1e-16) {
                const Vector trial = z + s * dz;
                double phi = 0.0;
                if (quadratic_region && s == 1.0 && barrier(trial, phi)) {
                    z = trial;
                    accepted = true;
                    break;
                }
                if (barrier(trial, phi)) {
                    const double change = s * linear + (phi - phi0);
                    if (change <= 0.25 * s * g.dot(dz)) {
                        z = trial;
                        accepted = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            if (accepted && early_exit && early_exit(z)) return PathOutcome::Stopped;
            if (!accepted) {
                return decrement <= 1e-6 ? PathOutcome::Converged : PathOutcome::Stalled;
            }
        }
    }

    const BarrierProblem& problem_;
    const SolverOptions& options_;
    int iterations_ = 0;
};

Block embed_constraint(const LmiProgram& program, const AffineConstraint& c, Index extra_vars) {
    const double margin = program.margin_for(c);
    Block b;
    b.base = -real_embed(c.G.constant_term());
    b.base.diagonal().array() -= margin;
    b.coeff.resize(static_cast<std::size_t>(program.num_vars + extra_vars));
    for (Index v = 0; v < program.num_vars; ++v) {
        const CMatrix& Gv = c.G.coefficient(v);
        if (max_abs(Gv) == 0.0) continue;
        b.coeff[static_cast<std::size_t>(v)] = -real_embed(Gv);
        b.active.push_back(v);
    }
    return b;
}

Vector initial_point(const LmiProgram& program) {
    Vector x(program.num_vars);
    for (Index v = 0; v < program.num_vars; ++v) {
        const auto& b = program.var_bounds[static_cast<std::size_t>(v)];
        const double half = 0.5 * (b.upper - b.lower);
        if (b.lower < 0.0 && b.upper > 0.0) {
            x[v] = 0.0;
        } else if (b.lower >= 0.0) {
            x[v] = b.lower + std::min(1.0, half);
        } else {
            x[v] = b.upper - std::min(1.0, half);
        }
    }
    return x;
}

double min_eigenvalue(const RMatrix& S) {
    Eigen::SelfAdjointEigenSolver<RMatrix> es(S, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace

SdpSolution solve(const LmiProgram& program, const SolverOptions& options) {
    program.validate();
    const Index k = program.num_vars;

    SdpSolution sol;
    sol.x = initial_point(program);

    // Phase 1: minimize w subject to G_j(x) + margin_j I <= w I, w >= -1.
    BarrierProblem phase1;
    phase1.cost = Vector::Zero(k + 1);
    phase1.cost[k] = 1.0;
    phase1.lower.resize(k + 1);
    phase1.upper.resize(k + 1);
    for (Index v = 0; v < k; ++v) {
        phase1.lower[v] = program.var_bounds[static_cast<std::size_t>(v)].lower;
        phase1.upper[v] = program.var_bounds[static_cast<std::size_t>(v)].upper;
    }
    phase1.lower[k] = -1.0;
    phase1.upper[k] = kInf;

    Vector z = Vector::Zero(k + 1);
    z.head(k) = sol.x;
    double w0 = 0.0;
    for (const auto& c : program.constraints) {
        Block b = embed_constraint(program, c, 1);
        b.coeff[static_cast<std::size_t>(k)] = RMatrix::Identity(b.base.rows(), b.base.cols());
        b.active.push_back(k);
        w0 = std::max(w0, -min_eigenvalue(slack(b, z)));
        phase1.blocks.push_back(std::move(b));
    }
    z[k] = w0 + 1.0;

    bool infeasible = false;
    BarrierSolver p1(phase1, options);
    // Any strictly negative w already certifies feasibility; stopping here keeps x
    // near the start instead of drifting toward the analytic center of the box.
    p1.early_exit = [k](const Vector& zz) { return zz[k] < 0.0; };
    const PathOutcome out1 = p1.follow(z, 1.0, [&](const Vector& zz, double gap) {
        if (zz[k] < 0.0) return true;
        if (zz[k] - gap > 0.0) {
            infeasible = true;
            return true;
        }
        return false;
    });
    sol.iterations = p1.iterations();
    sol.phase1_value = z[k];
    sol.x = z.head(k);

    if (out1 == PathOutcome::IterationLimit || out1 == PathOutcome::Stalled) {
        sol.status = SolveStatus::NumericalFailure;
        return sol;
    }
    if (infeasible || z[k] >= 0.0) {
        sol.status = SolveStatus::Infeasible;
        sol.objective_value = kInf;
        sol.max_constraint_eig = certify(program, sol.x).worst;
        return sol;
    }

    const bool has_objective = program.objective.cwiseAbs().maxCoeff() > 0.0;
    if (has_objective) {
        BarrierProblem phase2;
        phase2.cost = program.objective;
        phase2.lower.resize(k);
        phase2.upper.resize(k);
        for (Index v = 0; v < k; ++v) {
            phase2.lower[v] = program.var_bounds[static_cast<std::size_t>(v)].lower;
            phase2.upper[v] = program.var_bounds[static_cast<std::size_t>(v)].upper;
        }
        for (const auto& c : program.constraints) {
            phase2.blocks.push_back(embed_constraint(program, c, 0));
        }
        Vector x = sol.x;
        BarrierSolver p2(phase2, options);
        const PathOutcome out2 = p2.follow(x, 1.0, {});
        sol.iterations += p2.iterations();
        if (out2 != PathOutcome::Converged) {
            sol.status = SolveStatus::NumericalFailure;
            sol.x = x;
            return sol;
        }
        sol.x = x;
    }

    const Certification cert = certify(program, sol.x);
    sol.max_constraint_eig = cert.worst;
    sol.objective_value = program.objective.dot(sol.x);
    sol.status = !cert.certified  ? SolveStatus::NumericalFailure
                 : has_objective ? SolveStatus::Optimal
                                 : SolveStatus::Feasible;
    return sol;
}

}  // namespace qgcc::lmi
