#pragma once

#include "sqrtreg/model.hpp"
#include "sqrtreg/prox.hpp"

namespace sqrtreg {

/// Dual of one proximal-point subproblem:
///   Psi(u) = ||u||^2/(2 tau) + ||X^T u||^2/(2 sigma) - <u, X beta_k - y_k - Y>
///            - sigma M_{(lambda/sigma) p}(beta_k - X^T u / sigma)
///            - tau M_{(1/tau)||.||}(y_k + u / tau),
/// an unconstrained smooth convex function of u.
struct DualSubproblem {
    const Dataset* ds = nullptr;
    const Regularizer* reg = nullptr;
    double lambda = 0.0;
    double sigma = 1.0;
    double tau = 1.0;
    Vector beta_k;
    Vector y_k;
    Vector rhs_lin; // X beta_k - y_k - Y, cached

    DualSubproblem(const Dataset& d, const Regularizer& r, double lam, double sig, double ta,
                   Vector bk, Vector yk);

    double psi(const Vector& u) const;
    /// Psi from a cached X^T u (no matvec).
    double psi_cached(const Vector& u, const Vector& xtu) const;
};

struct PsiGradient {
    Vector grad;
    Vector beta_cand; // prox_{(lambda/sigma) p}(beta_k - X^T u / sigma)
    Vector y_cand;    // prox_{(1/tau)||.||}(y_k + u / tau)
};

double psi_value(const DualSubproblem& sub, const Vector& u);
PsiGradient psi_gradient(const DualSubproblem& sub, const Vector& u);

struct SsnResult {
    Vector u;
    Vector beta;
    Vector y;
    int iters = 0;
    double grad_norm = 0.0;
    bool stalled = false;
};

/// Inexact Newton direction: ||H d + g|| <= min(eta, ||g||^{1+varrho}),
/// by direct factorization of the densified operator for small N and by
/// damped conjugate gradients otherwise.
Vector newton_direction(const JacobianElement& H, const Vector& g, const SolverConfig& cfg);

/// Semismooth Newton with Armijo line search on Psi, from u0, until
/// ||grad Psi|| <= inner_tol or the iteration cap.
SsnResult ssn_solve(const DualSubproblem& sub, const Vector& u0, double inner_tol,
                    const SolverConfig& cfg, int iter_cap);

/// Outer proximal point iteration; each subproblem solved through its dual by
/// ssn_solve. Terminates on the Kkt / PdGap / VarGap criteria, iteration or
/// time caps.
SolveResult ppa_solve(const Dataset& ds, const Regularizer& reg, const SolverConfig& cfg);

/// Dual objective -<Y, u> after scaling u into the feasible set
/// {||u|| <= 1, p_*(X^T u) <= lambda} (when p_* is computable; otherwise only
/// the ball constraint is enforced).
double dual_objective(const Dataset& ds, const Regularizer& reg, double lambda, const Vector& u);

} // namespace sqrtreg
