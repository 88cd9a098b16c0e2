#pragma once

#include "sqrtreg/model.hpp"

namespace sqrtreg::reference {

// Brute-force reference implementations used by the verification suites and
// the tests. Each deliberately takes a different algorithmic route from the
// production code it checks.

/// prox of kappa p for the sparse group penalty by cyclic coordinate exact
/// minimization (1-D bisection solves) plus the group-zero certificate.
Vector prox_sparse_group_cd(const Vector& x, const Regularizer& reg, double kappa,
                            int sweeps = 2000);

/// prox of kappa p by FISTA on the dual: min 1/2 ||x - a - B^T z||^2 over
/// the box ||a||_inf <= kappa w1 and the structured ball/box on z. Covers
/// both penalty kinds.
Vector prox_dual_projection(const Vector& x, const Regularizer& reg, double kappa,
                            int iters = 200000);

/// Dense N x N assembly of the generalized Jacobian element
/// sigma^{-1} X U X^T + tau^{-1} V straight from the component formulas
/// (pseudo-inverse via eigendecomposition for the fused projector).
Matrix dense_jacobian(const DesignMatrix& X, const Vector& beta_tilde, const Vector& y_tilde,
                      const Regularizer& reg, double lambda, double sigma, double tau);

/// Dual seminorm by projected gradient ascent of <alpha, beta> over
/// {p(beta) <= 1} (projection via bisection on prox_{t p}).
double dual_seminorm_ball_ascent(const Vector& alpha, const Regularizer& reg, int restarts = 8,
                                 int iters = 4000);

/// Dual seminorm by subgradient descent on the convex split form
/// min_abar max(||alpha - B^T abar||_inf / w1, ||abar||_inf / w2) (fused
/// penalty, small n).
double dual_seminorm_split_descent(const Vector& alpha, const Regularizer& reg,
                                   int iters = 60000);

/// Regularized incomplete beta by adaptive Simpson quadrature (independent of
/// the continued-fraction evaluation).
double incomplete_beta_quadrature(double a, double b, double x);

/// Inverse standard normal CDF by bisection on erfc.
double norm_quantile_bisect(double q);

} // namespace sqrtreg::reference
