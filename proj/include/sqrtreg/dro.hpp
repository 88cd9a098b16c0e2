#pragma once

#include "sqrtreg/model.hpp"

namespace sqrtreg {

/// Dual (semi)norm p_*(alpha) = sup { <alpha, beta> : p(beta) <= 1 }.
/// Closed forms for the pure cases; per-group bisection for the sparse group
/// penalty; cumulative-sum formula for the pure fused penalty (+infinity off
/// Range(B^T)). Fused with w1 > 0 is evaluated by a projected-gradient oracle
/// for n <= 20 and throws Unsupported beyond that.
double dual_seminorm(const Vector& alpha, const Regularizer& reg);

/// True when dual_seminorm can evaluate this penalty at this size.
bool dual_seminorm_supported(const Regularizer& reg, Eigen::Index n);

/// Robust per-sample loss
///   phi_gamma = Z^2 + Z^2 p^2 / (gamma - p^2)   if p^2 < gamma, or
///               Z^2                             if p^2 = gamma and Z p = 0,
///               +infinity                       otherwise,
/// with the extended-arithmetic conventions 0/0 = 0 and 1/0 = infinity.
double phi_gamma(double Z, double p_beta, double gamma);

struct WorstCaseLoss {
    double value;      // worst-case expected squared loss
    double gamma_star; // minimizing gamma (p^2 when either factor vanishes)
};

/// Closed form (1/N)(||Y - X beta|| + sqrt(delta N) p(beta))^2 and its
/// optimal gamma. Requires w1 + w2 = 1.
WorstCaseLoss worst_case_loss(const Dataset& ds, const Regularizer& reg, const Vector& beta,
                              double delta);

/// Same quantity by scalar minimization of gamma delta + (1/N) sum phi_gamma
/// over gamma, golden-section on log(gamma - p^2).
double worst_case_loss_numeric(const Dataset& ds, const Regularizer& reg, const Vector& beta,
                               double delta);

struct DroReport {
    double max_deviation = 0.0;
    int count = 0;
    bool pass = true;
};

/// For each sample beta checks
///   | sqrt(N * worst_case_loss(beta, lambda^2/N)) - (||Y - X beta|| + lambda p(beta)) |
///     <= 1e-9 (1 + objective)
/// and reports the maximum deviation.
DroReport dro_equivalence_check(const Dataset& ds, const Regularizer& reg, double lambda,
                                const std::vector<Vector>& betas);

} // namespace sqrtreg
