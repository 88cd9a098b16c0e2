#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sqrtreg/model.hpp"

namespace sqrtreg {

enum class LambdaRuleKind { Bel, StS, BlS, Bun, StG, BlG, Jia };

struct LambdaRule {
    LambdaRuleKind rule = LambdaRuleKind::Bel;
    double a = 0.05;          // confidence level
    int mc_samples = 100000;  // Monte Carlo rules
    std::uint64_t seed = 0;
};

/// 1.1 Phi^{-1}(1 - a/(2n)).
double lambda_bel(Eigen::Index n, double a);

/// sqrt(2) t/Delta + sqrt(2)(2 + sqrt(log count)) with t = sqrt(log(4/a)),
/// Delta = sqrt(1 - t sqrt(4/N)); count = n (StS) or g (StG). Throws
/// InvalidRegime when Delta^2 <= 0.
double lambda_st(Eigen::Index count, Eigen::Index N, double a);

/// Monte Carlo quantile rules: Z ~ N(0, E[X^T X]); statistic
/// (pi/(pi-2)) ||Z||_inf^2 (BlS) or (pi/(pi-2)) p_*(Z)^2 (BlG, group dual
/// norm); lambda = sqrt of the (1-a)-quantile. Deterministic given the seed.
double lambda_blanchet_l1(const Dataset& ds, double a, int mc_samples, std::uint64_t seed);
double lambda_blanchet_group(const Dataset& ds, const Regularizer& reg, double a, int mc_samples,
                             std::uint64_t seed);

/// sqrt(zeta_max tau0 / (T_min tau0 + N - T_max)) sqrt(N) with
/// tau0 = F^{-1}_{T_min, N - T_min}(1 - a/g) and
/// zeta_max = max_l ||X_{G_l}||^2 / N (spectral norm, power iteration).
double lambda_bun(const Dataset& ds, const GroupStructure& groups, double a);

/// 2.2 sqrt(2 log(n)/(1 + t)) with t = sqrt(4 log(1/a)/N) + 4 log(1/a)/N.
double lambda_jia(Eigen::Index n, Eigen::Index N, double a);

/// Dispatch on the named rule for a given instance.
double lambda_by_rule(const LambdaRule& rule, const Dataset& ds, const Regularizer& reg);

struct CvCell {
    double lambda;
    double w1;
    double mean_mse;
};

struct CvResult {
    double best_lambda = 0.0;
    double best_w1 = 0.0;
    std::vector<CvCell> curve;
};

/// Deterministic fold assignment: seeded shuffle, folds round-robin over the
/// permutation.
std::vector<int> cv_folds(Eigen::Index N, int folds, std::uint64_t seed);

/// The default lambda grid {10^-1, 10^-0.95, ..., 10^1}.
std::vector<double> default_lambda_grid();

/// The default w1 grid {0, 0.1, ..., 1} (w2 = 1 - w1).
std::vector<double> default_w1_grid();

/// K-fold cross validation over lambda (and optionally w1; empty keeps the
/// prototype's weights). Score: mean validation MSE. Ties break toward the
/// smaller lambda, then the smaller w1.
CvResult cross_validate(const Dataset& ds, const Regularizer& proto,
                        const std::vector<double>& lambdas, const std::vector<double>& w1s,
                        int folds, std::uint64_t seed, const SolverConfig& cfg);

/// Overload with an explicit fold assignment (fold_of[i] in [0, folds)).
CvResult cross_validate(const Dataset& ds, const Regularizer& proto,
                        const std::vector<double>& lambdas, const std::vector<double>& w1s,
                        const std::vector<int>& fold_of, const SolverConfig& cfg);

/// (1 - nnz(sign(X_test beta) - Y_test)/N_test) * 100 with nnz the literal
/// nonzero count. Y_test must be +-1 valued.
double classification_accuracy(const Vector& beta, const DesignMatrix& X_test,
                               const Vector& Y_test);

} // namespace sqrtreg
