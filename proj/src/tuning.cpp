#include "sqrtreg/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "sqrtreg/data.hpp"
#include "sqrtreg/dro.hpp"
#include "sqrtreg/ppdna.hpp"
#include "sqrtreg/rng.hpp"
#include "sqrtreg/stats.hpp"

namespace sqrtreg {

double lambda_bel(Eigen::Index n, double a) {
    if (n < 1 || a <= 0.0 || a >= 1.0) throw InvalidRegime("lambda_bel needs n >= 1, a in (0,1)");
    return 1.1 * norm_quantile(1.0 - a / (2.0 * static_cast<double>(n)));
}

double lambda_st(Eigen::Index count, Eigen::Index N, double a) {
    double t = std::sqrt(std::log(4.0 / a));
    double d2 = 1.0 - t * std::sqrt(4.0 / static_cast<double>(N));
    if (d2 <= 0.0) throw InvalidRegime("lambda_st undefined: 1 - t sqrt(4/N) <= 0");
    double delta = std::sqrt(d2);
    return std::sqrt(2.0) * t / delta +
           std::sqrt(2.0) * (2.0 + std::sqrt(std::log(static_cast<double>(count))));
}

double lambda_jia(Eigen::Index n, Eigen::Index N, double a) {
    if (n < 2) throw InvalidRegime("lambda_jia needs n >= 2");
    double l = 4.0 * std::log(1.0 / a) / static_cast<double>(N);
    double t = std::sqrt(l) + l;
    return 2.2 * std::sqrt(2.0 * std::log(static_cast<double>(n)) / (1.0 + t));
}

namespace {

// E[X^T X] estimate per the sampling rule: full Gram below 1e4 rows, a fixed
// 1e4-row subsample otherwise.
std::vector<int> covariance_rows(Eigen::Index N, Rng& rng) {
    std::vector<int> rows(static_cast<std::size_t>(N));
    std::iota(rows.begin(), rows.end(), 0);
    if (N <= 10000) return rows;
    for (std::size_t i = rows.size() - 1; i > 0; --i)
        std::swap(rows[i], rows[rng.uniform_index(i + 1)]);
    rows.resize(10000);
    std::sort(rows.begin(), rows.end());
    return rows;
}

// Monte Carlo (1-a)-quantile of statf(Z), Z ~ N(0, Sigma_hat).
double mc_quantile(const Dataset& ds, double a, int mc_samples, std::uint64_t seed,
                   const std::function<double(const Vector&)>& statf) {
    if (mc_samples < 1) throw InvalidRegime("mc_samples must be positive");
    if (1.0 - a <= 0.0) return 0.0;
    Rng rng(seed);
    const Eigen::Index n = ds.n();
    std::vector<int> rows = covariance_rows(ds.N(), rng);
    const double m = static_cast<double>(rows.size());
    std::vector<double> stats;
    stats.reserve(static_cast<std::size_t>(mc_samples));

    if (n <= 4000) {
        Dataset sub = rows.size() == static_cast<std::size_t>(ds.N()) ? ds : subset_rows(ds, rows);
        Matrix Xd = sub.X.to_dense();
        Matrix cov = Xd.transpose() * Xd / m;
        Eigen::LLT<Matrix> llt(cov);
        if (llt.info() != Eigen::Success) {
            // rank-deficient covariance (always when n > N): ridge it
            cov.diagonal().array() += 1e-10 * cov.trace() / static_cast<double>(n);
            llt.compute(cov);
            if (llt.info() != Eigen::Success)
                throw FactorizationFailure("covariance Cholesky failed");
        }
        Matrix L = llt.matrixL();
        // chunked draws; the stream is filled column by column, so the chunk
        // size does not affect the sampled values
        const int chunk = 256;
        Matrix W(n, chunk), Z(n, chunk);
        int done = 0;
        while (done < mc_samples) {
            int c = std::min(chunk, mc_samples - done);
            for (int s = 0; s < c; ++s)
                for (Eigen::Index i = 0; i < n; ++i) W(i, s) = rng.normal();
            Z.leftCols(c).noalias() = L * W.leftCols(c);
            for (int s = 0; s < c; ++s) stats.push_back(statf(Z.col(s)));
            done += c;
        }
    } else {
        // factor form: Z = X_s^T w / sqrt(m) has exactly the estimated
        // covariance; avoids an n x n Cholesky at large n
        Dataset sub = rows.size() == static_cast<std::size_t>(ds.N()) ? ds : subset_rows(ds, rows);
        Vector w(static_cast<Eigen::Index>(rows.size()));
        for (int s = 0; s < mc_samples; ++s) {
            for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = rng.normal();
            Vector z = sub.X.tmv(w) / std::sqrt(m);
            stats.push_back(statf(z));
        }
    }
    std::sort(stats.begin(), stats.end());
    auto idx = static_cast<std::size_t>(
        std::ceil((1.0 - a) * static_cast<double>(mc_samples))) ;
    if (idx == 0) idx = 1;
    if (idx > stats.size()) idx = stats.size();
    return stats[idx - 1];
}

const double kPiRatio = M_PI / (M_PI - 2.0);

} // namespace

double lambda_blanchet_l1(const Dataset& ds, double a, int mc_samples, std::uint64_t seed) {
    double q = mc_quantile(ds, a, mc_samples, seed, [](const Vector& z) {
        double m = z.lpNorm<Eigen::Infinity>();
        return kPiRatio * m * m;
    });
    return std::sqrt(q);
}

double lambda_blanchet_group(const Dataset& ds, const Regularizer& reg, double a, int mc_samples,
                             std::uint64_t seed) {
    double q = mc_quantile(ds, a, mc_samples, seed, [&](const Vector& z) {
        double p = dual_seminorm(z, reg);
        return kPiRatio * p * p;
    });
    return std::sqrt(q);
}

namespace {

// ||X_G||^2 by power iteration on X_G^T X_G.
double group_spectral_sq(const DesignMatrix& X, const std::vector<int>& g) {
    const Eigen::Index m = static_cast<Eigen::Index>(g.size());
    if (m == 1) {
        Vector e = Vector::Ones(1);
        Vector col = Vector::Zero(X.rows());
        X.scatter_add(g, e, col);
        return col.squaredNorm();
    }
    Vector v(m);
    for (Eigen::Index i = 0; i < m; ++i) v[i] = 1.0 + 1e-3 * static_cast<double>(i);
    v /= v.norm();
    double lam = 0.0;
    for (int it = 0; it < 20000; ++it) {
        Vector xv = Vector::Zero(X.rows());
        X.scatter_add(g, v, xv);
        Vector av = X.gather_dot(g, xv); // X_G^T X_G v
        double nv = av.norm();
        if (nv == 0.0) return 0.0;
        av /= nv;
        double lam_new = 0.0;
        {
            Vector xv2 = Vector::Zero(X.rows());
            X.scatter_add(g, av, xv2);
            lam_new = xv2.squaredNorm(); // Rayleigh quotient of the unit vector
        }
        if (std::fabs(lam_new - lam) <= 1e-10 * std::max(1.0, lam_new)) {
            return lam_new;
        }
        lam = lam_new;
        v = av;
    }
    return lam;
}

} // namespace

double lambda_bun(const Dataset& ds, const GroupStructure& groups, double a) {
    const double N = static_cast<double>(ds.N());
    const int g = groups.num_groups();
    if (g == 0) throw InvalidRegime("lambda_bun needs at least one group");
    std::size_t t_min = groups.groups[0].size(), t_max = groups.groups[0].size();
    for (const auto& grp : groups.groups) {
        t_min = std::min(t_min, grp.size());
        t_max = std::max(t_max, grp.size());
    }
    if (N <= static_cast<double>(t_max))
        throw InvalidRegime("lambda_bun needs N > max group size");
    double tau0 = f_quantile(static_cast<double>(t_min), N - static_cast<double>(t_min),
                             1.0 - a / static_cast<double>(g));
    double denom = static_cast<double>(t_min) * tau0 + N - static_cast<double>(t_max);
    if (denom <= 0.0) throw InvalidRegime("lambda_bun positivity condition fails");
    double zeta_max = 0.0;
    for (const auto& grp : groups.groups)
        zeta_max = std::max(zeta_max, group_spectral_sq(ds.X, grp) / N);
    return std::sqrt(zeta_max * tau0 / denom) * std::sqrt(N);
}

double lambda_by_rule(const LambdaRule& rule, const Dataset& ds, const Regularizer& reg) {
    switch (rule.rule) {
        case LambdaRuleKind::Bel: return lambda_bel(ds.n(), rule.a);
        case LambdaRuleKind::StS: return lambda_st(ds.n(), ds.N(), rule.a);
        case LambdaRuleKind::BlS: return lambda_blanchet_l1(ds, rule.a, rule.mc_samples, rule.seed);
        case LambdaRuleKind::Bun:
            if (reg.kind != PenaltyKind::SparseGroup)
                throw InvalidRegime("lambda_bun needs a group structure");
            return lambda_bun(ds, reg.groups, rule.a);
        case LambdaRuleKind::StG:
            if (reg.kind != PenaltyKind::SparseGroup)
                throw InvalidRegime("lambda_stg needs a group structure");
            return lambda_st(reg.groups.num_groups(), ds.N(), rule.a);
        case LambdaRuleKind::BlG:
            return lambda_blanchet_group(ds, reg, rule.a, rule.mc_samples, rule.seed);
        case LambdaRuleKind::Jia: return lambda_jia(ds.n(), ds.N(), rule.a);
    }
    throw InvalidRegime("unknown lambda rule");
}

std::vector<int> cv_folds(Eigen::Index N, int folds, std::uint64_t seed) {
    std::vector<int> perm(static_cast<std::size_t>(N));
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    for (std::size_t i = perm.size() - 1; i > 0; --i)
        std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
    std::vector<int> fold_of(static_cast<std::size_t>(N));
    for (std::size_t pos = 0; pos < perm.size(); ++pos)
        fold_of[static_cast<std::size_t>(perm[pos])] = static_cast<int>(pos % folds);
    return fold_of;
}

std::vector<double> default_lambda_grid() {
    std::vector<double> out;
    for (int k = 0; k <= 40; ++k) out.push_back(std::pow(10.0, -1.0 + 0.05 * k));
    return out;
}

std::vector<double> default_w1_grid() {
    std::vector<double> out;
    for (int k = 0; k <= 10; ++k) out.push_back(0.1 * k);
    return out;
}

CvResult cross_validate(const Dataset& ds, const Regularizer& proto,
                        const std::vector<double>& lambdas, const std::vector<double>& w1s,
                        const std::vector<int>& fold_of, const SolverConfig& cfg) {
    int folds = 0;
    for (int f : fold_of) folds = std::max(folds, f + 1);
    std::vector<std::vector<int>> train_rows(static_cast<std::size_t>(folds)),
        val_rows(static_cast<std::size_t>(folds));
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
        for (int f = 0; f < folds; ++f) {
            if (fold_of[i] == f)
                val_rows[static_cast<std::size_t>(f)].push_back(static_cast<int>(i));
            else
                train_rows[static_cast<std::size_t>(f)].push_back(static_cast<int>(i));
        }
    }
    std::vector<Dataset> trains, vals;
    for (int f = 0; f < folds; ++f) {
        trains.push_back(subset_rows(ds, train_rows[static_cast<std::size_t>(f)]));
        vals.push_back(subset_rows(ds, val_rows[static_cast<std::size_t>(f)]));
    }

    std::vector<double> w1_list = w1s.empty() ? std::vector<double>{proto.w1} : w1s;
    bool override_w = !w1s.empty();

    CvResult res;
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> sorted_lambdas = lambdas;
    std::sort(sorted_lambdas.begin(), sorted_lambdas.end());
    for (double lam : sorted_lambdas) {
        for (double w1 : w1_list) {
            Regularizer reg = proto;
            if (override_w) {
                reg.w1 = w1;
                reg.w2 = 1.0 - w1;
            }
            SolverConfig run_cfg = cfg;
            run_cfg.lambda = lam;
            double mse = 0.0;
            for (int f = 0; f < folds; ++f) {
                const Dataset& tr = trains[static_cast<std::size_t>(f)];
                const Dataset& va = vals[static_cast<std::size_t>(f)];
                SolveResult sr = ppa_solve(tr, reg, run_cfg);
                mse += (va.X.mv(sr.beta) - va.Y).squaredNorm() /
                       static_cast<double>(va.N());
            }
            mse /= static_cast<double>(folds);
            res.curve.push_back({lam, override_w ? w1 : proto.w1, mse});
            if (mse < best) {
                best = mse;
                res.best_lambda = lam;
                res.best_w1 = override_w ? w1 : proto.w1;
            }
        }
    }
    return res;
}

CvResult cross_validate(const Dataset& ds, const Regularizer& proto,
                        const std::vector<double>& lambdas, const std::vector<double>& w1s,
                        int folds, std::uint64_t seed, const SolverConfig& cfg) {
    if (ds.N() < folds) throw InvalidRegime("cross validation needs N >= folds");
    return cross_validate(ds, proto, lambdas, w1s, cv_folds(ds.N(), folds, seed), cfg);
}

double classification_accuracy(const Vector& beta, const DesignMatrix& X_test,
                               const Vector& Y_test) {
    for (Eigen::Index i = 0; i < Y_test.size(); ++i)
        if (Y_test[i] != 1.0 && Y_test[i] != -1.0)
            throw InvalidRegime("classification labels must be +-1");
    Vector pred = X_test.mv(beta);
    int misses = 0;
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
        double s = pred[i] > 0.0 ? 1.0 : (pred[i] < 0.0 ? -1.0 : 0.0);
        if (s - Y_test[i] != 0.0) ++misses;
    }
    return (1.0 - static_cast<double>(misses) / static_cast<double>(Y_test.size())) * 100.0;
}

} // namespace sqrtreg
