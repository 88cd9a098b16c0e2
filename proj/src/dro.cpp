#include "sqrtreg/dro.hpp"

#include <cmath>
#include <limits>

#include "sqrtreg/prox.hpp"
#include "sqrtreg/reference.hpp"

namespace sqrtreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Smallest t >= 0 with ||prox_l1(a, t w1)|| <= t w2 omega: the dual norm of
// w1 ||.||_1 + w2 omega ||.|| on one group. LHS is nonincreasing and RHS
// increasing in t, so bisection applies.
double group_dual_bisect(const Vector& a, double w1, double w2, double omega) {
    double an = a.norm();
    if (an == 0.0) return 0.0;
    double hi = an / (w2 * omega) + a.lpNorm<Eigen::Infinity>() / w1;
    double lo = 0.0;
    for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        if (prox_l1(a, mid * w1).norm() <= mid * w2 * omega)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

} // namespace

bool dual_seminorm_supported(const Regularizer& reg, Eigen::Index n) {
    if (reg.kind == PenaltyKind::SparseGroup) return true;
    return reg.w1 == 0.0 || n <= 20;
}

double dual_seminorm(const Vector& alpha, const Regularizer& reg) {
    if (reg.kind == PenaltyKind::SparseGroup) {
        if (reg.w2 == 0.0) return alpha.lpNorm<Eigen::Infinity>() / reg.w1;
        double best = 0.0;
        for (int l = 0; l < reg.groups.num_groups(); ++l) {
            const auto& g = reg.groups.groups[static_cast<std::size_t>(l)];
            Vector a(static_cast<Eigen::Index>(g.size()));
            for (std::size_t k = 0; k < g.size(); ++k)
                a[static_cast<Eigen::Index>(k)] = alpha[g[k]];
            double h;
            if (reg.w1 == 0.0)
                h = a.norm() / (reg.w2 * reg.groups.weights[l]);
            else
                h = group_dual_bisect(a, reg.w1, reg.w2, reg.groups.weights[l]);
            best = std::max(best, h);
        }
        return best;
    }
    // fused penalty
    const Eigen::Index n = alpha.size();
    if (reg.w1 == 0.0) {
        double sum = alpha.sum();
        if (std::fabs(sum) > 1e-12 * (1.0 + alpha.lpNorm<1>())) return kInf;
        // B^T abar = alpha has the unique solution abar_i = sum_{j<=i} alpha_j
        double c = 0.0, best = 0.0;
        for (Eigen::Index i = 0; i + 1 < n; ++i) {
            c += alpha[i];
            best = std::max(best, std::fabs(c));
        }
        return best / reg.w2;
    }
    if (n > 20)
        throw Unsupported("fused dual norm with w1 > 0 is only evaluated for n <= 20");
    return reference::dual_seminorm_ball_ascent(alpha, reg);
}

double phi_gamma(double Z, double p_beta, double gamma) {
    const double p2 = p_beta * p_beta;
    if (p2 < gamma) return Z * Z + Z * Z * p2 / (gamma - p2);
    if (p2 == gamma) return Z * p_beta == 0.0 ? Z * Z : kInf;
    return kInf;
}

namespace {

void require_normalized_weights(const Regularizer& reg) {
    if (std::fabs(reg.w1 + reg.w2 - 1.0) > 1e-12)
        throw InvalidRegime("the robust-loss identities require w1 + w2 = 1");
}

} // namespace

WorstCaseLoss worst_case_loss(const Dataset& ds, const Regularizer& reg, const Vector& beta,
                              double delta) {
    require_normalized_weights(reg);
    if (delta < 0.0) throw InvalidRegime("delta must be nonnegative");
    const double N = static_cast<double>(ds.N());
    double r = (ds.Y - ds.X.mv(beta)).norm();
    double p = penalty_value(reg, beta);
    double root = r + std::sqrt(delta * N) * p;
    WorstCaseLoss out;
    out.value = root * root / N;
    out.gamma_star = (r * p == 0.0) ? p * p
                                    : r * p / std::sqrt(N * delta) + p * p; // inf when delta = 0
    return out;
}

double worst_case_loss_numeric(const Dataset& ds, const Regularizer& reg, const Vector& beta,
                               double delta) {
    require_normalized_weights(reg);
    const double N = static_cast<double>(ds.N());
    double R2 = (ds.Y - ds.X.mv(beta)).squaredNorm();
    double p = penalty_value(reg, beta);
    double p2 = p * p;
    if (p == 0.0) return R2 / N;       // gamma = 0 attains the infimum
    if (R2 == 0.0) return delta * p2;  // gamma = p^2 attains it
    if (delta == 0.0) return R2 / N;   // infimum approached as gamma -> inf

    // g(s) = (p^2 + e^s) delta + (R^2/N)(1 + p^2/e^s), golden-section on s.
    auto g = [&](double s) {
        double d = std::exp(s);
        return (p2 + d) * delta + (R2 / N) * (1.0 + p2 / d);
    };
    double lo = std::log(1e-10 * (1.0 + p2));
    double hi = std::log(1e10 * (1.0 + p2 + R2 / N / delta));
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = g(x1), f2 = g(x2);
    for (int it = 0; it < 200; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = g(x2);
        }
    }
    return std::min(f1, f2);
}

DroReport dro_equivalence_check(const Dataset& ds, const Regularizer& reg, double lambda,
                                const std::vector<Vector>& betas) {
    DroReport rep;
    const double N = static_cast<double>(ds.N());
    for (const Vector& beta : betas) {
        double delta = lambda * lambda / N;
        double lhs = std::sqrt(N * worst_case_loss(ds, reg, beta, delta).value);
        double rhs = (ds.Y - ds.X.mv(beta)).norm() + lambda * penalty_value(reg, beta);
        double dev = std::fabs(lhs - rhs);
        rep.max_deviation = std::max(rep.max_deviation, dev);
        if (dev > 1e-9 * (1.0 + rhs)) rep.pass = false;
        ++rep.count;
    }
    return rep;
}

} // namespace sqrtreg
