#include "sqrtreg/reference.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <functional>

#include "sqrtreg/prox.hpp"
#include "sqrtreg/rng.hpp"
#include "sqrtreg/stats.hpp"

namespace sqrtreg::reference {

namespace {

// Exact 1-D solve of min_t k1|t| + k2 sqrt(t^2 + c2) + 1/2 (t - x)^2.
double coord_min(double x, double k1, double k2, double c2) {
    if (c2 <= 0.0) {
        double a = std::fabs(x) - (k1 + k2);
        return a > 0.0 ? (x > 0.0 ? a : -a) : 0.0;
    }
    if (std::fabs(x) <= k1) return 0.0;
    double ax = std::fabs(x);
    double lo = 0.0, hi = ax;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double grad = mid + k1 + k2 * mid / std::sqrt(mid * mid + c2) - ax;
        if (grad < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    double t = 0.5 * (lo + hi);
    return x > 0.0 ? t : -t;
}

double sgl_group_objective(const Vector& y, const Vector& x, double k1, double k2) {
    return k1 * y.lpNorm<1>() + k2 * y.norm() + 0.5 * (x - y).squaredNorm();
}

} // namespace

Vector prox_sparse_group_cd(const Vector& x, const Regularizer& reg, double kappa, int sweeps) {
    Vector out(x.size());
    const double k1 = kappa * reg.w1;
    for (int l = 0; l < reg.groups.num_groups(); ++l) {
        const auto& g = reg.groups.groups[static_cast<std::size_t>(l)];
        const double k2 = kappa * reg.w2 * reg.groups.weights[l];
        Vector xg(static_cast<Eigen::Index>(g.size()));
        for (std::size_t j = 0; j < g.size(); ++j)
            xg[static_cast<Eigen::Index>(j)] = x[g[j]];
        // zero certificate: 0 is optimal iff dist(x, k1-box) <= k2
        Vector y;
        if (prox_l1(xg, k1).norm() <= k2) {
            y = Vector::Zero(xg.size());
        } else {
            y = xg;
            for (int sweep = 0; sweep < sweeps; ++sweep) {
                double max_change = 0.0;
                for (Eigen::Index i = 0; i < y.size(); ++i) {
                    double c2 = y.squaredNorm() - y[i] * y[i];
                    double t = coord_min(xg[i], k1, k2, c2);
                    max_change = std::max(max_change, std::fabs(t - y[i]));
                    y[i] = t;
                }
                if (max_change < 1e-14) break;
            }
            if (sgl_group_objective(Vector::Zero(xg.size()), xg, k1, k2) <
                sgl_group_objective(y, xg, k1, k2))
                y.setZero();
        }
        for (std::size_t j = 0; j < g.size(); ++j)
            out[g[j]] = y[static_cast<Eigen::Index>(j)];
    }
    return out;
}

namespace {

Vector bt_apply(const Vector& z, Eigen::Index n) { // B^T z
    Vector out = Vector::Zero(n);
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        out[i] += z[i];
        out[i + 1] -= z[i];
    }
    return out;
}

Vector b_apply(const Vector& v) { // B v
    Eigen::Index n = v.size();
    Vector out(n - 1);
    for (Eigen::Index i = 0; i + 1 < n; ++i) out[i] = v[i] - v[i + 1];
    return out;
}

void clamp_box(Vector& v, double bound) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = std::min(std::max(v[i], -bound), bound);
}

void project_group_balls(Vector& b, const Regularizer& reg, double kappa) {
    for (int l = 0; l < reg.groups.num_groups(); ++l) {
        const auto& g = reg.groups.groups[static_cast<std::size_t>(l)];
        double radius = kappa * reg.w2 * reg.groups.weights[l];
        double sq = 0.0;
        for (int j : g) sq += b[j] * b[j];
        double nb = std::sqrt(sq);
        if (nb > radius && nb > 0.0) {
            double s = radius / nb;
            for (int j : g) b[j] *= s;
        }
    }
}

} // namespace

// prox_{kappa p}(x) = x - proj_C(x) with C = kappa * subdifferential of p at 0;
// the projection solved by FISTA over the product of boxes / group balls.
Vector prox_dual_projection(const Vector& x, const Regularizer& reg, double kappa, int iters) {
    const Eigen::Index n = x.size();
    const double box1 = kappa * reg.w1;
    if (reg.kind == PenaltyKind::SparseGroup) {
        Vector a = Vector::Zero(n), b = Vector::Zero(n);
        Vector ya = a, yb = b;
        double tprev = 1.0;
        const double step = 0.5; // L = 2 for [I I]
        for (int it = 0; it < iters; ++it) {
            Vector r = x - ya - yb;
            Vector an = ya + step * r;
            clamp_box(an, box1);
            Vector bn = yb + step * r;
            project_group_balls(bn, reg, kappa);
            double t = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tprev * tprev));
            ya = an + ((tprev - 1.0) / t) * (an - a);
            yb = bn + ((tprev - 1.0) / t) * (bn - b);
            if ((an - a).lpNorm<Eigen::Infinity>() + (bn - b).lpNorm<Eigen::Infinity>() < 1e-15)
                break;
            a = an;
            b = bn;
            tprev = t;
        }
        return x - a - b;
    }
    Vector a = Vector::Zero(n), z = Vector::Zero(n - 1);
    Vector ya = a, yz = z;
    double tprev = 1.0;
    const double box2 = kappa * reg.w2;
    const double step = 0.2; // L <= 1 + ||B||^2 <= 5
    for (int it = 0; it < iters; ++it) {
        Vector r = x - ya - bt_apply(yz, n);
        Vector an = ya + step * r;
        clamp_box(an, box1);
        Vector zn = yz + step * b_apply(r);
        clamp_box(zn, box2);
        double t = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tprev * tprev));
        ya = an + ((tprev - 1.0) / t) * (an - a);
        yz = zn + ((tprev - 1.0) / t) * (zn - z);
        if ((an - a).lpNorm<Eigen::Infinity>() + (zn - z).lpNorm<Eigen::Infinity>() < 1e-15)
            break;
        a = an;
        z = zn;
        tprev = t;
    }
    return x - a - bt_apply(z, n);
}

Matrix dense_jacobian(const DesignMatrix& X, const Vector& beta_tilde, const Vector& y_tilde,
                      const Regularizer& reg, double lambda, double sigma, double tau) {
    const Eigen::Index N = X.rows(), n = X.cols();
    Matrix H = Matrix::Zero(N, N);
    Matrix Xd = X.to_dense();
    const double kappa1 = lambda * reg.w1 / sigma;

    if (reg.kind == PenaltyKind::SparseGroup) {
        for (int l = 0; l < reg.groups.num_groups(); ++l) {
            const auto& g = reg.groups.groups[static_cast<std::size_t>(l)];
            const double kappa2 = lambda * reg.w2 * reg.groups.weights[l] / sigma;
            Eigen::Index m = static_cast<Eigen::Index>(g.size());
            Vector bt(m);
            for (Eigen::Index j = 0; j < m; ++j) bt[j] = beta_tilde[g[static_cast<std::size_t>(j)]];
            Vector z = prox_l1(bt, kappa1);
            Matrix U = Matrix::Zero(m, m);
            for (Eigen::Index j = 0; j < m; ++j)
                U(j, j) = std::fabs(bt[j]) > kappa1 ? 1.0 : 0.0;
            Matrix V = Matrix::Zero(m, m);
            double nz = z.norm();
            if (nz > kappa2) {
                V = (1.0 - kappa2 / nz) * Matrix::Identity(m, m) +
                    (kappa2 / (nz * nz * nz)) * z * z.transpose();
            }
            Matrix Xg(N, m);
            for (Eigen::Index j = 0; j < m; ++j) Xg.col(j) = Xd.col(g[static_cast<std::size_t>(j)]);
            H.noalias() += (1.0 / sigma) * Xg * V * U * Xg.transpose();
        }
    } else {
        const double kappa2 = lambda * reg.w2 / sigma;
        Vector z = prox_tv1d(beta_tilde, kappa2);
        Vector bz = b_apply(z);
        const double tie_tol = 1e-12 * (1.0 + z.lpNorm<Eigen::Infinity>());
        Matrix B = Matrix::Zero(n - 1, n);
        for (Eigen::Index i = 0; i + 1 < n; ++i) {
            B(i, i) = 1.0;
            B(i, i + 1) = -1.0;
        }
        Matrix Sig = Matrix::Zero(n - 1, n - 1);
        for (Eigen::Index i = 0; i + 1 < n; ++i)
            Sig(i, i) = std::fabs(bz[i]) <= tie_tol ? 1.0 : 0.0;
        Matrix M = Sig * B * B.transpose() * Sig;
        // pseudo-inverse via eigendecomposition
        Eigen::SelfAdjointEigenSolver<Matrix> eig(M);
        Vector ev = eig.eigenvalues();
        Matrix pinv = Matrix::Zero(n - 1, n - 1);
        double cutoff = 1e-10 * std::max(1.0, ev.cwiseAbs().maxCoeff());
        for (Eigen::Index i = 0; i < ev.size(); ++i) {
            if (std::fabs(ev[i]) > cutoff)
                pinv.noalias() +=
                    (1.0 / ev[i]) * eig.eigenvectors().col(i) * eig.eigenvectors().col(i).transpose();
        }
        Matrix W = Matrix::Identity(n, n) - B.transpose() * pinv * B;
        Matrix U = Matrix::Zero(n, n);
        for (Eigen::Index j = 0; j < n; ++j) U(j, j) = std::fabs(z[j]) > kappa1 ? 1.0 : 0.0;
        H.noalias() += (1.0 / sigma) * Xd * U * W * Xd.transpose();
    }

    const double kappa = 1.0 / tau;
    double ny = y_tilde.norm();
    if (ny > kappa) {
        H += (1.0 / tau) * (1.0 - kappa / ny) * Matrix::Identity(N, N);
        H.noalias() += (1.0 / tau) * (kappa / (ny * ny * ny)) * y_tilde * y_tilde.transpose();
    }
    return H;
}

namespace {

// Projection onto {p <= 1}: bisection on t in prox_{t p}, valid because
// p(prox_{t p}(x)) is continuous and nonincreasing in t.
Vector project_penalty_ball(const Vector& x, const Regularizer& reg) {
    if (penalty_value(reg, x) <= 1.0) return x;
    double lo = 0.0, hi = 1.0;
    while (penalty_value(reg, prox_penalty(x, reg, hi)) > 1.0) {
        hi *= 2.0;
        if (hi > 1e14) break;
    }
    for (int it = 0; it < 120; ++it) {
        double mid = 0.5 * (lo + hi);
        if (penalty_value(reg, prox_penalty(x, reg, mid)) > 1.0)
            lo = mid;
        else
            hi = mid;
    }
    return prox_penalty(x, reg, hi); // feasible side of the bracket
}

} // namespace

double dual_seminorm_ball_ascent(const Vector& alpha, const Regularizer& reg, int restarts,
                                 int iters) {
    const Eigen::Index n = alpha.size();
    double an = alpha.norm();
    if (an == 0.0) return 0.0;
    Rng rng(0x5eed);
    double best = 0.0;
    for (int r = 0; r < restarts; ++r) {
        Vector x(n);
        if (r == 0)
            x = alpha / an;
        else
            for (Eigen::Index i = 0; i < n; ++i) x[i] = rng.normal();
        x = project_penalty_ball(x, reg);
        double val = alpha.dot(x);
        // monotone projected ascent with a halving step, then a polish pass
        double step = 1.0 / an;
        for (int it = 0; it < iters && step > 1e-13; ++it) {
            Vector cand = project_penalty_ball(x + step * alpha, reg);
            double cval = alpha.dot(cand);
            if (cval > val + 1e-16 * (1.0 + std::fabs(val))) {
                x = cand;
                val = cval;
            } else {
                step *= 0.5;
            }
        }
        best = std::max(best, val);
    }
    return best;
}

double dual_seminorm_split_descent(const Vector& alpha, const Regularizer& reg, int iters) {
    // min over abar of max(||alpha - B^T abar||_inf / w1, ||abar||_inf / w2)
    const Eigen::Index n = alpha.size();
    Vector abar = Vector::Zero(n - 1);
    { // cumulative-sum start (exact for the pure seminorm case)
        double c = 0.0;
        for (Eigen::Index i = 0; i + 1 < n; ++i) {
            c += alpha[i];
            abar[i] = c;
        }
    }
    auto value = [&](const Vector& ab) {
        double t1 = (alpha - bt_apply(ab, n)).lpNorm<Eigen::Infinity>() / reg.w1;
        double t2 = ab.lpNorm<Eigen::Infinity>() / reg.w2;
        return std::max(t1, t2);
    };
    double best = value(abar);
    Vector cur = abar;
    double scale = std::max(1.0, abar.lpNorm<Eigen::Infinity>());
    for (int it = 0; it < iters; ++it) {
        Vector res = alpha - bt_apply(cur, n);
        double t1 = res.lpNorm<Eigen::Infinity>() / reg.w1;
        double t2 = cur.lpNorm<Eigen::Infinity>() / reg.w2;
        Vector g = Vector::Zero(n - 1);
        if (t1 >= t2) {
            Eigen::Index imax = 0;
            res.cwiseAbs().maxCoeff(&imax);
            double s = res[imax] > 0.0 ? 1.0 : -1.0;
            // d/dabar of (alpha - B^T abar)_{imax}
            if (imax < n - 1) g[imax] -= s / reg.w1;
            if (imax > 0) g[imax - 1] += s / reg.w1;
        } else {
            Eigen::Index jmax = 0;
            cur.cwiseAbs().maxCoeff(&jmax);
            g[jmax] = (cur[jmax] > 0.0 ? 1.0 : -1.0) / reg.w2;
        }
        double gn = g.norm();
        if (gn == 0.0) break;
        double step = 0.5 * scale / (gn * std::sqrt(static_cast<double>(it + 1)));
        cur -= step * g;
        best = std::min(best, value(cur));
    }
    return best;
}

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fb,
               double fm, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, m, fa, fm, flm, 0.5 * tol, depth - 1) +
           simpson(f, m, b, fm, fb, frm, 0.5 * tol, depth - 1);
}

} // namespace

double incomplete_beta_quadrature(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    // substitution t = s^{1/a} removes the t = 0 singularity:
    // I = (1/a) int_0^{x^a} (1 - s^{1/a})^{b-1} ds / B(a, b)
    auto f = [&](double s) {
        double t = std::pow(s, 1.0 / a);
        return std::pow(1.0 - t, b - 1.0) / a;
    };
    double upper = std::pow(x, a);
    double fa = f(1e-300), fb = f(upper), fm = f(0.5 * upper);
    double integral = simpson(f, 0.0, upper, fa, fb, fm, 1e-14, 48);
    double lnB = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    return integral / std::exp(lnB);
}

double norm_quantile_bisect(double q) {
    double lo = -40.0, hi = 40.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (norm_cdf(mid) < q)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace sqrtreg::reference
