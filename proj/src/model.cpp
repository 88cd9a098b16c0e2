#include "sqrtreg/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sqrtreg/prox.hpp"

namespace sqrtreg {

Vector DesignMatrix::mv(const Vector& v) const {
    if (v.size() != cols()) throw DimensionMismatch("X v");
    return is_sparse_ ? Vector(sparse_ * v) : Vector(dense_ * v);
}

Vector DesignMatrix::tmv(const Vector& w) const {
    if (w.size() != rows()) throw DimensionMismatch("X^T w");
    return is_sparse_ ? Vector(sparse_.transpose() * w) : Vector(dense_.transpose() * w);
}

Vector DesignMatrix::col_sqnorms() const {
    Vector out(cols());
    if (is_sparse_) {
        for (Eigen::Index j = 0; j < sparse_.outerSize(); ++j) {
            double s = 0.0;
            for (SparseMat::InnerIterator it(sparse_, j); it; ++it) s += it.value() * it.value();
            out[j] = s;
        }
    } else {
        out = dense_.colwise().squaredNorm();
    }
    return out;
}

void DesignMatrix::scale_cols(const Vector& d) {
    if (d.size() != cols()) throw DimensionMismatch("scale_cols");
    if (is_sparse_) {
        for (Eigen::Index j = 0; j < sparse_.outerSize(); ++j)
            for (SparseMat::InnerIterator it(sparse_, j); it; ++it) it.valueRef() *= d[j];
    } else {
        dense_ = dense_ * d.asDiagonal();
    }
}

Vector DesignMatrix::gather_dot(const std::vector<int>& idx, const Vector& w) const {
    Vector out(static_cast<Eigen::Index>(idx.size()));
    if (is_sparse_) {
        for (std::size_t k = 0; k < idx.size(); ++k) {
            double s = 0.0;
            for (SparseMat::InnerIterator it(sparse_, idx[k]); it; ++it)
                s += it.value() * w[it.row()];
            out[static_cast<Eigen::Index>(k)] = s;
        }
    } else {
        for (std::size_t k = 0; k < idx.size(); ++k)
            out[static_cast<Eigen::Index>(k)] = dense_.col(idx[k]).dot(w);
    }
    return out;
}

void DesignMatrix::scatter_add(const std::vector<int>& idx, const Vector& coef,
                               Vector& out) const {
    for (std::size_t k = 0; k < idx.size(); ++k) {
        double c = coef[static_cast<Eigen::Index>(k)];
        if (c == 0.0) continue;
        if (is_sparse_) {
            for (SparseMat::InnerIterator it(sparse_, idx[k]); it; ++it)
                out[it.row()] += c * it.value();
        } else {
            out += c * dense_.col(idx[k]);
        }
    }
}

Vector DesignMatrix::col_range_sum(int begin, int end) const {
    Vector out = Vector::Zero(rows());
    if (is_sparse_) {
        for (int j = begin; j < end; ++j)
            for (SparseMat::InnerIterator it(sparse_, j); it; ++it)
                out[it.row()] += it.value();
    } else {
        for (int j = begin; j < end; ++j) out += dense_.col(j);
    }
    return out;
}

Matrix DesignMatrix::gather_cols(const std::vector<int>& idx) const {
    Matrix out = Matrix::Zero(rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (is_sparse_) {
            for (SparseMat::InnerIterator it(sparse_, idx[k]); it; ++it)
                out(it.row(), static_cast<Eigen::Index>(k)) = it.value();
        } else {
            out.col(static_cast<Eigen::Index>(k)) = dense_.col(idx[k]);
        }
    }
    return out;
}

void GroupStructure::validate(Eigen::Index n) const {
    if (weights.size() != num_groups()) throw DimensionMismatch("group weights");
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    Eigen::Index total = 0;
    for (const auto& g : groups) {
        for (int j : g) {
            if (j < 0 || j >= n) throw DimensionMismatch("group index out of range");
            if (seen[static_cast<std::size_t>(j)]) throw Error("groups are not disjoint");
            seen[static_cast<std::size_t>(j)] = 1;
            ++total;
        }
    }
    if (total != n) throw Error("groups do not cover {1,...,n}");
    for (Eigen::Index l = 0; l < weights.size(); ++l)
        if (!(weights[l] > 0.0)) throw Error("group weight must be positive");
}

GroupStructure GroupStructure::contiguous(const std::vector<int>& sizes) {
    GroupStructure gs;
    gs.weights.resize(static_cast<Eigen::Index>(sizes.size()));
    int at = 0;
    for (std::size_t l = 0; l < sizes.size(); ++l) {
        std::vector<int> g(static_cast<std::size_t>(sizes[l]));
        std::iota(g.begin(), g.end(), at);
        at += sizes[l];
        gs.groups.push_back(std::move(g));
        gs.weights[static_cast<Eigen::Index>(l)] = std::sqrt(static_cast<double>(sizes[l]));
    }
    return gs;
}

Regularizer Regularizer::sparse_group(GroupStructure g, double w1, double w2) {
    Regularizer r;
    r.kind = PenaltyKind::SparseGroup;
    r.w1 = w1;
    r.w2 = w2;
    r.groups = std::move(g);
    return r;
}

Regularizer Regularizer::fused(double w1, double w2) {
    Regularizer r;
    r.kind = PenaltyKind::Fused;
    r.w1 = w1;
    r.w2 = w2;
    return r;
}

Regularizer Regularizer::lasso(Eigen::Index n) {
    std::vector<int> sizes(static_cast<std::size_t>(n), 1);
    return sparse_group(GroupStructure::contiguous(sizes), 1.0, 0.0);
}

void Regularizer::validate(Eigen::Index n) const {
    if (w1 < 0.0 || w2 < 0.0 || w1 + w2 <= 0.0)
        throw Error("penalty weights must be nonnegative with w1 + w2 > 0");
    if (kind == PenaltyKind::SparseGroup) groups.validate(n);
}

void SolverConfig::validate() const {
    if (!(lambda > 0.0)) throw Error("lambda must be positive");
    if (!(tol > 0.0)) throw Error("tol must be positive");
    if (!(sigma0 > 0.0 && tau0 > 0.0)) throw Error("sigma0, tau0 must be positive");
    if (!(sigma_floor > 0.0 && tau_floor > 0.0)) throw Error("floors must be positive");
    if (!(ssn_eta > 0.0 && ssn_eta < 1.0)) throw Error("ssn_eta must lie in (0,1)");
    if (!(ssn_varrho > 0.0 && ssn_varrho <= 1.0)) throw Error("ssn_varrho must lie in (0,1]");
    if (!(ls_rho > 0.0 && ls_rho < 1.0)) throw Error("ls_rho must lie in (0,1)");
    if (!(ls_mu > 0.0 && ls_mu < 0.5)) throw Error("ls_mu must lie in (0,0.5)");
    if (!(admm_mu > 0.0)) throw Error("admm_mu must be positive");
    if (damping < 0.0) throw Error("damping must be nonnegative");
}

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Converged: return "converged";
        case SolveStatus::MaxIterations: return "max_iterations";
        case SolveStatus::TimeLimit: return "time_limit";
        case SolveStatus::Overfit: return "overfit";
    }
    return "unknown";
}

const char* to_string(KKTReport::Kind k) {
    switch (k) {
        case KKTReport::Kind::Kkt: return "kkt";
        case KKTReport::Kind::PdGap: return "pdgap";
        case KKTReport::Kind::VarGap: return "vargap";
    }
    return "unknown";
}

Dataset normalize_columns(const Dataset& ds) {
    Vector sq = ds.X.col_sqnorms();
    const double N = static_cast<double>(ds.N());
    Vector d(sq.size());
    for (Eigen::Index j = 0; j < sq.size(); ++j) {
        if (sq[j] <= 0.0) throw ZeroColumn(static_cast<int>(j));
        d[j] = std::sqrt(N / sq[j]);
    }
    Dataset out = ds;
    out.X.scale_cols(d);
    out.normalized = true;
    return out;
}

std::vector<int> zero_columns(const DesignMatrix& X) {
    Vector sq = X.col_sqnorms();
    std::vector<int> out;
    for (Eigen::Index j = 0; j < sq.size(); ++j)
        if (sq[j] <= 0.0) out.push_back(static_cast<int>(j));
    return out;
}

double penalty_value(const Regularizer& reg, const Vector& beta) {
    double val = reg.w1 * beta.lpNorm<1>();
    if (reg.kind == PenaltyKind::SparseGroup) {
        if (!reg.groups.groups.empty()) {
            double grp = 0.0;
            for (int l = 0; l < reg.groups.num_groups(); ++l) {
                double s = 0.0;
                for (int j : reg.groups.groups[static_cast<std::size_t>(l)]) {
                    if (j >= beta.size()) throw DimensionMismatch("penalty_value");
                    s += beta[j] * beta[j];
                }
                grp += reg.groups.weights[l] * std::sqrt(s);
            }
            val += reg.w2 * grp;
        }
    } else {
        val += reg.w2 * fused_differences(beta).lpNorm<1>();
    }
    return val;
}

Vector fused_differences(const Vector& beta) {
    Eigen::Index n = beta.size();
    if (n <= 1) return Vector(0);
    return beta.head(n - 1) - beta.tail(n - 1);
}

int nnz_estimate(const Vector& v) {
    const double total = v.lpNorm<1>();
    if (total == 0.0) return 0;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(v.size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return std::fabs(v[a]) > std::fabs(v[b]);
    });
    double acc = 0.0;
    const double target = 0.999 * total;
    for (std::size_t j = 0; j < order.size(); ++j) {
        acc += std::fabs(v[order[j]]);
        if (acc >= target) return static_cast<int>(j + 1);
    }
    return static_cast<int>(v.size());
}

std::pair<int, int> nnz_stats(const Vector& beta, const Regularizer& reg) {
    int nz = nnz_estimate(beta);
    int second = 0;
    if (reg.kind == PenaltyKind::SparseGroup) {
        Vector b(reg.groups.num_groups());
        for (int l = 0; l < reg.groups.num_groups(); ++l) {
            double s = 0.0;
            for (int j : reg.groups.groups[static_cast<std::size_t>(l)]) s += beta[j] * beta[j];
            b[l] = std::sqrt(s);
        }
        second = nnz_estimate(b);
    } else {
        second = nnz_estimate(fused_differences(beta));
    }
    return {nz, second};
}

KKTReport kkt_residual(const Dataset& ds, const Regularizer& reg, double lambda,
                       const Vector& beta, const KKTExtras& extras) {
    Vector r = ds.X.mv(beta) - ds.Y;
    double rn = r.norm();
    if (rn > overfit_threshold(ds.Y)) {
        Vector beta_bar = ds.X.tmv(r / rn);
        Vector prox = prox_penalty(beta - beta_bar, reg, lambda);
        double num = (beta - prox).norm();
        return {KKTReport::Kind::Kkt, num / (1.0 + beta.norm() + beta_bar.norm())};
    }
    if (extras.obj_primal && extras.obj_dual) {
        double p = *extras.obj_primal, d = *extras.obj_dual;
        return {KKTReport::Kind::PdGap, (p - d) / (1.0 + std::fabs(p) + std::fabs(d))};
    }
    if (extras.prev_beta) {
        double num = (beta - *extras.prev_beta).norm();
        return {KKTReport::Kind::VarGap, num / (1.0 + beta.norm() + extras.prev_beta->norm())};
    }
    return {KKTReport::Kind::VarGap, std::numeric_limits<double>::infinity()};
}

} // namespace sqrtreg
