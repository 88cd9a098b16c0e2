#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sqrtreg/errors.hpp"

namespace sqrtreg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMat = Eigen::SparseMatrix<double>; // column-major

/// Design matrix stored dense or column-sparse. Column-major storage keeps the
/// column-restricted products X_G v used by the Newton kernels cheap.
class DesignMatrix {
public:
    DesignMatrix() = default;
    explicit DesignMatrix(Matrix X) : dense_(std::move(X)), sparse_(), is_sparse_(false) {}
    explicit DesignMatrix(SparseMat X) : sparse_(std::move(X)), is_sparse_(true) {
        sparse_.makeCompressed();
    }

    Eigen::Index rows() const { return is_sparse_ ? sparse_.rows() : dense_.rows(); }
    Eigen::Index cols() const { return is_sparse_ ? sparse_.cols() : dense_.cols(); }
    bool is_sparse() const { return is_sparse_; }

    Vector mv(const Vector& v) const;   // X v
    Vector tmv(const Vector& w) const;  // X^T w

    /// Squared Euclidean norm of every column.
    Vector col_sqnorms() const;

    /// X <- X Diag(d).
    void scale_cols(const Vector& d);

    /// (x_i^T w) for i in idx.
    Vector gather_dot(const std::vector<int>& idx, const Vector& w) const;

    /// out += sum_i coef[i] * x_{idx[i]}.
    void scatter_add(const std::vector<int>& idx, const Vector& coef, Vector& out) const;

    /// Sum of columns j in [begin, end).
    Vector col_range_sum(int begin, int end) const;

    /// Dense copy of the selected columns (small index sets only).
    Matrix gather_cols(const std::vector<int>& idx) const;

    Matrix to_dense() const { return is_sparse_ ? Matrix(sparse_) : dense_; }

    const Matrix& dense() const { return dense_; }
    const SparseMat& sparse() const { return sparse_; }

private:
    Matrix dense_;
    SparseMat sparse_;
    bool is_sparse_ = false;
};

/// A regression instance: X (N x n), response Y (length N).
struct Dataset {
    DesignMatrix X;
    Vector Y;
    bool normalized = false;

    Eigen::Index N() const { return X.rows(); }
    Eigen::Index n() const { return X.cols(); }
};

/// Partition of {0,...,n-1} into groups with positive weights.
struct GroupStructure {
    std::vector<std::vector<int>> groups;
    Vector weights;

    int num_groups() const { return static_cast<int>(groups.size()); }

    /// Checks that groups partition {0,...,n-1} and all weights are positive.
    void validate(Eigen::Index n) const;

    /// Contiguous blocks of the given sizes, weight sqrt(size) each.
    static GroupStructure contiguous(const std::vector<int>& sizes);
};

enum class PenaltyKind { SparseGroup, Fused };

/// Penalty p(beta) = w1 ||beta||_1 + w2 * (group term or ||B beta||_1).
/// The fused difference operator B has rows (e_i - e_{i+1})^T and is never
/// materialized.
struct Regularizer {
    PenaltyKind kind = PenaltyKind::SparseGroup;
    double w1 = 0.0;
    double w2 = 1.0;
    GroupStructure groups; // used only for SparseGroup

    static Regularizer sparse_group(GroupStructure g, double w1, double w2);
    static Regularizer fused(double w1, double w2);
    static Regularizer lasso(Eigen::Index n); // singleton groups, w1 = 1

    void validate(Eigen::Index n) const;
};

struct SolverConfig {
    double lambda = 1.0;
    double tol = 1e-7;
    int max_outer = 100;
    int max_inner_total = 10000;
    double max_time_seconds = 1800.0;
    double sigma0 = 1.0;
    double tau0 = 1.0;
    double sigma_floor = 1e-4;
    double tau_floor = 1e-4;
    double prox_decay = 0.1; // sigma_{k+1} = max(decay * sigma_k, floor)
    double ssn_eta = 0.1;       // eta in (0,1)
    double ssn_varrho = 0.5;    // varrho in (0,1]
    int ssn_max_iters = 50;     // per subproblem
    double ls_rho = 0.5;        // rho in (0,1)
    double ls_mu = 1e-4;        // mu in (0,0.5)
    double admm_mu = 1.0;       // mu > 0
    double admm_rho = 1.618;
    int admm_max_iters = 1000000;
    int cg_max_iters = 300;
    double damping = 1e-12;
    bool ssn_warm_start = true;       // false restores the printed cold start u0 = 0
    int newton_dense_threshold = 500; // direct factorization below, CG above

    void validate() const;
};

enum class SolveStatus { Converged, MaxIterations, TimeLimit, Overfit };

const char* to_string(SolveStatus s);

/// Which termination quantity fired and its value.
struct KKTReport {
    enum class Kind { Kkt, PdGap, VarGap };
    Kind kind = Kind::Kkt;
    double value = 0.0;
};

const char* to_string(KKTReport::Kind k);

struct SolveResult {
    Vector beta;
    Vector residual_y; // X beta - Y at exit
    Vector dual_u;     // PPDNA / dADMM only
    SolveStatus status = SolveStatus::Converged;
    KKTReport criterion;
    int outer_iters = 0;
    int inner_iters = 0;
    double objective_primal = 0.0;
    double objective_dual = 0.0;
    double wall_seconds = 0.0;
    std::vector<double> kkt_history;
};

/// Scales columns so diag((1/N) X^T X) = 1. Throws ZeroColumn on a zero column.
Dataset normalize_columns(const Dataset& ds);

/// Indices of identically-zero columns (loaders report these instead of
/// silently producing them).
std::vector<int> zero_columns(const DesignMatrix& X);

/// p(beta).
double penalty_value(const Regularizer& reg, const Vector& beta);

/// First differences (beta_1 - beta_2, ..., beta_{n-1} - beta_n).
Vector fused_differences(const Vector& beta);

/// 0.999-mass estimates of the nonzero counts: first component applies the
/// rule to |beta|, second to the group norms (SparseGroup) or to B beta
/// (Fused). The zero vector yields 0. Magnitude ties sort by original index.
std::pair<int, int> nnz_stats(const Vector& beta, const Regularizer& reg);

/// The 0.999-mass rule on a single vector.
int nnz_estimate(const Vector& v);

/// Optional context for the termination report when ||X beta - Y|| = 0.
struct KKTExtras {
    std::optional<double> obj_primal;
    std::optional<double> obj_dual;
    std::optional<Vector> prev_beta;
};

/// Termination criterion at beta. Returns Kkt when the residual is nonzero;
/// otherwise PdGap when both objectives are supplied, else VarGap (infinite
/// when no previous iterate is available either).
KKTReport kkt_residual(const Dataset& ds, const Regularizer& reg, double lambda,
                       const Vector& beta, const KKTExtras& extras = {});

/// Relative threshold under which a residual is treated as exactly zero.
inline double overfit_threshold(const Vector& Y) { return 1e-12 * (1.0 + Y.norm()); }

} // namespace sqrtreg
