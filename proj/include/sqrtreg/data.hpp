#pragma once

#include <cstdint>
#include <string>
#include <tuple>

#include "sqrtreg/model.hpp"

namespace sqrtreg {

enum class GroupWeightMode { SqrtCardinality, Unit };

/// A synthetic instance: dataset, its group structure, and the true
/// regression vector.
struct SyntheticInstance {
    Dataset ds;
    GroupStructure groups;
    Vector beta0;
};

/// Contiguous groups of three, beta0 = 2.5 on groups {1,3,4}, rows of X drawn
/// from N(0, Sigma) with Sigma_ij = 0.5^|i-j|, noise sigma = 1. n = 3g.
SyntheticInstance generate_example1(Eigen::Index N, int g, std::uint64_t seed);

/// Groups G_l = {l, l+g, l+2g}; X_i = (A_i, A_i^2, A_i^3) with
/// A_i = (Z_i + omega 1)/sqrt(2), Z_i ~ N(0, Sigma_g), one shared omega;
/// beta0 on groups {3,6}; noise sigma = 2.
SyntheticInstance generate_example2(Eigen::Index N, int g, std::uint64_t seed);

/// Same generation as example 2; beta0 has four sparse nonzero groups
/// {3,6,9,12}.
SyntheticInstance generate_example3(Eigen::Index N, int g, std::uint64_t seed);

/// Sparse text format "<label> <index>:<value> ...", indices 1-based.
/// Rejects NaN/Inf values. Throws ParseError / EmptyDataset.
Dataset load_libsvm(const std::string& path);

/// Writer for the same format, full round-trip precision.
void save_libsvm(const Dataset& ds, const std::string& path);

/// CSV loader; response column by name (requires a header) or 0-based index.
Dataset load_csv(const std::string& path, const std::string& response_column, bool has_header);

/// Uniform random feature-to-group assignment; empty groups are dropped and
/// the rest reindexed. Weights sqrt(|G_l|) by default.
GroupStructure random_group_assignment(Eigen::Index n, int g, std::uint64_t seed,
                                       GroupWeightMode mode = GroupWeightMode::SqrtCardinality);

/// Deterministic 2:1 split: ceil(2N/3) training rows, the rest test.
std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, std::uint64_t seed);

/// Row-subset copy (used by splits and cross validation).
Dataset subset_rows(const Dataset& ds, const std::vector<int>& rows);

} // namespace sqrtreg
