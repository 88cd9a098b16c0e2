#include "sqrtreg/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "sqrtreg/rng.hpp"

namespace sqrtreg {

namespace {

// Row draw from N(0, Sigma) with Sigma_ij = rho^|i-j| via the closed-form
// Cholesky factor of the AR(1) correlation (the stationary recursion).
void ar1_row(Rng& rng, double rho, Eigen::Index n, double* out) {
    const double s = std::sqrt(1.0 - rho * rho);
    out[0] = rng.normal();
    for (Eigen::Index j = 1; j < n; ++j) out[j] = rho * out[j - 1] + s * rng.normal();
}

GroupStructure triple_groups_adjacent(int g) {
    return GroupStructure::contiguous(std::vector<int>(static_cast<std::size_t>(g), 3));
}

GroupStructure triple_groups_strided(int g) {
    GroupStructure gs;
    gs.weights = Vector::Constant(g, std::sqrt(3.0));
    for (int l = 0; l < g; ++l) gs.groups.push_back({l, l + g, l + 2 * g});
    return gs;
}

} // namespace

SyntheticInstance generate_example1(Eigen::Index N, int g, std::uint64_t seed) {
    if (g < 4) throw InvalidRegime("example 1 needs g >= 4");
    const Eigen::Index n = 3 * static_cast<Eigen::Index>(g);
    Rng rng(seed);
    Matrix X(N, n);
    std::vector<double> row(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < N; ++i) {
        ar1_row(rng, 0.5, n, row.data());
        for (Eigen::Index j = 0; j < n; ++j) X(i, j) = row[static_cast<std::size_t>(j)];
    }
    SyntheticInstance out;
    out.groups = triple_groups_adjacent(g);
    out.beta0 = Vector::Zero(n);
    for (int l : {0, 2, 3})
        for (int j : out.groups.groups[static_cast<std::size_t>(l)]) out.beta0[j] = 2.5;
    Vector eps(N);
    for (Eigen::Index i = 0; i < N; ++i) eps[i] = rng.normal();
    out.ds.X = DesignMatrix(std::move(X));
    out.ds.Y = out.ds.X.mv(out.beta0) + eps;
    return out;
}

namespace {

SyntheticInstance generate_example23(Eigen::Index N, int g, std::uint64_t seed,
                                     const std::vector<std::pair<int, Vector>>& active) {
    const Eigen::Index n = 3 * static_cast<Eigen::Index>(g);
    Rng rng(seed);
    const double omega = rng.normal(); // one shared scalar per dataset
    Matrix X(N, n);
    std::vector<double> z(static_cast<std::size_t>(g));
    for (Eigen::Index i = 0; i < N; ++i) {
        ar1_row(rng, 0.5, g, z.data());
        for (int l = 0; l < g; ++l) {
            double a = (z[static_cast<std::size_t>(l)] + omega) / std::sqrt(2.0);
            X(i, l) = a;
            X(i, l + g) = a * a;
            X(i, l + 2 * g) = a * a * a;
        }
    }
    SyntheticInstance out;
    out.groups = triple_groups_strided(g);
    out.beta0 = Vector::Zero(n);
    for (const auto& [l, vals] : active) {
        const auto& grp = out.groups.groups[static_cast<std::size_t>(l)];
        for (std::size_t k = 0; k < grp.size(); ++k)
            out.beta0[grp[k]] = vals[static_cast<Eigen::Index>(k)];
    }
    Vector eps(N);
    for (Eigen::Index i = 0; i < N; ++i) eps[i] = rng.normal();
    out.ds.X = DesignMatrix(std::move(X));
    out.ds.Y = out.ds.X.mv(out.beta0) + 2.0 * eps; // sigma = 2
    return out;
}

Vector triple(double a, double b, double c) {
    Vector v(3);
    v << a, b, c;
    return v;
}

} // namespace

SyntheticInstance generate_example2(Eigen::Index N, int g, std::uint64_t seed) {
    if (g < 6) throw InvalidRegime("example 2 needs g >= 6");
    return generate_example23(N, g, seed,
                              {{2, triple(1, 1, 1)}, {5, triple(2.0 / 3.0, -1, 0.5)}});
}

SyntheticInstance generate_example3(Eigen::Index N, int g, std::uint64_t seed) {
    if (g < 12) throw InvalidRegime("example 3 needs g >= 12");
    return generate_example23(N, g, seed,
                              {{2, triple(1, 0, 1)},
                               {5, triple(2.0 / 3.0, -1, 0)},
                               {8, triple(-1, 0, -0.5)},
                               {11, triple(0, -1, 0)}});
}

namespace {

bool parse_double(const std::string& tok, double& out) {
    try {
        std::size_t used = 0;
        out = std::stod(tok, &used);
        return used == tok.size();
    } catch (...) {
        return false;
    }
}

} // namespace

Dataset load_libsvm(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::vector<Eigen::Triplet<double>> trips;
    std::vector<double> labels;
    Eigen::Index max_col = 0;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue; // blank line
        double label;
        if (!parse_double(tok, label) || !std::isfinite(label))
            throw ParseError(line_no, "bad label '" + tok + "'");
        Eigen::Index row = static_cast<Eigen::Index>(labels.size());
        labels.push_back(label);
        while (ls >> tok) {
            auto colon = tok.find(':');
            if (colon == std::string::npos) throw ParseError(line_no, "expected index:value");
            long idx = 0;
            double val = 0.0;
            try {
                idx = std::stol(tok.substr(0, colon));
            } catch (...) {
                throw ParseError(line_no, "bad index in '" + tok + "'");
            }
            if (idx < 1) throw ParseError(line_no, "indices are 1-based");
            if (!parse_double(tok.substr(colon + 1), val) || !std::isfinite(val))
                throw ParseError(line_no, "bad value in '" + tok + "'");
            trips.emplace_back(row, static_cast<Eigen::Index>(idx - 1), val);
            max_col = std::max(max_col, static_cast<Eigen::Index>(idx));
        }
    }
    if (labels.empty()) throw EmptyDataset();
    SparseMat X(static_cast<Eigen::Index>(labels.size()), max_col);
    X.setFromTriplets(trips.begin(), trips.end());
    Dataset ds;
    ds.X = DesignMatrix(std::move(X));
    ds.Y = Eigen::Map<Vector>(labels.data(), static_cast<Eigen::Index>(labels.size()));
    return ds;
}

void save_libsvm(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    char buf[64];
    auto fmt = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    Eigen::SparseMatrix<double, Eigen::RowMajor> by_row;
    if (ds.X.is_sparse()) by_row = ds.X.sparse();
    for (Eigen::Index i = 0; i < ds.N(); ++i) {
        out << fmt(ds.Y[i]);
        if (ds.X.is_sparse()) {
            for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(by_row, i); it;
                 ++it)
                if (it.value() != 0.0) out << ' ' << (it.col() + 1) << ':' << fmt(it.value());
        } else {
            for (Eigen::Index j = 0; j < ds.n(); ++j)
                if (ds.X.dense()(i, j) != 0.0)
                    out << ' ' << (j + 1) << ':' << fmt(ds.X.dense()(i, j));
        }
        out << '\n';
    }
}

Dataset load_csv(const std::string& path, const std::string& response_column, bool has_header) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::string line;
    long line_no = 0;
    std::vector<std::string> header;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cur;
        std::istringstream ss(s);
        while (std::getline(ss, cur, ',')) out.push_back(cur);
        return out;
    };
    long resp_idx = -1;
    if (has_header) {
        if (!std::getline(in, line)) throw EmptyDataset();
        ++line_no;
        header = split(line);
        for (std::size_t j = 0; j < header.size(); ++j)
            if (header[j] == response_column) resp_idx = static_cast<long>(j);
    }
    if (resp_idx < 0) {
        try {
            resp_idx = std::stol(response_column);
        } catch (...) {
            throw Error("response column '" + response_column + "' not found");
        }
    }
    std::vector<std::vector<double>> rows;
    std::vector<double> labels;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> toks = split(line);
        if (resp_idx >= static_cast<long>(toks.size()))
            throw ParseError(line_no, "response column out of range");
        std::vector<double> feats;
        double label = 0.0;
        for (std::size_t j = 0; j < toks.size(); ++j) {
            double v;
            if (!parse_double(toks[j], v) || !std::isfinite(v))
                throw ParseError(line_no, "bad numeric field '" + toks[j] + "'");
            if (static_cast<long>(j) == resp_idx)
                label = v;
            else
                feats.push_back(v);
        }
        if (!rows.empty() && feats.size() != rows.front().size())
            throw ParseError(line_no, "inconsistent column count");
        rows.push_back(std::move(feats));
        labels.push_back(label);
    }
    if (rows.empty()) throw EmptyDataset();
    Matrix X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    Dataset ds;
    ds.X = DesignMatrix(std::move(X));
    ds.Y = Eigen::Map<Vector>(labels.data(), static_cast<Eigen::Index>(labels.size()));
    return ds;
}

GroupStructure random_group_assignment(Eigen::Index n, int g, std::uint64_t seed,
                                       GroupWeightMode mode) {
    if (g > n) throw InvalidRegime("random groups need g <= n");
    Rng rng(seed);
    std::vector<std::vector<int>> buckets(static_cast<std::size_t>(g));
    for (Eigen::Index j = 0; j < n; ++j)
        buckets[rng.uniform_index(static_cast<std::uint64_t>(g))].push_back(
            static_cast<int>(j));
    GroupStructure gs;
    for (auto& b : buckets)
        if (!b.empty()) gs.groups.push_back(std::move(b)); // drop empty groups
    gs.weights.resize(static_cast<Eigen::Index>(gs.groups.size()));
    for (std::size_t l = 0; l < gs.groups.size(); ++l)
        gs.weights[static_cast<Eigen::Index>(l)] =
            mode == GroupWeightMode::SqrtCardinality
                ? std::sqrt(static_cast<double>(gs.groups[l].size()))
                : 1.0;
    return gs;
}

Dataset subset_rows(const Dataset& ds, const std::vector<int>& rows) {
    Dataset out;
    out.normalized = ds.normalized;
    out.Y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.Y[static_cast<Eigen::Index>(i)] = ds.Y[rows[i]];
    if (ds.X.is_sparse()) {
        std::vector<int> lookup(static_cast<std::size_t>(ds.N()), -1);
        for (std::size_t i = 0; i < rows.size(); ++i)
            lookup[static_cast<std::size_t>(rows[i])] = static_cast<int>(i);
        std::vector<Eigen::Triplet<double>> trips;
        const SparseMat& S = ds.X.sparse();
        for (Eigen::Index j = 0; j < S.outerSize(); ++j)
            for (SparseMat::InnerIterator it(S, j); it; ++it) {
                int r = lookup[static_cast<std::size_t>(it.row())];
                if (r >= 0) trips.emplace_back(r, j, it.value());
            }
        SparseMat X(static_cast<Eigen::Index>(rows.size()), ds.n());
        X.setFromTriplets(trips.begin(), trips.end());
        out.X = DesignMatrix(std::move(X));
    } else {
        Matrix X(static_cast<Eigen::Index>(rows.size()), ds.n());
        for (std::size_t i = 0; i < rows.size(); ++i)
            X.row(static_cast<Eigen::Index>(i)) = ds.X.dense().row(rows[i]);
        out.X = DesignMatrix(std::move(X));
    }
    return out;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, std::uint64_t seed) {
    const Eigen::Index N = ds.N();
    if (N < 3) throw InvalidRegime("train_test_split needs N >= 3");
    std::vector<int> perm(static_cast<std::size_t>(N));
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    for (std::size_t i = perm.size() - 1; i > 0; --i)
        std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
    auto n_train = static_cast<std::size_t>((2 * N + 2) / 3); // ceil(2N/3)
    std::vector<int> train(perm.begin(), perm.begin() + static_cast<long>(n_train));
    std::vector<int> test(perm.begin() + static_cast<long>(n_train), perm.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {subset_rows(ds, train), subset_rows(ds, test)};
}

} // namespace sqrtreg
