#pragma once

#include <string>
#include <vector>

#include "sqrtreg/model.hpp"

namespace sqrtreg {

/// One benchmark cell: problem x solver x parameters -> outcome.
struct RunRecord {
    std::string problem;
    std::string solver;
    double lambda = 0.0;
    double w1 = 0.0;
    double w2 = 1.0;
    int nnz = 0;
    int nnz2 = 0; // nnzgrp or nnzB
    std::string nnz2_kind; // "grp" or "B"
    int outer_iters = 0;
    int inner_iters = 0;
    double wall_seconds = 0.0;
    std::string error_kind; // "kkt", "pdgap", "vargap"
    double error_value = 0.0;
    double objective = 0.0;
    std::string status;
    std::string note; // failure message for crashed cells

    std::string to_json() const;
    static RunRecord from_json(const std::string& line);
};

RunRecord make_run_record(const std::string& problem, const std::string& solver,
                          const Regularizer& reg, double lambda, const SolveResult& res);

/// "minutes:seconds"; sub-0.5 s prints "00", under a minute just seconds.
std::string format_time(double seconds);

/// Marker + value: plain for kkt, "*" for pdgap, "#" for vargap.
std::string format_error(const std::string& kind, double value);

/// Single aligned row (header obtainable separately).
std::string render_row(const RunRecord& rec);
std::string render_header();

/// Comparison table: rows grouped by (problem, lambda, w1), solver columns
/// holding iter | time | error.
std::string render_comparison(const std::vector<RunRecord>& records);

} // namespace sqrtreg
