#include "sqrtreg/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace sqrtreg {

using nlohmann::json;

std::string RunRecord::to_json() const {
    json j;
    j["problem"] = problem;
    j["solver"] = solver;
    j["lambda"] = lambda;
    j["w1"] = w1;
    j["w2"] = w2;
    j["nnz"] = nnz;
    j["nnz2"] = nnz2;
    j["nnz2_kind"] = nnz2_kind;
    j["outer_iters"] = outer_iters;
    j["inner_iters"] = inner_iters;
    j["wall_seconds"] = wall_seconds;
    j["error_kind"] = error_kind;
    j["error_value"] = error_value;
    j["objective"] = objective;
    j["status"] = status;
    if (!note.empty()) j["note"] = note;
    return j.dump();
}

RunRecord RunRecord::from_json(const std::string& line) {
    json j = json::parse(line);
    RunRecord r;
    r.problem = j.at("problem").get<std::string>();
    r.solver = j.at("solver").get<std::string>();
    r.lambda = j.at("lambda").get<double>();
    r.w1 = j.at("w1").get<double>();
    r.w2 = j.at("w2").get<double>();
    r.nnz = j.at("nnz").get<int>();
    r.nnz2 = j.at("nnz2").get<int>();
    r.nnz2_kind = j.at("nnz2_kind").get<std::string>();
    r.outer_iters = j.at("outer_iters").get<int>();
    r.inner_iters = j.at("inner_iters").get<int>();
    r.wall_seconds = j.at("wall_seconds").get<double>();
    r.error_kind = j.at("error_kind").get<std::string>();
    r.error_value = j.at("error_value").get<double>();
    r.objective = j.at("objective").get<double>();
    r.status = j.at("status").get<std::string>();
    if (j.contains("note")) r.note = j.at("note").get<std::string>();
    return r;
}

RunRecord make_run_record(const std::string& problem, const std::string& solver,
                          const Regularizer& reg, double lambda, const SolveResult& res) {
    RunRecord r;
    r.problem = problem;
    r.solver = solver;
    r.lambda = lambda;
    r.w1 = reg.w1;
    r.w2 = reg.w2;
    auto [nz, nz2] = nnz_stats(res.beta, reg);
    r.nnz = nz;
    r.nnz2 = nz2;
    r.nnz2_kind = reg.kind == PenaltyKind::SparseGroup ? "grp" : "B";
    r.outer_iters = res.outer_iters;
    r.inner_iters = res.inner_iters;
    r.wall_seconds = res.wall_seconds;
    r.error_kind = to_string(res.criterion.kind);
    r.error_value = res.criterion.value;
    r.objective = res.objective_primal;
    r.status = to_string(res.status);
    return r;
}

std::string format_time(double seconds) {
    char buf[32];
    if (seconds < 0.5) return "00";
    long total = std::lround(seconds);
    if (total < 60) {
        std::snprintf(buf, sizeof(buf), "%02ld", total);
    } else {
        std::snprintf(buf, sizeof(buf), "%02ld:%02ld", total / 60, total % 60);
    }
    return buf;
}

std::string format_error(const std::string& kind, double value) {
    char buf[48];
    const char* mark = kind == "pdgap" ? "*" : (kind == "vargap" ? "#" : "");
    std::snprintf(buf, sizeof(buf), "%s%.1e", mark, value);
    return buf;
}

namespace {

std::string iter_field(const RunRecord& r) {
    if (r.inner_iters > 0 || r.solver == "ppdna") {
        std::ostringstream os;
        os << r.outer_iters << '|' << r.inner_iters;
        return os.str();
    }
    return std::to_string(r.outer_iters);
}

} // namespace

std::string render_header() {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-24s %-6s %9s %4s %10s %10s %7s %10s %s", "problem",
                  "solver", "lambda", "w1", "nnz|nnz2", "iter", "time", "error", "status");
    return buf;
}

std::string render_row(const RunRecord& rec) {
    char buf[320];
    std::string nz = std::to_string(rec.nnz) + "|" + std::to_string(rec.nnz2);
    std::snprintf(buf, sizeof(buf), "%-24s %-6s %9.4g %4.2g %10s %10s %7s %10s %s",
                  rec.problem.c_str(), rec.solver.c_str(), rec.lambda, rec.w1, nz.c_str(),
                  iter_field(rec).c_str(), format_time(rec.wall_seconds).c_str(),
                  format_error(rec.error_kind, rec.error_value).c_str(), rec.status.c_str());
    return buf;
}

std::string render_comparison(const std::vector<RunRecord>& records) {
    // rows keyed by (problem, lambda, w1), columns per solver: iter time error
    std::vector<std::string> solver_order;
    std::vector<std::pair<std::string, std::vector<const RunRecord*>>> rows;
    auto key_of = [](const RunRecord& r) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%s lam=%.4g w1=%.2g", r.problem.c_str(), r.lambda, r.w1);
        return std::string(buf);
    };
    for (const auto& r : records) {
        if (std::find(solver_order.begin(), solver_order.end(), r.solver) == solver_order.end())
            solver_order.push_back(r.solver);
        std::string key = key_of(r);
        auto it = std::find_if(rows.begin(), rows.end(),
                               [&](const auto& kv) { return kv.first == key; });
        if (it == rows.end()) {
            rows.push_back({key, {}});
            it = rows.end() - 1;
        }
        it->second.push_back(&r);
    }
    std::ostringstream os;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-40s %-8s", "problem", "nnz");
    os << buf;
    for (const auto& s : solver_order) {
        std::snprintf(buf, sizeof(buf), " | %-10s %7s %10s", (s + " iter").c_str(), "time",
                      "error");
        os << buf;
    }
    os << '\n';
    for (const auto& [key, cells] : rows) {
        std::string nz = "-";
        for (const RunRecord* r : cells)
            if (r->note.empty()) {
                nz = std::to_string(r->nnz) + "|" + std::to_string(r->nnz2);
                break;
            }
        std::snprintf(buf, sizeof(buf), "%-40s %-8s", key.c_str(), nz.c_str());
        os << buf;
        for (const auto& s : solver_order) {
            const RunRecord* found = nullptr;
            for (const RunRecord* r : cells)
                if (r->solver == s) found = r;
            if (!found) {
                std::snprintf(buf, sizeof(buf), " | %-10s %7s %10s", "-", "-", "-");
            } else if (!found->note.empty()) {
                std::snprintf(buf, sizeof(buf), " | %-10s %7s %10s", "failed", "-", "-");
            } else {
                std::snprintf(buf, sizeof(buf), " | %-10s %7s %10s", iter_field(*found).c_str(),
                              format_time(found->wall_seconds).c_str(),
                              format_error(found->error_kind, found->error_value).c_str());
            }
            os << buf;
        }
        os << '\n';
    }
    return os.str();
}

} // namespace sqrtreg
