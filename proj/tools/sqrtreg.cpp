// Benchmark and experiment driver for the square-root regularized regression
// solvers: single solves, manifest-driven benchmark sweeps, and the numeric
// verification suites.

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "sqrtreg/admm.hpp"
#include "sqrtreg/data.hpp"
#include "sqrtreg/dro.hpp"
#include "sqrtreg/ppdna.hpp"
#include "sqrtreg/prox.hpp"
#include "sqrtreg/reference.hpp"
#include "sqrtreg/report.hpp"
#include "sqrtreg/rng.hpp"
#include "sqrtreg/tuning.hpp"

#include <json.hpp>

namespace sq = sqrtreg;
using sq::Vector;

namespace {

struct ProblemSpec {
    std::string input;     // file path, or empty
    std::string synthetic; // ex1|ex2|ex3, or empty
    long N = 200;
    int g = 40;
    std::string penalty = "sgl";
    double w1 = 0.0;
    std::uint64_t seed = 1;
    bool normalize = true;
    std::string csv_response;
    bool csv_header = false;

    std::string id() const {
        std::ostringstream os;
        if (!synthetic.empty())
            os << synthetic << "(" << N << "," << 3 * g << ")";
        else
            os << input;
        os << ":" << penalty;
        return os.str();
    }
};

struct BuiltProblem {
    sq::Dataset ds;
    sq::Regularizer reg;
};

BuiltProblem build_problem(const ProblemSpec& spec) {
    BuiltProblem out;
    sq::GroupStructure groups;
    bool have_groups = false;
    if (!spec.synthetic.empty()) {
        sq::SyntheticInstance inst;
        if (spec.synthetic == "ex1")
            inst = sq::generate_example1(spec.N, spec.g, spec.seed);
        else if (spec.synthetic == "ex2")
            inst = sq::generate_example2(spec.N, spec.g, spec.seed);
        else if (spec.synthetic == "ex3")
            inst = sq::generate_example3(spec.N, spec.g, spec.seed);
        else
            throw sq::Error("unknown synthetic problem '" + spec.synthetic + "'");
        out.ds = std::move(inst.ds);
        groups = std::move(inst.groups);
        have_groups = true;
    } else if (!spec.input.empty()) {
        if (spec.input.size() > 4 && spec.input.substr(spec.input.size() - 4) == ".csv")
            out.ds = sq::load_csv(spec.input, spec.csv_response, spec.csv_header);
        else
            out.ds = sq::load_libsvm(spec.input);
        std::vector<int> zeros = sq::zero_columns(out.ds.X);
        if (!zeros.empty())
            std::cerr << "note: " << zeros.size()
                      << " zero column(s) in the input; normalization would reject them\n";
    } else {
        throw sq::Error("either --input or --synthetic is required");
    }
    if (spec.normalize) out.ds = sq::normalize_columns(out.ds);

    if (spec.penalty == "sgl") {
        if (!have_groups) groups = sq::random_group_assignment(out.ds.n(), spec.g, spec.seed);
        out.reg = sq::Regularizer::sparse_group(groups, spec.w1, 1.0 - spec.w1);
    } else if (spec.penalty == "fused") {
        out.reg = sq::Regularizer::fused(spec.w1, 1.0 - spec.w1);
    } else {
        throw sq::Error("unknown penalty '" + spec.penalty + "' (want sgl or fused)");
    }
    return out;
}

double resolve_lambda(const std::string& text, const BuiltProblem& p, std::uint64_t seed,
                      const sq::SolverConfig& cfg) {
    try {
        std::size_t used = 0;
        double v = std::stod(text, &used);
        if (used == text.size()) return v;
    } catch (...) {
    }
    sq::LambdaRule rule;
    rule.seed = seed;
    if (text == "bel") rule.rule = sq::LambdaRuleKind::Bel;
    else if (text == "sts") rule.rule = sq::LambdaRuleKind::StS;
    else if (text == "bls") rule.rule = sq::LambdaRuleKind::BlS;
    else if (text == "bun") rule.rule = sq::LambdaRuleKind::Bun;
    else if (text == "stg") rule.rule = sq::LambdaRuleKind::StG;
    else if (text == "blg") rule.rule = sq::LambdaRuleKind::BlG;
    else if (text == "jia") rule.rule = sq::LambdaRuleKind::Jia;
    else if (text == "cv") {
        sq::SolverConfig cv_cfg = cfg;
        cv_cfg.tol = std::max(cfg.tol, 1e-6);
        sq::CvResult cv = sq::cross_validate(p.ds, p.reg, sq::default_lambda_grid(), {}, 8, seed,
                                             cv_cfg);
        return cv.best_lambda;
    } else {
        throw sq::Error("unknown lambda spec '" + text + "'");
    }
    return sq::lambda_by_rule(rule, p.ds, p.reg);
}

sq::SolveResult run_solver(const std::string& solver, const sq::Dataset& ds,
                           const sq::Regularizer& reg, const sq::SolverConfig& cfg) {
    if (solver == "ppdna") return sq::ppa_solve(ds, reg, cfg);
    if (solver == "padmm") return sq::padmm_solve(ds, reg, cfg);
    if (solver == "dadmm") return sq::dadmm_solve(ds, reg, cfg);
    throw sq::Error("unknown solver '" + solver + "'");
}

int exit_code_for(const sq::SolveResult& res) {
    switch (res.status) {
        case sq::SolveStatus::Converged:
        case sq::SolveStatus::Overfit: return 0;
        default: return 2;
    }
}

// ---------------------------------------------------------------- solve ----

int cmd_solve(const ProblemSpec& spec, const std::string& lambda_text, const std::string& solver,
              sq::SolverConfig cfg, const std::string& out_path) {
    BuiltProblem p = build_problem(spec);
    cfg.lambda = resolve_lambda(lambda_text, p, spec.seed, cfg);
    sq::SolveResult res = run_solver(solver, p.ds, p.reg, cfg);
    sq::RunRecord rec = sq::make_run_record(spec.id(), solver, p.reg, cfg.lambda, res);
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::app);
        if (!out) throw sq::Error("cannot write " + out_path);
        out << rec.to_json() << '\n';
    }
    std::cout << sq::render_header() << '\n' << sq::render_row(rec) << '\n';
    return exit_code_for(res);
}

// ---------------------------------------------------------------- bench ----

struct BenchCell {
    ProblemSpec spec;
    std::string solver;
    std::string lambda_rule;
};

int cmd_bench(const std::string& manifest_path, const std::string& out_path,
              sq::SolverConfig base_cfg) {
    std::ifstream in(manifest_path);
    if (!in) throw sq::Error("cannot open manifest " + manifest_path);
    std::vector<BenchCell> cells;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            throw sq::ParseError(line_no, e.what());
        }
        BenchCell c;
        c.spec.synthetic = j.value("problem", "");
        if (c.spec.synthetic.rfind("file:", 0) == 0) {
            c.spec.input = c.spec.synthetic.substr(5);
            c.spec.synthetic.clear();
        }
        c.spec.N = j.value("N", 200);
        c.spec.g = j.value("g", 40);
        c.spec.penalty = j.value("penalty", "sgl");
        c.spec.w1 = j.value("w1", 0.0);
        c.spec.seed = j.value("seed", 1ULL);
        c.solver = j.value("solver", "ppdna");
        c.lambda_rule = j.value("lambda_rule", "1.0");
        cells.push_back(std::move(c));
    }

    std::vector<sq::RunRecord> records(cells.size());
    std::atomic<std::size_t> next{0};
    unsigned workers = std::thread::hardware_concurrency();
    if (const char* env = std::getenv("SQRTREG_THREADS")) {
        long v = std::atol(env);
        if (v > 0) workers = static_cast<unsigned>(v);
    }
    workers = std::max(1u, std::min<unsigned>(workers, cells.size() ? cells.size() : 1));

    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            const BenchCell& c = cells[i];
            sq::RunRecord rec;
            rec.problem = c.spec.id();
            rec.solver = c.solver;
            try {
                BuiltProblem p = build_problem(c.spec);
                sq::SolverConfig cfg = base_cfg;
                cfg.lambda = resolve_lambda(c.lambda_rule, p, c.spec.seed, cfg);
                sq::SolveResult res = run_solver(c.solver, p.ds, p.reg, cfg);
                rec = sq::make_run_record(c.spec.id(), c.solver, p.reg, cfg.lambda, res);
            } catch (const std::exception& e) {
                rec.note = e.what(); // partial failure: record and continue
                rec.status = "error";
            }
            records[i] = std::move(rec);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw sq::Error("cannot write " + out_path);
        for (const auto& r : records) out << r.to_json() << '\n';
    }
    std::cout << sq::render_comparison(records);
    return 0;
}

// --------------------------------------------------------------- verify ----

struct FamilyResult {
    std::string name;
    bool pass = true;
    double max_dev = 0.0;

    void update(double dev, double tol) {
        max_dev = std::max(max_dev, dev);
        if (dev > tol) pass = false;
    }
};

sq::Dataset random_dataset(sq::Rng& rng, Eigen::Index N, Eigen::Index n) {
    sq::Matrix X(N, n);
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; j < n; ++j) X(i, j) = rng.normal();
    sq::Dataset ds;
    ds.X = sq::DesignMatrix(std::move(X));
    ds.Y = Vector(N);
    for (Eigen::Index i = 0; i < N; ++i) ds.Y[i] = rng.normal();
    return ds;
}

Vector random_vector(sq::Rng& rng, Eigen::Index n, double scale = 1.0) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = scale * rng.normal();
    return v;
}

sq::Regularizer random_reg(sq::Rng& rng, Eigen::Index n, bool fused) {
    double w1 = 0.1 * static_cast<double>(rng.uniform_index(11));
    if (fused) return sq::Regularizer::fused(w1, 1.0 - w1);
    std::vector<int> sizes;
    Eigen::Index left = n;
    while (left > 0) {
        int s = static_cast<int>(rng.uniform_index(3)) + 1;
        s = static_cast<int>(std::min<Eigen::Index>(s, left));
        sizes.push_back(s);
        left -= s;
    }
    return sq::Regularizer::sparse_group(sq::GroupStructure::contiguous(sizes), w1, 1.0 - w1);
}

FamilyResult verify_prox(int trials, std::uint64_t seed) {
    FamilyResult fam{"prox"};
    sq::Rng rng(seed);
    for (int t = 0; t < trials; ++t) {
        Eigen::Index n = 4 + static_cast<Eigen::Index>(rng.uniform_index(9));
        bool fused = t % 2 == 1;
        sq::Regularizer reg = random_reg(rng, n, fused);
        Vector x = random_vector(rng, n, 2.0);
        double kappa = 0.1 + 2.0 * rng.uniform();
        Vector mine = sq::prox_penalty(x, reg, kappa);
        Vector oracle = sq::reference::prox_dual_projection(x, reg, kappa);
        fam.update((mine - oracle).lpNorm<Eigen::Infinity>(), 1e-6);
        if (!fused) {
            Vector cd = sq::reference::prox_sparse_group_cd(x, reg, kappa);
            fam.update((mine - cd).lpNorm<Eigen::Infinity>(), 1e-6);
        }
    }
    return fam;
}

FamilyResult verify_jacobian(int trials, std::uint64_t seed) {
    FamilyResult fam{"jacobian"};
    sq::Rng rng(seed);
    for (int t = 0; t < trials; ++t) {
        Eigen::Index n = 6 + static_cast<Eigen::Index>(rng.uniform_index(10));
        Eigen::Index N = 5 + static_cast<Eigen::Index>(rng.uniform_index(8));
        bool fused = t % 2 == 1;
        sq::Regularizer reg = random_reg(rng, n, fused);
        sq::Dataset ds = random_dataset(rng, N, n);
        Vector bt = random_vector(rng, n, 1.5);
        Vector yt = random_vector(rng, N, 1.5);
        double lambda = 0.2 + rng.uniform(), sigma = 0.5 + rng.uniform(),
               tau = 0.5 + rng.uniform();
        sq::JacobianElement H =
            sq::JacobianElement::build(ds.X, bt, yt, reg, lambda, sigma, tau);
        sq::Matrix dense =
            sq::reference::dense_jacobian(ds.X, bt, yt, reg, lambda, sigma, tau);
        for (int probe = 0; probe < 4; ++probe) {
            Vector w = random_vector(rng, N);
            fam.update((H.apply(w) - dense * w).lpNorm<Eigen::Infinity>(),
                       1e-10 * (1.0 + dense.cwiseAbs().maxCoeff()));
        }
    }
    return fam;
}

FamilyResult verify_gradient(int trials, std::uint64_t seed) {
    FamilyResult fam{"gradient"};
    sq::Rng rng(seed);
    for (int t = 0; t < trials; ++t) {
        Eigen::Index n = 5 + static_cast<Eigen::Index>(rng.uniform_index(8));
        Eigen::Index N = 4 + static_cast<Eigen::Index>(rng.uniform_index(6));
        sq::Regularizer reg = random_reg(rng, n, t % 2 == 1);
        sq::Dataset ds = random_dataset(rng, N, n);
        sq::DualSubproblem sub(ds, reg, 0.3 + rng.uniform(), 0.5 + rng.uniform(),
                               0.5 + rng.uniform(), random_vector(rng, n), random_vector(rng, N));
        Vector u = random_vector(rng, N);
        sq::PsiGradient pg = sq::psi_gradient(sub, u);
        const double h = 1e-5;
        for (int probe = 0; probe < 3; ++probe) {
            Vector e = Vector::Zero(N);
            e[static_cast<Eigen::Index>(rng.uniform_index(N))] = 1.0;
            double fd = (sq::psi_value(sub, u + h * e) - sq::psi_value(sub, u - h * e)) /
                        (2.0 * h);
            double an = pg.grad.dot(e);
            fam.update(std::fabs(fd - an) / (1.0 + std::fabs(an)), 1e-4);
        }
    }
    return fam;
}

FamilyResult verify_dro(int trials, std::uint64_t seed) {
    FamilyResult fam{"dro"};
    sq::Rng rng(seed);
    for (int t = 0; t < trials; ++t) {
        Eigen::Index n = 6 + static_cast<Eigen::Index>(rng.uniform_index(10));
        Eigen::Index N = 5 + static_cast<Eigen::Index>(rng.uniform_index(10));
        sq::Regularizer reg = random_reg(rng, n, t % 2 == 1);
        sq::Dataset ds = random_dataset(rng, N, n);
        double lambda = 0.2 + 2.0 * rng.uniform();
        std::vector<Vector> betas;
        for (int b = 0; b < 10; ++b) betas.push_back(random_vector(rng, n, 2.0));
        sq::DroReport rep = sq::dro_equivalence_check(ds, reg, lambda, betas);
        fam.update(rep.max_deviation, 1e-9 * 10.0); // report-scale bound
        if (!rep.pass) fam.pass = false;
        double delta = lambda * lambda / static_cast<double>(N);
        for (int b = 0; b < 3; ++b) {
            double closed = sq::worst_case_loss(ds, reg, betas[static_cast<std::size_t>(b)],
                                                delta)
                                 .value;
            double numeric = sq::worst_case_loss_numeric(
                ds, reg, betas[static_cast<std::size_t>(b)], delta);
            fam.update(std::fabs(closed - numeric) / (1.0 + std::fabs(closed)), 1e-8);
        }
    }
    return fam;
}

int cmd_verify(const std::string& family, int trials, std::uint64_t seed) {
    std::vector<FamilyResult> results;
    if (family == "all" || family == "prox") results.push_back(verify_prox(trials, seed));
    if (family == "all" || family == "jacobian")
        results.push_back(verify_jacobian(trials, seed));
    if (family == "all" || family == "gradient")
        results.push_back(verify_gradient(trials, seed));
    if (family == "all" || family == "dro") results.push_back(verify_dro(trials, seed));
    if (results.empty()) {
        std::cerr << "unknown family '" << family << "'\n";
        return 1;
    }
    bool all_pass = true;
    for (const auto& fam : results) {
        std::printf("%-10s %s  max_dev=%.3e\n", fam.name.c_str(), fam.pass ? "PASS" : "FAIL",
                    fam.max_dev);
        all_pass = all_pass && fam.pass;
    }
    return all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"square-root regularized regression benchmark driver"};
    app.require_subcommand(1);

    ProblemSpec spec;
    std::string lambda_text = "1.0", solver = "ppdna", out_path;
    sq::SolverConfig cfg;

    CLI::App* solve = app.add_subcommand("solve", "run one solve");
    solve->add_option("--input", spec.input, "libsvm or csv file");
    solve->add_option("--synthetic", spec.synthetic, "ex1|ex2|ex3");
    solve->add_option("--N", spec.N, "synthetic sample count");
    solve->add_option("--g", spec.g, "synthetic group count (n = 3g); also the random group "
                                     "count for file inputs");
    solve->add_option("--penalty", spec.penalty, "sgl|fused")->default_str("sgl");
    solve->add_option("--w1", spec.w1, "l1 weight (w2 = 1 - w1)");
    solve->add_option("--lambda", lambda_text, "value or bel|sts|bls|bun|stg|blg|jia|cv");
    solve->add_option("--solver", solver, "ppdna|padmm|dadmm");
    solve->add_option("--tol", cfg.tol, "termination tolerance");
    solve->add_option("--max-time", cfg.max_time_seconds, "time cap in seconds");
    solve->add_option("--seed", spec.seed, "generator / rule seed");
    solve->add_option("--out", out_path, "append the RunRecord JSON here");
    solve->add_flag("--normalize,!--no-normalize", spec.normalize,
                    "column normalization (default on)");
    solve->add_option("--csv-response", spec.csv_response, "csv response column (name or index)");
    solve->add_flag("--csv-header", spec.csv_header, "csv file has a header row");

    std::string manifest;
    CLI::App* bench = app.add_subcommand("bench", "run a manifest of cells");
    bench->add_option("--manifest", manifest, "JSONL manifest")->required();
    bench->add_option("--out", out_path, "results JSONL path");
    bench->add_option("--tol", cfg.tol, "termination tolerance");
    bench->add_option("--max-time", cfg.max_time_seconds, "per-cell time cap in seconds");

    std::string family = "all";
    int trials = 25;
    std::uint64_t vseed = 20240801;
    CLI::App* verify = app.add_subcommand("verify", "run the numeric verification suites");
    verify->add_option("--family", family, "all|prox|jacobian|gradient|dro");
    verify->add_option("--trials", trials, "trials per family");
    verify->add_option("--seed", vseed, "verification seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_solve(spec, lambda_text, solver, cfg, out_path);
        if (bench->parsed()) return cmd_bench(manifest, out_path, cfg);
        if (verify->parsed()) return cmd_verify(family, trials, vseed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
