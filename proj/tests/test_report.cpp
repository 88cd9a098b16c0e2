#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sqrtreg/report.hpp"
#include "test_support.hpp"

using namespace sqrtreg;

TEST_CASE("run record JSON round trip is lossless") {
    RunRecord r;
    r.problem = "ex1(1000,600):sgl";
    r.solver = "ppdna";
    r.lambda = 3.4851234567890123;
    r.w1 = 0.5;
    r.w2 = 0.5;
    r.nnz = 9;
    r.nnz2 = 3;
    r.nnz2_kind = "grp";
    r.outer_iters = 17;
    r.inner_iters = 70;
    r.wall_seconds = 1.2345678901234567;
    r.error_kind = "kkt";
    r.error_value = 3.4e-8;
    r.objective = 123.45678901234567;
    r.status = "converged";
    RunRecord back = RunRecord::from_json(r.to_json());
    CHECK(back.problem == r.problem);
    CHECK(back.solver == r.solver);
    CHECK(back.lambda == r.lambda); // bit-exact doubles through the JSON layer
    CHECK(back.w1 == r.w1);
    CHECK(back.nnz == r.nnz);
    CHECK(back.nnz2 == r.nnz2);
    CHECK(back.outer_iters == r.outer_iters);
    CHECK(back.inner_iters == r.inner_iters);
    CHECK(back.wall_seconds == r.wall_seconds);
    CHECK(back.error_value == r.error_value);
    CHECK(back.objective == r.objective);
    CHECK(back.status == r.status);
}

TEST_CASE("time formatting follows the table conventions") {
    CHECK(format_time(0.2) == "00");
    CHECK(format_time(0.4999) == "00");
    CHECK(format_time(1.2) == "01");
    CHECK(format_time(59.4) == "59");
    CHECK(format_time(62.0) == "01:02");
    CHECK(format_time(207.0) == "03:27");
    CHECK(format_time(1800.0) == "30:00");
}

TEST_CASE("error markers per criterion") {
    CHECK(format_error("kkt", 3.4e-8) == "3.4e-08");
    CHECK(format_error("pdgap", 9.9e-8) == "*9.9e-08");
    CHECK(format_error("vargap", 2.1e-13) == "#2.1e-13");
}

TEST_CASE("make_run_record fills the nnz statistics") {
    Rng rng(3);
    Dataset ds = sqtest::random_dataset(rng, 8, 6);
    GroupStructure gs = GroupStructure::contiguous({3, 3});
    Regularizer reg = Regularizer::sparse_group(gs, 0.0, 1.0);
    SolveResult res;
    res.beta = Vector::Zero(6);
    res.beta[0] = 1.0;
    res.beta[1] = 1.0;
    res.residual_y = Vector::Zero(8);
    res.status = SolveStatus::Converged;
    res.criterion = {KKTReport::Kind::Kkt, 5e-8};
    res.outer_iters = 10;
    res.inner_iters = 31;
    RunRecord rec = make_run_record("p", "ppdna", reg, 0.7, res);
    CHECK(rec.nnz == 2);
    CHECK(rec.nnz2 == 1);
    CHECK(rec.nnz2_kind == "grp");
    CHECK(rec.error_kind == "kkt");
    CHECK(rec.status == "converged");
}

TEST_CASE("comparison table pivots by solver") {
    RunRecord a;
    a.problem = "ex2(500,480)";
    a.solver = "ppdna";
    a.lambda = 3.462;
    a.nnz = 6;
    a.nnz2 = 2;
    a.outer_iters = 14;
    a.inner_iters = 48;
    a.wall_seconds = 0.3;
    a.error_kind = "kkt";
    a.error_value = 4.1e-9;
    RunRecord b = a;
    b.solver = "dadmm";
    b.outer_iters = 2993;
    b.inner_iters = 0;
    b.wall_seconds = 2.0;
    RunRecord c = a;
    c.solver = "padmm";
    c.note = "boom"; // failed cell renders as failed
    std::string table = render_comparison({a, b, c});
    CHECK(table.find("ppdna") != std::string::npos);
    CHECK(table.find("dadmm") != std::string::npos);
    CHECK(table.find("14|48") != std::string::npos);
    CHECK(table.find("2993") != std::string::npos);
    CHECK(table.find("failed") != std::string::npos);
    CHECK(table.find("6|2") != std::string::npos);
}
