#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fhinf/lmi.hpp"
#include "fhinf/sdp.hpp"
#include "fhinf/solver.hpp"

using namespace fhinf;

namespace {

void add_scalar_negdef(LmiProblem& problem, const std::string& label, int var, double shift) {
    LmiConstraint c;
    c.label = label;
    c.sense = Sense::NegDef;
    c.expr = AffineBlockExpr(1);
    c.expr.add({var, false, 1.0, 0, 0, Matrix::Identity(1, 1), Matrix::Identity(1, 1)});
    c.expr.add_const(shift * Matrix::Identity(1, 1), 0, 0);
    problem.constraints.push_back(c);
}

void add_scalar_psd(LmiProblem& problem, const std::string& label, int var, double shift) {
    LmiConstraint c;
    c.label = label;
    c.sense = Sense::PosSemiDef;
    c.expr = AffineBlockExpr(1);
    c.expr.add({var, false, 1.0, 0, 0, Matrix::Identity(1, 1), Matrix::Identity(1, 1)});
    c.expr.add_const(shift * Matrix::Identity(1, 1), 0, 0);
    problem.constraints.push_back(c);
}

}  // namespace

TEST_CASE("a one-dimensional box is solved strictly inside") {
    LmiProblem problem;
    const int v = problem.add_variable("v", 1, 1, false);
    add_scalar_negdef(problem, "v_lt_2", v, -2.0);  // v < 2
    add_scalar_psd(problem, "v_ge_1", v, -1.0);     // v >= 1
    const SdpFeasibilityProblem sdp = canonicalize(problem);

    const SolverReport report = solve_feasibility(sdp, PhaseOneOptions{});
    REQUIRE(report.status == SolveStatus::Feasible);
    CHECK(report.x[0] > 1.0);
    CHECK(report.x[0] < 2.0);
    CHECK(report.worst_margin < 0.0);
    CHECK(eigen_margin(sdp, report.x) < 0.0);
    CHECK(report.iterations > 0);
    CHECK(report.wall_time >= 0.0);
}

TEST_CASE("an empty box is reported infeasible with a positive lower bound") {
    LmiProblem problem;
    const int v = problem.add_variable("v", 1, 1, false);
    add_scalar_negdef(problem, "v_lt_m1", v, 1.0);  // v < -1
    add_scalar_psd(problem, "v_ge_1", v, -1.0);     // v >= 1
    const SdpFeasibilityProblem sdp = canonicalize(problem);

    const SolverReport report = solve_feasibility(sdp, PhaseOneOptions{});
    CHECK(report.status == SolveStatus::Infeasible);
    CHECK(report.lower_bound > 0.0);
    CHECK(!report.message.empty());
}

TEST_CASE("matrix interval constraints locate a positive definite window") {
    LmiProblem problem;
    const int x = problem.add_variable("X", 3, 3, true);

    LmiConstraint upper;
    upper.label = "x_lt_2I";
    upper.sense = Sense::NegDef;
    upper.expr = AffineBlockExpr(3);
    upper.expr.add({x, false, 1.0, 0, 0, Matrix::Identity(3, 3), Matrix::Identity(3, 3)});
    upper.expr.add_const(-2.0 * Matrix::Identity(3, 3), 0, 0);
    problem.constraints.push_back(upper);

    LmiConstraint lower;
    lower.label = "x_gt_halfI";
    lower.sense = Sense::PosSemiDef;
    lower.expr = AffineBlockExpr(3);
    lower.expr.add({x, false, 1.0, 0, 0, Matrix::Identity(3, 3), Matrix::Identity(3, 3)});
    lower.expr.add_const(-0.5 * Matrix::Identity(3, 3), 0, 0);
    problem.constraints.push_back(lower);

    const SdpFeasibilityProblem sdp = canonicalize(problem);
    const SolverReport report = solve_feasibility(sdp, PhaseOneOptions{});
    REQUIRE(report.status == SolveStatus::Feasible);

    const Matrix solution = unpack_variable(problem.variables[0], report.x);
    CHECK(min_eigenvalue(solution) > 0.5);
    CHECK(max_eigenvalue(solution) < 2.0);
}

TEST_CASE("contradictory matrix constraints are separated by the dual bound") {
    LmiProblem problem;
    const int x = problem.add_variable("X", 2, 2, true);

    LmiConstraint upper;
    upper.label = "x_lt_mI";
    upper.sense = Sense::NegDef;
    upper.expr = AffineBlockExpr(2);
    upper.expr.add({x, false, 1.0, 0, 0, Matrix::Identity(2, 2), Matrix::Identity(2, 2)});
    upper.expr.add_const(Matrix::Identity(2, 2), 0, 0);
    problem.constraints.push_back(upper);

    LmiConstraint lower;
    lower.label = "x_pos";
    lower.sense = Sense::PosSemiDef;
    lower.expr = AffineBlockExpr(2);
    lower.expr.add({x, false, 1.0, 0, 0, Matrix::Identity(2, 2), Matrix::Identity(2, 2)});
    problem.constraints.push_back(lower);

    const SdpFeasibilityProblem sdp = canonicalize(problem);
    const SolverReport report = solve_feasibility(sdp, PhaseOneOptions{});
    CHECK(report.status == SolveStatus::Infeasible);
    CHECK(report.lower_bound > 0.0);
}

TEST_CASE("the solver is deterministic across repeated runs") {
    LmiProblem problem;
    const int x = problem.add_variable("X", 2, 2, true);
    LmiConstraint upper;
    upper.label = "x_lt_I";
    upper.sense = Sense::NegDef;
    upper.expr = AffineBlockExpr(2);
    upper.expr.add({x, false, 1.0, 0, 0, Matrix::Identity(2, 2), Matrix::Identity(2, 2)});
    upper.expr.add_const(-Matrix::Identity(2, 2), 0, 0);
    problem.constraints.push_back(upper);
    LmiConstraint lower;
    lower.label = "x_gt_mI";
    lower.sense = Sense::PosSemiDef;
    lower.expr = AffineBlockExpr(2);
    lower.expr.add({x, false, 1.0, 0, 0, Matrix::Identity(2, 2), Matrix::Identity(2, 2)});
    lower.expr.add_const(Matrix::Identity(2, 2), 0, 0);
    problem.constraints.push_back(lower);
    const SdpFeasibilityProblem sdp = canonicalize(problem);

    const SolverReport first = solve_feasibility(sdp, PhaseOneOptions{});
    const SolverReport second = solve_feasibility(sdp, PhaseOneOptions{});
    REQUIRE(first.status == SolveStatus::Feasible);
    REQUIRE(second.status == SolveStatus::Feasible);
    CHECK((first.x - second.x).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    CHECK(first.iterations == second.iterations);
}

TEST_CASE("status names render for reports") {
    CHECK(std::string(to_string(SolveStatus::Feasible)) == "feasible");
    CHECK(std::string(to_string(SolveStatus::Infeasible)) == "infeasible");
    CHECK(std::string(to_string(SolveStatus::Indeterminate)) == "indeterminate");
}
