#pragma once

#include <string>

#include "fhinf/sdp.hpp"

namespace fhinf {

enum class SolveStatus { Feasible, Infeasible, Indeterminate };

const char* to_string(SolveStatus status);

struct PhaseOneOptions {
    double eps_strict = 1e-7;     // required strictness margin
    int max_iterations = 600;     // Newton iterations across all barrier stages
    double eta0 = 1.0;            // initial barrier weight on t
    double eta_growth = 10.0;
    double eta_max = 1e13;
    double center_tol = 0.05;     // squared Newton decrement declaring centered
    int max_line_search = 60;
    bool verbose = false;
};

struct SolverReport {
    SolveStatus status = SolveStatus::Indeterminate;
    Vector x;             // certificate when feasible, last iterate otherwise
    double t = 0.0;       // achieved spectral bound min over the path
    double lower_bound = 0.0;  // certified bound on the optimal t when concluded
    double worst_margin = 0.0;
    int iterations = 0;
    double wall_time = 0.0;
    std::string message;
};

// Phase-I feasibility: minimize t subject to F_b(x) <= t*I for negdef blocks
// and F_b(x) >= -t*I for possemidef blocks, by a log-det barrier path with a
// fixed deterministic schedule.  Feasible iff the path reaches t < -eps.
SolverReport solve_feasibility(const SdpFeasibilityProblem& problem,
                               const PhaseOneOptions& options = {});
SolverReport solve_feasibility(const SdpFeasibilityProblem& problem, double eps, int max_iter);

}  // namespace fhinf
