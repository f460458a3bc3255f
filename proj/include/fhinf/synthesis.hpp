#pragma once

#include <map>
#include <string>
#include <vector>

#include "fhinf/lmi_builders.hpp"
#include "fhinf/model.hpp"
#include "fhinf/solver.hpp"

namespace fhinf {

struct SynthesisSettings {
    double h = 0.5;
    double rho = 0.0;
    double omega = 2.0;
    double gamma = 1.0;
    int theorem = 2;  // 1: membership-independent, 2: membership-aware
    DelayRateTerm delay_rate = DelayRateTerm::Rho;
    SlackStructure slack = SlackStructure::Full;
    bool have_bounds = false;
    ProductBounds bounds;  // computed over the default domain when absent
    PhaseOneOptions solver;
};

// Operating domain used when product bounds are not supplied explicitly.
ProductBounds default_product_bounds(const TsDelayModel& model);

struct SynthesisResult {
    SolveStatus status = SolveStatus::Indeterminate;
    double gamma = 0.0;
    FuzzyFilter filter;  // populated when feasible
    double p22_condition = 0.0;
    std::map<std::string, Matrix> certificate;  // named decision matrices
    Vector x;                                   // packed certificate point
    double worst_margin = 0.0;                  // negative certifies
    SolverReport report;
    SynthesisSettings settings;  // as used, with defaulted bounds filled in
};

// Solves the selected synthesis condition at settings.gamma and recovers the
// filter matrices on feasibility.  Infeasibility is a clean status, not an
// exception; an ill-conditioned recovery matrix throws.
SynthesisResult synthesize(const TsDelayModel& model, const SynthesisSettings& settings);

struct GammaProbe {
    double gamma = 0.0;
    SolveStatus status = SolveStatus::Indeterminate;
    double wall_time = 0.0;
};

struct GammaSearchLog {
    std::vector<GammaProbe> probes;
    int indeterminate_count = 0;  // indeterminate solves treated as infeasible
    double tolerance = 0.0;
    double gamma_star = 0.0;
};

struct GammaMinResult {
    bool found = false;
    double gamma_star = 0.0;
    SynthesisResult at_star;  // solved at gamma_star
    GammaSearchLog log;
};

// Bisection for the minimum attenuation level; the feasibility set is
// monotone in gamma (it enters only as -gamma^2 on a diagonal entry).
GammaMinResult gamma_min(const TsDelayModel& model, SynthesisSettings settings, double lo = 1e-3,
                         double hi = 10.0, double tol = 5e-3);

struct CertifyResult {
    SolveStatus status = SolveStatus::Indeterminate;
    double gamma = 0.0;
    std::map<std::string, Matrix> certificate;
    double worst_margin = 0.0;
    SolverReport report;
};

// Fixed-filter analysis: feasible means gamma is a certified attenuation
// level for this filter.  When settings carry product bounds the bounded
// analysis condition is used, matching the membership-aware synthesis; a
// certificate produced by synthesize transfers to it directly.
CertifyResult certify_filter(const TsDelayModel& model, const FuzzyFilter& filter,
                             const SynthesisSettings& settings);

}  // namespace fhinf
