#include "fhinf/synthesis.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fhinf {

namespace {

constexpr double kDomainLo = -50.0;
constexpr double kDomainHi = 50.0;
constexpr int kDomainGrid = 10001;
constexpr double kConditionLimit = 1e10;

std::map<std::string, Matrix> named_values(const LmiProblem& problem, const Vector& x) {
    std::map<std::string, Matrix> values;
    for (const MatrixVariable& v : problem.variables) {
        values[v.name] = unpack_variable(v, x);
    }
    return values;
}

}  // namespace

ProductBounds default_product_bounds(const TsDelayModel& model) {
    return membership_product_bounds(model, kDomainLo, kDomainHi, kDomainGrid);
}

SynthesisResult synthesize(const TsDelayModel& model, const SynthesisSettings& settings) {
    SynthesisSettings used = settings;
    if (used.theorem == 2 && !used.have_bounds) {
        used.bounds = default_product_bounds(model);
        used.have_bounds = true;
    }

    SynthesisLmiOptions options;
    options.h = used.h;
    options.rho = used.rho;
    options.omega = used.omega;
    options.gamma = used.gamma;
    options.delay_rate = used.delay_rate;

    LmiProblem problem;
    if (used.theorem == 1) {
        problem = build_theorem1(model, options);
    } else if (used.theorem == 2) {
        problem = build_theorem2(model, options, used.bounds, used.slack);
    } else {
        throw std::invalid_argument("theorem must be 1 or 2");
    }

    const SdpFeasibilityProblem sdp = canonicalize(problem);
    SynthesisResult result;
    result.settings = used;
    result.gamma = used.gamma;
    result.report = solve_feasibility(sdp, settings.solver);
    result.status = result.report.status;
    if (result.status != SolveStatus::Feasible) {
        return result;
    }

    result.x = result.report.x;
    result.worst_margin = result.report.worst_margin;
    result.certificate = named_values(problem, result.x);

    const Matrix& p22 = result.certificate.at("P22t");
    Eigen::SelfAdjointEigenSolver<Matrix> es(p22, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().cwiseAbs().minCoeff();
    const double hi = es.eigenvalues().cwiseAbs().maxCoeff();
    result.p22_condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    if (!(result.p22_condition < kConditionLimit)) {
        throw std::runtime_error("filter recovery failed: recovery matrix condition number " +
                                 std::to_string(result.p22_condition));
    }

    const Eigen::LLT<Matrix> llt(p22);
    const int p = model.rule_count();
    for (int j = 1; j <= p; ++j) {
        const std::string idx = std::to_string(j);
        result.filter.A_hat.push_back(llt.solve(result.certificate.at("Af_" + idx)));
        result.filter.B_hat.push_back(llt.solve(result.certificate.at("Bf_" + idx)));
        result.filter.C_hat.push_back(result.certificate.at("Cf_" + idx));
    }
    return result;
}

GammaMinResult gamma_min(const TsDelayModel& model, SynthesisSettings settings, double lo,
                         double hi, double tol) {
    if (!(lo > 0.0) || !(hi >= lo) || !(tol > 0.0)) {
        throw std::invalid_argument("gamma_min: need 0 < lo <= hi and tol > 0");
    }
    if (settings.theorem == 2 && !settings.have_bounds) {
        settings.bounds = default_product_bounds(model);
        settings.have_bounds = true;
    }

    GammaMinResult result;
    result.log.tolerance = tol;
    auto probe = [&](double gamma) {
        settings.gamma = gamma;
        SynthesisResult r = synthesize(model, settings);
        result.log.probes.push_back({gamma, r.status, r.report.wall_time});
        if (r.status == SolveStatus::Indeterminate) {
            ++result.log.indeterminate_count;
        }
        return r;
    };

    SynthesisResult at_hi = probe(hi);
    if (at_hi.status != SolveStatus::Feasible) {
        result.log.gamma_star = 0.0;
        return result;  // found stays false; log carries the evidence
    }
    result.found = true;
    result.gamma_star = hi;
    result.at_star = std::move(at_hi);

    if (hi > lo) {
        SynthesisResult at_lo = probe(lo);
        if (at_lo.status == SolveStatus::Feasible) {
            result.gamma_star = lo;
            result.at_star = std::move(at_lo);
            result.log.gamma_star = result.gamma_star;
            return result;
        }
        double bad = lo;
        double good = hi;
        while (good - bad > tol) {
            const double mid = 0.5 * (good + bad);
            SynthesisResult at_mid = probe(mid);
            if (at_mid.status == SolveStatus::Feasible) {
                good = mid;
                result.gamma_star = mid;
                result.at_star = std::move(at_mid);
            } else {
                bad = mid;
            }
        }
    }
    result.log.gamma_star = result.gamma_star;
    return result;
}

CertifyResult certify_filter(const TsDelayModel& model, const FuzzyFilter& filter,
                             const SynthesisSettings& settings) {
    SynthesisLmiOptions options;
    options.h = settings.h;
    options.rho = settings.rho;
    options.omega = settings.omega;
    options.gamma = settings.gamma;
    options.delay_rate = settings.delay_rate;

    const LmiProblem problem =
        settings.have_bounds ? build_analysis(model, filter, options, settings.bounds, settings.slack)
                             : build_analysis(model, filter, options);
    const SdpFeasibilityProblem sdp = canonicalize(problem);

    CertifyResult result;
    result.gamma = settings.gamma;
    result.report = solve_feasibility(sdp, settings.solver);
    result.status = result.report.status;
    if (result.status == SolveStatus::Feasible) {
        result.certificate = named_values(problem, result.report.x);
        result.worst_margin = result.report.worst_margin;
    }
    return result;
}

}  // namespace fhinf
