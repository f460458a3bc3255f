#pragma once

#include "fhinf/lmi.hpp"
#include "fhinf/model.hpp"

namespace fhinf {

// The delayed-state diagonal block carries either -Y (as the synthesis
// condition is usually stated) or -(1 - rho)Y (as the underlying derivative
// bound produces); both variants are available, default Rho.
enum class DelayRateTerm { Plain, Rho };

enum class SlackStructure { Full, BlockDiagonal };

struct SynthesisLmiOptions {
    double h = 0.5;
    double rho = 0.0;
    double omega = 2.0;
    double gamma = 1.0;
    DelayRateTerm delay_rate = DelayRateTerm::Rho;
};

const char* to_string(DelayRateTerm mode);
const char* to_string(SlackStructure structure);

// Delay-kernel band grid: an (8n + n_w)-dimensional affine expression whose
// 2n x 2n sub-blocks carry (3/h) * {-3, 1, 12, -10, ...} copies of the
// variable z_var, with the trailing n_w band zero.  The expression is
// standalone for testing and is also folded into every synthesis and
// analysis block.
AffineBlockExpr build_lambda(double h, int z_var, int n, int n_w);
void add_lambda(AffineBlockExpr& expr, double h, int z_var, int n, int n_w);

// Membership-independent synthesis condition ("--theorem 1").
LmiProblem build_theorem1(const TsDelayModel& model, const SynthesisLmiOptions& options);

// Membership-aware synthesis condition ("--theorem 2"): adds slack matrix
// pairs weighted by the product bounds; never more conservative.
LmiProblem build_theorem2(const TsDelayModel& model, const SynthesisLmiOptions& options,
                          const ProductBounds& bounds,
                          SlackStructure slack = SlackStructure::Full);

// Fixed-filter analysis condition used by certify_filter.  The plain form
// asks for a certificate valid for every membership combination; the bounded
// form reuses the slack-pair relaxation so that a filter synthesised under
// given product bounds can be certified under the same bounds.
LmiProblem build_analysis(const TsDelayModel& model, const FuzzyFilter& filter,
                          const SynthesisLmiOptions& options);
LmiProblem build_analysis(const TsDelayModel& model, const FuzzyFilter& filter,
                          const SynthesisLmiOptions& options, const ProductBounds& bounds,
                          SlackStructure slack = SlackStructure::Full);

}  // namespace fhinf
