#pragma once

#include <string>
#include <vector>

#include "fhinf/types.hpp"

namespace fhinf {

// Local linear model of one fuzzy rule. Dimensions follow the owning
// TsDelayModel: state n, disturbance n_w, measurement n_y, target n_z.
struct RuleMatrices {
    Matrix A;      // n x n
    Matrix A_tau;  // n x n, delayed-state dynamics
    Matrix B;      // n x n_w
    Matrix C;      // n_y x n
    Matrix C_tau;  // n_y x n
    Matrix D;      // n_y x n_w
    Matrix E;      // n_z x n
    Matrix E_tau;  // n_z x n
};

// Admissible delay class: 0 <= tau(t) < h and d/dt tau(t) <= rho.
struct DelaySpec {
    double h = 0.0;
    double rho = 0.0;
};

enum class GradeFamily {
    LogisticComplement,  // 1 - a / (1 + exp(-b - c*x))
    Logistic,            // a / (1 + exp(-b - c*x))
    Gaussian,            // exp(-(x - center)^2 / (2 * width^2))
    Triangular,          // hat with feet l, r and peak at m
    Constant,            // v
    Table,               // piecewise-linear over breakpoints, clamped outside
};

struct Grade {
    GradeFamily family = GradeFamily::Constant;
    // Parameter slots by family:
    //   LogisticComplement / Logistic: a, b, c
    //   Gaussian: a = center, b = width
    //   Triangular: a = l, b = m, c = r
    //   Constant: a = v
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    std::vector<double> breakpoints;  // Table only, strictly increasing
    std::vector<double> values;       // Table only, same length

    double eval(double x) const;
};

// The premise variable is one designated state component; grades are the
// unnormalized memberships of the p rules evaluated at that component.
struct MembershipSpec {
    int premise_index = 0;
    std::vector<Grade> grades;
};

struct TsDelayModel {
    int n = 0;
    int n_w = 0;
    int n_y = 0;
    int n_z = 0;
    std::vector<RuleMatrices> rules;
    DelaySpec delay;
    MembershipSpec membership;

    int rule_count() const { return static_cast<int>(rules.size()); }
};

// Rule-indexed filter matrices sharing the plant's memberships.
struct FuzzyFilter {
    std::vector<Matrix> A_hat;  // p of n x n
    std::vector<Matrix> B_hat;  // p of n x n_y
    std::vector<Matrix> C_hat;  // p of n_z x n

    int rule_count() const { return static_cast<int>(A_hat.size()); }
};

// Coupled plant/filter error system, one entry per rule pair (i, j).
struct AugmentedSystem {
    int p = 0;
    // Indexed [i * p + j].
    std::vector<Matrix> Abar;      // 2n x 2n,  [[A_i, 0], [Bhat_j C_i, Ahat_j]]
    std::vector<Matrix> Abar_tau;  // 2n x 2n,  [[A_tau_i, 0], [Bhat_j C_tau_i, 0]]
    std::vector<Matrix> Bbar;      // 2n x n_w, [B_i; Bhat_j D_i]
    std::vector<Matrix> Ebar;      // n_z x 2n, [E_i, -Chat_j]
    std::vector<Matrix> Ebar_tau;  // n_z x 2n, [E_tau_i, 0]

    const Matrix& abar(int i, int j) const { return Abar[i * p + j]; }
    const Matrix& abar_tau(int i, int j) const { return Abar_tau[i * p + j]; }
    const Matrix& bbar(int i, int j) const { return Bbar[i * p + j]; }
    const Matrix& ebar(int i, int j) const { return Ebar[i * p + j]; }
    const Matrix& ebar_tau(int i, int j) const { return Ebar_tau[i * p + j]; }
};

// Entrywise bounds on the membership products m_ij = v_i(psi) v_j(psi)
// over an operating domain of the premise variable.
struct ProductBounds {
    Matrix upper;  // p x p
    Matrix lower;  // p x p
};

// Collects every dimension/invariant violation with a path string;
// empty means the model is well-formed. Never throws.
std::vector<std::string> validate_model(const TsDelayModel& model);

// Unnormalized grades evaluated at the premise component of `state`.
Vector membership_grades(const TsDelayModel& model, double psi);

// Normalized memberships v_i >= 0, sum v_i = 1. Throws std::domain_error
// when the grade sum at psi is not strictly positive.
Vector normalized_memberships(const TsDelayModel& model, const Vector& state);
Vector normalized_memberships_at(const TsDelayModel& model, double psi);

// Assembles the p^2 rule-pair blocks of the filtering error system.
// Throws std::invalid_argument on a filter/model dimension mismatch.
AugmentedSystem augment(const TsDelayModel& model, const FuzzyFilter& filter);

// Dense 1-D grid search for the product bounds, widened outward by
// `safety_margin` and clipped to [0, 1].
ProductBounds membership_product_bounds(const TsDelayModel& model, double domain_lo,
                                        double domain_hi, int grid_points,
                                        double safety_margin = 1e-6);

}  // namespace fhinf
