#include "fhinf/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fhinf {

double Grade::eval(double x) const {
    switch (family) {
        case GradeFamily::LogisticComplement:
            return 1.0 - a / (1.0 + std::exp(-b - c * x));
        case GradeFamily::Logistic:
            return a / (1.0 + std::exp(-b - c * x));
        case GradeFamily::Gaussian: {
            const double u = (x - a) / b;
            return std::exp(-0.5 * u * u);
        }
        case GradeFamily::Triangular: {
            if (x <= a || x >= c) {
                return 0.0;
            }
            return x <= b ? (x - a) / (b - a) : (c - x) / (c - b);
        }
        case GradeFamily::Constant:
            return a;
        case GradeFamily::Table: {
            if (breakpoints.empty()) {
                return 0.0;
            }
            if (x <= breakpoints.front()) {
                return values.front();
            }
            if (x >= breakpoints.back()) {
                return values.back();
            }
            auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
            const std::size_t hi = static_cast<std::size_t>(it - breakpoints.begin());
            const std::size_t lo = hi - 1;
            const double t = (x - breakpoints[lo]) / (breakpoints[hi] - breakpoints[lo]);
            return values[lo] + t * (values[hi] - values[lo]);
        }
    }
    return 0.0;
}

namespace {

void check_dims(std::vector<std::string>& out, const std::string& path, const Matrix& m,
                Eigen::Index rows, Eigen::Index cols) {
    if (m.rows() != rows || m.cols() != cols) {
        std::ostringstream oss;
        oss << path << ": expected " << rows << "x" << cols << ", got " << m.rows() << "x"
            << m.cols();
        out.push_back(oss.str());
    } else if (!is_finite(m)) {
        out.push_back(path + ": non-finite entries");
    }
}

}  // namespace

std::vector<std::string> validate_model(const TsDelayModel& model) {
    std::vector<std::string> out;
    if (model.n <= 0) out.push_back("n: must be positive");
    if (model.n_w <= 0) out.push_back("n_w: must be positive");
    if (model.n_y <= 0) out.push_back("n_y: must be positive");
    if (model.n_z <= 0) out.push_back("n_z: must be positive");
    if (model.rules.empty()) out.push_back("rules: must be nonempty");
    if (!out.empty()) {
        return out;  // dimension fields unusable, stop before matrix checks
    }

    for (std::size_t i = 0; i < model.rules.size(); ++i) {
        const RuleMatrices& r = model.rules[i];
        const std::string base = "rules[" + std::to_string(i) + "].";
        check_dims(out, base + "A", r.A, model.n, model.n);
        check_dims(out, base + "A_tau", r.A_tau, model.n, model.n);
        check_dims(out, base + "B", r.B, model.n, model.n_w);
        check_dims(out, base + "C", r.C, model.n_y, model.n);
        check_dims(out, base + "C_tau", r.C_tau, model.n_y, model.n);
        check_dims(out, base + "D", r.D, model.n_y, model.n_w);
        check_dims(out, base + "E", r.E, model.n_z, model.n);
        check_dims(out, base + "E_tau", r.E_tau, model.n_z, model.n);
    }

    if (!(model.delay.h > 0.0) || !std::isfinite(model.delay.h)) {
        out.push_back("delay.h: must be > 0");
    }
    if (!std::isfinite(model.delay.rho)) {
        out.push_back("delay.rho: must be finite");
    }

    if (model.membership.premise_index < 0 || model.membership.premise_index >= model.n) {
        out.push_back("membership.premise_index: out of range");
    }
    if (model.membership.grades.size() != model.rules.size()) {
        out.push_back("membership.grades: must have one grade per rule");
    }
    for (std::size_t i = 0; i < model.membership.grades.size(); ++i) {
        const Grade& g = model.membership.grades[i];
        const std::string base = "membership.grades[" + std::to_string(i) + "]";
        if (g.family == GradeFamily::Table) {
            if (g.breakpoints.size() < 2 || g.breakpoints.size() != g.values.size()) {
                out.push_back(base + ": table needs >= 2 matching breakpoints/values");
            } else if (!std::is_sorted(g.breakpoints.begin(), g.breakpoints.end(),
                                       std::less_equal<double>())) {
                out.push_back(base + ": table breakpoints must be strictly increasing");
            } else if (*std::min_element(g.values.begin(), g.values.end()) < 0.0) {
                out.push_back(base + ": table values must be nonnegative");
            }
        }
    }
    return out;
}

Vector membership_grades(const TsDelayModel& model, double psi) {
    const std::size_t p = model.membership.grades.size();
    Vector g(static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < p; ++i) {
        g[static_cast<Eigen::Index>(i)] = model.membership.grades[i].eval(psi);
    }
    return g;
}

Vector normalized_memberships_at(const TsDelayModel& model, double psi) {
    Vector g = membership_grades(model, psi);
    const double sum = g.sum();
    constexpr double kDegenerateTol = 1e-300;
    if (!(sum > kDegenerateTol) || !g.allFinite() || g.minCoeff() < 0.0) {
        std::ostringstream oss;
        oss << "degenerate membership normalization at psi = " << psi;
        throw std::domain_error(oss.str());
    }
    return g / sum;
}

Vector normalized_memberships(const TsDelayModel& model, const Vector& state) {
    if (state.size() != model.n) {
        throw std::invalid_argument("normalized_memberships: state dimension mismatch");
    }
    return normalized_memberships_at(model, state[model.membership.premise_index]);
}

AugmentedSystem augment(const TsDelayModel& model, const FuzzyFilter& filter) {
    const int p = model.rule_count();
    const int n = model.n;
    if (filter.rule_count() != p || static_cast<int>(filter.B_hat.size()) != p ||
        static_cast<int>(filter.C_hat.size()) != p) {
        throw std::invalid_argument("augment: filter rule count does not match model");
    }
    for (int j = 0; j < p; ++j) {
        if (filter.A_hat[j].rows() != n || filter.A_hat[j].cols() != n ||
            filter.B_hat[j].rows() != n || filter.B_hat[j].cols() != model.n_y ||
            filter.C_hat[j].rows() != model.n_z || filter.C_hat[j].cols() != n) {
            throw std::invalid_argument("augment: filter matrices of rule " + std::to_string(j) +
                                        " have wrong dimensions");
        }
    }

    AugmentedSystem sys;
    sys.p = p;
    sys.Abar.resize(static_cast<std::size_t>(p) * p);
    sys.Abar_tau.resize(static_cast<std::size_t>(p) * p);
    sys.Bbar.resize(static_cast<std::size_t>(p) * p);
    sys.Ebar.resize(static_cast<std::size_t>(p) * p);
    sys.Ebar_tau.resize(static_cast<std::size_t>(p) * p);

    for (int i = 0; i < p; ++i) {
        const RuleMatrices& r = model.rules[static_cast<std::size_t>(i)];
        for (int j = 0; j < p; ++j) {
            const std::size_t k = static_cast<std::size_t>(i * p + j);
            Matrix abar = Matrix::Zero(2 * n, 2 * n);
            abar.topLeftCorner(n, n) = r.A;
            abar.bottomLeftCorner(n, n) = filter.B_hat[j] * r.C;
            abar.bottomRightCorner(n, n) = filter.A_hat[j];
            sys.Abar[k] = abar;

            Matrix abar_tau = Matrix::Zero(2 * n, 2 * n);
            abar_tau.topLeftCorner(n, n) = r.A_tau;
            abar_tau.bottomLeftCorner(n, n) = filter.B_hat[j] * r.C_tau;
            sys.Abar_tau[k] = abar_tau;

            Matrix bbar(2 * n, model.n_w);
            bbar.topRows(n) = r.B;
            bbar.bottomRows(n) = filter.B_hat[j] * r.D;
            sys.Bbar[k] = bbar;

            Matrix ebar(model.n_z, 2 * n);
            ebar.leftCols(n) = r.E;
            ebar.rightCols(n) = -filter.C_hat[j];
            sys.Ebar[k] = ebar;

            Matrix ebar_tau = Matrix::Zero(model.n_z, 2 * n);
            ebar_tau.leftCols(n) = r.E_tau;
            sys.Ebar_tau[k] = ebar_tau;
        }
    }
    return sys;
}

ProductBounds membership_product_bounds(const TsDelayModel& model, double domain_lo,
                                        double domain_hi, int grid_points,
                                        double safety_margin) {
    if (grid_points < 2) {
        throw std::invalid_argument("membership_product_bounds: grid_points must be >= 2");
    }
    if (!(domain_lo < domain_hi)) {
        throw std::invalid_argument("membership_product_bounds: domain_lo must be < domain_hi");
    }
    const int p = model.rule_count();
    ProductBounds bounds;
    bounds.upper = Matrix::Constant(p, p, -std::numeric_limits<double>::infinity());
    bounds.lower = Matrix::Constant(p, p, std::numeric_limits<double>::infinity());

    const double step = (domain_hi - domain_lo) / (grid_points - 1);
    for (int k = 0; k < grid_points; ++k) {
        const Vector v = normalized_memberships_at(model, domain_lo + k * step);
        for (int i = 0; i < p; ++i) {
            for (int j = 0; j < p; ++j) {
                const double m = v[i] * v[j];
                bounds.upper(i, j) = std::max(bounds.upper(i, j), m);
                bounds.lower(i, j) = std::min(bounds.lower(i, j), m);
            }
        }
    }
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
            bounds.upper(i, j) = std::min(1.0, bounds.upper(i, j) + safety_margin);
            bounds.lower(i, j) = std::max(0.0, bounds.lower(i, j) - safety_margin);
        }
    }
    return bounds;
}

}  // namespace fhinf
