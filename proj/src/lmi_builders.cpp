#include "fhinf/lmi_builders.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fhinf {

namespace {

// Band coefficients of the delay kernel, in units of (3/h) * z_var.  The
// fifth (disturbance) band is zero and therefore absent.
constexpr double kLambdaGrid[4][4] = {
    {-3.0, 1.0, 12.0, -10.0},
    {1.0, -3.0, -8.0, 10.0},
    {12.0, -8.0, -64.0, 60.0},
    {-10.0, 10.0, 60.0, -60.0},
};

void require_valid(const TsDelayModel& model, const SynthesisLmiOptions& options) {
    const std::vector<std::string> violations = validate_model(model);
    if (!violations.empty()) {
        throw std::invalid_argument("invalid model: " + violations.front());
    }
    if (!(options.gamma > 0.0)) {
        throw std::invalid_argument("gamma must be positive");
    }
    if (!(options.h > 0.0)) {
        throw std::invalid_argument("h must be positive");
    }
}

double delay_rate_factor(const SynthesisLmiOptions& options) {
    return options.delay_rate == DelayRateTerm::Rho ? (1.0 - options.rho) : 1.0;
}

// Decision variable handles of the synthesis problems.
struct SynthVars {
    int p11 = -1;
    int p22t = -1;
    int yt = -1;
    int zt = -1;
    std::vector<int> af, bf, cf;
};

// Selector matrices splitting the 2n coupled state into plant and filter halves.
struct Selectors {
    Matrix top;     // 2n x n, embeds into rows 1..n
    Matrix bottom;  // 2n x n, embeds into rows n+1..2n
    Matrix both;    // top + bottom
    Matrix left;    // n x 2n, reads the plant half
    Matrix right;   // n x 2n, reads the filter half
};

Selectors make_selectors(int n) {
    Selectors s;
    s.top = Matrix::Zero(2 * n, n);
    s.top.topRows(n) = Matrix::Identity(n, n);
    s.bottom = Matrix::Zero(2 * n, n);
    s.bottom.bottomRows(n) = Matrix::Identity(n, n);
    s.both = s.top + s.bottom;
    s.left = Matrix::Zero(n, 2 * n);
    s.left.leftCols(n) = Matrix::Identity(n, n);
    s.right = Matrix::Zero(n, 2 * n);
    s.right.rightCols(n) = Matrix::Identity(n, n);
    return s;
}

// Appends the coupling block
//   [[P11*RA + Bf_j*RC (+ Af_j*RAf)], [P22t*RA + Bf_j*RC (+ Af_j*RAf)]]
// at (r0, c0), optionally with its mirrored transpose (Sym placement).
void add_coupling(AffineBlockExpr& expr, const SynthVars& vars, const Selectors& sel, int j,
                  const Matrix& ra, const Matrix& rc, const Matrix* raf, int r0, int c0,
                  double coeff, bool sym) {
    auto put = [&](int var, const Matrix& left, const Matrix& right) {
        Term t;
        t.var = var;
        t.coeff = coeff;
        t.row0 = r0;
        t.col0 = c0;
        t.left = left;
        t.right = right;
        if (sym) {
            expr.add_sym(t);
        } else {
            expr.add(std::move(t));
        }
    };
    put(vars.p11, sel.top, ra);
    put(vars.p22t, sel.bottom, ra);
    put(vars.bf[static_cast<std::size_t>(j)], sel.both, rc);
    if (raf != nullptr) {
        put(vars.af[static_cast<std::size_t>(j)], sel.both, *raf);
    }
}

// Appends the structured Lyapunov matrix [[P11, P22t], [P22t, P22t]],
// scaled by coeff, at diagonal position (r0, r0).
void add_ptilde(AffineBlockExpr& expr, const SynthVars& vars, const Selectors& sel, int r0,
                double coeff) {
    expr.add({vars.p11, false, coeff, r0, r0, sel.top, sel.top.transpose()});
    expr.add({vars.p22t, false, coeff, r0, r0, sel.top, sel.bottom.transpose()});
    expr.add({vars.p22t, false, coeff, r0, r0, sel.bottom, sel.top.transpose()});
    expr.add({vars.p22t, false, coeff, r0, r0, sel.bottom, sel.bottom.transpose()});
}

void add_identity_term(AffineBlockExpr& expr, int var, int dim, int r0, double coeff) {
    expr.add({var, false, coeff, r0, r0, Matrix::Identity(dim, dim), Matrix::Identity(dim, dim)});
}

// Appends one ordered-pair synthesis block (the full certificate matrix for
// rule pair (i, j)) into expr.
void add_synthesis_block(AffineBlockExpr& expr, const TsDelayModel& model, const SynthVars& vars,
                         const Selectors& sel, int i, int j,
                         const SynthesisLmiOptions& options) {
    const int n = model.n;
    const int n_w = model.n_w;
    const int n_z = model.n_z;
    const int m = 2 * n;
    const int s2 = m;            // delayed-state band
    const int s5 = 4 * m;        // disturbance band
    const int s6 = 4 * m + n_w;  // Schur band
    const int s7 = s6 + m;       // output band
    const RuleMatrices& rule = model.rules[static_cast<std::size_t>(i)];
    const double sqrt_h = std::sqrt(options.h);

    add_lambda(expr, options.h, vars.zt, n, n_w);

    const Matrix ra1 = rule.A * sel.left;
    const Matrix rc1 = rule.C * sel.left;
    const Matrix raf = sel.right;
    const Matrix ra2 = rule.A_tau * sel.left;
    const Matrix rc2 = rule.C_tau * sel.left;

    // State band: Sym{coupling} + Y.
    add_coupling(expr, vars, sel, j, ra1, rc1, &raf, 0, 0, 1.0, true);
    add_identity_term(expr, vars.yt, m, 0, 1.0);
    // Delayed-state column and its diagonal.
    add_coupling(expr, vars, sel, j, ra2, rc2, nullptr, 0, s2, 1.0, true);
    add_identity_term(expr, vars.yt, m, s2, -delay_rate_factor(options));
    // Disturbance column and corner.
    add_coupling(expr, vars, sel, j, rule.B, rule.D, nullptr, 0, s5, 1.0, true);
    expr.add_const(-options.gamma * options.gamma * Matrix::Identity(n_w, n_w), s5, s5);
    // Schur band: sqrt(h) times the three coupling columns, and the
    // relaxation corner -2*omega*Ptilde + omega^2*Ztilde.
    add_coupling(expr, vars, sel, j, ra1, rc1, &raf, s6, 0, sqrt_h, true);
    add_coupling(expr, vars, sel, j, ra2, rc2, nullptr, s6, s2, sqrt_h, true);
    add_coupling(expr, vars, sel, j, rule.B, rule.D, nullptr, s6, s5, sqrt_h, true);
    add_ptilde(expr, vars, sel, s6, -2.0 * options.omega);
    add_identity_term(expr, vars.zt, m, s6, options.omega * options.omega);
    // Output band.
    expr.add_const_sym(rule.E * sel.left, s7, 0);
    expr.add_sym({vars.cf[static_cast<std::size_t>(j)], false, -1.0, s7, 0,
                  Matrix::Identity(n_z, n_z), sel.right});
    expr.add_const_sym(rule.E_tau * sel.left, s7, s2);
    expr.add_const(-Matrix::Identity(n_z, n_z), s7, s7);
}

// Declares the shared synthesis variables and the positive side blocks.
SynthVars declare_synthesis_core(LmiProblem& problem, const TsDelayModel& model,
                                 const Selectors& sel) {
    const int n = model.n;
    const int m = 2 * n;
    const int p = model.rule_count();
    SynthVars vars;
    vars.p11 = problem.add_variable("P11", n, n, true);
    vars.p22t = problem.add_variable("P22t", n, n, true);
    vars.yt = problem.add_variable("Yt", m, m, true);
    vars.zt = problem.add_variable("Zt", m, m, true);
    for (int j = 1; j <= p; ++j) {
        vars.af.push_back(problem.add_variable("Af_" + std::to_string(j), n, n, false));
        vars.bf.push_back(problem.add_variable("Bf_" + std::to_string(j), n, model.n_y, false));
        vars.cf.push_back(problem.add_variable("Cf_" + std::to_string(j), model.n_z, n, false));
    }

    LmiConstraint ptilde;
    ptilde.label = "ptilde_pos";
    ptilde.sense = Sense::PosSemiDef;
    ptilde.expr = AffineBlockExpr(m);
    add_ptilde(ptilde.expr, vars, sel, 0, 1.0);
    problem.constraints.push_back(std::move(ptilde));

    LmiConstraint ypos;
    ypos.label = "yt_pos";
    ypos.sense = Sense::PosSemiDef;
    ypos.expr = AffineBlockExpr(m);
    add_identity_term(ypos.expr, vars.yt, m, 0, 1.0);
    problem.constraints.push_back(std::move(ypos));

    LmiConstraint zpos;
    zpos.label = "zt_pos";
    zpos.sense = Sense::PosSemiDef;
    zpos.expr = AffineBlockExpr(m);
    add_identity_term(zpos.expr, vars.zt, m, 0, 1.0);
    problem.constraints.push_back(std::move(zpos));
    return vars;
}

int block_dimension(const TsDelayModel& model) {
    return 10 * model.n + model.n_w + model.n_z;
}

// Slack pairs for every ordered rule pair.  Each entry lists the
// (variable, embed) pieces whose sum forms the slack matrix.
struct SlackParts {
    std::vector<int> vars;
    std::vector<Matrix> embeds;  // dim x segment width
};

struct SlackSet {
    std::vector<SlackParts> jparts;
    std::vector<SlackParts> kparts;
};

std::vector<int> slack_segments(const TsDelayModel& model, int dim, SlackStructure slack) {
    if (slack == SlackStructure::Full) {
        return {dim};
    }
    const int m = 2 * model.n;
    return {m, m, m, m, model.n_w, m, model.n_z};
}

void require_bounds(const ProductBounds& bounds, int p) {
    if (bounds.upper.rows() != p || bounds.upper.cols() != p || bounds.lower.rows() != p ||
        bounds.lower.cols() != p) {
        throw std::invalid_argument("product bounds dimension does not match rule count");
    }
}

// Declares the J/K slack variables and their positivity blocks for every
// ordered rule pair, split into the given diagonal segments.
SlackSet declare_slack(LmiProblem& problem, int p, int dim, const std::vector<int>& segments) {
    SlackSet set;
    set.jparts.resize(static_cast<std::size_t>(p) * p);
    set.kparts.resize(static_cast<std::size_t>(p) * p);
    for (int a = 0; a < p; ++a) {
        for (int b = 0; b < p; ++b) {
            const std::string suffix = "_" + std::to_string(a + 1) + "_" + std::to_string(b + 1);
            int offset = 0;
            for (std::size_t s = 0; s < segments.size(); ++s) {
                const int width = segments[s];
                const std::string seg =
                    segments.size() == 1 ? std::string() : "_s" + std::to_string(s + 1);
                Matrix embed = Matrix::Zero(dim, width);
                embed.block(offset, 0, width, width) = Matrix::Identity(width, width);

                const int jv = problem.add_variable("J" + suffix + seg, width, width, true);
                set.jparts[static_cast<std::size_t>(a * p + b)].vars.push_back(jv);
                set.jparts[static_cast<std::size_t>(a * p + b)].embeds.push_back(embed);

                const int kv = problem.add_variable("K" + suffix + seg, width, width, true);
                set.kparts[static_cast<std::size_t>(a * p + b)].vars.push_back(kv);
                set.kparts[static_cast<std::size_t>(a * p + b)].embeds.push_back(embed);

                LmiConstraint jpos;
                jpos.label = "J" + suffix + seg + "_pos";
                jpos.sense = Sense::PosSemiDef;
                jpos.expr = AffineBlockExpr(width);
                add_identity_term(jpos.expr, jv, width, 0, 1.0);
                problem.constraints.push_back(std::move(jpos));

                LmiConstraint kpos;
                kpos.label = "K" + suffix + seg + "_pos";
                kpos.sense = Sense::PosSemiDef;
                kpos.expr = AffineBlockExpr(width);
                add_identity_term(kpos.expr, kv, width, 0, 1.0);
                problem.constraints.push_back(std::move(kpos));

                offset += width;
            }
        }
    }
    return set;
}

// Nets the slack coefficients of the summed ordered pair (i, j): each ordered
// term contributes -J_ij + K_ij plus the bound-weighted sums over all pairs.
void add_netted_slack(AffineBlockExpr& expr, const SlackSet& set, const ProductBounds& bounds,
                      int p, int i, int j) {
    for (int a = 0; a < p; ++a) {
        for (int b = 0; b < p; ++b) {
            double cj = 2.0 * bounds.upper(a, b);
            double ck = -2.0 * bounds.lower(a, b);
            if (a == i && b == j) {
                cj -= 1.0;
                ck += 1.0;
            }
            if (a == j && b == i) {
                cj -= 1.0;
                ck += 1.0;
            }
            const SlackParts& jp = set.jparts[static_cast<std::size_t>(a * p + b)];
            const SlackParts& kp = set.kparts[static_cast<std::size_t>(a * p + b)];
            for (std::size_t s = 0; s < jp.vars.size(); ++s) {
                if (cj != 0.0) {
                    expr.add({jp.vars[s], false, cj, 0, 0, jp.embeds[s], jp.embeds[s].transpose()});
                }
                if (ck != 0.0) {
                    expr.add({kp.vars[s], false, ck, 0, 0, kp.embeds[s], kp.embeds[s].transpose()});
                }
            }
        }
    }
}

}  // namespace

const char* to_string(DelayRateTerm mode) {
    return mode == DelayRateTerm::Plain ? "plain" : "rho";
}

const char* to_string(SlackStructure structure) {
    return structure == SlackStructure::Full ? "full" : "block_diagonal";
}

void add_lambda(AffineBlockExpr& expr, double h, int z_var, int n, int n_w) {
    if (!(h > 0.0)) {
        throw std::invalid_argument("add_lambda: h must be positive");
    }
    const int m = 2 * n;
    const Matrix eye = Matrix::Identity(m, m);
    const double scale = 3.0 / h;
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            expr.add({z_var, false, scale * kLambdaGrid[r][c], r * m, c * m, eye, eye});
        }
    }
    (void)n_w;  // trailing disturbance band is zero by construction
}

AffineBlockExpr build_lambda(double h, int z_var, int n, int n_w) {
    AffineBlockExpr expr(8 * n + n_w);
    add_lambda(expr, h, z_var, n, n_w);
    return expr;
}

LmiProblem build_theorem1(const TsDelayModel& model, const SynthesisLmiOptions& options) {
    require_valid(model, options);
    const int p = model.rule_count();
    const int dim = block_dimension(model);
    const Selectors sel = make_selectors(model.n);

    LmiProblem problem;
    problem.metadata.h = options.h;
    problem.metadata.rho = options.rho;
    problem.metadata.omega = options.omega;
    problem.metadata.gamma = options.gamma;
    problem.metadata.delay_rate = to_string(options.delay_rate);
    problem.metadata.family = "theorem1";

    const SynthVars vars = declare_synthesis_core(problem, model, sel);
    for (int i = 0; i < p; ++i) {
        for (int j = i; j < p; ++j) {
            LmiConstraint c;
            c.label = "pair_" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
            c.sense = Sense::NegDef;
            c.expr = AffineBlockExpr(dim);
            add_synthesis_block(c.expr, model, vars, sel, i, j, options);
            add_synthesis_block(c.expr, model, vars, sel, j, i, options);
            problem.constraints.push_back(std::move(c));
        }
    }
    return problem;
}

LmiProblem build_theorem2(const TsDelayModel& model, const SynthesisLmiOptions& options,
                          const ProductBounds& bounds, SlackStructure slack) {
    require_valid(model, options);
    const int p = model.rule_count();
    require_bounds(bounds, p);
    const int dim = block_dimension(model);
    const Selectors sel = make_selectors(model.n);

    LmiProblem problem;
    problem.metadata.h = options.h;
    problem.metadata.rho = options.rho;
    problem.metadata.omega = options.omega;
    problem.metadata.gamma = options.gamma;
    problem.metadata.delay_rate = to_string(options.delay_rate);
    problem.metadata.slack = to_string(slack);
    problem.metadata.family = "theorem2";

    const SynthVars vars = declare_synthesis_core(problem, model, sel);
    const SlackSet set = declare_slack(problem, p, dim, slack_segments(model, dim, slack));

    for (int i = 0; i < p; ++i) {
        for (int j = i; j < p; ++j) {
            LmiConstraint c;
            c.label = "pair_" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
            c.sense = Sense::NegDef;
            c.expr = AffineBlockExpr(dim);
            add_synthesis_block(c.expr, model, vars, sel, i, j, options);
            add_synthesis_block(c.expr, model, vars, sel, j, i, options);
            add_netted_slack(c.expr, set, bounds, p, i, j);
            problem.constraints.push_back(std::move(c));
        }
    }
    return problem;
}

namespace {

LmiProblem build_analysis_impl(const TsDelayModel& model, const FuzzyFilter& filter,
                               const SynthesisLmiOptions& options, const ProductBounds* bounds,
                               SlackStructure slack) {
    require_valid(model, options);
    const AugmentedSystem aug = augment(model, filter);
    const int p = model.rule_count();
    const int n = model.n;
    const int n_w = model.n_w;
    const int n_z = model.n_z;
    const int m = 2 * n;
    const int s2 = m;
    const int s5 = 4 * m;
    const int s6 = 4 * m + n_w;
    const int s7 = s6 + m;
    const int dim = block_dimension(model);
    const double sqrt_h = std::sqrt(options.h);
    if (bounds != nullptr) {
        require_bounds(*bounds, p);
    }

    LmiProblem problem;
    problem.metadata.h = options.h;
    problem.metadata.rho = options.rho;
    problem.metadata.omega = options.omega;
    problem.metadata.gamma = options.gamma;
    problem.metadata.delay_rate = to_string(options.delay_rate);
    problem.metadata.family = "analysis";
    if (bounds != nullptr) {
        problem.metadata.slack = to_string(slack);
    }

    const int pv = problem.add_variable("P", m, m, true);
    const int yv = problem.add_variable("Y", m, m, true);
    const int zv = problem.add_variable("Z", m, m, true);
    for (const auto& [label, var] :
         {std::pair{"p_pos", pv}, std::pair{"y_pos", yv}, std::pair{"z_pos", zv}}) {
        LmiConstraint pos;
        pos.label = label;
        pos.sense = Sense::PosSemiDef;
        pos.expr = AffineBlockExpr(m);
        add_identity_term(pos.expr, var, m, 0, 1.0);
        problem.constraints.push_back(std::move(pos));
    }

    SlackSet set;
    if (bounds != nullptr) {
        set = declare_slack(problem, p, dim, slack_segments(model, dim, slack));
    }

    const Matrix eye_m = Matrix::Identity(m, m);
    auto add_phi = [&](AffineBlockExpr& expr, int i, int j) {
        add_lambda(expr, options.h, zv, n, n_w);
        expr.add_sym({pv, false, 1.0, 0, 0, eye_m, aug.abar(i, j)});
        add_identity_term(expr, yv, m, 0, 1.0);
        expr.add_sym({pv, false, 1.0, 0, s2, eye_m, aug.abar_tau(i, j)});
        add_identity_term(expr, yv, m, s2, -delay_rate_factor(options));
        expr.add_sym({pv, false, 1.0, 0, s5, eye_m, aug.bbar(i, j)});
        expr.add_const(-options.gamma * options.gamma * Matrix::Identity(n_w, n_w), s5, s5);
        expr.add_sym({pv, false, sqrt_h, s6, 0, eye_m, aug.abar(i, j)});
        expr.add_sym({pv, false, sqrt_h, s6, s2, eye_m, aug.abar_tau(i, j)});
        expr.add_sym({pv, false, sqrt_h, s6, s5, eye_m, aug.bbar(i, j)});
        add_identity_term(expr, pv, m, s6, -2.0 * options.omega);
        add_identity_term(expr, zv, m, s6, options.omega * options.omega);
        expr.add_const_sym(aug.ebar(i, j), s7, 0);
        expr.add_const_sym(aug.ebar_tau(i, j), s7, s2);
        expr.add_const(-Matrix::Identity(n_z, n_z), s7, s7);
    };

    for (int i = 0; i < p; ++i) {
        for (int j = i; j < p; ++j) {
            LmiConstraint c;
            c.label = "pair_" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
            c.sense = Sense::NegDef;
            c.expr = AffineBlockExpr(dim);
            add_phi(c.expr, i, j);
            add_phi(c.expr, j, i);
            if (bounds != nullptr) {
                add_netted_slack(c.expr, set, *bounds, p, i, j);
            }
            problem.constraints.push_back(std::move(c));
        }
    }
    return problem;
}

}  // namespace

LmiProblem build_analysis(const TsDelayModel& model, const FuzzyFilter& filter,
                          const SynthesisLmiOptions& options) {
    return build_analysis_impl(model, filter, options, nullptr, SlackStructure::Full);
}

LmiProblem build_analysis(const TsDelayModel& model, const FuzzyFilter& filter,
                          const SynthesisLmiOptions& options, const ProductBounds& bounds,
                          SlackStructure slack) {
    return build_analysis_impl(model, filter, options, &bounds, slack);
}

}  // namespace fhinf
