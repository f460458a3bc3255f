#include "fhinf/solver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

namespace fhinf {

namespace {

int svec_length(int m) { return m * (m + 1) / 2; }

// Scaled lower-triangle vectorization with off-diagonal sqrt(2), so that
// tr(A*B) equals the dot product of the two svec images.
void svec_into(const Matrix& a, Eigen::Ref<Vector> out) {
    const double root2 = std::sqrt(2.0);
    int k = 0;
    for (int r = 0; r < a.rows(); ++r) {
        for (int c = 0; c <= r; ++c) {
            out[k++] = (r == c) ? a(r, c) : root2 * a(r, c);
        }
    }
}

// Per-block working set of the barrier iteration.
struct BlockWork {
    const SdpBlock* src = nullptr;
    double sigma = 1.0;  // +1 negdef, -1 possemidef
    int m = 0;
    int sv = 0;
    int k0 = 0;           // coefficients cover [k0, k0 + db) when contiguous
    bool contiguous = false;
    std::vector<int> ks;  // global scalar indices
    Matrix v;             // sv x db, svec images of the F_k
    Matrix value;         // F(x) at the current point
    Matrix slack;         // t*I - F (negdef) or F + t*I (possemidef)
    Matrix slack_inv;
    double logdet = 0.0;
};

Matrix block_value(const SdpBlock& b, const Vector& x) {
    Matrix out = b.f0;
    for (const auto& [k, fk] : b.coeff) {
        out += x[k] * fk;
    }
    return out;
}

// Slack of a block at (x, t); positive definite iff the point is interior.
Matrix block_slack(const BlockWork& w, double t) {
    if (w.sigma > 0.0) {
        return t * Matrix::Identity(w.m, w.m) - w.value;
    }
    return w.value + t * Matrix::Identity(w.m, w.m);
}

struct SlackEval {
    bool interior = false;
    double logdet_sum = 0.0;
};

// Recomputes every block value and slack at (x, t); fails fast on the first
// non-positive-definite slack.
SlackEval refresh_slacks(std::vector<BlockWork>& work, const Vector& x, double t,
                         bool keep = true) {
    SlackEval eval;
    for (BlockWork& w : work) {
        Matrix value = block_value(*w.src, x);
        if (keep) {
            w.value = value;
        }
        Matrix slack = w.sigma > 0.0 ? Matrix(t * Matrix::Identity(w.m, w.m) - value)
                                     : Matrix(value + t * Matrix::Identity(w.m, w.m));
        Eigen::LLT<Matrix> llt(slack);
        if (llt.info() != Eigen::Success) {
            return eval;
        }
        double logdet = 0.0;
        for (int i = 0; i < w.m; ++i) {
            const double lii = llt.matrixLLT()(i, i);
            if (!(lii > 0.0)) {
                return eval;
            }
            logdet += std::log(lii);
        }
        eval.logdet_sum += 2.0 * logdet;
        if (keep) {
            w.slack = std::move(slack);
            w.slack_inv = llt.solve(Matrix::Identity(w.m, w.m));
            w.logdet = 2.0 * logdet;
        }
    }
    eval.interior = true;
    return eval;
}

}  // namespace

const char* to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Feasible: return "feasible";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Indeterminate: return "indeterminate";
    }
    return "unknown";
}

SolverReport solve_feasibility(const SdpFeasibilityProblem& problem, double eps, int max_iter) {
    PhaseOneOptions options;
    options.eps_strict = eps;
    options.max_iterations = max_iter;
    return solve_feasibility(problem, options);
}

SolverReport solve_feasibility(const SdpFeasibilityProblem& problem,
                               const PhaseOneOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    SolverReport report;
    const int d = problem.d;
    const double eps = options.eps_strict;

    std::vector<BlockWork> work;
    work.reserve(problem.blocks.size());
    double nu = 0.0;  // total barrier parameter
    for (const SdpBlock& b : problem.blocks) {
        BlockWork w;
        w.src = &b;
        w.sigma = b.sense == Sense::NegDef ? 1.0 : -1.0;
        w.m = b.dim;
        w.sv = svec_length(b.dim);
        nu += b.dim;
        const int db = static_cast<int>(b.coeff.size());
        w.ks.reserve(static_cast<std::size_t>(db));
        w.v.resize(w.sv, db);
        for (int j = 0; j < db; ++j) {
            w.ks.push_back(b.coeff[static_cast<std::size_t>(j)].first);
            svec_into(b.coeff[static_cast<std::size_t>(j)].second, w.v.col(j));
        }
        w.k0 = db > 0 ? w.ks.front() : 0;
        w.contiguous = true;
        for (int j = 0; j < db; ++j) {
            if (w.ks[static_cast<std::size_t>(j)] != w.k0 + j) {
                w.contiguous = false;
                break;
            }
        }
        work.push_back(std::move(w));
    }

    // Starting point: x = 0 with t large enough for every slack to be
    // comfortably positive definite.
    Vector x = Vector::Zero(d);
    double t = 0.0;
    for (const BlockWork& w : work) {
        const double bound = w.sigma > 0.0 ? max_eigenvalue(w.src->f0) : -min_eigenvalue(w.src->f0);
        t = std::max(t, bound);
    }
    t += 1.0;

    double eta = options.eta0;
    double barrier = 0.0;  // eta*t - sum logdet, refreshed each accepted point
    {
        const SlackEval eval = refresh_slacks(work, x, t);
        if (!eval.interior) {
            report.message = "initial point not interior";
            return report;
        }
        barrier = eta * t - eval.logdet_sum;
    }

    Vector grad(d + 1);
    Matrix hess(d + 1, d + 1);
    Vector svec_buf;
    Matrix w_buf;

    auto finish = [&](SolveStatus status, const std::string& message) {
        report.status = status;
        report.x = x;
        report.t = t;
        report.worst_margin = eigen_margin(problem, x);
        report.message = message;
        report.wall_time =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return report;
    };

    if (t <= -2.0 * eps) {
        return finish(SolveStatus::Feasible, "interior at the starting point");
    }

    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        report.iterations = iter;

        // Assemble gradient and Hessian of eta*t - sum log det S_b.
        grad.setZero();
        hess.setZero();
        grad[d] = eta;
        for (BlockWork& w : work) {
            const int db = static_cast<int>(w.ks.size());
            svec_buf.resize(w.sv);
            svec_into(w.slack_inv, svec_buf);
            const double tr_inv = w.slack_inv.trace();
            grad[d] -= tr_inv;

            const Matrix slack_inv2 = w.slack_inv * w.slack_inv;
            hess(d, d) += slack_inv2.trace();

            if (db == 0) {
                continue;
            }
            // Gradient in x: sigma * tr(S^-1 F_k).
            const Vector g_local = w.v.transpose() * svec_buf;
            // t-row coupling: -sigma * tr(S^-2 F_k).
            Vector svec2(w.sv);
            svec_into(slack_inv2, svec2);
            const Vector ht_local = w.v.transpose() * svec2;

            // Hessian: tr(S^-1 F_k S^-1 F_l) via stacked svec GEMM.
            w_buf.resize(w.sv, db);
            for (int j = 0; j < db; ++j) {
                const Matrix wk =
                    w.slack_inv * w.src->coeff[static_cast<std::size_t>(j)].second * w.slack_inv;
                svec_into(wk, w_buf.col(j));
            }
            const Matrix h_local = w_buf.transpose() * w.v;

            if (w.contiguous) {
                grad.segment(w.k0, db) += w.sigma * g_local;
                hess.block(w.k0, w.k0, db, db) += h_local;
                hess.block(d, w.k0, 1, db) -= w.sigma * ht_local.transpose();
                hess.block(w.k0, d, db, 1) -= w.sigma * ht_local;
            } else {
                for (int j = 0; j < db; ++j) {
                    const int kj = w.ks[static_cast<std::size_t>(j)];
                    grad[kj] += w.sigma * g_local[j];
                    hess(d, kj) -= w.sigma * ht_local[j];
                    hess(kj, d) -= w.sigma * ht_local[j];
                    for (int l = 0; l < db; ++l) {
                        hess(kj, w.ks[static_cast<std::size_t>(l)]) += h_local(j, l);
                    }
                }
            }
        }

        // Newton direction via LLT with an escalating relative ridge.
        double maxdiag = 1.0;
        for (int k = 0; k <= d; ++k) {
            maxdiag = std::max(maxdiag, hess(k, k));
        }
        Vector delta;
        double ridge = 1e-13 * maxdiag;
        Eigen::LLT<Matrix> llt;
        for (;; ridge *= 100.0) {
            Matrix regularized = hess;
            regularized.diagonal().array() += ridge;
            llt.compute(regularized);
            if (llt.info() == Eigen::Success) {
                delta = llt.solve(-grad);
                break;
            }
            if (ridge > 1e-2 * maxdiag) {
                return finish(SolveStatus::Indeterminate, "Newton system not positive definite");
            }
        }
        double decrement2 = -grad.dot(delta);

        if (decrement2 < options.center_tol) {
            // Centered at the current stage: certify or tighten the path.
            const double lower = t - 2.0 * nu / eta;
            report.lower_bound = lower;
            if (t <= -2.0 * eps) {
                return finish(SolveStatus::Feasible, "centered below the required margin");
            }
            if (lower > -eps) {
                return finish(SolveStatus::Infeasible,
                              "certified bound " + std::to_string(lower) + " above -eps");
            }
            if (eta >= options.eta_max) {
                return finish(SolveStatus::Indeterminate, "barrier weight limit reached");
            }
            const double eta_next = std::min(eta * options.eta_growth, options.eta_max);
            grad[d] += eta_next - eta;
            eta = eta_next;
            delta = llt.solve(-grad);
            decrement2 = -grad.dot(delta);
            // Refresh the cached barrier value for the new weight.
            double logdet_sum = 0.0;
            for (const BlockWork& w : work) {
                logdet_sum += w.logdet;
            }
            barrier = eta * t - logdet_sum;
        }

        // Backtracking line search keeping every slack positive definite and
        // decreasing the barrier (Armijo).
        const double slope = grad.dot(delta);
        double step = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < options.max_line_search; ++ls, step *= 0.5) {
            const Vector x_try = x + step * delta.head(d);
            const double t_try = t + step * delta[d];
            const SlackEval eval = refresh_slacks(work, x_try, t_try, false);
            if (!eval.interior) {
                continue;
            }
            const double barrier_try = eta * t_try - eval.logdet_sum;
            const bool fast_exit = t_try <= -2.0 * eps;
            if (fast_exit || barrier_try <= barrier + 0.01 * step * slope) {
                x = x_try;
                t = t_try;
                refresh_slacks(work, x, t);
                barrier = eta * t_try - eval.logdet_sum;
                accepted = true;
                if (fast_exit) {
                    return finish(SolveStatus::Feasible, "margin achieved");
                }
                break;
            }
        }
        if (!accepted) {
            return finish(SolveStatus::Indeterminate, "line search stalled");
        }
        if (options.verbose) {
            std::fprintf(stderr, "[solver] iter=%d eta=%.1e t=%.6e dec2=%.3e\n", iter, eta, t,
                         decrement2);
        }
    }
    return finish(SolveStatus::Indeterminate, "iteration limit reached");
}

}  // namespace fhinf
