#include "fhinf/sdp.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace fhinf {

Matrix SdpBlock::evaluate(const Vector& x) const {
    Matrix out = f0;
    for (const auto& [k, fk] : coeff) {
        out += x[k] * fk;
    }
    return out;
}

SdpFeasibilityProblem canonicalize(const LmiProblem& problem) {
    SdpFeasibilityProblem sdp;
    sdp.d = problem.num_scalars;
    for (const MatrixVariable& v : problem.variables) {
        sdp.directory.push_back({v.name, v.offset, v.scalar_count(), v.rows, v.cols, v.symmetric});
    }

    for (const LmiConstraint& c : problem.constraints) {
        SdpBlock block;
        block.label = c.label;
        block.sense = c.sense;
        block.dim = c.expr.rows;
        block.f0 = symmetrized(c.expr.constant);
        if ((c.expr.constant - block.f0).cwiseAbs().maxCoeff() > 1e-9) {
            throw std::invalid_argument("constraint constant not symmetric: " + c.label);
        }

        std::vector<Matrix> fk(static_cast<std::size_t>(sdp.d));
        std::vector<char> used(static_cast<std::size_t>(sdp.d), 0);
        auto accumulate = [&](int k, int r0, int c0, const Matrix& contribution) {
            if (!used[static_cast<std::size_t>(k)]) {
                used[static_cast<std::size_t>(k)] = 1;
                fk[static_cast<std::size_t>(k)] = Matrix::Zero(block.dim, block.dim);
            }
            fk[static_cast<std::size_t>(k)].block(r0, c0, contribution.rows(),
                                                  contribution.cols()) += contribution;
        };

        for (const Term& t : c.expr.terms) {
            if (t.var < 0 || t.var >= static_cast<int>(problem.variables.size())) {
                throw std::invalid_argument("term references undeclared variable in " + c.label);
            }
            const MatrixVariable& v = problem.variables[static_cast<std::size_t>(t.var)];
            if (v.symmetric) {
                int k = v.offset;
                for (int r = 0; r < v.rows; ++r) {
                    for (int col = 0; col <= r; ++col) {
                        Matrix contribution = t.coeff * (t.left.col(r) * t.right.row(col));
                        if (r != col) {
                            contribution += t.coeff * (t.left.col(col) * t.right.row(r));
                        }
                        accumulate(k, t.row0, t.col0, contribution);
                        ++k;
                    }
                }
            } else {
                int k = v.offset;
                for (int r = 0; r < v.rows; ++r) {
                    for (int col = 0; col < v.cols; ++col) {
                        const Matrix contribution =
                            t.transposed ? Matrix(t.coeff * (t.left.col(col) * t.right.row(r)))
                                         : Matrix(t.coeff * (t.left.col(r) * t.right.row(col)));
                        accumulate(k, t.row0, t.col0, contribution);
                        ++k;
                    }
                }
            }
        }

        for (int k = 0; k < sdp.d; ++k) {
            if (!used[static_cast<std::size_t>(k)]) {
                continue;
            }
            Matrix& m = fk[static_cast<std::size_t>(k)];
            const Matrix sym = symmetrized(m);
            if ((m - sym).cwiseAbs().maxCoeff() > 1e-9) {
                throw std::invalid_argument("asymmetric coefficient in " + c.label);
            }
            if (sym.cwiseAbs().maxCoeff() == 0.0) {
                continue;
            }
            block.coeff.emplace_back(k, sym);
        }
        sdp.blocks.push_back(std::move(block));
    }
    return sdp;
}

std::vector<double> block_margins(const SdpFeasibilityProblem& problem, const Vector& x) {
    std::vector<double> margins;
    margins.reserve(problem.blocks.size());
    for (const SdpBlock& b : problem.blocks) {
        const Matrix value = b.evaluate(x);
        if (b.sense == Sense::NegDef) {
            margins.push_back(-max_eigenvalue(value));
        } else {
            margins.push_back(min_eigenvalue(value));
        }
    }
    return margins;
}

double eigen_margin(const SdpFeasibilityProblem& problem, const Vector& x) {
    const std::vector<double> margins = block_margins(problem, x);
    double worst = -std::numeric_limits<double>::infinity();
    for (double m : margins) {
        worst = std::max(worst, -m);
    }
    return worst;
}

}  // namespace fhinf
