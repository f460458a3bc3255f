#pragma once

#include <string>
#include <vector>

#include "fhinf/types.hpp"

namespace fhinf {

// ==================================================================
// Symbolic affine matrix expressions
// ==================================================================
//
// A constraint block is an affine function of named matrix variables,
//     B(x) = constant + sum_t coeff_t * L_t * X_{v(t)}(^T) * R_t
// with each product anchored at (row0, col0) inside the block.  Symmetric
// variables are packed as their lower triangle; free variables row-major.

struct MatrixVariable {
    std::string name;
    int rows = 0;
    int cols = 0;
    bool symmetric = false;
    int offset = 0;  // first entry in the packed scalar vector

    int scalar_count() const { return symmetric ? rows * (rows + 1) / 2 : rows * cols; }
};

// One contribution coeff * left * X * right (X transposed when `transposed`).
struct Term {
    int var = 0;
    bool transposed = false;
    double coeff = 1.0;
    int row0 = 0;
    int col0 = 0;
    Matrix left;   // block rows x (X rows; X cols when transposed)
    Matrix right;  // (X cols; X rows when transposed) x block cols
};

struct AffineBlockExpr {
    int rows = 0;
    int cols = 0;
    Matrix constant;  // rows x cols
    std::vector<Term> terms;

    explicit AffineBlockExpr(int dim = 0)
        : rows(dim), cols(dim), constant(Matrix::Zero(dim, dim)) {}

    void add(Term t) { terms.push_back(std::move(t)); }

    // Adds t together with its transpose mirrored across the block diagonal,
    // i.e. the pair realizing Sym{.} placement.
    void add_sym(const Term& t) {
        terms.push_back(t);
        Term mirror;
        mirror.var = t.var;
        mirror.transposed = !t.transposed;
        mirror.coeff = t.coeff;
        mirror.row0 = t.col0;
        mirror.col0 = t.row0;
        mirror.left = t.right.transpose();
        mirror.right = t.left.transpose();
        terms.push_back(std::move(mirror));
    }

    void add_const(const Matrix& m, int r0, int c0) {
        constant.block(r0, c0, m.rows(), m.cols()) += m;
    }

    // m at (r0, c0) plus m^T at (c0, r0).
    void add_const_sym(const Matrix& m, int r0, int c0) {
        constant.block(r0, c0, m.rows(), m.cols()) += m;
        constant.block(c0, r0, m.cols(), m.rows()) += m.transpose();
    }

    Matrix evaluate(const std::vector<Matrix>& values) const;
};

enum class Sense {
    NegDef,      // B(x) < 0 (strict, up to the solver margin)
    PosSemiDef,  // B(x) >= 0 (solved with a strict positive margin)
};

struct LmiConstraint {
    std::string label;
    Sense sense = Sense::NegDef;
    AffineBlockExpr expr;
};

// Scalars and mode flags the problem was assembled with, carried along for
// reporting and export comments.
struct LmiMetadata {
    double h = 0.0;
    double rho = 0.0;
    double omega = 0.0;
    double gamma = 0.0;
    std::string delay_rate;  // "plain" | "rho"
    std::string slack;       // "" | "full" | "block_diagonal"
    std::string family;      // "theorem1" | "theorem2" | "analysis" | ...
};

struct LmiProblem {
    std::vector<MatrixVariable> variables;
    std::vector<LmiConstraint> constraints;
    LmiMetadata metadata;
    int num_scalars = 0;

    int add_variable(const std::string& name, int rows, int cols, bool symmetric);
    // Index of a declared variable, or -1.
    int variable_index(const std::string& name) const;

    std::vector<Matrix> unpack(const Vector& x) const;
    Vector pack(const std::vector<Matrix>& values) const;

    // Values of all constraint blocks at the packed point x.
    std::vector<Matrix> evaluate(const Vector& x) const;
};

// Expands one packed scalar vector segment into the variable's matrix.
Matrix unpack_variable(const MatrixVariable& v, const Vector& x);

}  // namespace fhinf
