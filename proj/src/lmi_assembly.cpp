#include "fhinf/lmi.hpp"

#include <stdexcept>

namespace fhinf {

Matrix AffineBlockExpr::evaluate(const std::vector<Matrix>& values) const {
    Matrix out = constant;
    for (const Term& t : terms) {
        const Matrix& x = values[static_cast<std::size_t>(t.var)];
        const Matrix prod =
            t.transposed ? Matrix(t.left * x.transpose() * t.right) : Matrix(t.left * x * t.right);
        out.block(t.row0, t.col0, prod.rows(), prod.cols()) += t.coeff * prod;
    }
    return out;
}

int LmiProblem::add_variable(const std::string& name, int rows, int cols, bool symmetric) {
    if (symmetric && rows != cols) {
        throw std::invalid_argument("symmetric variable must be square: " + name);
    }
    if (variable_index(name) >= 0) {
        throw std::invalid_argument("duplicate variable name: " + name);
    }
    MatrixVariable v;
    v.name = name;
    v.rows = rows;
    v.cols = cols;
    v.symmetric = symmetric;
    v.offset = num_scalars;
    num_scalars += v.scalar_count();
    variables.push_back(std::move(v));
    return static_cast<int>(variables.size()) - 1;
}

int LmiProblem::variable_index(const std::string& name) const {
    for (std::size_t i = 0; i < variables.size(); ++i) {
        if (variables[i].name == name) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

Matrix unpack_variable(const MatrixVariable& v, const Vector& x) {
    Matrix m(v.rows, v.cols);
    int k = v.offset;
    if (v.symmetric) {
        for (int r = 0; r < v.rows; ++r) {
            for (int c = 0; c <= r; ++c) {
                m(r, c) = x[k];
                m(c, r) = x[k];
                ++k;
            }
        }
    } else {
        for (int r = 0; r < v.rows; ++r) {
            for (int c = 0; c < v.cols; ++c) {
                m(r, c) = x[k];
                ++k;
            }
        }
    }
    return m;
}

std::vector<Matrix> LmiProblem::unpack(const Vector& x) const {
    if (x.size() != num_scalars) {
        throw std::invalid_argument("unpack: wrong scalar vector length");
    }
    std::vector<Matrix> values;
    values.reserve(variables.size());
    for (const MatrixVariable& v : variables) {
        values.push_back(unpack_variable(v, x));
    }
    return values;
}

Vector LmiProblem::pack(const std::vector<Matrix>& values) const {
    if (values.size() != variables.size()) {
        throw std::invalid_argument("pack: wrong number of variable values");
    }
    Vector x(num_scalars);
    for (std::size_t i = 0; i < variables.size(); ++i) {
        const MatrixVariable& v = variables[i];
        const Matrix& m = values[i];
        if (m.rows() != v.rows || m.cols() != v.cols) {
            throw std::invalid_argument("pack: wrong dimensions for " + v.name);
        }
        int k = v.offset;
        if (v.symmetric) {
            for (int r = 0; r < v.rows; ++r) {
                for (int c = 0; c <= r; ++c) {
                    x[k++] = m(r, c);
                }
            }
        } else {
            for (int r = 0; r < v.rows; ++r) {
                for (int c = 0; c < v.cols; ++c) {
                    x[k++] = m(r, c);
                }
            }
        }
    }
    return x;
}

std::vector<Matrix> LmiProblem::evaluate(const Vector& x) const {
    const std::vector<Matrix> values = unpack(x);
    std::vector<Matrix> out;
    out.reserve(constraints.size());
    for (const LmiConstraint& c : constraints) {
        out.push_back(c.expr.evaluate(values));
    }
    return out;
}

}  // namespace fhinf
