#pragma once

#include <cmath>
#include <cstdint>

#include "fhinf/types.hpp"

namespace fhinf {

// Small deterministic generator (splitmix64). std::mt19937 plus the standard
// distributions is implementation-defined, which would break reproducibility
// of seeded signals and test corpora across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // Marsaglia polar method; deterministic because it only draws uniforms.
    double normal() {
        double u, v, s;
        do {
            u = uniform(-1.0, 1.0);
            v = uniform(-1.0, 1.0);
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        return u * std::sqrt(-2.0 * std::log(s) / s);
    }

    Vector uniform_vector(Eigen::Index n, double lo, double hi) {
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            v[i] = uniform(lo, hi);
        }
        return v;
    }

    Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, double lo, double hi) {
        Matrix m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index j = 0; j < cols; ++j) {
                m(i, j) = uniform(lo, hi);
            }
        }
        return m;
    }

    Matrix random_symmetric(Eigen::Index n, double scale = 1.0) {
        Matrix m = uniform_matrix(n, n, -scale, scale);
        return symmetrized(m);
    }

    // Random symmetric positive definite matrix, eigenvalues >= ridge.
    Matrix random_spd(Eigen::Index n, double ridge = 0.1) {
        Matrix m = uniform_matrix(n, n, -1.0, 1.0);
        return Matrix(m * m.transpose()) + ridge * Matrix::Identity(n, n);
    }

private:
    std::uint64_t state_;
};

}  // namespace fhinf
