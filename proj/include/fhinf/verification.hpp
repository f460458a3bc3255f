#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fhinf/rng.hpp"
#include "fhinf/types.hpp"

namespace fhinf {

// Vector polynomial x(s) on [alpha, beta]; column j of coeffs multiplies s^j.
struct PolyTrajectory {
    Matrix coeffs;
    double alpha = 0.0;
    double beta = 1.0;

    int dimension() const { return static_cast<int>(coeffs.rows()); }
    int degree() const { return static_cast<int>(coeffs.cols()) - 1; }
    Vector value(double s) const;
    Vector slope(double s) const;
};

// Data of one integral-inequality check: R > 0 and free matrices N1..N3.
struct Lemma1Instance {
    Matrix R;        // n x n symmetric positive definite
    Matrix N1;       // 4n x n
    Matrix N2;       // 4n x n
    Matrix N3;       // 4n x n
    double alpha = 0.0;
    double beta = 1.0;
};

Lemma1Instance random_lemma_instance(Rng& rng, int n);

// Free matrices at the equality-achieving pattern for the given weight.
Lemma1Instance tight_lemma_instance(const Matrix& R, double alpha, double beta);

// Gauss-Legendre nodes/weights on [a, b].
std::vector<std::pair<double, double>> gauss_legendre(int points, double a, double b);

// Exact derivative energy integral of x(s) under R, and its quadrature twin.
double derivative_energy(const PolyTrajectory& traj, const Matrix& R);
double derivative_energy_quadrature(const PolyTrajectory& traj, const Matrix& R);

// The stacked vector [x(b); x(a); single average; double average].
Vector lemma_xi(const PolyTrajectory& traj);
Vector lemma_xi_quadrature(const PolyTrajectory& traj);

// RHS - LHS of the integral inequality; must be >= -1e-9 when the lemma holds.
double check_integral_inequality(const PolyTrajectory& traj, const Lemma1Instance& inst);

// Max entrywise deviation between the banded delay-kernel grid and its
// elimination-form reconstruction; `corruption` perturbs the grid side and
// exists only as a negative-control hook.
double check_lambda_identity(double h, const Matrix& Z, double corruption = 0.0);

struct VerificationReport {
    int trials = 0;
    double min_margin = 0.0;
    std::uint64_t worst_instance_seed = 0;
    double quadrature_max_dev = 0.0;
    double max_lambda_diff = 0.0;
    double tight_margin = 0.0;
    double random_margin = 0.0;
    bool lemma_ok = false;
    bool lambda_ok = false;
    bool ok = false;
};

VerificationReport run_verification(int trials, std::uint64_t seed, double corruption = 0.0);

}  // namespace fhinf
