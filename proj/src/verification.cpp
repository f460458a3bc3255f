#include "fhinf/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fhinf/lmi.hpp"
#include "fhinf/lmi_builders.hpp"

namespace fhinf {

namespace {

constexpr int kQuadraturePoints = 12;
constexpr double kLemmaTolerance = 1e-9;
constexpr double kLambdaTolerance = 1e-10;
constexpr double kQuadratureTolerance = 1e-12;

double power_moment(double alpha, double beta, int p) {
    // Integral of s^p over [alpha, beta].
    return (std::pow(beta, p + 1) - std::pow(alpha, p + 1)) / (p + 1);
}

double relative_deviation(double a, double b) {
    return std::abs(a - b) / std::max(1.0, std::abs(a));
}

}  // namespace

Vector PolyTrajectory::value(double s) const {
    Vector v = Vector::Zero(coeffs.rows());
    double sp = 1.0;
    for (int j = 0; j < coeffs.cols(); ++j) {
        v += sp * coeffs.col(j);
        sp *= s;
    }
    return v;
}

Vector PolyTrajectory::slope(double s) const {
    Vector v = Vector::Zero(coeffs.rows());
    double sp = 1.0;
    for (int j = 1; j < coeffs.cols(); ++j) {
        v += j * sp * coeffs.col(j);
        sp *= s;
    }
    return v;
}

Lemma1Instance random_lemma_instance(Rng& rng, int n) {
    Lemma1Instance inst;
    inst.R = rng.random_spd(n);
    inst.N1 = rng.uniform_matrix(4 * n, n, -1.0, 1.0);
    inst.N2 = rng.uniform_matrix(4 * n, n, -1.0, 1.0);
    inst.N3 = rng.uniform_matrix(4 * n, n, -1.0, 1.0);
    inst.alpha = rng.uniform(-1.0, 1.0);
    inst.beta = inst.alpha + rng.uniform(0.1, 2.0);
    return inst;
}

Lemma1Instance tight_lemma_instance(const Matrix& R, double alpha, double beta) {
    const int n = static_cast<int>(R.rows());
    const double tau = beta - alpha;
    Lemma1Instance inst;
    inst.R = R;
    inst.alpha = alpha;
    inst.beta = beta;
    inst.N1 = Matrix::Zero(4 * n, n);
    inst.N1.topRows(n) = -R / tau;
    inst.N1.middleRows(n, n) = R / tau;
    inst.N2 = Matrix::Zero(4 * n, n);
    inst.N2.topRows(n) = -3.0 * R / tau;
    inst.N2.middleRows(n, n) = -3.0 * R / tau;
    inst.N2.middleRows(2 * n, n) = 6.0 * R / tau;
    inst.N3 = Matrix::Zero(4 * n, n);
    inst.N3.topRows(n) = -5.0 * R / tau;
    inst.N3.middleRows(n, n) = 5.0 * R / tau;
    inst.N3.middleRows(2 * n, n) = 30.0 * R / tau;
    inst.N3.middleRows(3 * n, n) = -30.0 * R / tau;
    return inst;
}

std::vector<std::pair<double, double>> gauss_legendre(int points, double a, double b) {
    if (points < 1) {
        throw std::invalid_argument("gauss_legendre needs at least one point");
    }
    std::vector<std::pair<double, double>> nodes(points);
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < (points + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (points + 0.5));
        double pd = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int j = 2; j <= points; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            pd = points * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pd;
            x -= dx;
            if (std::abs(dx) < 1e-15) {
                break;
            }
        }
        const double w = 2.0 / ((1.0 - x * x) * pd * pd);
        nodes[i] = {x, w};
        nodes[points - 1 - i] = {-x, w};
    }
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (auto& [node, weight] : nodes) {
        node = mid + half * node;
        weight *= half;
    }
    return nodes;
}

double derivative_energy(const PolyTrajectory& traj, const Matrix& R) {
    const int deg = traj.degree();
    double energy = 0.0;
    for (int j = 1; j <= deg; ++j) {
        for (int k = 1; k <= deg; ++k) {
            const double inner = traj.coeffs.col(j).dot(R * traj.coeffs.col(k));
            energy += j * k * inner * power_moment(traj.alpha, traj.beta, j + k - 2);
        }
    }
    return energy;
}

double derivative_energy_quadrature(const PolyTrajectory& traj, const Matrix& R) {
    double energy = 0.0;
    for (const auto& [node, weight] : gauss_legendre(kQuadraturePoints, traj.alpha, traj.beta)) {
        const Vector d = traj.slope(node);
        energy += weight * d.dot(R * d);
    }
    return energy;
}

Vector lemma_xi(const PolyTrajectory& traj) {
    const int n = traj.dimension();
    const double alpha = traj.alpha;
    const double beta = traj.beta;
    const double tau = beta - alpha;
    Vector xi(4 * n);
    xi.head(n) = traj.value(beta);
    xi.segment(n, n) = traj.value(alpha);

    Vector avg = Vector::Zero(n);
    Vector dbl = Vector::Zero(n);
    for (int j = 0; j <= traj.degree(); ++j) {
        avg += traj.coeffs.col(j) * power_moment(alpha, beta, j);
        const double inner_integral =
            power_moment(alpha, beta, j + 1) - std::pow(alpha, j + 1) * tau;
        dbl += traj.coeffs.col(j) * inner_integral / (j + 1);
    }
    xi.segment(2 * n, n) = avg / tau;
    xi.segment(3 * n, n) = 2.0 * dbl / (tau * tau);
    return xi;
}

Vector lemma_xi_quadrature(const PolyTrajectory& traj) {
    const int n = traj.dimension();
    const double tau = traj.beta - traj.alpha;
    Vector xi(4 * n);
    xi.head(n) = traj.value(traj.beta);
    xi.segment(n, n) = traj.value(traj.alpha);

    Vector avg = Vector::Zero(n);
    Vector dbl = Vector::Zero(n);
    for (const auto& [s, ws] : gauss_legendre(kQuadraturePoints, traj.alpha, traj.beta)) {
        avg += ws * traj.value(s);
        Vector inner = Vector::Zero(n);
        for (const auto& [u, wu] : gauss_legendre(kQuadraturePoints, traj.alpha, s)) {
            inner += wu * traj.value(u);
        }
        dbl += ws * inner;
    }
    xi.segment(2 * n, n) = avg / tau;
    xi.segment(3 * n, n) = 2.0 * dbl / (tau * tau);
    return xi;
}

double check_integral_inequality(const PolyTrajectory& traj, const Lemma1Instance& inst) {
    const int n = static_cast<int>(inst.R.rows());
    if (traj.dimension() != n || inst.R.cols() != n) {
        throw std::invalid_argument("trajectory and instance dimensions disagree");
    }
    if (inst.N1.rows() != 4 * n || inst.N1.cols() != n || inst.N2.rows() != 4 * n ||
        inst.N3.rows() != 4 * n) {
        throw std::invalid_argument("free matrices must be 4n x n");
    }
    if (!(inst.beta > inst.alpha)) {
        throw std::invalid_argument("instance requires beta > alpha");
    }
    if (min_eigenvalue(symmetrized(inst.R)) <= 0.0) {
        throw std::invalid_argument("R must be positive definite");
    }
    const double tau = inst.beta - inst.alpha;

    PolyTrajectory windowed = traj;
    windowed.alpha = inst.alpha;
    windowed.beta = inst.beta;

    const Matrix r_inv = inst.R.llt().solve(Matrix::Identity(n, n));
    const Matrix eye = Matrix::Identity(n, n);
    Matrix pi1 = Matrix::Zero(n, 4 * n);
    pi1.leftCols(n) = eye;
    pi1.middleCols(n, n) = -eye;
    Matrix pi2 = Matrix::Zero(n, 4 * n);
    pi2.leftCols(n) = eye;
    pi2.middleCols(n, n) = eye;
    pi2.middleCols(2 * n, n) = -2.0 * eye;
    Matrix pi3 = Matrix::Zero(n, 4 * n);
    pi3.leftCols(n) = eye;
    pi3.middleCols(n, n) = -eye;
    pi3.middleCols(2 * n, n) = -6.0 * eye;
    pi3.middleCols(3 * n, n) = 6.0 * eye;

    Matrix omega = tau * (inst.N1 * r_inv * inst.N1.transpose() +
                          inst.N2 * r_inv * inst.N2.transpose() / 3.0 +
                          inst.N3 * r_inv * inst.N3.transpose() / 5.0);
    const Matrix cross = inst.N1 * pi1 + inst.N2 * pi2 + inst.N3 * pi3;
    omega += cross + cross.transpose();

    const Vector xi = lemma_xi(windowed);
    const double lhs = -derivative_energy(windowed, inst.R);
    const double rhs = xi.dot(omega * xi);
    return rhs - lhs;
}

double check_lambda_identity(double h, const Matrix& Z, double corruption) {
    if (!(h > 0.0)) {
        throw std::invalid_argument("h must be positive");
    }
    const int m = static_cast<int>(Z.rows());
    if (m < 2 || m % 2 != 0 || Z.cols() != m) {
        throw std::invalid_argument("Z must be a square matrix of even dimension");
    }
    Eigen::LLT<Matrix> llt(symmetrized(Z));
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("Z must be positive definite");
    }
    const Matrix z_inv = llt.solve(Matrix::Identity(m, m));

    // Grid side, evaluated through the same banded table the builders use.
    AffineBlockExpr lambda = build_lambda(h, 0, m / 2, m);
    Matrix grid = lambda.evaluate({Z});
    grid(0, 0) += corruption;

    const int dim = 5 * m;
    Matrix m1 = Matrix::Zero(dim, m);
    m1.topRows(m) = -Z / h;
    m1.middleRows(m, m) = Z / h;
    Matrix m2 = Matrix::Zero(dim, m);
    m2.topRows(m) = -3.0 * Z / h;
    m2.middleRows(m, m) = -3.0 * Z / h;
    m2.middleRows(2 * m, m) = 6.0 * Z / h;
    Matrix m3 = Matrix::Zero(dim, m);
    m3.topRows(m) = -5.0 * Z / h;
    m3.middleRows(m, m) = 5.0 * Z / h;
    m3.middleRows(2 * m, m) = 30.0 * Z / h;
    m3.middleRows(3 * m, m) = -30.0 * Z / h;

    const Matrix eye = Matrix::Identity(m, m);
    Matrix pi1 = Matrix::Zero(m, dim);
    pi1.leftCols(m) = eye;
    pi1.middleCols(m, m) = -eye;
    Matrix pi2 = Matrix::Zero(m, dim);
    pi2.leftCols(m) = eye;
    pi2.middleCols(m, m) = eye;
    pi2.middleCols(2 * m, m) = -2.0 * eye;
    Matrix pi3 = Matrix::Zero(m, dim);
    pi3.leftCols(m) = eye;
    pi3.middleCols(m, m) = -eye;
    pi3.middleCols(2 * m, m) = -6.0 * eye;
    pi3.middleCols(3 * m, m) = 6.0 * eye;

    Matrix formula = h * m1 * z_inv * m1.transpose() + (h / 3.0) * m2 * z_inv * m2.transpose() +
                     (h / 5.0) * m3 * z_inv * m3.transpose();
    const Matrix cross = m1 * pi1 + m2 * pi2 + m3 * pi3;
    formula += cross + cross.transpose();

    return (grid - formula).cwiseAbs().maxCoeff();
}

VerificationReport run_verification(int trials, std::uint64_t seed, double corruption) {
    if (trials < 1) {
        throw std::invalid_argument("trials must be positive");
    }
    VerificationReport report;
    report.trials = trials;
    report.min_margin = std::numeric_limits<double>::infinity();

    Rng master(seed);
    for (int trial = 0; trial < trials; ++trial) {
        const std::uint64_t sub_seed = master.next_u64();
        Rng rng(sub_seed);
        const int n = 1 + static_cast<int>(rng.uniform(0.0, 3.0 - 1e-12));
        const int degree = 1 + static_cast<int>(rng.uniform(0.0, 5.0 - 1e-12));
        Lemma1Instance inst = random_lemma_instance(rng, n);
        PolyTrajectory traj;
        traj.coeffs = rng.uniform_matrix(n, degree + 1, -1.0, 1.0);
        traj.alpha = inst.alpha;
        traj.beta = inst.beta;

        const double margin = check_integral_inequality(traj, inst);
        if (margin < report.min_margin) {
            report.min_margin = margin;
            report.worst_instance_seed = sub_seed;
        }
        report.quadrature_max_dev = std::max(
            report.quadrature_max_dev, relative_deviation(derivative_energy(traj, inst.R),
                                                          derivative_energy_quadrature(traj, inst.R)));
        report.quadrature_max_dev =
            std::max(report.quadrature_max_dev,
                     (lemma_xi(traj) - lemma_xi_quadrature(traj)).cwiseAbs().maxCoeff());
    }
    report.lemma_ok =
        report.min_margin >= -kLemmaTolerance && report.quadrature_max_dev < kQuadratureTolerance;

    for (int k = 0; k < 100; ++k) {
        const double h = master.uniform(0.1, 2.0);
        const int n = 1 + static_cast<int>(master.uniform(0.0, 3.0 - 1e-12));
        const Matrix Z = master.random_spd(2 * n);
        report.max_lambda_diff =
            std::max(report.max_lambda_diff, check_lambda_identity(h, Z, corruption));
    }
    report.lambda_ok = report.max_lambda_diff < kLambdaTolerance;

    {
        Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
        const int n = 2;
        const Matrix R = rng.random_spd(n);
        PolyTrajectory traj;
        traj.coeffs = rng.uniform_matrix(n, 2, -1.0, 1.0);
        traj.alpha = 0.0;
        traj.beta = 1.0;
        report.tight_margin = check_integral_inequality(traj, tight_lemma_instance(R, 0.0, 1.0));
        Lemma1Instance random_inst = random_lemma_instance(rng, n);
        random_inst.R = R;
        random_inst.alpha = 0.0;
        random_inst.beta = 1.0;
        report.random_margin = check_integral_inequality(traj, random_inst);
    }

    report.ok = report.lemma_ok && report.lambda_ok;
    return report;
}

}  // namespace fhinf
