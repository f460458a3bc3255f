#include "fhinf/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "fhinf/rng.hpp"

namespace fhinf {

namespace {

constexpr double kDivergenceNorm = 1e12;
constexpr int kQuadratureIntervals = 64;
constexpr double kTwoPi = 6.283185307179586476925286766559;

void hermite_weights(double s, double& h00, double& h10, double& h01, double& h11) {
    const double s2 = s * s;
    const double s3 = s2 * s;
    h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    h10 = s3 - 2.0 * s2 + s;
    h01 = -2.0 * s3 + 3.0 * s2;
    h11 = s3 - s2;
}

void hermite_slope_weights(double s, double& g00, double& g10, double& g01, double& g11) {
    const double s2 = s * s;
    g00 = 6.0 * s2 - 6.0 * s;
    g10 = 3.0 * s2 - 4.0 * s + 1.0;
    g01 = -6.0 * s2 + 6.0 * s;
    g11 = 3.0 * s2 - 2.0 * s;
}

}  // namespace

double DelayTrajectory::tau(double t) const {
    if (kind == Kind::Constant) {
        return value;
    }
    const double span = h - margin;
    return 0.5 * span * (1.0 + std::sin(2.0 * rate * t / span));
}

double DelayTrajectory::sup_tau() const {
    return kind == Kind::Constant ? value : h - margin;
}

double DelayTrajectory::sup_rate() const {
    return kind == Kind::Constant ? 0.0 : rate;
}

DelayTrajectory make_delay_constant(double value, double h) {
    if (!(h > 0.0) || value < 0.0 || value >= h) {
        throw std::invalid_argument("constant delay requires 0 <= value < h");
    }
    DelayTrajectory d;
    d.kind = DelayTrajectory::Kind::Constant;
    d.h = h;
    d.value = value;
    return d;
}

DelayTrajectory make_delay_sine(double h, double rho, double margin) {
    if (!(h > 0.0) || rho < 0.0) {
        throw std::invalid_argument("sinusoidal delay requires h > 0 and rho >= 0");
    }
    if (!(margin > 0.0) || margin >= h) {
        throw std::invalid_argument("sinusoidal delay requires 0 < margin < h");
    }
    DelayTrajectory d;
    d.kind = DelayTrajectory::Kind::Sine;
    d.h = h;
    d.rate = rho;
    d.margin = margin;
    return d;
}

double Disturbance::scalar(double t) const {
    switch (kind) {
        case Kind::Zero:
            return 0.0;
        case Kind::Pulse:
            return (t >= t0 && t < t1) ? level : 0.0;
        case Kind::DecayingSine:
            return std::exp(-a * t) * std::sin(b * t);
        case Kind::SeededNoise: {
            double s = 0.0;
            for (std::size_t k = 0; k < amplitudes.size(); ++k) {
                s += amplitudes[k] * std::sin(frequencies[k] * t + phases[k]);
            }
            return s;
        }
    }
    return 0.0;
}

Vector Disturbance::value(double t, int n_w) const {
    return scalar(t) * Vector::Ones(n_w);
}

Disturbance make_disturbance_zero() {
    return Disturbance{};
}

Disturbance make_disturbance_pulse(double t0, double t1, double level) {
    if (!(t1 > t0)) {
        throw std::invalid_argument("pulse disturbance requires t1 > t0");
    }
    Disturbance d;
    d.kind = Disturbance::Kind::Pulse;
    d.t0 = t0;
    d.t1 = t1;
    d.level = level;
    return d;
}

Disturbance make_disturbance_decaying_sine(double a, double b) {
    Disturbance d;
    d.kind = Disturbance::Kind::DecayingSine;
    d.a = a;
    d.b = b;
    return d;
}

Disturbance make_disturbance_seeded_noise(std::uint64_t seed, double bandwidth) {
    if (!(bandwidth > 0.0)) {
        throw std::invalid_argument("seeded noise requires bandwidth > 0");
    }
    Disturbance d;
    d.kind = Disturbance::Kind::SeededNoise;
    d.seed = seed;
    d.bandwidth = bandwidth;
    Rng rng(seed);
    constexpr int kComponents = 16;
    const double scale = 1.0 / std::sqrt(static_cast<double>(kComponents));
    for (int k = 0; k < kComponents; ++k) {
        d.amplitudes.push_back(scale * rng.uniform(-1.0, 1.0));
        d.frequencies.push_back(rng.uniform(0.05 * bandwidth, bandwidth));
        d.phases.push_back(rng.uniform(0.0, kTwoPi));
    }
    return d;
}

Disturbance make_disturbance(const std::string& name, std::uint64_t seed) {
    if (name == "zero") {
        return make_disturbance_zero();
    }
    if (name == "pulse") {
        return make_disturbance_pulse(0.0, 1.0, 1.0);
    }
    if (name == "decaying_sine") {
        return make_disturbance_decaying_sine(0.1, 1.0);
    }
    if (name == "seeded_noise") {
        return make_disturbance_seeded_noise(seed, 5.0);
    }
    throw std::invalid_argument("unknown disturbance family: " + name);
}

HistoryBuffer::HistoryBuffer(Vector initial_state, double start_time)
    : initial_(std::move(initial_state)), start_(start_time) {}

void HistoryBuffer::push(double t, const Vector& state, const Vector& deriv) {
    if (!times_.empty() && !(t > times_.back())) {
        throw std::logic_error("history times must be strictly increasing");
    }
    times_.push_back(t);
    states_.push_back(state);
    derivs_.push_back(deriv);
}

double HistoryBuffer::last_time() const {
    return times_.empty() ? start_ : times_.back();
}

std::size_t HistoryBuffer::segment_index(double t) const {
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t raw = static_cast<std::size_t>(it - times_.begin());
    const std::size_t hi = times_.size() - 2;
    return std::min(raw == 0 ? std::size_t{0} : raw - 1, hi);
}

Vector HistoryBuffer::state(double t) const {
    if (times_.empty() || t <= start_) {
        return initial_;
    }
    if (times_.size() == 1) {
        return states_[0] + (t - times_[0]) * derivs_[0];
    }
    const std::size_t i =
        t >= times_.back() ? times_.size() - 2 : segment_index(t);
    const double ta = times_[i];
    const double delta = times_[i + 1] - ta;
    const double s = (t - ta) / delta;
    double h00, h10, h01, h11;
    hermite_weights(s, h00, h10, h01, h11);
    return h00 * states_[i] + h10 * delta * derivs_[i] + h01 * states_[i + 1] +
           h11 * delta * derivs_[i + 1];
}

Vector HistoryBuffer::derivative(double t) const {
    if (times_.empty() || t <= start_) {
        return Vector::Zero(initial_.size());
    }
    if (times_.size() == 1) {
        return derivs_[0];
    }
    const std::size_t i =
        t >= times_.back() ? times_.size() - 2 : segment_index(t);
    const double ta = times_[i];
    const double delta = times_[i + 1] - ta;
    const double s = (t - ta) / delta;
    double g00, g10, g01, g11;
    hermite_slope_weights(s, g00, g10, g01, g11);
    return (g00 / delta) * states_[i] + g10 * derivs_[i] + (g01 / delta) * states_[i + 1] +
           g11 * derivs_[i + 1];
}

namespace {

struct StageEval {
    Vector zeta_dot;
    Vector z;
    Vector z_hat;
    Vector w;
};

struct Integrator {
    const TsDelayModel& model;
    const FuzzyFilter& filter;
    const SimConfig& config;
    const HistoryBuffer& buffer;
    int n;

    StageEval eval(double t, const Vector& zeta) const {
        const int p = model.rule_count();
        const Vector x = zeta.head(n);
        const Vector xh = zeta.tail(n);
        const double tau = config.delay.tau(t);
        const Vector x_d = buffer.state(t - tau).head(n);
        const Vector w = config.disturbance.value(t, model.n_w);
        const Vector nu = normalized_memberships(model, x);

        Vector x_dot = Vector::Zero(n);
        Vector y = Vector::Zero(model.n_y);
        Vector z = Vector::Zero(model.n_z);
        for (int i = 0; i < p; ++i) {
            const RuleMatrices& r = model.rules[i];
            x_dot += nu[i] * (r.A * x + r.A_tau * x_d + r.B * w);
            y += nu[i] * (r.C * x + r.C_tau * x_d + r.D * w);
            z += nu[i] * (r.E * x + r.E_tau * x_d);
        }
        Vector xh_dot = Vector::Zero(n);
        Vector z_hat = Vector::Zero(model.n_z);
        for (int j = 0; j < p; ++j) {
            xh_dot += nu[j] * (filter.A_hat[j] * xh + filter.B_hat[j] * y);
            z_hat += nu[j] * filter.C_hat[j] * xh;
        }

        StageEval out;
        out.zeta_dot.resize(2 * n);
        out.zeta_dot << x_dot, xh_dot;
        out.z = z;
        out.z_hat = z_hat;
        out.w = w;
        return out;
    }
};

void truncate_result(SimResult& result, int count) {
    result.time.conservativeResize(count);
    result.states.conservativeResize(Eigen::NoChange, count);
    result.derivs.conservativeResize(Eigen::NoChange, count);
    result.z.conservativeResize(Eigen::NoChange, count);
    result.z_hat.conservativeResize(Eigen::NoChange, count);
    result.e.conservativeResize(Eigen::NoChange, count);
    result.w.conservativeResize(Eigen::NoChange, count);
    result.int_e2.conservativeResize(count);
    result.int_w2.conservativeResize(count);
}

}  // namespace

SimResult simulate_filtering(const TsDelayModel& model, const FuzzyFilter& filter,
                             const SimConfig& config) {
    const std::vector<std::string> issues = validate_model(model);
    if (!issues.empty()) {
        std::string message = "invalid model:";
        for (const std::string& issue : issues) {
            message += "\n  " + issue;
        }
        throw std::invalid_argument(message);
    }
    const int n = model.n;
    const int p = model.rule_count();
    if (filter.rule_count() != p) {
        throw std::invalid_argument("filter rule count does not match the model");
    }
    for (int j = 0; j < p; ++j) {
        if (filter.A_hat[j].rows() != n || filter.A_hat[j].cols() != n ||
            filter.B_hat[j].rows() != n || filter.B_hat[j].cols() != model.n_y ||
            filter.C_hat[j].rows() != model.n_z || filter.C_hat[j].cols() != n) {
            throw std::invalid_argument("filter matrices have inconsistent dimensions at rule " +
                                        std::to_string(j + 1));
        }
    }

    const double h = config.delay.h;
    if (!(h > 0.0)) {
        throw std::invalid_argument("delay trajectory must carry a positive bound h");
    }
    const double dt = config.dt > 0.0 ? config.dt : h / 100.0;
    if (dt > h / 20.0 + 1e-12) {
        throw std::invalid_argument("dt must not exceed h/20");
    }
    if (config.t_final < 10.0 * h - 1e-9) {
        throw std::invalid_argument("t_final must be at least 10*h");
    }
    if (config.delay.sup_tau() >= h) {
        throw std::invalid_argument("delay trajectory exceeds its bound h");
    }

    Vector phi = config.phi.size() > 0 ? config.phi : Vector::Zero(n);
    Vector xh0 = config.filter_init.size() > 0 ? config.filter_init : Vector::Zero(n);
    if (phi.size() != n || xh0.size() != n) {
        throw std::invalid_argument("history and filter initial state must have length n");
    }

    const int steps = static_cast<int>(std::ceil(config.t_final / dt - 1e-9));
    const int count = steps + 1;

    SimResult result;
    result.n = n;
    result.n_w = model.n_w;
    result.n_z = model.n_z;
    result.config = config;
    result.config.dt = dt;
    result.time.resize(count);
    result.states.resize(2 * n, count);
    result.derivs.resize(2 * n, count);
    result.z.resize(model.n_z, count);
    result.z_hat.resize(model.n_z, count);
    result.e.resize(model.n_z, count);
    result.w.resize(model.n_w, count);
    result.int_e2.resize(count);
    result.int_w2.resize(count);

    Vector zeta(2 * n);
    zeta << phi, xh0;
    HistoryBuffer buffer(zeta, 0.0);
    Integrator integrator{model, filter, config, buffer, n};

    auto record = [&](int k, double t, const Vector& state, const StageEval& se) {
        result.time[k] = t;
        result.states.col(k) = state;
        result.derivs.col(k) = se.zeta_dot;
        result.z.col(k) = se.z;
        result.z_hat.col(k) = se.z_hat;
        result.e.col(k) = se.z - se.z_hat;
        result.w.col(k) = se.w;
        if (k == 0) {
            result.int_e2[0] = 0.0;
            result.int_w2[0] = 0.0;
        } else {
            const double e2 = result.e.col(k).squaredNorm();
            const double e2p = result.e.col(k - 1).squaredNorm();
            const double w2 = result.w.col(k).squaredNorm();
            const double w2p = result.w.col(k - 1).squaredNorm();
            result.int_e2[k] = result.int_e2[k - 1] + 0.5 * dt * (e2 + e2p);
            result.int_w2[k] = result.int_w2[k - 1] + 0.5 * dt * (w2 + w2p);
        }
    };

    StageEval se = integrator.eval(0.0, zeta);
    buffer.push(0.0, zeta, se.zeta_dot);
    record(0, 0.0, zeta, se);

    for (int k = 0; k < steps; ++k) {
        const double t = k * dt;
        const Vector k1 = result.derivs.col(k);
        const Vector k2 = integrator.eval(t + 0.5 * dt, zeta + 0.5 * dt * k1).zeta_dot;
        const Vector k3 = integrator.eval(t + 0.5 * dt, zeta + 0.5 * dt * k2).zeta_dot;
        const Vector k4 = integrator.eval(t + dt, zeta + dt * k3).zeta_dot;
        const Vector next = zeta + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!next.allFinite() || next.norm() > kDivergenceNorm) {
            result.divergent = true;
            truncate_result(result, k + 1);
            return result;
        }
        const double t_next = (k + 1) * dt;
        se = integrator.eval(t_next, next);
        buffer.push(t_next, next, se.zeta_dot);
        record(k + 1, t_next, next, se);
        zeta = next;
    }
    return result;
}

double l2_gain_estimate(const SimResult& result) {
    const int last = static_cast<int>(result.time.size()) - 1;
    if (last < 1 || !(result.int_w2[last] > 0.0)) {
        throw std::domain_error("l2 gain estimate requires nonzero disturbance energy");
    }
    return std::sqrt(result.int_e2[last] / result.int_w2[last]);
}

MonitorResult lyapunov_monitor(const TsDelayModel& model, const FuzzyFilter& filter,
                               const std::map<std::string, Matrix>& certificate,
                               const SimResult& result) {
    const int n = model.n;
    const int m = 2 * n;
    if (filter.rule_count() != model.rule_count()) {
        throw std::invalid_argument("filter rule count does not match the model");
    }
    if (result.states.rows() != m || result.time.size() < 2) {
        throw std::invalid_argument("trajectory dimensions do not match the model");
    }
    if (result.w.size() > 0 && result.w.cwiseAbs().maxCoeff() > 1e-12) {
        throw std::invalid_argument("lyapunov monitor requires a disturbance-free trajectory");
    }

    Matrix P(m, m), Y(m, m), Z(m, m);
    if (certificate.count("P")) {
        P = certificate.at("P");
        Y = certificate.at("Y");
        Z = certificate.at("Z");
    } else if (certificate.count("P11") && certificate.count("P22t") && certificate.count("Yt") &&
               certificate.count("Zt")) {
        const Matrix& p11 = certificate.at("P11");
        const Matrix& p22 = certificate.at("P22t");
        if (p11.rows() != n || p22.rows() != n) {
            throw std::invalid_argument("certificate blocks do not match the model dimension");
        }
        P.topLeftCorner(n, n) = p11;
        P.topRightCorner(n, n) = p22;
        P.bottomLeftCorner(n, n) = p22;
        P.bottomRightCorner(n, n) = p22;
        Y = certificate.at("Yt");
        Z = certificate.at("Zt");
    } else {
        throw std::invalid_argument("certificate does not carry the Lyapunov weights");
    }
    if (P.rows() != m || Y.rows() != m || Y.cols() != m || Z.rows() != m || Z.cols() != m) {
        throw std::invalid_argument("certificate blocks do not match the model dimension");
    }

    const double h = result.config.delay.h;
    const int count = static_cast<int>(result.time.size());
    HistoryBuffer buffer(result.states.col(0), result.time[0]);
    for (int k = 0; k < count; ++k) {
        buffer.push(result.time[k], result.states.col(k), result.derivs.col(k));
    }

    MonitorResult monitor;
    monitor.time = result.time;
    monitor.V.resize(count);
    for (int k = 0; k < count; ++k) {
        const double t = result.time[k];
        const Vector zeta = result.states.col(k);
        double v = zeta.dot(P * zeta);

        const double tau = result.config.delay.tau(t);
        if (tau > 0.0) {
            const double step = tau / kQuadratureIntervals;
            double acc = 0.0;
            for (int q = 0; q <= kQuadratureIntervals; ++q) {
                const double s = t - tau + q * step;
                const Vector zs = buffer.state(s);
                const double val = zs.dot(Y * zs);
                acc += (q == 0 || q == kQuadratureIntervals) ? 0.5 * val : val;
            }
            v += step * acc;
        }

        const double step = h / kQuadratureIntervals;
        double acc = 0.0;
        for (int q = 0; q <= kQuadratureIntervals; ++q) {
            const double s = t - h + q * step;
            const Vector ds = buffer.derivative(s);
            const double val = (h + s - t) * ds.dot(Z * ds);
            acc += (q == 0 || q == kQuadratureIntervals) ? 0.5 * val : val;
        }
        v += step * acc;
        monitor.V[k] = v;
    }

    monitor.max_V = monitor.V.maxCoeff();
    monitor.max_forward_diff = 0.0;
    for (int k = 0; k + 1 < count; ++k) {
        monitor.max_forward_diff = std::max(monitor.max_forward_diff,
                                            monitor.V[k + 1] - monitor.V[k]);
    }
    return monitor;
}

void write_csv(const SimResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    out << "t";
    for (int i = 1; i <= result.n; ++i) {
        out << ",x" << i;
    }
    for (int i = 1; i <= result.n; ++i) {
        out << ",xh" << i;
    }
    for (int i = 1; i <= result.n_z; ++i) {
        out << ",z" << i;
    }
    for (int i = 1; i <= result.n_z; ++i) {
        out << ",zh" << i;
    }
    for (int i = 1; i <= result.n_z; ++i) {
        out << ",e" << i;
    }
    for (int i = 1; i <= result.n_w; ++i) {
        out << ",w" << i;
    }
    out << "\n";
    out << std::setprecision(12);
    const int count = static_cast<int>(result.time.size());
    for (int k = 0; k < count; ++k) {
        out << result.time[k];
        for (int i = 0; i < 2 * result.n; ++i) {
            out << "," << result.states(i, k);
        }
        for (int i = 0; i < result.n_z; ++i) {
            out << "," << result.z(i, k);
        }
        for (int i = 0; i < result.n_z; ++i) {
            out << "," << result.z_hat(i, k);
        }
        for (int i = 0; i < result.n_z; ++i) {
            out << "," << result.e(i, k);
        }
        for (int i = 0; i < result.n_w; ++i) {
            out << "," << result.w(i, k);
        }
        out << "\n";
    }
    if (!out) {
        throw std::runtime_error("failed while writing " + path);
    }
}

}  // namespace fhinf
