#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fhinf/model.hpp"
#include "fhinf/types.hpp"

namespace fhinf {

// Admissible time-varying delay with analytic bound guarantees.
struct DelayTrajectory {
    enum class Kind { Constant, Sine };

    Kind kind = Kind::Constant;
    double h = 1.0;       // bound the trajectory was built against
    double value = 0.0;   // constant level
    double rate = 0.0;    // sine rate parameter (= certified sup |tau_dot|)
    double margin = 0.0;  // sine: gap kept between sup tau and h

    double tau(double t) const;
    double sup_tau() const;   // analytic supremum of tau
    double sup_rate() const;  // analytic supremum of |tau_dot|
};

DelayTrajectory make_delay_constant(double value, double h);
DelayTrajectory make_delay_sine(double h, double rho, double margin);

// Scalar disturbance profile broadcast across all n_w channels.
struct Disturbance {
    enum class Kind { Zero, Pulse, DecayingSine, SeededNoise };

    Kind kind = Kind::Zero;
    double t0 = 0.0;         // pulse start
    double t1 = 0.0;         // pulse end
    double level = 0.0;      // pulse height
    double a = 0.0;          // decaying sine: exp(-a t)
    double b = 0.0;          // decaying sine: sin(b t)
    std::uint64_t seed = 0;  // noise seed
    double bandwidth = 0.0;  // noise: largest component frequency (rad/s)

    // Realized band-limited noise components (filled by the maker).
    std::vector<double> amplitudes;
    std::vector<double> frequencies;
    std::vector<double> phases;

    double scalar(double t) const;
    Vector value(double t, int n_w) const;
};

Disturbance make_disturbance_zero();
Disturbance make_disturbance_pulse(double t0, double t1, double level);
Disturbance make_disturbance_decaying_sine(double a, double b);
Disturbance make_disturbance_seeded_noise(std::uint64_t seed, double bandwidth);
Disturbance make_disturbance(const std::string& name, std::uint64_t seed);

struct SimConfig {
    double t_final = 0.0;
    double dt = 0.0;     // <= 0 selects the default h/100
    Vector phi;          // constant plant history on [-h, 0]
    Vector filter_init;  // filter state at t = 0 (empty = zero)
    DelayTrajectory delay;
    Disturbance disturbance;
};

struct SimResult {
    Vector time;
    Matrix states;  // 2n x N: plant rows first, filter rows below
    Matrix derivs;  // 2n x N time derivatives at the grid nodes
    Matrix z;       // n_z x N
    Matrix z_hat;   // n_z x N
    Matrix e;       // n_z x N, e = z - z_hat
    Matrix w;       // n_w x N
    Vector int_e2;  // running trapezoidal integral of |e|^2
    Vector int_w2;  // running trapezoidal integral of |w|^2
    bool divergent = false;
    int n = 0;
    int n_w = 0;
    int n_z = 0;
    SimConfig config;
};

// Piecewise cubic Hermite record of a trajectory; constant before start time.
class HistoryBuffer {
public:
    HistoryBuffer() = default;
    HistoryBuffer(Vector initial_state, double start_time);

    void push(double t, const Vector& state, const Vector& deriv);
    Vector state(double t) const;
    Vector derivative(double t) const;
    double last_time() const;
    bool empty() const { return times_.empty(); }

private:
    std::size_t segment_index(double t) const;

    std::vector<double> times_;
    std::vector<Vector> states_;
    std::vector<Vector> derivs_;
    Vector initial_;
    double start_ = 0.0;
};

SimResult simulate_filtering(const TsDelayModel& model, const FuzzyFilter& filter,
                             const SimConfig& config);

double l2_gain_estimate(const SimResult& result);

struct MonitorResult {
    Vector time;
    Vector V;
    double max_V = 0.0;
    double max_forward_diff = 0.0;
};

MonitorResult lyapunov_monitor(const TsDelayModel& model, const FuzzyFilter& filter,
                               const std::map<std::string, Matrix>& certificate,
                               const SimResult& result);

void write_csv(const SimResult& result, const std::string& path);

}  // namespace fhinf
