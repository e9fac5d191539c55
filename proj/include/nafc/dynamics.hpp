#pragma once

#include "nafc/common.hpp"

#include <span>
#include <vector>

namespace nafc::dynamics {

struct AgentState {
    Vec2 p = Vec2::Zero();
    Vec2 v = Vec2::Zero();
};

/// Coefficients of the benchmark plant. Only a1, b1, c1, c2, d1, d2 enter the
/// vector field; a2 and b2 are carried for completeness of the parameter table.
struct AgentParams {
    double a1 = 0.0, a2 = 0.0;
    double b1 = 0.0, b2 = 0.0;
    double c1 = 0.0, c2 = 0.0;
    double d1 = 0.1, d2 = 0.1;
    double tau = 0.0;  // state delay
};

/// Drift f(x).
Vec2 drift(const AgentState& x, const AgentParams& prm);

/// Diagonal of the input gain g(x). Entries lie in [0, 2].
Vec2 input_gain(const AgentState& x);

/// Delayed coupling h(x(t - tau)).
Vec2 delayed_term(const AgentState& x_delayed, const AgentParams& prm);

/// Disturbance w(x, t).
Vec2 disturbance(const AgentState& x, double t, const AgentParams& prm);

/// Acceleration of one agent: f + g u + h + w.
Vec2 eval_benchmark_dynamics(const AgentState& x, const AgentState& x_delayed, const Vec2& u, double t,
                             const AgentParams& prm);

/// Known bound on the delayed term: sqrt((c1 p1)^2 + (c2 p2)^2) >= |h(x)|.
double upsilon_bound(const AgentState& x, const AgentParams& prm);

inline double upsilon_sq(const AgentState& x, const AgentParams& prm) {
    const double a = prm.c1 * x.p.x();
    const double b = prm.c2 * x.p.y();
    return a * a + b * b;
}

/// Time-indexed state history for delayed lookups.
///
/// Holds the newest `capacity` samples in ring storage. Every sample carries
/// an auxiliary scalar (the caller stores Upsilon^2 there) whose running
/// trapezoid integral is kept alongside, so window integrals cost two lookups.
/// Times before the first sample resolve to the first sample (constant
/// pre-history).
class HistoryBuffer {
public:
    HistoryBuffer() = default;
    HistoryBuffer(std::size_t capacity, double t_start, const AgentState& initial, double aux_initial = 0.0);

    /// Capacity covering a delay window: ceil(window / dt) + 4 samples.
    static std::size_t capacity_for(double window, double dt);

    /// Appends a sample; `t` must exceed the newest time.
    void push(double t, const AgentState& x, double aux = 0.0);

    /// Linear interpolation between bracketing samples. Throws OutOfRange
    /// past the newest sample or before the oldest retained one (once the
    /// ring has dropped the start).
    AgentState lookup(double t) const;

    double aux_at(double t) const;

    /// Trapezoid integral of the aux channel over [a, b]; b must not exceed
    /// the newest time. The constant pre-history contributes aux(t_start).
    double aux_integral(double a, double b) const;

    double t_start() const { return t_start_; }
    double newest_time() const { return at(size_ - 1).t; }
    double oldest_time() const { return at(0).t; }
    const AgentState& newest() const { return at(size_ - 1).x; }
    double newest_aux() const { return at(size_ - 1).aux; }
    const AgentState& initial() const { return initial_; }
    std::size_t size() const { return size_; }
    std::size_t capacity() const { return ring_.size(); }

private:
    struct Sample {
        double t;
        AgentState x;
        double aux;
        double cumulative;  // trapezoid integral of aux from t_start
    };

    const Sample& at(std::size_t logical) const { return ring_[(head_ + logical) % ring_.size()]; }
    // Index of the last sample with time <= t; requires oldest <= t <= newest.
    std::size_t bracket(double t) const;
    double cumulative_at(double t) const;

    std::vector<Sample> ring_;
    std::size_t head_ = 0;
    std::size_t size_ = 0;
    double t_start_ = 0.0;
    AgentState initial_;
    double aux_initial_ = 0.0;
    bool dropped_start_ = false;
};

/// Reference trajectory p_r(t) with its first two derivatives.
struct TargetSample {
    Vec2 p = Vec2::Zero();
    Vec2 v = Vec2::Zero();
    Vec2 a = Vec2::Zero();
};

/// One polynomial piece: p(t) = sum_k coeff[k] (t - t0)^k on [t0, t1).
struct PolynomialPiece {
    double t0 = 0.0;
    double t1 = 0.0;
    std::vector<double> cx;
    std::vector<double> cy;
};

class TargetTrajectory {
public:
    enum class Kind { Benchmark, Piecewise };

    /// v_r = (0.2, 0.5 cos 2t), p_r(0) = 0.
    static TargetTrajectory benchmark();
    /// Pieces must be contiguous and ordered; the last piece is extrapolated.
    static TargetTrajectory piecewise(std::vector<PolynomialPiece> pieces);

    Kind kind() const { return kind_; }
    const std::vector<PolynomialPiece>& pieces() const { return pieces_; }

    TargetSample at(double t) const;

    struct Bounds {
        double p = 0.0;
        double v = 0.0;
        double a = 0.0;
    };
    /// Sup of |p_r|, |v_r|, |a_r| over [0, t_end], sampled on a grid of
    /// `samples` points (exact for the benchmark: |a_r| <= 1).
    Bounds bounds(double t_end, int samples = 4001) const;

private:
    Kind kind_ = Kind::Benchmark;
    std::vector<PolynomialPiece> pieces_;
};

}  // namespace nafc::dynamics
