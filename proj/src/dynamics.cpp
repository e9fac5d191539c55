#include "nafc/dynamics.hpp"

#include <array>
#include <algorithm>
#include <cmath>

namespace nafc::dynamics {

Vec2 drift(const AgentState& x, const AgentParams& prm) {
    const double p1 = x.p.x(), p2 = x.p.y();
    const double v1 = x.v.x(), v2 = x.v.y();
    return {prm.a1 * v2 * v1 + std::sin(prm.a1 * p1), prm.b1 * p2 * v2 + std::cos(prm.b1 * p2)};
}

Vec2 input_gain(const AgentState& x) {
    // The gain matrix indexes the third and fourth components of [p; v].
    const double v1 = x.v.x(), v2 = x.v.y();
    return {1.0 + std::cos(v2) * std::sin(v1 * v1), 1.0 + std::cos(v1) * std::sin(v2 * v2)};
}

Vec2 delayed_term(const AgentState& xd, const AgentParams& prm) {
    return {prm.c1 * xd.p.x() * std::cos(xd.v.x()), prm.c2 * xd.p.y() * std::sin(xd.v.y())};
}

Vec2 disturbance(const AgentState& x, double t, const AgentParams& prm) {
    const double p1 = x.p.x(), p2 = x.p.y();
    const double v1 = x.v.x(), v2 = x.v.y();
    return {prm.d1 * v2 * p1 * p1 * std::cos(1.5 * t), prm.d2 * (v1 + p2) * std::sin(t)};
}

Vec2 eval_benchmark_dynamics(const AgentState& x, const AgentState& x_delayed, const Vec2& u, double t,
                             const AgentParams& prm) {
    if (!is_finite(x.p) || !is_finite(x.v) || !is_finite(x_delayed.p) || !is_finite(x_delayed.v) ||
        !is_finite(u) || !std::isfinite(t)) {
        throw Error(ErrorKind::InvalidInput, "non-finite input to agent dynamics");
    }
    const Vec2 g = input_gain(x);
    return drift(x, prm) + g.cwiseProduct(u) + delayed_term(x_delayed, prm) + disturbance(x, t, prm);
}

double upsilon_bound(const AgentState& x, const AgentParams& prm) { return std::sqrt(upsilon_sq(x, prm)); }

// --- HistoryBuffer ---------------------------------------------------------

HistoryBuffer::HistoryBuffer(std::size_t capacity, double t_start, const AgentState& initial, double aux_initial)
    : ring_(std::max<std::size_t>(capacity, 2)), t_start_(t_start), initial_(initial), aux_initial_(aux_initial) {
    ring_[0] = {t_start, initial, aux_initial, 0.0};
    size_ = 1;
}

std::size_t HistoryBuffer::capacity_for(double window, double dt) {
    return static_cast<std::size_t>(std::ceil(window / dt)) + 4;
}

void HistoryBuffer::push(double t, const AgentState& x, double aux) {
    const Sample& last = at(size_ - 1);
    if (!(t > last.t)) throw Error(ErrorKind::InvalidInput, "history timestamps must increase strictly");
    const double cumulative = last.cumulative + (t - last.t) * 0.5 * (last.aux + aux);
    if (size_ < ring_.size()) {
        ring_[(head_ + size_) % ring_.size()] = {t, x, aux, cumulative};
        ++size_;
    } else {
        ring_[head_] = {t, x, aux, cumulative};
        head_ = (head_ + 1) % ring_.size();
        dropped_start_ = true;
    }
}

std::size_t HistoryBuffer::bracket(double t) const {
    std::size_t lo = 0, hi = size_ - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi + 1) / 2;
        if (at(mid).t <= t) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    return lo;
}

AgentState HistoryBuffer::lookup(double t) const {
    if (t > newest_time()) throw Error(ErrorKind::OutOfRange, "history lookup beyond newest sample");
    if (t < oldest_time()) {
        if (dropped_start_) throw Error(ErrorKind::OutOfRange, "history lookup older than retained samples");
        return initial_;
    }
    const std::size_t k = bracket(t);
    const Sample& a = at(k);
    if (a.t == t || k + 1 == size_) return a.x;
    const Sample& b = at(k + 1);
    const double w = (t - a.t) / (b.t - a.t);
    return {a.x.p + w * (b.x.p - a.x.p), a.x.v + w * (b.x.v - a.x.v)};
}

double HistoryBuffer::aux_at(double t) const {
    if (t > newest_time()) throw Error(ErrorKind::OutOfRange, "history lookup beyond newest sample");
    if (t < oldest_time()) {
        if (dropped_start_) throw Error(ErrorKind::OutOfRange, "history lookup older than retained samples");
        return aux_initial_;
    }
    const std::size_t k = bracket(t);
    const Sample& a = at(k);
    if (a.t == t || k + 1 == size_) return a.aux;
    const Sample& b = at(k + 1);
    return a.aux + (t - a.t) / (b.t - a.t) * (b.aux - a.aux);
}

double HistoryBuffer::cumulative_at(double t) const {
    if (t < oldest_time()) {
        if (dropped_start_) throw Error(ErrorKind::OutOfRange, "history window older than retained samples");
        return (t - t_start_) * aux_initial_;
    }
    const std::size_t k = bracket(t);
    const Sample& a = at(k);
    if (a.t == t || k + 1 == size_) return a.cumulative;
    const double q = aux_at(t);
    return a.cumulative + (t - a.t) * 0.5 * (a.aux + q);
}

double HistoryBuffer::aux_integral(double a, double b) const {
    if (b > newest_time()) throw Error(ErrorKind::OutOfRange, "integration window extends past newest sample");
    if (a > b) throw Error(ErrorKind::InvalidInput, "integration window is reversed");
    return cumulative_at(b) - cumulative_at(a);
}

// --- TargetTrajectory -------------------------------------------------------

TargetTrajectory TargetTrajectory::benchmark() { return TargetTrajectory{}; }

TargetTrajectory TargetTrajectory::piecewise(std::vector<PolynomialPiece> pieces) {
    if (pieces.empty()) throw Error(ErrorKind::Config, "piecewise target needs at least one piece");
    for (std::size_t k = 0; k < pieces.size(); ++k) {
        const auto& pc = pieces[k];
        if (!(pc.t1 > pc.t0)) throw Error(ErrorKind::Config, "target piece has an empty time interval");
        if (pc.cx.empty() || pc.cy.empty()) throw Error(ErrorKind::Config, "target piece has no coefficients");
        if (k > 0 && pieces[k - 1].t1 != pc.t0) {
            throw Error(ErrorKind::Config, "target pieces must be contiguous");
        }
    }
    TargetTrajectory tr;
    tr.kind_ = Kind::Piecewise;
    tr.pieces_ = std::move(pieces);
    return tr;
}

namespace {

// Value and first two derivatives of sum_k c[k] s^k.
std::array<double, 3> poly_eval(const std::vector<double>& c, double s) {
    double f = 0.0, df = 0.0, ddf = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) {
        ddf = ddf * s + 2.0 * df;
        df = df * s + f;
        f = f * s + c[k];
    }
    return {f, df, ddf};
}

}  // namespace

TargetSample TargetTrajectory::at(double t) const {
    if (kind_ == Kind::Benchmark) {
        return {{0.2 * t, 0.25 * std::sin(2.0 * t)}, {0.2, 0.5 * std::cos(2.0 * t)}, {0.0, -std::sin(2.0 * t)}};
    }
    auto it = std::find_if(pieces_.begin(), pieces_.end(), [t](const PolynomialPiece& pc) { return t < pc.t1; });
    const PolynomialPiece& pc = it == pieces_.end() ? pieces_.back() : *it;
    const double s = t - pc.t0;
    const auto x = poly_eval(pc.cx, s);
    const auto y = poly_eval(pc.cy, s);
    return {{x[0], y[0]}, {x[1], y[1]}, {x[2], y[2]}};
}

TargetTrajectory::Bounds TargetTrajectory::bounds(double t_end, int samples) const {
    Bounds b;
    const int n = std::max(samples, 2);
    for (int k = 0; k < n; ++k) {
        const double t = t_end * static_cast<double>(k) / (n - 1);
        const TargetSample s = at(t);
        b.p = std::max(b.p, s.p.norm());
        b.v = std::max(b.v, s.v.norm());
        b.a = std::max(b.a, s.a.norm());
    }
    // sup |sin 2t| over all time, independent of the sampling grid.
    if (kind_ == Kind::Benchmark) b.a = 1.0;
    return b;
}

}  // namespace nafc::dynamics
