#include "nafc/formation_controller.hpp"

#include <algorithm>
#include <cmath>

namespace nafc::control {

double ControllerGains::min_Gamma() const {
    double g = std::numeric_limits<double>::infinity();
    for (const auto& a : agents) g = std::min(g, a.Gamma);
    return g;
}

namespace {

// p_i - p_j oriented away from the neighbor, with its length.
struct Relative {
    Vec2 p;
    double len;
};

Relative relative(const rigid::Framework& fw, int i, const rigid::Incidence& inc) {
    const Vec2 p = fw.positions[i] - fw.positions[inc.neighbor];
    const double len = p.norm();
    if (!(len > 0.0)) {
        throw Error(ErrorKind::DegenerateEdge,
                    "agents " + std::to_string(i + 1) + " and " + std::to_string(inc.neighbor + 1) + " coincide");
    }
    return {p, len};
}

}  // namespace

Eigen::VectorXd distance_errors(const rigid::Framework& fw) {
    const auto& edges = fw.graph.edges();
    Eigen::VectorXd beta(static_cast<Eigen::Index>(edges.size()));
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const double len = (fw.positions[edges[k].i] - fw.positions[edges[k].j]).norm();
        if (!(len > 0.0)) {
            throw Error(ErrorKind::DegenerateEdge, "agents " + std::to_string(edges[k].i + 1) + " and " +
                                                       std::to_string(edges[k].j + 1) + " coincide");
        }
        beta[static_cast<Eigen::Index>(k)] = len - fw.graph.desired_distance(static_cast<int>(k));
    }
    return beta;
}

Eigen::VectorXd distance_error_rates(const rigid::Framework& fw, std::span<const Vec2> velocities,
                                     const Eigen::VectorXd& beta) {
    const auto& edges = fw.graph.edges();
    if (static_cast<std::size_t>(beta.size()) != edges.size() ||
        velocities.size() != static_cast<std::size_t>(fw.graph.vertex_count())) {
        throw Error(ErrorKind::InvalidInput, "distance error rates: dimension mismatch");
    }
    Eigen::VectorXd rates(beta.size());
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const auto idx = static_cast<Eigen::Index>(k);
        const double denom = beta[idx] + fw.graph.desired_distance(static_cast<int>(k));
        if (!(denom > 0.0)) throw Error(ErrorKind::DegenerateEdge, "zero-length edge in distance error rate");
        const Vec2 pij = fw.positions[edges[k].i] - fw.positions[edges[k].j];
        rates[idx] = pij.dot(velocities[edges[k].i] - velocities[edges[k].j]) / denom;
    }
    return rates;
}

Vec2 formation_coupling(int i, const rigid::Framework& fw, const Eigen::VectorXd& beta) {
    Vec2 sum = Vec2::Zero();
    for (const auto& inc : fw.graph.incident(i)) {
        const Relative r = relative(fw, i, inc);
        sum += r.p / r.len * beta[inc.edge];
    }
    return sum;
}

Vec2 compute_s(int i, const rigid::Framework& fw, std::span<const Vec2> velocities, const Eigen::VectorXd& beta,
               const Vec2& e_r, const Vec2& v_r, const ControllerGains& gains) {
    return velocities[i] + gains.k_v * formation_coupling(i, fw, beta) - (v_r + gains.k_r * e_r);
}

Eigen::VectorXd virtual_velocity(const rigid::Framework& fw, const Eigen::VectorXd& beta, const Vec2& e_r,
                                 const Vec2& v_r, const ControllerGains& gains) {
    const auto rbar = rigid::normalize_rigidity_matrix(rigid::build_rigidity_matrix(fw), fw);
    const Eigen::VectorXd us = -gains.k_v * rbar.values.transpose() * beta;
    const Vec2 track = v_r + gains.k_r * e_r;
    return us + track.replicate(fw.graph.vertex_count(), 1);
}

Vec2 smoothed_sign(const Vec2& s, double eps) {
    if (eps > 0.0) return {std::tanh(s.x() / eps), std::tanh(s.y() / eps)};
    auto sgn = [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); };
    return {sgn(s.x()), sgn(s.y())};
}

Vec2 compute_gamma(int i, const rigid::Framework& fw, std::span<const Vec2> velocities, const Eigen::VectorXd& beta,
                   const Eigen::VectorXd& beta_dot, const Vec2& e_r_rate, const Vec2& s_i,
                   const ControllerGains& gains) {
    // Time derivative of (p_ij / |p_ij|) e_ij, summed over neighbors.
    Vec2 sum = Vec2::Zero();
    for (const auto& inc : fw.graph.incident(i)) {
        const Relative r = relative(fw, i, inc);
        const Vec2 vij = velocities[i] - velocities[inc.neighbor];
        const double e = beta[inc.edge];
        const double de = beta_dot[inc.edge];
        const double len2 = r.len * r.len;
        sum += ((vij * e + de * r.p) * len2 - r.p.dot(vij) * r.p * e) / (len2 * r.len);
    }
    return -gains.k_v * sum - gains.b * smoothed_sign(s_i, gains.eps_sgn) + gains.k_r * e_r_rate;
}

double delay_window_integral(const dynamics::HistoryBuffer& hist, double t, double window,
                             std::optional<double> aux_now) {
    const double a = t - window;
    const double tn = hist.newest_time();
    if (t <= tn) return hist.aux_integral(a, t);
    if (!aux_now) throw Error(ErrorKind::OutOfRange, "delay window ends past committed history");
    const double qn = hist.newest_aux();
    if (a >= tn) {
        const double qa = qn + (a - tn) / (t - tn) * (*aux_now - qn);
        return (t - a) * 0.5 * (qa + *aux_now);
    }
    return hist.aux_integral(a, tn) + (t - tn) * 0.5 * (qn + *aux_now);
}

double gain_floor(const AgentGains& ag, double k_c) { return ag.Gamma / ag.g_lower * (1.0 + k_c / (2.0 * ag.Gamma)); }

double compute_gain_c(const Vec2& s_i, double window_integral, const AgentGains& ag, double k_c) {
    const double s2 = s_i.squaredNorm();
    const double delay_part = window_integral == 0.0 ? 0.0 : window_integral / (2.0 * s2);
    return ag.Gamma / ag.g_lower * (delay_part + 1.0 + k_c / (2.0 * ag.Gamma));
}

double compute_gain_c(const Vec2& s_i, const dynamics::HistoryBuffer& hist, double t, const AgentGains& ag,
                      const ControllerGains& gains, std::optional<double> aux_now) {
    return compute_gain_c(s_i, delay_window_integral(hist, t, gains.tau_M, aux_now), ag, gains.k_c);
}

Vec2 control_input(int i, const Vec2& s_i, const dynamics::AgentState& x_i, const rigid::Framework& fw,
                   const Eigen::VectorXd& beta, const nn::RbfNetwork& net, double c_i, const Vec2& gamma_i,
                   double upsilon_sq_now, const ControllerGains& gains) {
    const AgentGains& ag = gains.agents[i];
    const double s2 = s_i.squaredNorm();
    if (std::sqrt(s2) < ag.o) return Vec2::Zero();

    const Vec2 nn_term = net.approximate(nn::make_input(s_i, x_i.p, x_i.v));
    const Vec2 coupling = formation_coupling(i, fw, beta);
    const Vec2 bracket = gains.coupling == CouplingForm::Derived ? Vec2(nn_term + coupling - gamma_i)
                                                                 : Vec2(nn_term - coupling + gamma_i);
    const Vec2 s_inv = s_i / s2;
    return -c_i * s_i - bracket / ag.g_lower - s_inv * (upsilon_sq_now / (2.0 * ag.g_lower));
}

LyapunovTerms lyapunov_monitor(const Eigen::VectorXd& beta, std::span<const Vec2> s,
                               std::span<const nn::RbfNetwork> nets,
                               std::span<const dynamics::HistoryBuffer> histories, std::span<const double> taus,
                               double t, const ControllerGains& gains) {
    LyapunovTerms out;
    out.M1 = 0.5 * beta.squaredNorm();
    for (const auto& si : s) out.M2 += 0.5 * si.squaredNorm();
    for (std::size_t i = 0; i < histories.size(); ++i) {
        out.M3 += 0.5 * histories[i].aux_integral(t - taus[i], t);
    }
    for (std::size_t i = 0; i < nets.size(); ++i) {
        out.W_term += 0.5 * nets[i].weights().squaredNorm() / gains.agents[i].adapt.Pi;
    }
    return out;
}

ControlState compute_control(const ControlInputs& in) {
    const rigid::Framework& fw = *in.framework;
    const ControllerGains& gains = *in.gains;
    const int n = fw.graph.vertex_count();

    ControlState st;
    st.beta = distance_errors(fw);
    st.beta_dot = distance_error_rates(fw, in.velocities, st.beta);
    st.e_r = in.target.p - fw.positions[0];
    st.e_r_rate = in.target.v - in.velocities[0];
    st.s.resize(n);
    st.gamma.resize(n);
    st.u.resize(n);
    st.c.resize(n);
    st.upsilon_sq.resize(n);
    st.dead_zone.resize(n);
    st.phi.resize(n);

    for (int i = 0; i < n; ++i) {
        const dynamics::AgentState x{fw.positions[i], in.velocities[i]};
        const AgentGains& ag = gains.agents[i];
        const Vec2 s = compute_s(i, fw, in.velocities, st.beta, st.e_r, in.target.v, gains);
        const double ups2 = dynamics::upsilon_sq(x, in.params[i]);
        const double integral = delay_window_integral(in.histories[i], in.t, gains.tau_M, ups2);
        const bool dead = s.norm() < ag.o;

        st.s[i] = s;
        st.upsilon_sq[i] = ups2;
        st.dead_zone[i] = dead;
        st.gamma[i] = compute_gamma(i, fw, in.velocities, st.beta, st.beta_dot, st.e_r_rate, s, gains);
        st.phi[i] = in.nets[i].eval_basis(nn::make_input(s, x.p, x.v));
        if (dead) {
            const Vec2 boundary = s.norm() > 0.0 ? Vec2(s.normalized() * ag.o) : Vec2(ag.o, 0.0);
            st.c[i] = compute_gain_c(boundary, integral, ag, gains.k_c);
            st.u[i] = Vec2::Zero();
        } else {
            st.c[i] = compute_gain_c(s, integral, ag, gains.k_c);
            st.u[i] = control_input(i, s, x, fw, st.beta, in.nets[i], st.c[i], st.gamma[i], ups2, gains);
        }
    }
    return st;
}

}  // namespace nafc::control
