#pragma once

#include "nafc/common.hpp"
#include "nafc/dynamics.hpp"
#include "nafc/rbf_network.hpp"
#include "nafc/rigid_graph.hpp"

#include <Eigen/Core>

#include <optional>
#include <span>
#include <vector>

namespace nafc::control {

/// How the neighbor-coupling and gamma terms enter the bracket of the
/// control law.
///
/// `Derived`: u = -c s - (W^T phi + sum_j n_ij e_ij - gamma) / g_lower - ...
///   which is the form that cancels the cross term and the virtual-velocity
///   derivative in the Lyapunov derivative.
/// `Printed`: u = -c s - (W^T phi - sum_j n_ij e_ij + gamma) / g_lower - ...
///   kept for comparison; it reinforces both terms instead of cancelling them.
enum class CouplingForm { Derived, Printed };

struct AgentGains {
    nn::AdaptationParams adapt;
    double Gamma = 2.0;
    double g_lower = 1.0;  // assumed lower bound on the input-gain eigenvalues
    double o = 1e-3;       // dead-zone radius
};

struct ControllerGains {
    double k_v = 15.0;
    double k_r = 3.0;
    double b = 3.0;
    double k_c = 200.0;
    double eps_sgn = 0.01;  // 0 selects the discontinuous sign
    double tau_M = 0.2;
    CouplingForm coupling = CouplingForm::Derived;
    std::vector<AgentGains> agents;

    double min_Gamma() const;
};

/// e_ij = |p_i - p_j| - d_ij in graph edge order.
Eigen::VectorXd distance_errors(const rigid::Framework& fw);

/// de_ij/dt = p_ij^T (v_i - v_j) / (e_ij + d_ij).
Eigen::VectorXd distance_error_rates(const rigid::Framework& fw, std::span<const Vec2> velocities,
                                     const Eigen::VectorXd& beta);

/// sum over neighbors j of (p_ij / |p_ij|) e_ij, i.e. row i of R_bar^T beta.
Vec2 formation_coupling(int i, const rigid::Framework& fw, const Eigen::VectorXd& beta);

/// s_i = v_i + k_v sum_j (p_ij/|p_ij|) e_ij - (v_r + k_r e_r).
Vec2 compute_s(int i, const rigid::Framework& fw, std::span<const Vec2> velocities, const Eigen::VectorXd& beta,
               const Vec2& e_r, const Vec2& v_r, const ControllerGains& gains);

/// Stacked virtual velocity nu = -k_v R_bar^T beta + 1_N (x) (v_r + k_r e_r),
/// built from the normalized rigidity matrix.
Eigen::VectorXd virtual_velocity(const rigid::Framework& fw, const Eigen::VectorXd& beta, const Vec2& e_r,
                                 const Vec2& v_r, const ControllerGains& gains);

/// Componentwise tanh(s / eps); the exact sign (with sgn(0) = 0) when eps == 0.
Vec2 smoothed_sign(const Vec2& s, double eps);

/// gamma_i = -k_v sum_j [(v_ij e_ij + de_ij p_ij)|p_ij|^2 - (p_ij^T v_ij) p_ij e_ij] / |p_ij|^3
///           - b sgn(s_i) + k_r de_r.
Vec2 compute_gamma(int i, const rigid::Framework& fw, std::span<const Vec2> velocities, const Eigen::VectorXd& beta,
                   const Eigen::VectorXd& beta_dot, const Vec2& e_r_rate, const Vec2& s_i,
                   const ControllerGains& gains);

/// Integral of Upsilon^2 over [t - window, t]. The history must reach at
/// least to `window` before t; when t is past the newest committed sample the
/// last segment is closed with `aux_now` (Upsilon^2 at t) by the trapezoid
/// rule.
double delay_window_integral(const dynamics::HistoryBuffer& hist, double t, double window,
                             std::optional<double> aux_now = std::nullopt);

/// c_i = (Gamma_i / g_i) [ I / (2 |s_i|^2) + 1 + k_c / (2 Gamma_i) ].
double compute_gain_c(const Vec2& s_i, double window_integral, const AgentGains& ag, double k_c);

/// Same, reading the window integral from an agent's history.
double compute_gain_c(const Vec2& s_i, const dynamics::HistoryBuffer& hist, double t, const AgentGains& ag,
                      const ControllerGains& gains, std::optional<double> aux_now = std::nullopt);

/// Lower bound the gain never goes below: (Gamma_i / g_i)(1 + k_c / (2 Gamma_i)).
double gain_floor(const AgentGains& ag, double k_c);

/// The neuro-adaptive law. Exactly zero inside the dead zone |s_i| < o_i.
Vec2 control_input(int i, const Vec2& s_i, const dynamics::AgentState& x_i, const rigid::Framework& fw,
                   const Eigen::VectorXd& beta, const nn::RbfNetwork& net, double c_i, const Vec2& gamma_i,
                   double upsilon_sq_now, const ControllerGains& gains);

struct LyapunovTerms {
    double M1 = 0.0;      // 1/2 |beta|^2
    double M2 = 0.0;      // 1/2 |s|^2
    double M3 = 0.0;      // 1/2 sum_i int_{t - tau_i}^t Upsilon_i^2
    double W_term = 0.0;  // 1/2 sum_i tr(W_hat^T F^-1 W_hat), proxy for the unobservable W_tilde term

    double total() const { return M1 + M2 + M3 + W_term; }
};

/// Diagnostic only; the control law never reads it. Histories must carry
/// Upsilon^2 in their aux channel.
LyapunovTerms lyapunov_monitor(const Eigen::VectorXd& beta, std::span<const Vec2> s,
                               std::span<const nn::RbfNetwork> nets,
                               std::span<const dynamics::HistoryBuffer> histories, std::span<const double> taus,
                               double t, const ControllerGains& gains);

/// Everything the law needs at one evaluation time.
struct ControlInputs {
    double t = 0.0;
    const rigid::Framework* framework = nullptr;  // current positions
    std::span<const Vec2> velocities;
    dynamics::TargetSample target;
    std::span<const dynamics::AgentParams> params;
    std::span<const dynamics::HistoryBuffer> histories;
    std::span<const nn::RbfNetwork> nets;
    const ControllerGains* gains = nullptr;
};

/// Per-step controller state; vectors are indexed by agent.
struct ControlState {
    Eigen::VectorXd beta;
    Eigen::VectorXd beta_dot;
    Vec2 e_r = Vec2::Zero();
    Vec2 e_r_rate = Vec2::Zero();
    std::vector<Vec2> s;
    std::vector<Vec2> gamma;
    std::vector<Vec2> u;
    std::vector<double> c;  // inside the dead zone reported at |s_i| = o_i
    std::vector<double> upsilon_sq;
    std::vector<char> dead_zone;
    std::vector<Eigen::VectorXd> phi;
};

/// Evaluates the full law for every agent from one consistent snapshot.
ControlState compute_control(const ControlInputs& in);

}  // namespace nafc::control
