#pragma once

#include "nafc/common.hpp"
#include "nafc/dynamics.hpp"
#include "nafc/formation_controller.hpp"
#include "nafc/rbf_network.hpp"
#include "nafc/rigid_graph.hpp"
#include "nafc/scenario_config.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace nafc::sim {

// --- generic fixed-step integration ------------------------------------------

/// dy/dt = f(t, y). Implementations may read committed delay history but must
/// not modify it.
using Rhs = std::function<void(double t, std::span<const double> y, std::span<double> dy)>;

/// Stage buffers plus the summation carry of one trajectory. Reuse a
/// workspace only for consecutive steps of the same trajectory, or call
/// reset() first.
struct Rk4Workspace {
    std::vector<double> k1, k2, k3, k4, tmp;
    std::vector<double> carry;  // rounding lost in the last update
    /// Keeps the carry when the size is unchanged.
    void resize(std::size_t n);
    void reset();
};

/// One classical RK4 step from (t, y) to t + dt, with the final update
/// y + dt/6 (k1 + 2k2 + 2k3 + k4) done by compensated summation. If
/// `k1_precomputed` is true the caller has already filled `ws.k1` with f(t, y).
void rk4_step(const Rhs& f, double t, double dt, std::span<const double> y, std::span<double> out, Rk4Workspace& ws,
              bool k1_precomputed = false);

// --- closed-loop multi-agent simulation -----------------------------------

enum class ControllerKind { NeuroAdaptive, DisplacementBaseline };

std::string_view controller_name(ControllerKind k);

/// Average absolute distance error: (1/|E|) sum | |p_ij| - d_ij |.
double ade(const rigid::FormationGraph& graph, std::span<const Vec2> positions);

/// Displacement (consensus-with-offsets) comparator. `offsets[e]` is the
/// desired p_i - p_j for edge e = (i, j). Agent 0 additionally tracks the
/// target with the same PD gains.
std::vector<Vec2> displacement_baseline_control(const rigid::FormationGraph& graph, std::span<const Vec2> positions,
                                                std::span<const Vec2> velocities, std::span<const Vec2> offsets,
                                                const dynamics::TargetSample& target, const BaselineGains& gains);

/// Offsets q_i - q_j of a reference shape, in edge order.
std::vector<Vec2> edge_offsets(const rigid::FormationGraph& graph, std::span<const Vec2> reference_shape);

struct TraceRow {
    double t = 0.0;
    std::vector<Vec2> p, v, u, s;
    std::vector<double> c, w_norm;
    std::vector<char> dead_zone;
    Eigen::VectorXd beta;
    Vec2 e_r = Vec2::Zero();
    Vec2 p_r = Vec2::Zero();
    Vec2 v_r = Vec2::Zero();
    double zeta = 0.0;
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    control::LyapunovTerms lyap;
};

struct WeightSnapshot {
    double t = 0.0;
    std::vector<nn::WeightMatrix> weights;
};

/// Results of the checks evaluated once at t = 0.
struct GainConditions {
    double sigma_min0 = 0.0;
    double kv_sigma = 0.0;       // k_v * sigma_min(R_bar(0))
    double half_Gamma = 0.0;     // min Gamma / 2
    bool kv_sigma_ok = false;
    bool kappa_ok = false;       // kappa_i >= Gamma_min / Pi_i for all i
    bool k_c_ok = false;         // k_c >= Gamma_min
    double b_required = 0.0;     // sqrt(2N) sup |dv_r/dt|
    bool b_ok = false;
};

GainConditions check_gain_conditions(const ScenarioConfig& cfg);

/// Monitors updated at every integrator step (not only recorded rows).
struct RunMonitors {
    GainConditions gains_at_start;
    long kv_sigma_violations = 0;  // steps where k_v sigma_min < Gamma_min / 2
    long sigma_bound_violations = 0;
    long dead_zone_violations = 0;  // |s_i| < o_i yet u_i != 0
    long delay_bound_violations = 0;  // |h(x_delayed)| > Upsilon(x_delayed)
    std::vector<double> min_g_entry;
    bool g_lower_violated = false;
    double max_disturbance = 0.0;
    double max_position = 0.0;
    double max_velocity = 0.0;
    std::vector<double> max_weight_norm;
    double max_s_norm = 0.0;
    double weight_bound = 0.0;  // sqrt(eta) sup|s| / min kappa + max |W(0)|
    bool ceilings_exceeded = false;
    std::vector<std::pair<double, double>> lyapunov_samples;  // (t, V) every 0.5 s
};

struct SimulationTrace {
    ControllerKind controller = ControllerKind::NeuroAdaptive;
    int agents = 0;
    std::vector<rigid::Edge> edges;
    double dt = 0.0;
    std::vector<TraceRow> rows;
    std::vector<WeightSnapshot> weights;
    RunMonitors monitors;
    bool diverged = false;
    std::string divergence_message;
};

/// Live state of a run: agents, networks, and delay histories.
class Simulation {
public:
    Simulation(const ScenarioConfig& cfg, ControllerKind kind);

    double time() const { return t_; }
    long step_index() const { return step_; }
    const std::vector<dynamics::AgentState>& agents() const { return agents_; }
    const std::vector<nn::RbfNetwork>& networks() const { return nets_; }
    const std::vector<dynamics::HistoryBuffer>& histories() const { return hist_; }

    /// Advances by one step of size dt. Throws Error(Divergence) when the new
    /// state is non-finite or exceeds the divergence ceiling; the state is
    /// left at the last good step.
    void step();

    /// Controller state and row at the current committed time.
    TraceRow observe();

    RunMonitors& monitors() { return monitors_; }

private:
    void pack(std::vector<double>& y) const;
    void unpack(std::span<const double> y);
    void rhs(double t, std::span<const double> y, std::span<double> dy, control::ControlState* diag);
    void update_monitors(const control::ControlState& st, std::span<const double> y);

    ScenarioConfig cfg_;
    ControllerKind kind_;
    rigid::FormationGraph graph_;
    control::ControllerGains gains_;
    std::vector<dynamics::AgentParams> params_;
    std::vector<Vec2> offsets_;
    std::vector<double> taus_;

    double t_ = 0.0;
    long step_ = 0;
    std::vector<dynamics::AgentState> agents_;
    std::vector<nn::RbfNetwork> nets_;
    std::vector<dynamics::HistoryBuffer> hist_;
    std::size_t stride_ = 0;  // doubles per agent in the packed state

    // scratch
    rigid::Framework fw_;
    std::vector<Vec2> vel_;
    std::vector<nn::RbfNetwork> stage_nets_;
    std::vector<double> y_, y_next_;
    Rk4Workspace ws_;
    bool k1_ready_ = false;
    double next_lyapunov_sample_ = 0.0;

    RunMonitors monitors_;
};

/// Runs a scenario to t_end. Divergence is reported in the trace rather than
/// thrown; the rows recorded up to that point are kept.
SimulationTrace run_scenario(const ScenarioConfig& cfg, ControllerKind kind = ControllerKind::NeuroAdaptive);

/// Runs independent scenarios on up to `threads` worker threads; results keep
/// the input order.
std::vector<SimulationTrace> run_batch(const std::vector<ScenarioConfig>& configs, ControllerKind kind,
                                       unsigned threads);

}  // namespace nafc::sim
