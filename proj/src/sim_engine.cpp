#include "nafc/sim_engine.hpp"

#include "nafc/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>
#include <thread>

namespace nafc::sim {

void Rk4Workspace::resize(std::size_t n) {
    if (carry.size() != n) carry.assign(n, 0.0);
    for (auto* v : {&k1, &k2, &k3, &k4, &tmp}) v->resize(n);
}

void Rk4Workspace::reset() { std::fill(carry.begin(), carry.end(), 0.0); }

void rk4_step(const Rhs& f, double t, double dt, std::span<const double> y, std::span<double> out, Rk4Workspace& ws,
              bool k1_precomputed) {
    const std::size_t n = y.size();
    if (ws.k1.size() != n || ws.carry.size() != n) {
        if (k1_precomputed && ws.k1.size() != n) {
            throw Error(ErrorKind::InvalidInput, "precomputed k1 has the wrong size");
        }
        ws.resize(n);
    }
    if (out.size() != n) throw Error(ErrorKind::InvalidInput, "rk4 output has the wrong size");
    const auto& kern = simd::active_kernels();
    const double half = 0.5 * dt;

    if (!k1_precomputed) f(t, y, ws.k1);
    kern.axpy(n, half, ws.k1.data(), y.data(), ws.tmp.data());
    f(t + half, ws.tmp, ws.k2);
    kern.axpy(n, half, ws.k2.data(), y.data(), ws.tmp.data());
    f(t + half, ws.tmp, ws.k3);
    kern.axpy(n, dt, ws.k3.data(), y.data(), ws.tmp.data());
    f(t + dt, ws.tmp, ws.k4);
    kern.rk4_combine(n, dt, y.data(), ws.k1.data(), ws.k2.data(), ws.k3.data(), ws.k4.data(), ws.carry.data(),
                     out.data());
}

std::string_view controller_name(ControllerKind k) {
    return k == ControllerKind::NeuroAdaptive ? "distance_neuro_adaptive" : "displacement_baseline";
}

double ade(const rigid::FormationGraph& graph, std::span<const Vec2> positions) {
    const auto& edges = graph.edges();
    if (edges.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const double len = (positions[edges[k].i] - positions[edges[k].j]).norm();
        sum += std::abs(len - graph.desired_distance(static_cast<int>(k)));
    }
    return sum / static_cast<double>(edges.size());
}

GainConditions check_gain_conditions(const ScenarioConfig& cfg) {
    GainConditions gc;
    const auto graph = cfg.graph();
    std::vector<Vec2> p0;
    for (const auto& a : cfg.agents) p0.push_back(a.initial.p);
    gc.sigma_min0 = rigid::normalized_singular_value_bounds(graph, p0).sigma_min;
    const auto gains = cfg.controller_gains();
    const double gmin = gains.min_Gamma();
    gc.kv_sigma = cfg.k_v * gc.sigma_min0;
    gc.half_Gamma = 0.5 * gmin;
    gc.kv_sigma_ok = gc.kv_sigma >= gc.half_Gamma;
    gc.kappa_ok = std::all_of(cfg.agents.begin(), cfg.agents.end(),
                              [gmin](const AgentConfig& a) { return a.gains.adapt.kappa >= gmin / a.gains.adapt.Pi; });
    gc.k_c_ok = cfg.k_c >= gmin;
    gc.b_required = std::sqrt(2.0 * cfg.vertex_count) * cfg.target.bounds(cfg.integrator.t_end).a;
    gc.b_ok = cfg.b >= gc.b_required;
    return gc;
}

// --- Simulation -------------------------------------------------------------

Simulation::Simulation(const ScenarioConfig& cfg, ControllerKind kind)
    : cfg_(cfg), kind_(kind), graph_(cfg.graph()), gains_(cfg.controller_gains()), params_(cfg.agent_params()) {
    const int n = cfg.vertex_count;
    if (static_cast<int>(cfg.agents.size()) != n) throw Error(ErrorKind::Config, "one agent entry per vertex required");
    const double dt = cfg.integrator.dt;
    if (!(dt > 0.0)) throw Error(ErrorKind::Config, "integrator step must be positive");

    double max_tau = gains_.tau_M;
    for (const auto& a : cfg.agents) {
        agents_.push_back(a.initial);
        taus_.push_back(a.params.tau);
        max_tau = std::max(max_tau, a.params.tau);
    }
    const std::size_t cap = dynamics::HistoryBuffer::capacity_for(max_tau, dt);
    for (int i = 0; i < n; ++i) {
        nets_.push_back(nn::RbfNetwork::lattice(cfg.rbf));
        hist_.emplace_back(cap, 0.0, agents_[i], dynamics::upsilon_sq(agents_[i], params_[i]));
    }
    stage_nets_ = nets_;
    stride_ = 4 + 2 * nets_.front().eta();
    if (kind == ControllerKind::DisplacementBaseline) {
        if (cfg.reference_shape.empty()) throw Error(ErrorKind::Config, "baseline needs a reference shape");
        offsets_ = edge_offsets(graph_, cfg.reference_shape);
    }

    fw_.graph = graph_;
    fw_.positions.resize(n);
    vel_.resize(n);
    y_.resize(stride_ * n);
    y_next_.resize(stride_ * n);

    monitors_.gains_at_start = check_gain_conditions(cfg);
    monitors_.min_g_entry.assign(n, std::numeric_limits<double>::infinity());
    monitors_.max_weight_norm.assign(n, 0.0);
}

void Simulation::pack(std::vector<double>& y) const {
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        double* a = y.data() + i * stride_;
        a[0] = agents_[i].p.x();
        a[1] = agents_[i].p.y();
        a[2] = agents_[i].v.x();
        a[3] = agents_[i].v.y();
        std::copy_n(nets_[i].weights().data(), stride_ - 4, a + 4);
    }
}

void Simulation::unpack(std::span<const double> y) {
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        const double* a = y.data() + i * stride_;
        fw_.positions[i] = {a[0], a[1]};
        vel_[i] = {a[2], a[3]};
        std::copy_n(a + 4, stride_ - 4, stage_nets_[i].weights().data());
    }
}

void Simulation::rhs(double t, std::span<const double> y, std::span<double> dy, control::ControlState* diag) {
    unpack(y);
    const dynamics::TargetSample target = cfg_.target.at(t);
    const control::ControlInputs in{t, &fw_, vel_, target, params_, hist_, stage_nets_, &gains_};

    control::ControlState st;
    std::vector<Vec2> u;
    if (kind_ == ControllerKind::NeuroAdaptive) {
        st = control::compute_control(in);
        u = st.u;
    } else {
        u = displacement_baseline_control(graph_, fw_.positions, vel_, offsets_, target, cfg_.baseline);
        if (diag) {
            st = control::compute_control(in);
            st.u = u;
        }
    }

    const std::size_t eta = stage_nets_.front().eta();
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        const dynamics::AgentState x{fw_.positions[i], vel_[i]};
        const double t_delayed = t - taus_[i];
        const dynamics::AgentState xd =
            taus_[i] == 0.0 ? x : hist_[i].lookup(std::min(t_delayed, hist_[i].newest_time()));
        const Vec2 acc = dynamics::eval_benchmark_dynamics(x, xd, u[i], t, params_[i]);
        double* d = dy.data() + i * stride_;
        d[0] = x.v.x();
        d[1] = x.v.y();
        d[2] = acc.x();
        d[3] = acc.y();
        if (kind_ == ControllerKind::NeuroAdaptive) {
            nn::weight_derivative_into(st.phi[i].data(), eta, st.s[i], y.data() + i * stride_ + 4,
                                       gains_.agents[i].adapt, d + 4);
        } else {
            std::fill_n(d + 4, 2 * eta, 0.0);
        }

        if (diag) {
            const Vec2 g = dynamics::input_gain(x);
            monitors_.min_g_entry[i] = std::min({monitors_.min_g_entry[i], g.x(), g.y()});
            if (std::min(g.x(), g.y()) < gains_.agents[i].g_lower) monitors_.g_lower_violated = true;
            monitors_.max_disturbance =
                std::max(monitors_.max_disturbance, dynamics::disturbance(x, t, params_[i]).norm());
            if (dynamics::delayed_term(xd, params_[i]).norm() > dynamics::upsilon_bound(xd, params_[i]) * (1 + 1e-12)) {
                ++monitors_.delay_bound_violations;
            }
            if (kind_ == ControllerKind::NeuroAdaptive && st.s[i].norm() < gains_.agents[i].o &&
                (u[i].x() != 0.0 || u[i].y() != 0.0)) {
                ++monitors_.dead_zone_violations;
            }
        }
    }
    if (diag) *diag = std::move(st);
}

namespace {

std::string snapshot(double t, const std::vector<dynamics::AgentState>& agents) {
    std::ostringstream os;
    os.precision(17);
    os << "state diverged after t=" << t << ";";
    for (std::size_t i = 0; i < agents.size(); ++i) {
        os << " agent " << i + 1 << " p=(" << agents[i].p.x() << "," << agents[i].p.y() << ") v=(" << agents[i].v.x()
           << "," << agents[i].v.y() << ")";
    }
    return os.str();
}

}  // namespace

TraceRow Simulation::observe() {
    pack(y_);
    ws_.resize(y_.size());
    control::ControlState st;
    rhs(t_, y_, ws_.k1, &st);
    k1_ready_ = true;

    const int n = static_cast<int>(agents_.size());
    TraceRow row;
    row.t = t_;
    row.p.resize(n);
    row.v.resize(n);
    row.w_norm.resize(n);
    for (int i = 0; i < n; ++i) {
        row.p[i] = agents_[i].p;
        row.v[i] = agents_[i].v;
        row.w_norm[i] = nets_[i].weights().norm();
    }
    row.u = st.u;
    row.s = st.s;
    row.c = st.c;
    row.dead_zone = st.dead_zone;
    row.beta = st.beta;
    row.e_r = st.e_r;
    const auto target = cfg_.target.at(t_);
    row.p_r = target.p;
    row.v_r = target.v;
    row.zeta = ade(graph_, row.p);
    const auto sv = rigid::normalized_singular_value_bounds(graph_, row.p);
    row.sigma_min = sv.sigma_min;
    row.sigma_max = sv.sigma_max;
    row.lyap = control::lyapunov_monitor(st.beta, st.s, nets_, hist_, taus_, t_, gains_);
    update_monitors(st, y_);
    return row;
}

void Simulation::update_monitors(const control::ControlState& st, std::span<const double>) {
    const int n = static_cast<int>(agents_.size());
    for (int i = 0; i < n; ++i) {
        monitors_.max_position = std::max(monitors_.max_position, agents_[i].p.norm());
        monitors_.max_velocity = std::max(monitors_.max_velocity, agents_[i].v.norm());
        monitors_.max_weight_norm[i] = std::max(monitors_.max_weight_norm[i], nets_[i].weights().norm());
        monitors_.max_s_norm = std::max(monitors_.max_s_norm, st.s[i].norm());
    }
    const auto sv = rigid::normalized_singular_value_bounds(graph_, fw_.positions);
    const double eps = 1e-12;
    if (sv.sigma_min > std::sqrt(2.0) + eps || sv.sigma_max > std::sqrt(2.0 * n - 2.0) + eps) {
        ++monitors_.sigma_bound_violations;
    }
    if (cfg_.k_v * sv.sigma_min < 0.5 * gains_.min_Gamma()) ++monitors_.kv_sigma_violations;

    if (t_ >= next_lyapunov_sample_ - 0.25 * cfg_.integrator.dt) {
        const auto lyap = control::lyapunov_monitor(st.beta, st.s, nets_, hist_, taus_, t_, gains_);
        monitors_.lyapunov_samples.emplace_back(t_, lyap.total());
        next_lyapunov_sample_ += 0.5;
    }
    const auto& lim = cfg_.limits;
    for (int i = 0; i < n; ++i) {
        if (agents_[i].p.norm() > lim.position || agents_[i].v.norm() > lim.velocity ||
            nets_[i].weights().norm() > lim.weight) {
            monitors_.ceilings_exceeded = true;
        }
    }
}

void Simulation::step() {
    const double dt = cfg_.integrator.dt;
    if (!k1_ready_) {
        pack(y_);
        ws_.resize(y_.size());
        control::ControlState st;
        rhs(t_, y_, ws_.k1, &st);
        update_monitors(st, y_);
    }
    k1_ready_ = false;

    const Rhs f = [this](double t, std::span<const double> y, std::span<double> dy) { rhs(t, y, dy, nullptr); };
    try {
        rk4_step(f, t_, dt, y_, y_next_, ws_, true);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::InvalidInput && e.kind() != ErrorKind::DegenerateEdge) throw;
        throw Error(ErrorKind::Divergence, snapshot(t_, agents_) + " (" + e.what() + ")");
    }
    const double ceiling = cfg_.limits.divergence;
    const bool bad = std::any_of(y_next_.begin(), y_next_.end(),
                                 [ceiling](double v) { return !std::isfinite(v) || std::abs(v) > ceiling; });
    if (bad) throw Error(ErrorKind::Divergence, snapshot(t_, agents_));

    ++step_;
    t_ = static_cast<double>(step_) * dt;
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        const double* a = y_next_.data() + i * stride_;
        agents_[i] = {{a[0], a[1]}, {a[2], a[3]}};
        std::copy_n(a + 4, stride_ - 4, nets_[i].weights().data());
        hist_[i].push(t_, agents_[i], dynamics::upsilon_sq(agents_[i], params_[i]));
    }
}

SimulationTrace run_scenario(const ScenarioConfig& cfg, ControllerKind kind) {
    SimulationTrace tr;
    tr.controller = kind;
    tr.agents = cfg.vertex_count;
    tr.edges = cfg.graph().edges();
    tr.dt = cfg.integrator.dt;
    if (!(cfg.integrator.t_end > 0.0)) return tr;

    const long steps = std::lround(cfg.integrator.t_end / cfg.integrator.dt);
    const long every = std::max(1, cfg.output.decimation);
    Simulation sim(cfg, kind);
    try {
        for (long n = 0;; ++n) {
            if (n % every == 0 || n == steps) {
                tr.rows.push_back(sim.observe());
                if (cfg.output.write_weights) {
                    WeightSnapshot snap{sim.time(), {}};
                    for (const auto& net : sim.networks()) snap.weights.push_back(net.weights());
                    tr.weights.push_back(std::move(snap));
                }
            }
            if (n == steps) break;
            sim.step();
        }
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::Divergence) throw;
        tr.diverged = true;
        tr.divergence_message = e.what();
    }
    tr.monitors = sim.monitors();
    double min_kappa = std::numeric_limits<double>::infinity();
    for (const auto& a : cfg.agents) min_kappa = std::min(min_kappa, a.gains.adapt.kappa);
    const double eta = static_cast<double>(std::max(cfg.rbf.neurons, 1));
    tr.monitors.weight_bound = std::sqrt(eta) * tr.monitors.max_s_norm / min_kappa;
    return tr;
}

std::vector<SimulationTrace> run_batch(const std::vector<ScenarioConfig>& configs, ControllerKind kind,
                                       unsigned threads) {
    std::vector<SimulationTrace> out(configs.size());
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(configs.size())));
    std::vector<std::future<void>> jobs;
    for (unsigned w = 0; w < workers; ++w) {
        jobs.push_back(std::async(std::launch::async, [&, w] {
            for (std::size_t k = w; k < configs.size(); k += workers) out[k] = run_scenario(configs[k], kind);
        }));
    }
    for (auto& j : jobs) j.get();
    return out;
}

}  // namespace nafc::sim
