#include "doctest.h"
#include "oracles.hpp"

#include "nafc/scenario_config.hpp"
#include "nafc/sim_engine.hpp"

#include <cmath>
#include <numbers>

using namespace nafc;
using namespace nafc::sim;

namespace {

double rk4_decay_error(double dt) {
    const Rhs f = [](double, std::span<const double> y, std::span<double> dy) { dy[0] = -y[0]; };
    Rk4Workspace ws;
    std::vector<double> y{1.0}, next{0.0};
    const int n = static_cast<int>(std::lround(1.0 / dt));
    for (int k = 0; k < n; ++k) {
        rk4_step(f, k * dt, dt, y, next, ws);
        y = next;
    }
    return std::abs(y[0] - std::exp(-1.0));
}

ScenarioConfig short_benchmark(double t_end) {
    ScenarioConfig cfg = benchmark_scenario();
    cfg.integrator.dt = 1e-3;
    cfg.integrator.t_end = t_end;
    cfg.output.decimation = 10;
    return cfg;
}

}  // namespace

TEST_CASE("RK4 is fourth order") {
    const double e1 = rk4_decay_error(0.1);
    const double e2 = rk4_decay_error(0.05);
    CHECK(e1 / e2 >= 14.0);
    CHECK(rk4_decay_error(0.01) < 1e-9);
}

TEST_CASE("RK4 with precomputed first stage gives the same step") {
    const Rhs f = [](double t, std::span<const double> y, std::span<double> dy) {
        dy[0] = y[1];
        dy[1] = -std::sin(y[0]) + std::cos(t);
    };
    Rk4Workspace wa, wb;
    std::vector<double> y{0.3, -0.2}, a(2), b(2);
    rk4_step(f, 0.4, 0.01, y, a, wa);
    wb.resize(2);
    f(0.4, y, wb.k1);
    rk4_step(f, 0.4, 0.01, y, b, wb, true);
    CHECK(a == b);
}

TEST_CASE("pure delay equation through the history buffer") {
    // x' = -x(t - tau), x = 1 on [-tau, 0]; compared with the method of steps.
    const double tau = 0.5, dt = 1e-4;
    dynamics::HistoryBuffer hist(dynamics::HistoryBuffer::capacity_for(tau, dt), 0.0, {{1.0, 0.0}, {0.0, 0.0}});
    const Rhs f = [&](double t, std::span<const double>, std::span<double> dy) {
        dy[0] = -hist.lookup(t - tau).p.x();
    };
    Rk4Workspace ws;
    std::vector<double> y{1.0}, next{0.0};
    double worst = 0.0;
    const int n = static_cast<int>(std::lround(2.0 * tau / dt));
    for (int k = 0; k < n; ++k) {
        const double t = k * dt;
        rk4_step(f, t, dt, y, next, ws);
        y = next;
        hist.push((k + 1) * dt, {{y[0], 0.0}, {0.0, 0.0}});
        worst = std::max(worst, std::abs(y[0] - oracle::pure_delay_solution((k + 1) * dt, tau)));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("zero dynamics keep a constant state") {
    const Rhs f = [](double, std::span<const double>, std::span<double> dy) { std::fill(dy.begin(), dy.end(), 0.0); };
    Rk4Workspace ws;
    std::vector<double> y{1.5, -2.0, 3.25}, next(3);
    for (int k = 0; k < 100; ++k) {
        rk4_step(f, k * 0.01, 0.01, y, next, ws);
        y = next;
    }
    CHECK(y == std::vector<double>{1.5, -2.0, 3.25});
}

TEST_CASE("displacement baseline by hand") {
    rigid::FormationGraph g(2, {{0, 1}}, {1.0});
    const std::vector<Vec2> shape{{0, 0}, {-1, 0}};
    const auto off = edge_offsets(g, shape);
    REQUIRE(off.size() == 1);
    CHECK(off[0] == Vec2(1, 0));

    const std::vector<Vec2> p{{0, 0}, {-2, 0}};
    const std::vector<Vec2> v{{0, 0}, {0, 0}};
    const dynamics::TargetSample at_leader{{0, 0}, {0, 0}, {0, 0}};
    auto u = displacement_baseline_control(g, p, v, off, at_leader, {1.0, 0.0});
    CHECK(u[0] == Vec2(-1, 0));
    CHECK(u[1] == Vec2(1, 0));

    const std::vector<Vec2> vel{{1, 0}, {0, 2}};
    u = displacement_baseline_control(g, p, vel, off, at_leader, {0.0, 2.0});
    CHECK(u[0] == Vec2(-2, 4) + Vec2(-2, 0));
    CHECK(u[1] == Vec2(2, -4));
}

TEST_CASE("a rotated square satisfies the distances but not the displacements") {
    const auto cfg = benchmark_scenario();
    const auto g = cfg.graph();
    const auto off = edge_offsets(g, cfg.reference_shape);
    std::vector<Vec2> p;
    const double th = std::numbers::pi / 4;
    Eigen::Matrix2d rot;
    rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    for (const auto& q : cfg.reference_shape) p.push_back(rot * q);
    CHECK(ade(g, p) < 1e-12);

    const std::vector<Vec2> v(4, Vec2::Zero());
    const dynamics::TargetSample tgt{p[0], {0, 0}, {0, 0}};
    const auto u = displacement_baseline_control(g, p, v, off, tgt, cfg.baseline);
    double total = 0.0;
    for (const auto& ui : u) total += ui.norm();
    CHECK(total > 1.0);

    std::vector<Vec2> exact(cfg.reference_shape.begin(), cfg.reference_shape.end());
    const dynamics::TargetSample tgt0{exact[0], {0, 0}, {0, 0}};
    for (const auto& ui : displacement_baseline_control(g, exact, v, off, tgt0, cfg.baseline)) {
        CHECK(ui.norm() < 1e-12);
    }
}

TEST_CASE("average distance error") {
    rigid::FormationGraph g(3, {{0, 1}, {1, 2}}, {1.0, 1.0});
    const std::vector<Vec2> p{{0, 0}, {1.05, 0}, {1.05, 0.97}};
    CHECK(ade(g, p) == doctest::Approx(0.04).epsilon(1e-12));
}

TEST_CASE("runs are deterministic") {
    const auto cfg = short_benchmark(1.0);
    const auto a = run_scenario(cfg);
    const auto b = run_scenario(cfg);
    REQUIRE(a.rows.size() == b.rows.size());
    REQUIRE(a.rows.size() == 101);
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
        CHECK(a.rows[k].t == b.rows[k].t);
        for (int i = 0; i < 4; ++i) {
            CHECK(a.rows[k].p[i] == b.rows[k].p[i]);
            CHECK(a.rows[k].u[i] == b.rows[k].u[i]);
        }
    }
    const auto batch = run_batch({cfg, cfg}, ControllerKind::NeuroAdaptive, 2);
    CHECK(batch[1].rows.back().p[3] == a.rows.back().p[3]);
}

TEST_CASE("monitors on a short benchmark run") {
    const auto tr = run_scenario(short_benchmark(2.0));
    const auto graph = benchmark_scenario().graph();
    CHECK_FALSE(tr.diverged);
    CHECK(tr.monitors.sigma_bound_violations == 0);
    CHECK(tr.monitors.dead_zone_violations == 0);
    CHECK(tr.monitors.delay_bound_violations == 0);
    // The input gain dips below 1 on this plant, so the g_lower flag is
    // informational; the gain itself never reaches zero.
    for (double g : tr.monitors.min_g_entry) CHECK(g > 0.0);
    CHECK(tr.monitors.gains_at_start.b_ok);
    CHECK(tr.monitors.gains_at_start.b_required == doctest::Approx(std::sqrt(8.0)));
    CHECK(tr.monitors.lyapunov_samples.size() >= 4);
    for (const auto& row : tr.rows) {
        CHECK(row.sigma_min <= std::sqrt(2.0) + 1e-12);
        CHECK(row.sigma_max <= std::sqrt(6.0) + 1e-12);
        CHECK(row.zeta == ade(graph, row.p));
    }
    CHECK(tr.rows.front().t == 0.0);
    CHECK(tr.rows.back().t == doctest::Approx(2.0));
}

TEST_CASE("zero horizon records nothing") {
    auto cfg = short_benchmark(0.0);
    const auto tr = run_scenario(cfg);
    CHECK(tr.rows.empty());
    CHECK_FALSE(tr.diverged);
}

TEST_CASE("divergence is reported, not thrown") {
    auto cfg = short_benchmark(1.0);
    cfg.limits.divergence = 0.5;
    SimulationTrace tr;
    CHECK_NOTHROW(tr = run_scenario(cfg));
    CHECK(tr.diverged);
    CHECK_FALSE(tr.divergence_message.empty());
    CHECK(tr.rows.size() == 1);
}

TEST_CASE("baseline run keeps the same trace layout") {
    const auto cfg = short_benchmark(0.5);
    const auto tr = run_scenario(cfg, ControllerKind::DisplacementBaseline);
    CHECK(tr.controller == ControllerKind::DisplacementBaseline);
    CHECK(controller_name(tr.controller) == "displacement_baseline");
    CHECK(tr.rows.size() == 51);
    CHECK(tr.monitors.dead_zone_violations == 0);
}
