#include "doctest.h"
#include "oracles.hpp"

#include "nafc/formation_controller.hpp"

#include <cmath>
#include <random>

using namespace nafc;
using namespace nafc::control;

namespace {

rigid::Framework square(double scale) {
    rigid::FormationGraph g(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {0, 2}}, {1, 1, 1, 1, std::sqrt(2.0)});
    return {g, {{0, 0}, {scale, 0}, {scale, scale}, {0, scale}}};
}

ControllerGains gains_for(int n) {
    ControllerGains g;
    g.agents.assign(static_cast<std::size_t>(n), AgentGains{});
    return g;
}

rigid::Framework with_desired(const oracle::RandomFramework& f, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> jitter(0.7, 1.3);
    std::vector<double> d;
    for (const auto& e : f.edges) d.push_back((f.positions[e.i] - f.positions[e.j]).norm() * jitter(rng));
    return {rigid::FormationGraph(f.n, f.edges, d), f.positions};
}

}  // namespace

TEST_CASE("distance errors") {
    const auto sq = square(1.1);
    const auto beta = distance_errors(sq);
    for (int k = 0; k < 5; ++k) CHECK(beta[k] == doctest::Approx(0.1 * sq.graph.desired_distance(k)).epsilon(1e-12));
    // Scaling the whole formation by k scales every error to (k - 1) d.
    const auto fw = square(1.0);
    CHECK(distance_errors(fw).cwiseAbs().maxCoeff() < 1e-15);
    rigid::Framework big = fw;
    for (auto& p : big.positions) p *= 3.0;
    const auto b3 = distance_errors(big);
    for (int k = 0; k < 5; ++k) CHECK(b3[k] == doctest::Approx(2.0 * fw.graph.desired_distance(k)).epsilon(1e-12));

    rigid::Framework clash = fw;
    clash.positions[1] = clash.positions[0];
    CHECK_THROWS_AS(distance_errors(clash), Error);
}

TEST_CASE("distance error rate") {
    rigid::Framework fw{rigid::FormationGraph(2, {{0, 1}}, {1.0}), {{0, 0}, {1, 0}}};
    const std::vector<Vec2> v{{-1, 0}, {0, 0}};
    const auto beta = distance_errors(fw);
    CHECK(distance_error_rates(fw, v, beta)[0] == 1.0);
    const std::vector<Vec2> tangential{{0, 1}, {0, 0}};
    CHECK(distance_error_rates(fw, tangential, beta)[0] == 0.0);
}

TEST_CASE("per-agent s matches the stacked virtual velocity") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-2, 2);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 3 + trial % 6;
        const auto fw = with_desired(oracle::henneberg(n, rng), rng);
        auto g = gains_for(n);
        g.k_v = 1.0 + std::abs(u(rng)) * 5.0;
        g.k_r = std::abs(u(rng)) * 3.0;
        std::vector<Vec2> v;
        for (int i = 0; i < n; ++i) v.push_back({u(rng), u(rng)});
        const Vec2 e_r(u(rng), u(rng)), v_r(u(rng), u(rng));
        const auto beta = distance_errors(fw);
        const auto nu = virtual_velocity(fw, beta, e_r, v_r, g);
        for (int i = 0; i < n; ++i) {
            const Vec2 s = compute_s(i, fw, v, beta, e_r, v_r, g);
            const Vec2 stacked = v[i] - nu.segment<2>(2 * i);
            worst = std::max(worst, (s - stacked).cwiseAbs().maxCoeff());
        }
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("gamma special cases") {
    const auto fw = square(1.2);
    auto g = gains_for(4);
    const std::vector<Vec2> still(4, Vec2::Zero());
    const auto beta = distance_errors(fw);
    const Eigen::VectorXd beta_dot = Eigen::VectorXd::Zero(5);

    // At rest only the robust term remains.
    const Vec2 s(0.02, -0.5);
    Vec2 gam = compute_gamma(1, fw, still, beta, beta_dot, Vec2::Zero(), s, g);
    CHECK(gam.x() == doctest::Approx(-3.0 * std::tanh(2.0)).epsilon(1e-14));
    CHECK(gam.y() == doctest::Approx(-3.0 * std::tanh(-50.0)).epsilon(1e-14));

    g.eps_sgn = 0.0;
    gam = compute_gamma(1, fw, still, beta, beta_dot, Vec2(0.5, -0.25), Vec2::Zero(), g);
    CHECK(gam == Vec2(1.5, -0.75));
    CHECK(smoothed_sign(Vec2(-2.0, 0.0), 0.0) == Vec2(-1.0, 0.0));
}

TEST_CASE("gamma coupling term is the time derivative of the coupling") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 3 + trial % 5;
        const auto fw = with_desired(oracle::henneberg(n, rng), rng);
        auto g = gains_for(n);
        g.b = 0.0;
        g.k_v = 1.0;
        std::vector<Vec2> v;
        for (int i = 0; i < n; ++i) v.push_back({u(rng), u(rng)});
        const auto beta = distance_errors(fw);
        const auto beta_dot = distance_error_rates(fw, v, beta);

        const double h = 1e-6;
        auto shifted = [&](double dt) {
            rigid::Framework m = fw;
            for (int i = 0; i < n; ++i) m.positions[i] += dt * v[i];
            return m;
        };
        const auto fp = shifted(h), fm = shifted(-h);
        const Eigen::VectorXd bp = distance_errors(fp), bm = distance_errors(fm);
        CHECK(((bp - bm) / (2 * h) - beta_dot).cwiseAbs().maxCoeff() < 1e-6);
        for (int i = 0; i < n; ++i) {
            const Vec2 fd = (formation_coupling(i, fp, bp) - formation_coupling(i, fm, bm)) / (2 * h);
            const Vec2 gam = compute_gamma(i, fw, v, beta, beta_dot, Vec2::Zero(), Vec2::Zero(), g);
            CHECK((gam + fd).cwiseAbs().maxCoeff() < 1e-6);
        }
    }
}

TEST_CASE("adaptive gain") {
    AgentGains ag;
    CHECK(compute_gain_c(Vec2(1, 0), 0.0, ag, 200.0) == 102.0);
    CHECK(gain_floor(ag, 200.0) == 102.0);
    CHECK(compute_gain_c(Vec2(1, 0), 2.0, ag, 200.0) == 104.0);
    CHECK(compute_gain_c(Vec2(0, 0.5), 0.5, ag, 200.0) == doctest::Approx(2.0 * (1.0 + 1.0 + 50.0)));

    // Constant Upsilon^2 = q over the whole window gives I = q tau_M.
    dynamics::HistoryBuffer h(64, 0.0, {}, 3.0);
    for (int k = 1; k <= 40; ++k) h.push(0.01 * k, {}, 3.0);
    ControllerGains g = gains_for(1);
    const double c = compute_gain_c(Vec2(0.3, 0.4), h, 0.4, ag, g);
    CHECK(c == doctest::Approx(2.0 * (3.0 * 0.2 / (2.0 * 0.25) + 1.0 + 50.0)).epsilon(1e-12));
    CHECK(c >= gain_floor(ag, g.k_c));
    // Past the newest sample the window closes with the supplied value.
    CHECK(delay_window_integral(h, 0.45, 0.2, 3.0) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK_THROWS_AS(delay_window_integral(h, 0.45, 0.2), Error);
}

TEST_CASE("control input") {
    const auto fw = square(1.0);
    auto g = gains_for(4);
    const auto beta = distance_errors(fw);
    nn::RbfNetwork net = nn::RbfNetwork::lattice({});
    const dynamics::AgentState x{fw.positions[2], Vec2(0.1, 0.2)};

    // Inside the dead zone the input is exactly zero.
    const Vec2 tiny(g.agents[2].o / 2, 0.0);
    CHECK(control_input(2, tiny, x, fw, beta, net, 102.0, Vec2(5, 5), 9.0, g) == Vec2::Zero());

    // Zero weights, zero errors, zero gamma, zero Upsilon: pure damping.
    const Vec2 s(0.3, -0.4);
    CHECK(control_input(2, s, x, fw, beta, net, 102.0, Vec2::Zero(), 0.0, g) == -102.0 * s);

    // Doubling g_lower halves every term except -c s.
    net.weights().setConstant(0.7);
    rigid::Framework off = fw;
    off.positions[2] += Vec2(0.05, -0.02);
    const auto b2 = distance_errors(off);
    const Vec2 gam(0.3, 0.1);
    const Vec2 u1 = control_input(2, s, x, off, b2, net, 50.0, gam, 1.5, g) + 50.0 * s;
    g.agents[2].g_lower = 2.0;
    const Vec2 u2 = control_input(2, s, x, off, b2, net, 50.0, gam, 1.5, g) + 50.0 * s;
    CHECK((u2 - 0.5 * u1).norm() < 1e-12);

    // The two coupling forms differ only in the sign of coupling and gamma.
    g.agents[2].g_lower = 1.0;
    g.coupling = CouplingForm::Printed;
    const Vec2 up = control_input(2, s, x, off, b2, net, 50.0, gam, 1.5, g) + 50.0 * s;
    const Vec2 diff = up - u1;
    const Vec2 expect = 2.0 * (formation_coupling(2, off, b2) - gam);
    CHECK((diff - expect).norm() < 1e-12);
}

TEST_CASE("Lyapunov monitor") {
    Eigen::VectorXd beta(1);
    beta << 0.5;
    std::vector<Vec2> s{{0.0, 0.0}};
    std::vector<nn::RbfNetwork> nets{nn::RbfNetwork::lattice({})};
    std::vector<dynamics::HistoryBuffer> hist{dynamics::HistoryBuffer(64, 0.0, {}, 2.0)};
    for (int k = 1; k <= 30; ++k) hist[0].push(0.01 * k, {}, 2.0);
    const std::vector<double> taus{0.2};
    auto g = gains_for(1);
    auto m = lyapunov_monitor(beta, s, nets, hist, taus, 0.3, g);
    CHECK(m.M1 == 0.125);
    CHECK(m.M2 == 0.0);
    CHECK(m.M3 == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(m.W_term == 0.0);
    nets[0].weights().setConstant(1.0);
    s[0] = Vec2(1.0, 1.0);
    m = lyapunov_monitor(beta, s, nets, hist, taus, 0.3, g);
    CHECK(m.M2 == 1.0);
    CHECK(m.W_term == doctest::Approx(0.5 * 18.0 / 10.0));
}

TEST_CASE("errors and coupling are translation and rotation invariant") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 3 + trial % 6;
        const auto fw = with_desired(oracle::henneberg(n, rng), rng);
        const auto beta = distance_errors(fw);
        rigid::Framework moved = fw;
        const double th = 0.7 * trial;
        Eigen::Matrix2d rot;
        rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
        for (auto& p : moved.positions) p = rot * p + Vec2(10.0, -4.0);
        const auto b2 = distance_errors(moved);
        CHECK((b2 - beta).cwiseAbs().maxCoeff() < 1e-12);
        for (int i = 0; i < n; ++i) {
            const Vec2 a = rot * formation_coupling(i, fw, beta);
            CHECK((formation_coupling(i, moved, b2) - a).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}
