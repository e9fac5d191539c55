#include "doctest.h"

#include "nafc/scenario_config.hpp"

#include <algorithm>
#include <string>

using namespace nafc;

namespace {

std::string source(const char* rel) { return std::string(NAFC_SOURCE_DIR) + "/" + rel; }

bool any_contains(const std::vector<std::string>& msgs, const std::string& needle) {
    return std::any_of(msgs.begin(), msgs.end(), [&](const std::string& m) { return m.find(needle) != std::string::npos; });
}

std::string config_error(const std::string& text) {
    try {
        parse_config(text);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Config);
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("serialization round trip is byte identical") {
    const std::string a = to_json(benchmark_scenario());
    const std::string b = to_json(parse_config(a));
    CHECK(a == b);
    CHECK(a.back() == '\n');

    auto cfg = benchmark_scenario();
    cfg.coupling = control::CouplingForm::Printed;
    cfg.target = dynamics::TargetTrajectory::piecewise({{0.0, 5.0, {0.1, 0.2}, {0.0, 0.0, 0.01}}});
    cfg.rbf.seed = 17;
    cfg.output.write_weights = true;
    const std::string c = to_json(cfg);
    CHECK(to_json(parse_config(c)) == c);
}

TEST_CASE("shipped benchmark file") {
    const auto cfg = load_config(source("configs/benchmark.json"));
    CHECK(validate(cfg).empty());
    CHECK(to_json(cfg) == to_json(benchmark_scenario()));
    CHECK(cfg.vertex_count == 4);
    CHECK(cfg.edges.size() == 5);
    CHECK(cfg.agents[1].params.tau == 0.18);

    const auto wide = load_config(source("configs/benchmark_wide_deadzone.json"));
    CHECK(validate(wide).empty());
    CHECK(wide.agents[0].gains.o == 0.1);
}

TEST_CASE("parse errors name the line or the field") {
    std::string text = to_json(benchmark_scenario());
    std::string bad = text;
    bad.insert(bad.find("\"controller\""), "\"bogus\": 1,\n  ");
    CHECK(config_error(bad).find("bogus: unknown key") != std::string::npos);

    bad = text;
    bad.replace(bad.find("\"schema_version\": 1"), 19, "\"schema_version\": 2");
    CHECK(config_error(bad).find("schema_version") != std::string::npos);

    const std::string msg = config_error("{\n \"schema_version\": 1,\n oops\n}");
    CHECK(msg.find("line 3") == 0);

    // Third agent's delay replaced by a string.
    bad = text;
    std::size_t at = bad.find("\"agents\"");
    for (int k = 0; k < 3; ++k) at = bad.find("\"tau\": ", at + 1);
    const std::size_t value = at + 7;
    bad.replace(value, bad.find_first_of(",\n}", value) - value, "\"slow\"");
    CHECK(config_error(bad) == "agents[2].params.tau: expected a number");

    CHECK(config_error("// only a comment\n{}").find("schema_version") != std::string::npos);
}

TEST_CASE("validation lists every violated constraint") {
    auto cfg = benchmark_scenario();
    cfg.edges.pop_back();
    cfg.desired_distances.pop_back();
    cfg.reference_shape.clear();
    auto v = validate(cfg);
    CHECK(any_contains(v, "not minimally rigid: |E|=4 ≠ 2N−3=5"));

    cfg = benchmark_scenario();
    cfg.b = 1.0;
    cfg.agents[1].params.tau = 0.5;
    cfg.k_v = -1.0;
    v = validate(cfg);
    CHECK(any_contains(v, "b < √(2N)·sup‖v̇_r‖ = 2.828"));
    CHECK(any_contains(v, "delay bound: tau of agent 2 = 0.5 exceeds tau_M = 0.2"));
    CHECK(any_contains(v, "gain positivity: k_v"));
    CHECK(v.size() >= 3);

    cfg = benchmark_scenario();
    cfg.integrator.dt = 0.05;
    CHECK(any_contains(validate(cfg), "step size: dt = 0.05 exceeds tau_min/4 = 0.025"));

    cfg = benchmark_scenario();
    cfg.agents[2].initial.p = cfg.agents[0].initial.p;
    CHECK(any_contains(validate(cfg), "initial framework:"));

    cfg = benchmark_scenario();
    cfg.agents.pop_back();
    CHECK(any_contains(validate(cfg), "agent count"));

    cfg = benchmark_scenario();
    cfg.edges[0] = {0, 0};
    CHECK(any_contains(validate(cfg), "graph invariants:"));

    cfg = benchmark_scenario();
    for (auto& a : cfg.agents) a.initial.p = Vec2(static_cast<double>(&a - cfg.agents.data()), 0.0);
    CHECK(any_contains(validate(cfg), "not infinitesimally rigid at t=0"));
}

TEST_CASE("framework files") {
    const auto fw = load_framework(source("configs/square_framework.json"));
    CHECK(fw.graph.vertex_count() == 4);
    CHECK(fw.graph.edge_count() == 5);
    CHECK(fw.positions[2] == Vec2(1, 1));
    CHECK(fw.graph.desired_distance(1) == doctest::Approx(std::sqrt(2.0)));

    const std::string text = framework_to_json(fw);
    CHECK(framework_to_json(parse_framework(text)) == text);

    CHECK_THROWS_AS(parse_framework("{\"schema_version\": 1, \"vertex_count\": 2, \"edges\": [[1, 3]], "
                                    "\"positions\": [[0, 0], [1, 0]]}"),
                    Error);
    CHECK_THROWS_AS(load_config(source("configs/does_not_exist.json")), std::exception);
}
