#pragma once

#include "nafc/common.hpp"
#include "nafc/dynamics.hpp"
#include "nafc/formation_controller.hpp"
#include "nafc/rbf_network.hpp"
#include "nafc/rigid_graph.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace nafc {

inline constexpr int kSchemaVersion = 1;

struct IntegratorSettings {
    double dt = 1e-3;
    double t_end = 30.0;
};

struct BaselineGains {
    double k_p = 15.0;
    double k_d = 8.0;
};

/// Ceilings for the boundedness monitors; crossing `divergence` aborts a run.
struct MonitorLimits {
    double position = 1e3;
    double velocity = 1e3;
    double weight = 1e3;
    double lyapunov = 1e6;
    double divergence = 1e6;
};

/// Settling thresholds used when judging a benchmark run.
struct SettlingChecks {
    double settle_time = 20.0;
    double zeta_max = 0.05;
    double tracking_max = 0.1;
    double sigma_tolerance = 0.05;
};

struct OutputSettings {
    int decimation = 1;        // keep every n-th integrator step in the trace
    bool write_weights = false;
};

struct AgentConfig {
    dynamics::AgentParams params;
    dynamics::AgentState initial;
    control::AgentGains gains;
};

/// Everything needed to reproduce one run. Vertex indices are 0-based here;
/// the file format is 1-based.
struct ScenarioConfig {
    int schema_version = kSchemaVersion;
    std::string name = "scenario";

    int vertex_count = 0;
    std::vector<rigid::Edge> edges;
    std::vector<double> desired_distances;
    double distance_bound = 10.0;
    std::vector<Vec2> reference_shape;  // a realization of the desired distances
    bool allow_non_rigid = false;

    std::vector<AgentConfig> agents;
    double k_v = 15.0;
    double k_r = 3.0;
    double b = 3.0;
    double k_c = 200.0;
    double eps_sgn = 0.01;
    double tau_M = 0.2;
    control::CouplingForm coupling = control::CouplingForm::Derived;

    nn::LatticeSpec rbf;
    dynamics::TargetTrajectory target = dynamics::TargetTrajectory::benchmark();
    IntegratorSettings integrator;
    BaselineGains baseline;
    MonitorLimits limits;
    SettlingChecks checks;
    OutputSettings output;

    rigid::FormationGraph graph() const;
    control::ControllerGains controller_gains() const;
    std::vector<dynamics::AgentParams> agent_params() const;
};

/// The four-agent square benchmark with the published parameter table,
/// initial conditions, delays, and gains.
ScenarioConfig benchmark_scenario();

/// JSON text, two-space indent, fixed key order, trailing newline. Parsing
/// the result and serializing again gives the same bytes.
std::string to_json(const ScenarioConfig& cfg);

/// Accepts `//` and `/* */` comments. Unknown keys are rejected. Throws
/// Error(Config) naming the line or the offending field.
ScenarioConfig parse_config(std::string_view text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Every violated constraint, one message each; empty means valid.
std::vector<std::string> validate(const ScenarioConfig& cfg);

/// Standalone framework file: {"schema_version", "vertex_count", "edges",
/// "positions", optional "desired_distances"}.
rigid::Framework parse_framework(std::string_view text);
rigid::Framework load_framework(const std::filesystem::path& path);
std::string framework_to_json(const rigid::Framework& fw);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace nafc
