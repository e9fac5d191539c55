// nafc: validate, run, compare, and inspect formation-control scenarios.
//
// Exit codes: 0 success, 1 I/O or usage problem, 2 invalid input, 3 divergence.

#include "nafc/report.hpp"
#include "nafc/rigid_graph.hpp"
#include "nafc/scenario_config.hpp"
#include "nafc/sim_engine.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace nafc;

namespace {

constexpr int kOk = 0;
constexpr int kIo = 1;
constexpr int kInvalid = 2;
constexpr int kDiverged = 3;

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<double> dt;
    std::optional<double> t_end;
    std::string baseline_gains;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--seed", o.seed, "RBF lattice seed");
    cmd->add_option("--dt", o.dt, "integrator step");
    cmd->add_option("--t-end", o.t_end, "simulation horizon");
    cmd->add_option("--baseline-gains", o.baseline_gains, "displacement baseline gains as kp,kd");
}

ScenarioConfig load_with_overrides(const std::string& path, const Overrides& o) {
    ScenarioConfig cfg = load_config(path);
    if (o.seed) cfg.rbf.seed = *o.seed;
    if (o.dt) cfg.integrator.dt = *o.dt;
    if (o.t_end) cfg.integrator.t_end = *o.t_end;
    if (!o.baseline_gains.empty()) {
        double kp = 0, kd = 0;
        char comma = 0;
        std::istringstream in(o.baseline_gains);
        in.imbue(std::locale::classic());
        if (!(in >> kp >> comma >> kd) || comma != ',' || !in.eof()) {
            throw Error(ErrorKind::Config, "--baseline-gains expects kp,kd");
        }
        cfg.baseline = {kp, kd};
    }
    return cfg;
}

bool report_violations(const ScenarioConfig& cfg) {
    const auto v = validate(cfg);
    for (const auto& msg : v) std::cerr << "violation: " << msg << "\n";
    return v.empty();
}

bool prepare_out_dir(const fs::path& dir, bool overwrite) {
    if (fs::exists(dir) && !fs::is_empty(dir) && !overwrite) {
        std::cerr << "error: " << dir.string() << " is not empty; pass --overwrite to replace its files\n";
        return false;
    }
    fs::create_directories(dir);
    return true;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fixed(double x, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

int cmd_validate(const std::string& config, const Overrides& o) {
    const ScenarioConfig cfg = load_with_overrides(config, o);
    if (!report_violations(cfg)) return kInvalid;
    std::cout << "ok: " << cfg.name << "\n";
    return kOk;
}

int cmd_run(const std::string& config, const fs::path& out, bool overwrite, const Overrides& o) {
    const ScenarioConfig cfg = load_with_overrides(config, o);
    if (!report_violations(cfg)) return kInvalid;
    if (!prepare_out_dir(out, overwrite)) return kIo;

    const auto t0 = std::chrono::steady_clock::now();
    const auto trace = sim::run_scenario(cfg);
    const double wall = seconds_since(t0);
    report::write_run_outputs(out, cfg, trace, wall);

    const auto s = report::summarize(trace, cfg);
    std::cout << cfg.name << ": " << s.rows << " rows, final zeta " << fixed(s.final_zeta, 6) << ", max |e_r| after "
              << s.settle_time << " s " << fixed(s.max_tracking_settled, 6) << ", wall " << fixed(wall, 2) << " s\n";
    if (trace.diverged) {
        std::cerr << "diverged: " << trace.divergence_message << "\n";
        return kDiverged;
    }
    return kOk;
}

int cmd_compare(const std::string& config, const fs::path& out, bool overwrite, bool self_compare,
                const Overrides& o) {
    const ScenarioConfig cfg = load_with_overrides(config, o);
    if (!report_violations(cfg)) return kInvalid;
    if (cfg.reference_shape.empty() && !self_compare) {
        std::cerr << "violation: baseline: config has no graph.reference_shape\n";
        return kInvalid;
    }
    if (!prepare_out_dir(out, overwrite)) return kIo;

    const auto distance = sim::run_scenario(cfg, sim::ControllerKind::NeuroAdaptive);
    const auto baseline =
        self_compare ? distance : sim::run_scenario(cfg, sim::ControllerKind::DisplacementBaseline);
    const auto summary = report::compare_traces(distance, baseline, cfg);
    report::write_compare_outputs(out, distance, baseline, summary);

    std::cout << "settled zeta (mean of last 5 s): distance " << fixed(summary.distance.mean_zeta_last5, 6)
              << ", baseline " << fixed(summary.baseline.mean_zeta_last5, 6) << ", delta "
              << fixed(summary.settled_delta, 6) << "\n";
    if (distance.diverged || baseline.diverged) {
        if (distance.diverged) std::cerr << "distance run diverged: " << distance.divergence_message << "\n";
        if (baseline.diverged) std::cerr << "baseline run diverged: " << baseline.divergence_message << "\n";
        return kDiverged;
    }
    return kOk;
}

int cmd_check_rigidity(const std::string& file) {
    const rigid::Framework fw = load_framework(file);
    const int n = fw.graph.vertex_count();
    const int m = fw.graph.edge_count();
    const auto rep = rigid::check_minimal_rigidity(fw);
    std::cout << "|E| = " << m << ", 2N-3 = " << 2 * n - 3 << "\n";
    std::cout << "Laman: " << (rep.is_laman ? "yes" : "no") << ", rank " << rep.rank << "/" << rep.required_rank;
    if (m == 0) {
        std::cout << "\n";
    } else {
        const auto sv = rigid::normalized_singular_value_bounds(fw.graph, fw.positions);
        const double upper_min = std::sqrt(2.0);
        const double upper_max = std::sqrt(2.0 * n - 2.0);
        std::cout << ", σ_min " << fixed(sv.sigma_min) << " ≤ " << fixed(upper_min) << "\n";
        std::cout << "σ_max " << fixed(sv.sigma_max) << " ≤ " << fixed(upper_max) << " (Gershgorin)\n";
        std::cout << "margins: √2 - σ_min = " << fixed(upper_min - sv.sigma_min, 6)
                  << ", √(2N-2) - σ_max = " << fixed(upper_max - sv.sigma_max, 6) << "\n";
    }
    std::cout << "infinitesimally rigid: " << (rep.is_infinitesimally_rigid ? "yes" : "no") << "\n";
    return kOk;
}

int cmd_batch(const std::vector<std::string>& configs, const fs::path& out, bool overwrite, unsigned threads,
              const Overrides& o) {
    std::vector<ScenarioConfig> cfgs;
    bool ok = true;
    for (const auto& path : configs) {
        cfgs.push_back(load_with_overrides(path, o));
        if (!report_violations(cfgs.back())) {
            std::cerr << "  in " << path << "\n";
            ok = false;
        }
    }
    if (!ok) return kInvalid;
    if (!prepare_out_dir(out, overwrite)) return kIo;

    const auto t0 = std::chrono::steady_clock::now();
    const auto traces = sim::run_batch(cfgs, sim::ControllerKind::NeuroAdaptive, threads);
    const double wall = seconds_since(t0);
    int status = kOk;
    for (std::size_t k = 0; k < traces.size(); ++k) {
        const fs::path dir = out / (std::to_string(k + 1) + "_" + fs::path(configs[k]).stem().string());
        fs::create_directories(dir);
        report::write_run_outputs(dir, cfgs[k], traces[k], wall);
        std::cout << dir.string() << ": " << (traces[k].diverged ? "diverged" : "ok") << "\n";
        if (traces[k].diverged) status = kDiverged;
    }
    return status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distance-based neuro-adaptive formation control simulator"};
    app.require_subcommand(1);

    std::string config, framework;
    std::string out_dir;
    bool overwrite = false, self_compare = false;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::string> batch_configs;
    Overrides o;

    auto* validate_cmd = app.add_subcommand("validate", "list every violated constraint of a scenario");
    validate_cmd->add_option("--config", config, "scenario file")->required();
    add_overrides(validate_cmd, o);

    auto* run_cmd = app.add_subcommand("run", "simulate a scenario and write trace, summary, and plot data");
    run_cmd->add_option("--config", config, "scenario file")->required();
    run_cmd->add_option("--out", out_dir, "output directory")->required();
    run_cmd->add_flag("--overwrite", overwrite, "replace files in a non-empty output directory");
    add_overrides(run_cmd, o);

    auto* compare_cmd = app.add_subcommand("compare", "distance-based controller against the displacement baseline");
    compare_cmd->add_option("--config", config, "scenario file")->required();
    compare_cmd->add_option("--out", out_dir, "output directory")->required();
    compare_cmd->add_flag("--overwrite", overwrite, "replace files in a non-empty output directory");
    compare_cmd->add_flag("--self-compare", self_compare, "put the distance-based run on both sides (debug)");
    add_overrides(compare_cmd, o);

    auto* rigidity_cmd = app.add_subcommand("check-rigidity", "rigidity report for a framework file");
    rigidity_cmd->add_option("--framework,framework", framework, "framework file")->required();

    auto* batch_cmd = app.add_subcommand("batch", "run several scenarios in parallel");
    batch_cmd->add_option("configs", batch_configs, "scenario files")->required();
    batch_cmd->add_option("--out", out_dir, "output directory")->required();
    batch_cmd->add_flag("--overwrite", overwrite, "replace files in a non-empty output directory");
    batch_cmd->add_option("--threads", threads, "worker threads");
    add_overrides(batch_cmd, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kIo;
    }

    try {
        if (*validate_cmd) return cmd_validate(config, o);
        if (*run_cmd) return cmd_run(config, out_dir, overwrite, o);
        if (*compare_cmd) return cmd_compare(config, out_dir, overwrite, self_compare, o);
        if (*rigidity_cmd) return cmd_check_rigidity(framework);
        if (*batch_cmd) return cmd_batch(batch_configs, out_dir, overwrite, threads, o);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::Divergence ? kDiverged : kInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    }
    return kIo;
}
