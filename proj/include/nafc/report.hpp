#pragma once

#include "nafc/scenario_config.hpp"
#include "nafc/sim_engine.hpp"

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace nafc::report {

/// 17 significant digits with a '.' separator whatever the global locale.
std::string format_double(double x);

/// Minimal CSV writer; fields are numbers or plain identifiers, so no quoting.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    void header(const std::vector<std::string>& names);
    CsvWriter& num(double x);
    CsvWriter& integer(long x);
    CsvWriter& text(const std::string& s);
    void end_row();

private:
    void sep();
    std::ostream& out_;
    bool first_ = true;
};

std::vector<std::string> trace_columns(const sim::SimulationTrace& trace);
void write_trace_csv(std::ostream& out, const sim::SimulationTrace& trace);
void write_control_log(std::ostream& out, const sim::SimulationTrace& trace);
void write_weights_csv(std::ostream& out, const sim::SimulationTrace& trace);

/// Plot data (trajectories, velocities, distance errors, tracking error,
/// ADE with singular values) as fig*.csv files inside `dir`.
std::vector<std::filesystem::path> write_plot_files(const std::filesystem::path& dir, const sim::SimulationTrace& trace);

/// Everything here except `wall_seconds` is computed from trace rows alone.
struct RunSummary {
    std::string controller;
    bool diverged = false;
    std::string divergence_message;
    std::size_t rows = 0;
    double t_final = 0.0;
    double final_zeta = 0.0;
    double tail_start = 0.0;  // start of the last 20% of the horizon
    double max_zeta_tail = 0.0;
    double max_tracking_tail = 0.0;
    double settle_time = 0.0;
    double max_zeta_settled = 0.0;
    double max_tracking_settled = 0.0;
    double max_sigma_deviation_settled = 0.0;  // |sigma_min - sigma_min at the desired shape|
    double sigma_min_target = 0.0;
    double mean_zeta_last5 = 0.0;
    double sigma_min_low = 0.0, sigma_min_high = 0.0;
    double sigma_max_high = 0.0;
    double max_weight_norm = 0.0;
    bool all_finite = true;
    double wall_seconds = 0.0;
};

RunSummary summarize(const sim::SimulationTrace& trace, const ScenarioConfig& cfg);

/// Checks of the settled behavior against `cfg.checks`.
struct SettlingVerdict {
    bool zeta_ok = false;
    bool tracking_ok = false;
    bool sigma_ok = false;
    bool weights_ok = false;
    bool finite_ok = false;
    bool all() const { return zeta_ok && tracking_ok && sigma_ok && weights_ok && finite_ok; }
};

SettlingVerdict judge(const RunSummary& s, const ScenarioConfig& cfg);

std::string summary_json(const RunSummary& s, const sim::RunMonitors& m, const ScenarioConfig& cfg);

/// Writes trace.csv, control_log.csv, summary.json, the plot files, and
/// weights.csv when enabled.
std::vector<std::filesystem::path> write_run_outputs(const std::filesystem::path& dir, const ScenarioConfig& cfg,
                                                     const sim::SimulationTrace& trace, double wall_seconds);

struct CompareSummary {
    RunSummary distance;
    RunSummary baseline;
    std::size_t paired_rows = 0;
    double settled_delta = 0.0;  // distance minus baseline, mean zeta over the last 5 s
    double tolerance = 0.10;
    bool distance_not_worse = false;  // distance <= baseline * (1 + tolerance)
};

CompareSummary compare_traces(const sim::SimulationTrace& distance, const sim::SimulationTrace& baseline,
                              const ScenarioConfig& cfg);

/// compare.csv over the rows both runs reached, plus compare_summary.json.
std::vector<std::filesystem::path> write_compare_outputs(const std::filesystem::path& dir,
                                                         const sim::SimulationTrace& distance,
                                                         const sim::SimulationTrace& baseline,
                                                         const CompareSummary& summary);

}  // namespace nafc::report
