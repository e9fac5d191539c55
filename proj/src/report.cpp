#include "nafc/report.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

namespace nafc::report {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

void CsvWriter::sep() {
    if (!first_) out_ << ',';
    first_ = false;
}

void CsvWriter::header(const std::vector<std::string>& names) {
    for (const auto& n : names) text(n);
    end_row();
}

CsvWriter& CsvWriter::num(double x) {
    sep();
    out_ << format_double(x);
    return *this;
}

CsvWriter& CsvWriter::integer(long x) {
    sep();
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    out_.write(buf, r.ptr - buf);
    return *this;
}

CsvWriter& CsvWriter::text(const std::string& s) {
    sep();
    out_ << s;
    return *this;
}

void CsvWriter::end_row() {
    out_ << '\n';
    first_ = true;
}

namespace {

std::string edge_label(const rigid::Edge& e) { return std::to_string(e.i + 1) + "_" + std::to_string(e.j + 1); }

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

}  // namespace

std::vector<std::string> trace_columns(const sim::SimulationTrace& trace) {
    std::vector<std::string> c{"t"};
    for (int i = 1; i <= trace.agents; ++i) {
        const std::string a = std::to_string(i);
        for (const char* f : {"p", "v", "u", "s"}) {
            c.push_back(std::string(f) + a + "_x");
            c.push_back(std::string(f) + a + "_y");
        }
        c.push_back("c" + a);
        c.push_back("w" + a + "_norm");
        c.push_back("dead_zone" + a);
    }
    for (const auto& e : trace.edges) c.push_back("e_" + edge_label(e));
    for (const char* f : {"e_r_x", "e_r_y", "p_r_x", "p_r_y", "v_r_x", "v_r_y", "zeta", "sigma_min", "sigma_max", "M1",
                          "M2", "M3", "W_term"}) {
        c.push_back(f);
    }
    return c;
}

void write_trace_csv(std::ostream& out, const sim::SimulationTrace& trace) {
    CsvWriter w(out);
    w.header(trace_columns(trace));
    for (const auto& r : trace.rows) {
        w.num(r.t);
        for (int i = 0; i < trace.agents; ++i) {
            for (const Vec2* x : {&r.p[i], &r.v[i], &r.u[i], &r.s[i]}) w.num(x->x()).num(x->y());
            w.num(r.c[i]).num(r.w_norm[i]).integer(r.dead_zone[i] ? 1 : 0);
        }
        for (Eigen::Index k = 0; k < r.beta.size(); ++k) w.num(r.beta[k]);
        w.num(r.e_r.x()).num(r.e_r.y()).num(r.p_r.x()).num(r.p_r.y()).num(r.v_r.x()).num(r.v_r.y());
        w.num(r.zeta).num(r.sigma_min).num(r.sigma_max);
        w.num(r.lyap.M1).num(r.lyap.M2).num(r.lyap.M3).num(r.lyap.W_term);
        w.end_row();
    }
}

void write_control_log(std::ostream& out, const sim::SimulationTrace& trace) {
    CsvWriter w(out);
    w.header({"t", "i", "s_x", "s_y", "u_x", "u_y", "c", "dead_zone_active", "M1", "M2", "M3"});
    for (const auto& r : trace.rows) {
        for (int i = 0; i < trace.agents; ++i) {
            w.num(r.t).integer(i + 1).num(r.s[i].x()).num(r.s[i].y()).num(r.u[i].x()).num(r.u[i].y()).num(r.c[i]);
            w.integer(r.dead_zone[i] ? 1 : 0).num(r.lyap.M1).num(r.lyap.M2).num(r.lyap.M3);
            w.end_row();
        }
    }
}

void write_weights_csv(std::ostream& out, const sim::SimulationTrace& trace) {
    CsvWriter w(out);
    w.header({"t", "agent", "neuron", "w_x", "w_y"});
    for (const auto& snap : trace.weights) {
        for (std::size_t i = 0; i < snap.weights.size(); ++i) {
            const auto& m = snap.weights[i];
            for (Eigen::Index k = 0; k < m.rows(); ++k) {
                w.num(snap.t).integer(static_cast<long>(i) + 1).integer(k + 1).num(m(k, 0)).num(m(k, 1));
                w.end_row();
            }
        }
    }
}

std::vector<fs::path> write_plot_files(const fs::path& dir, const sim::SimulationTrace& trace) {
    std::vector<fs::path> written;
    const int n = trace.agents;

    auto per_agent = [&](const std::string& file, const char* prefix, const char* ref, auto get_ref, auto get) {
        const fs::path path = dir / file;
        auto out = open_out(path);
        CsvWriter w(out);
        std::vector<std::string> cols{"t", std::string(ref) + "_x", std::string(ref) + "_y"};
        for (int i = 1; i <= n; ++i) {
            cols.push_back(prefix + std::to_string(i) + "_x");
            cols.push_back(prefix + std::to_string(i) + "_y");
        }
        w.header(cols);
        for (const auto& r : trace.rows) {
            const Vec2 rv = get_ref(r);
            w.num(r.t).num(rv.x()).num(rv.y());
            for (int i = 0; i < n; ++i) {
                const Vec2 x = get(r, i);
                w.num(x.x()).num(x.y());
            }
            w.end_row();
        }
        written.push_back(path);
    };
    per_agent("fig2b_trajectories.csv", "p", "p_r", [](const sim::TraceRow& r) { return r.p_r; },
              [](const sim::TraceRow& r, int i) { return r.p[i]; });
    per_agent("fig2c_velocities.csv", "v", "v_r", [](const sim::TraceRow& r) { return r.v_r; },
              [](const sim::TraceRow& r, int i) { return r.v[i]; });

    {
        const fs::path path = dir / "fig3a_distance_errors.csv";
        auto out = open_out(path);
        CsvWriter w(out);
        std::vector<std::string> cols{"t"};
        for (const auto& e : trace.edges) cols.push_back("e_" + edge_label(e));
        w.header(cols);
        for (const auto& r : trace.rows) {
            w.num(r.t);
            for (Eigen::Index k = 0; k < r.beta.size(); ++k) w.num(r.beta[k]);
            w.end_row();
        }
        written.push_back(path);
    }
    {
        const fs::path path = dir / "fig3b_tracking_error.csv";
        auto out = open_out(path);
        CsvWriter w(out);
        w.header({"t", "e_r_x", "e_r_y", "e_r_norm"});
        for (const auto& r : trace.rows) {
            w.num(r.t).num(r.e_r.x()).num(r.e_r.y()).num(r.e_r.norm());
            w.end_row();
        }
        written.push_back(path);
    }
    {
        const fs::path path = dir / "fig4_ade_sigma.csv";
        auto out = open_out(path);
        CsvWriter w(out);
        w.header({"t", "zeta", "sigma_min", "sigma_max"});
        for (const auto& r : trace.rows) {
            w.num(r.t).num(r.zeta).num(r.sigma_min).num(r.sigma_max);
            w.end_row();
        }
        written.push_back(path);
    }
    return written;
}

namespace {

bool row_finite(const sim::TraceRow& r) {
    for (std::size_t i = 0; i < r.p.size(); ++i) {
        if (!is_finite(r.p[i]) || !is_finite(r.v[i]) || !std::isfinite(r.w_norm[i])) return false;
    }
    return true;
}

double desired_sigma_min(const ScenarioConfig& cfg) {
    if (static_cast<int>(cfg.reference_shape.size()) != cfg.vertex_count) return std::nan("");
    return rigid::normalized_singular_value_bounds(cfg.graph(), cfg.reference_shape).sigma_min;
}

}  // namespace

RunSummary summarize(const sim::SimulationTrace& trace, const ScenarioConfig& cfg) {
    RunSummary s;
    s.controller = std::string(sim::controller_name(trace.controller));
    s.diverged = trace.diverged;
    s.divergence_message = trace.divergence_message;
    s.rows = trace.rows.size();
    s.settle_time = cfg.checks.settle_time;
    s.sigma_min_target = desired_sigma_min(cfg);
    s.tail_start = 0.8 * cfg.integrator.t_end;
    if (trace.rows.empty()) return s;

    const auto& last = trace.rows.back();
    s.t_final = last.t;
    s.final_zeta = last.zeta;
    s.sigma_min_low = std::numeric_limits<double>::infinity();
    s.sigma_min_high = -std::numeric_limits<double>::infinity();
    s.sigma_max_high = -std::numeric_limits<double>::infinity();

    double sum5 = 0.0;
    long n5 = 0;
    for (const auto& r : trace.rows) {
        s.all_finite = s.all_finite && row_finite(r);
        const double track = r.e_r.norm();
        if (r.t >= s.tail_start) {
            s.max_zeta_tail = std::max(s.max_zeta_tail, r.zeta);
            s.max_tracking_tail = std::max(s.max_tracking_tail, track);
        }
        if (r.t > s.settle_time) {
            s.max_zeta_settled = std::max(s.max_zeta_settled, r.zeta);
            s.max_tracking_settled = std::max(s.max_tracking_settled, track);
            if (std::isfinite(s.sigma_min_target)) {
                s.max_sigma_deviation_settled =
                    std::max(s.max_sigma_deviation_settled, std::abs(r.sigma_min - s.sigma_min_target));
            }
        }
        if (r.t >= s.t_final - 5.0) {
            sum5 += r.zeta;
            ++n5;
        }
        s.sigma_min_low = std::min(s.sigma_min_low, r.sigma_min);
        s.sigma_min_high = std::max(s.sigma_min_high, r.sigma_min);
        s.sigma_max_high = std::max(s.sigma_max_high, r.sigma_max);
        for (double w : r.w_norm) s.max_weight_norm = std::max(s.max_weight_norm, w);
    }
    s.mean_zeta_last5 = n5 > 0 ? sum5 / static_cast<double>(n5) : 0.0;
    return s;
}

SettlingVerdict judge(const RunSummary& s, const ScenarioConfig& cfg) {
    SettlingVerdict v;
    const bool reached = !s.diverged && s.rows > 0 && s.t_final > cfg.checks.settle_time;
    v.finite_ok = !s.diverged && s.all_finite;
    v.zeta_ok = reached && s.max_zeta_settled < cfg.checks.zeta_max;
    v.tracking_ok = reached && s.max_tracking_settled < cfg.checks.tracking_max;
    v.sigma_ok = reached && (!std::isfinite(s.sigma_min_target) ||
                             s.max_sigma_deviation_settled <= cfg.checks.sigma_tolerance);
    v.weights_ok = v.finite_ok && s.max_weight_norm <= cfg.limits.weight;
    return v;
}

namespace {

json summary_object(const RunSummary& s) {
    json j;
    j["controller"] = s.controller;
    j["diverged"] = s.diverged;
    if (s.diverged) j["divergence_message"] = s.divergence_message;
    j["rows"] = s.rows;
    j["t_final"] = s.t_final;
    j["final_zeta"] = s.final_zeta;
    j["tail_start"] = s.tail_start;
    j["max_zeta_tail"] = s.max_zeta_tail;
    j["max_tracking_error_tail"] = s.max_tracking_tail;
    j["settle_time"] = s.settle_time;
    j["max_zeta_settled"] = s.max_zeta_settled;
    j["max_tracking_error_settled"] = s.max_tracking_settled;
    j["sigma_min_desired"] = s.sigma_min_target;
    j["max_sigma_min_deviation_settled"] = s.max_sigma_deviation_settled;
    j["mean_zeta_last_5s"] = s.mean_zeta_last5;
    j["sigma_min_range"] = json::array({s.sigma_min_low, s.sigma_min_high});
    j["sigma_max_peak"] = s.sigma_max_high;
    j["max_weight_norm"] = s.max_weight_norm;
    j["all_finite"] = s.all_finite;
    j["wall_seconds"] = s.wall_seconds;
    return j;
}

}  // namespace

std::string summary_json(const RunSummary& s, const sim::RunMonitors& m, const ScenarioConfig& cfg) {
    json j = summary_object(s);
    const auto v = judge(s, cfg);
    j["checks"] = json{{"zeta_settled", v.zeta_ok},
                       {"tracking_settled", v.tracking_ok},
                       {"sigma_min_settled", v.sigma_ok},
                       {"weights_bounded", v.weights_ok},
                       {"finite", v.finite_ok}};
    const auto& g = m.gains_at_start;
    j["gain_conditions_t0"] = json{{"sigma_min", g.sigma_min0},  {"k_v_sigma_min", g.kv_sigma},
                                   {"half_Gamma", g.half_Gamma}, {"k_v_sigma_ok", g.kv_sigma_ok},
                                   {"kappa_ok", g.kappa_ok},     {"k_c_ok", g.k_c_ok},
                                   {"b_required", g.b_required}, {"b_ok", g.b_ok}};
    json lyap = json::array();
    for (const auto& [t, v] : m.lyapunov_samples) lyap.push_back(json::array({t, v}));
    j["monitors"] = json{{"k_v_sigma_violations", m.kv_sigma_violations},
                         {"sigma_bound_violations", m.sigma_bound_violations},
                         {"dead_zone_violations", m.dead_zone_violations},
                         {"delay_bound_violations", m.delay_bound_violations},
                         {"min_g_entry", m.min_g_entry},
                         {"g_lower_violated", m.g_lower_violated},
                         {"max_disturbance", m.max_disturbance},
                         {"max_position", m.max_position},
                         {"max_velocity", m.max_velocity},
                         {"max_weight_norm_per_agent", m.max_weight_norm},
                         {"max_s_norm", m.max_s_norm},
                         {"weight_bound", m.weight_bound},
                         {"ceilings_exceeded", m.ceilings_exceeded},
                         {"lyapunov_samples", lyap}};
    return j.dump(2) + "\n";
}

std::vector<fs::path> write_run_outputs(const fs::path& dir, const ScenarioConfig& cfg,
                                        const sim::SimulationTrace& trace, double wall_seconds) {
    fs::create_directories(dir);
    std::vector<fs::path> written;
    {
        auto out = open_out(dir / "trace.csv");
        write_trace_csv(out, trace);
        written.push_back(dir / "trace.csv");
    }
    {
        auto out = open_out(dir / "control_log.csv");
        write_control_log(out, trace);
        written.push_back(dir / "control_log.csv");
    }
    if (cfg.output.write_weights) {
        auto out = open_out(dir / "weights.csv");
        write_weights_csv(out, trace);
        written.push_back(dir / "weights.csv");
    }
    for (auto& p : write_plot_files(dir, trace)) written.push_back(std::move(p));
    RunSummary s = summarize(trace, cfg);
    s.wall_seconds = wall_seconds;
    {
        auto out = open_out(dir / "summary.json");
        out << summary_json(s, trace.monitors, cfg);
        written.push_back(dir / "summary.json");
    }
    return written;
}

CompareSummary compare_traces(const sim::SimulationTrace& distance, const sim::SimulationTrace& baseline,
                              const ScenarioConfig& cfg) {
    CompareSummary c;
    c.distance = summarize(distance, cfg);
    c.baseline = summarize(baseline, cfg);
    c.paired_rows = std::min(distance.rows.size(), baseline.rows.size());
    c.settled_delta = c.distance.mean_zeta_last5 - c.baseline.mean_zeta_last5;
    c.distance_not_worse = !c.distance.diverged &&
                           c.distance.mean_zeta_last5 <= c.baseline.mean_zeta_last5 * (1.0 + c.tolerance);
    return c;
}

std::vector<fs::path> write_compare_outputs(const fs::path& dir, const sim::SimulationTrace& distance,
                                            const sim::SimulationTrace& baseline, const CompareSummary& summary) {
    fs::create_directories(dir);
    std::vector<fs::path> written;
    {
        auto out = open_out(dir / "compare.csv");
        CsvWriter w(out);
        w.header({"t", "zeta_distance", "zeta_baseline", "sigma_min_distance", "sigma_min_baseline"});
        for (std::size_t k = 0; k < summary.paired_rows; ++k) {
            const auto& a = distance.rows[k];
            const auto& b = baseline.rows[k];
            w.num(a.t).num(a.zeta).num(b.zeta).num(a.sigma_min).num(b.sigma_min);
            w.end_row();
        }
        written.push_back(dir / "compare.csv");
    }
    {
        json j;
        j["distance"] = summary_object(summary.distance);
        j["baseline"] = summary_object(summary.baseline);
        j["paired_rows"] = summary.paired_rows;
        j["settled_zeta_distance"] = summary.distance.mean_zeta_last5;
        j["settled_zeta_baseline"] = summary.baseline.mean_zeta_last5;
        j["settled_zeta_delta"] = summary.settled_delta;
        j["final_sigma_min_delta"] =
            summary.paired_rows > 0
                ? distance.rows[summary.paired_rows - 1].sigma_min - baseline.rows[summary.paired_rows - 1].sigma_min
                : 0.0;
        j["tolerance"] = summary.tolerance;
        j["distance_not_worse"] = summary.distance_not_worse;
        auto out = open_out(dir / "compare_summary.json");
        out << j.dump(2) << "\n";
        written.push_back(dir / "compare_summary.json");
    }
    return written;
}

}  // namespace nafc::report
