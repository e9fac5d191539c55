#include "doctest.h"

#include "nafc/report.hpp"

#include <clocale>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <locale>
#include <sstream>

using namespace nafc;
namespace fs = std::filesystem;

namespace {

ScenarioConfig small_run(double t_end) {
    ScenarioConfig cfg = benchmark_scenario();
    cfg.integrator.dt = 1e-3;
    cfg.integrator.t_end = t_end;
    cfg.output.decimation = 20;
    return cfg;
}

std::vector<std::vector<std::string>> read_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("nafc_test_" + name);
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("number formatting round-trips and ignores the locale") {
    CHECK(report::format_double(0.1) == "0.10000000000000001");
    CHECK(report::format_double(-2.0) == "-2");
    CHECK(report::format_double(std::nan("")) == "nan");
    CHECK(report::format_double(-INFINITY) == "-inf");
    for (double x : {1.0 / 3.0, 6.02e23, -1e-300, 123456.789}) {
        CHECK(std::stod(report::format_double(x)) == x);
    }

    const char* old = std::setlocale(LC_ALL, nullptr);
    const std::string saved = old ? old : "C";
    if (std::setlocale(LC_ALL, "de_DE.UTF-8") || std::setlocale(LC_ALL, "fr_FR.UTF-8")) {
        CHECK(report::format_double(1.5) == "1.5");
        std::ostringstream os;
        report::CsvWriter w(os);
        w.num(2.25).num(0.5);
        w.end_row();
        CHECK(os.str() == "2.25,0.5\n");
    }
    std::setlocale(LC_ALL, saved.c_str());
}

TEST_CASE("trace columns") {
    const auto tr = sim::run_scenario(small_run(0.1));
    const auto cols = report::trace_columns(tr);
    CHECK(cols.front() == "t");
    CHECK(cols[1] == "p1_x");
    CHECK(std::find(cols.begin(), cols.end(), "e_1_3") != cols.end());
    CHECK(std::find(cols.begin(), cols.end(), "dead_zone4") != cols.end());
    CHECK(cols.back() == "W_term");

    std::ostringstream os;
    report::write_trace_csv(os, tr);
    const auto rows = read_csv(os.str());
    REQUIRE(rows.size() == tr.rows.size() + 1);
    for (const auto& r : rows) CHECK(r.size() == cols.size());
}

TEST_CASE("summary can be recomputed from the trace file") {
    const auto cfg = small_run(2.0);
    const auto tr = sim::run_scenario(cfg);
    const auto s = report::summarize(tr, cfg);

    std::ostringstream os;
    report::write_trace_csv(os, tr);
    const auto rows = read_csv(os.str());
    const auto& head = rows.front();
    auto col = [&](const std::string& name) {
        return static_cast<std::size_t>(std::find(head.begin(), head.end(), name) - head.begin());
    };
    const std::size_t ct = col("t"), cz = col("zeta"), cx = col("e_r_x"), cy = col("e_r_y");
    double max_zeta_tail = 0.0, max_track_tail = 0.0, last_zeta = 0.0;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        const double t = std::stod(rows[k][ct]);
        const double z = std::stod(rows[k][cz]);
        const double e = std::hypot(std::stod(rows[k][cx]), std::stod(rows[k][cy]));
        if (t >= 0.8 * cfg.integrator.t_end) {
            max_zeta_tail = std::max(max_zeta_tail, z);
            max_track_tail = std::max(max_track_tail, e);
        }
        last_zeta = z;
    }
    CHECK(s.rows == rows.size() - 1);
    CHECK(s.final_zeta == last_zeta);
    CHECK(s.max_zeta_tail == max_zeta_tail);
    CHECK(s.max_tracking_tail == doctest::Approx(max_track_tail).epsilon(1e-15));
    CHECK(s.sigma_min_target == doctest::Approx(std::sqrt(2.0 - std::sqrt(2.0))).epsilon(1e-12));
}

TEST_CASE("run outputs on disk") {
    const auto cfg = small_run(0.2);
    const auto tr = sim::run_scenario(cfg);
    const fs::path dir = scratch_dir("outputs");
    fs::create_directories(dir);
    report::write_run_outputs(dir, cfg, tr, 0.0);
    for (const char* f : {"trace.csv", "control_log.csv", "summary.json", "fig2b_trajectories.csv",
                          "fig2c_velocities.csv", "fig3a_distance_errors.csv", "fig3b_tracking_error.csv",
                          "fig4_ade_sigma.csv"}) {
        CHECK_MESSAGE(fs::exists(dir / f), f);
    }
    CHECK_FALSE(fs::exists(dir / "weights.csv"));

    std::ifstream in(dir / "control_log.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,i,s_x,s_y,u_x,u_y,c,dead_zone_active,M1,M2,M3");
    fs::remove_all(dir);
}

TEST_CASE("zero horizon writes header-only tables") {
    const auto cfg = small_run(0.0);
    const auto tr = sim::run_scenario(cfg);
    std::ostringstream os;
    report::write_trace_csv(os, tr);
    const auto rows = read_csv(os.str());
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].front() == "t");
    const auto s = report::summarize(tr, cfg);
    CHECK(s.rows == 0);
}

TEST_CASE("comparing a run with itself gives zero delta") {
    const auto cfg = small_run(1.0);
    const auto tr = sim::run_scenario(cfg);
    const auto cmp = report::compare_traces(tr, tr, cfg);
    CHECK(cmp.settled_delta == 0.0);
    CHECK(cmp.distance_not_worse);
    CHECK(cmp.paired_rows == tr.rows.size());
}
