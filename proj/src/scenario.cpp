#include "nafc/scenario_config.hpp"

#include "nafc/sim_engine.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace nafc {

using json = nlohmann::ordered_json;

rigid::FormationGraph ScenarioConfig::graph() const {
    return rigid::FormationGraph(vertex_count, edges, desired_distances, distance_bound);
}

control::ControllerGains ScenarioConfig::controller_gains() const {
    control::ControllerGains g;
    g.k_v = k_v;
    g.k_r = k_r;
    g.b = b;
    g.k_c = k_c;
    g.eps_sgn = eps_sgn;
    g.tau_M = tau_M;
    g.coupling = coupling;
    for (const auto& a : agents) g.agents.push_back(a.gains);
    return g;
}

std::vector<dynamics::AgentParams> ScenarioConfig::agent_params() const {
    std::vector<dynamics::AgentParams> out;
    for (const auto& a : agents) out.push_back(a.params);
    return out;
}

ScenarioConfig benchmark_scenario() {
    ScenarioConfig cfg;
    cfg.name = "square_benchmark";
    cfg.vertex_count = 4;
    cfg.edges = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {2, 3}};
    cfg.desired_distances = {1.0, std::sqrt(2.0), 1.0, 1.0, 1.0};
    cfg.reference_shape = {{0.0, 0.0}, {0.0, -1.0}, {1.0, -1.0}, {1.0, 0.0}};
    cfg.integrator.dt = 2e-5;
    cfg.output.decimation = 500;

    struct Row {
        double a1, a2, b1, b2, c1, c2, tau;
        Vec2 p, v;
    };
    const Row rows[] = {
        {0.3, 1.0, 1.0, -1.0, -2.4, 2.1, 0.10, {0.0, 1.0}, {1.0, 1.5}},
        {0.7, -0.2, -1.2, -2.2, 1.8, -1.5, 0.18, {-0.2, 0.0}, {-1.0, 1.0}},
        {-0.7, -0.8, 2.1, 1.2, -0.4, 1.3, 0.13, {0.2, -1.0}, {1.0, -1.0}},
        {-0.6, 0.4, -0.5, -0.7, 0.6, 0.8, 0.12, {0.3, 0.5}, {0.5, 0.5}},
    };
    for (const auto& r : rows) {
        AgentConfig a;
        a.params = {r.a1, r.a2, r.b1, r.b2, r.c1, r.c2, 0.1, 0.1, r.tau};
        a.initial = {r.p, r.v};
        cfg.agents.push_back(a);
    }
    return cfg;
}

// --- serialization -------------------------------------------------------

namespace {

json vec(const Vec2& v) { return json::array({v.x(), v.y()}); }

template <std::size_t N>
json arr(const std::array<double, N>& a) {
    json out = json::array();
    for (double x : a) out.push_back(x);
    return out;
}

json doubles(const std::vector<double>& xs) {
    json out = json::array();
    for (double x : xs) out.push_back(x);
    return out;
}

json edge_list(const std::vector<rigid::Edge>& edges) {
    json out = json::array();
    for (const auto& e : edges) out.push_back(json::array({e.i + 1, e.j + 1}));
    return out;
}

std::string coupling_name(control::CouplingForm c) { return c == control::CouplingForm::Derived ? "derived" : "printed"; }

}  // namespace

std::string to_json(const ScenarioConfig& cfg) {
    json j;
    j["schema_version"] = cfg.schema_version;
    j["name"] = cfg.name;

    json g;
    g["vertex_count"] = cfg.vertex_count;
    g["edges"] = edge_list(cfg.edges);
    g["desired_distances"] = doubles(cfg.desired_distances);
    g["distance_bound"] = cfg.distance_bound;
    json shape = json::array();
    for (const auto& q : cfg.reference_shape) shape.push_back(vec(q));
    g["reference_shape"] = shape;
    g["allow_non_rigid"] = cfg.allow_non_rigid;
    j["graph"] = g;

    json agents = json::array();
    for (const auto& a : cfg.agents) {
        json ja;
        const auto& p = a.params;
        ja["params"] = json{{"a1", p.a1}, {"a2", p.a2}, {"b1", p.b1}, {"b2", p.b2}, {"c1", p.c1},
                            {"c2", p.c2}, {"d1", p.d1}, {"d2", p.d2}, {"tau", p.tau}};
        ja["initial"] = json{{"p", vec(a.initial.p)}, {"v", vec(a.initial.v)}};
        ja["gains"] = json{{"kappa", a.gains.adapt.kappa}, {"Pi", a.gains.adapt.Pi}, {"Gamma", a.gains.Gamma},
                           {"g_lower", a.gains.g_lower}, {"o", a.gains.o}};
        agents.push_back(ja);
    }
    j["agents"] = agents;

    j["controller"] = json{{"k_v", cfg.k_v},         {"k_r", cfg.k_r},     {"b", cfg.b},
                           {"k_c", cfg.k_c},         {"eps_sgn", cfg.eps_sgn}, {"tau_M", cfg.tau_M},
                           {"coupling", coupling_name(cfg.coupling)}};
    j["rbf"] = json{{"neurons", cfg.rbf.neurons}, {"lower", arr(cfg.rbf.lower)}, {"upper", arr(cfg.rbf.upper)},
                    {"seed", cfg.rbf.seed}};

    json target;
    if (cfg.target.kind() == dynamics::TargetTrajectory::Kind::Benchmark) {
        target["kind"] = "benchmark";
    } else {
        target["kind"] = "piecewise";
        json pieces = json::array();
        for (const auto& pc : cfg.target.pieces()) {
            pieces.push_back(json{{"t0", pc.t0}, {"t1", pc.t1}, {"cx", doubles(pc.cx)}, {"cy", doubles(pc.cy)}});
        }
        target["pieces"] = pieces;
    }
    j["target"] = target;

    j["integrator"] = json{{"dt", cfg.integrator.dt}, {"t_end", cfg.integrator.t_end}};
    j["baseline"] = json{{"k_p", cfg.baseline.k_p}, {"k_d", cfg.baseline.k_d}};
    j["limits"] = json{{"position", cfg.limits.position},   {"velocity", cfg.limits.velocity},
                       {"weight", cfg.limits.weight},       {"lyapunov", cfg.limits.lyapunov},
                       {"divergence", cfg.limits.divergence}};
    j["checks"] = json{{"settle_time", cfg.checks.settle_time},
                       {"zeta_max", cfg.checks.zeta_max},
                       {"tracking_max", cfg.checks.tracking_max},
                       {"sigma_tolerance", cfg.checks.sigma_tolerance}};
    j["output"] = json{{"decimation", cfg.output.decimation}, {"write_weights", cfg.output.write_weights}};
    return j.dump(2) + "\n";
}

// --- parsing -----------------------------------------------------------------

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw Error(ErrorKind::Config, (path.empty() ? std::string("config") : path) + ": " + what);
}

// A JSON object together with its location, so every error names the field.
class Obj {
public:
    Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_, "expected an object");
    }

    void allow(std::initializer_list<std::string_view> keys) const {
        for (const auto& [k, _] : j_.items()) {
            if (std::find(keys.begin(), keys.end(), k) == keys.end()) fail(sub(k), "unknown key");
        }
    }

    bool has(std::string_view key) const { return j_.contains(key); }
    std::string sub(std::string_view key) const { return path_.empty() ? std::string(key) : path_ + "." + std::string(key); }

    const json& at(std::string_view key) const {
        if (!has(key)) fail(sub(key), "missing required key");
        return j_.at(key);
    }

    double num(std::string_view key, double fallback) const { return has(key) ? number(at(key), sub(key)) : fallback; }
    double num(std::string_view key) const { return number(at(key), sub(key)); }

    long integer(std::string_view key, long fallback) const {
        if (!has(key)) return fallback;
        const json& v = at(key);
        if (!v.is_number_integer()) fail(sub(key), "expected an integer");
        return v.get<long>();
    }

    bool boolean(std::string_view key, bool fallback) const {
        if (!has(key)) return fallback;
        const json& v = at(key);
        if (!v.is_boolean()) fail(sub(key), "expected true or false");
        return v.get<bool>();
    }

    std::string str(std::string_view key, std::string fallback) const {
        if (!has(key)) return fallback;
        const json& v = at(key);
        if (!v.is_string()) fail(sub(key), "expected a string");
        return v.get<std::string>();
    }

    Obj obj(std::string_view key) const { return Obj(at(key), sub(key)); }

    static double number(const json& v, const std::string& path) {
        if (!v.is_number()) fail(path, "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) fail(path, "must be finite");
        return x;
    }

private:
    const json& j_;
    std::string path_;
};

const json& array_of(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array");
    return v;
}

std::string index_path(const std::string& path, std::size_t k) { return path + "[" + std::to_string(k) + "]"; }

Vec2 parse_vec(const json& v, const std::string& path) {
    array_of(v, path);
    if (v.size() != 2) fail(path, "expected two numbers");
    return {Obj::number(v[0], index_path(path, 0)), Obj::number(v[1], index_path(path, 1))};
}

std::vector<double> parse_doubles(const json& v, const std::string& path) {
    array_of(v, path);
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k) out.push_back(Obj::number(v[k], index_path(path, k)));
    return out;
}

std::vector<rigid::Edge> parse_edges(const json& v, const std::string& path, int vertex_count) {
    array_of(v, path);
    std::vector<rigid::Edge> out;
    for (std::size_t k = 0; k < v.size(); ++k) {
        const std::string p = index_path(path, k);
        const json& e = array_of(v[k], p);
        if (e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
            fail(p, "expected a pair of 1-based vertex indices");
        }
        const long i = e[0].get<long>(), j = e[1].get<long>();
        if (i < 1 || j < 1 || i > vertex_count || j > vertex_count) {
            fail(p, "vertex index outside [1, " + std::to_string(vertex_count) + "]");
        }
        out.push_back({static_cast<int>(i - 1), static_cast<int>(j - 1)});
    }
    return out;
}

template <std::size_t N>
std::array<double, N> parse_fixed(const json& v, const std::string& path) {
    const auto xs = parse_doubles(v, path);
    if (xs.size() != N) fail(path, "expected " + std::to_string(N) + " numbers");
    std::array<double, N> out{};
    std::copy(xs.begin(), xs.end(), out.begin());
    return out;
}

json parse_document(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end(), nullptr, true, true);
    } catch (const json::parse_error& e) {
        const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
        const std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
        std::string msg = e.what();
        // Drop the library prefix ("[json.exception.parse_error.101] ").
        if (const auto pos = msg.find("] "); pos != std::string::npos) msg = msg.substr(pos + 2);
        throw Error(ErrorKind::Config, "line " + std::to_string(line) + ": " + msg);
    }
}

void check_schema(const Obj& root) {
    const long v = root.integer("schema_version", -1);
    if (v == -1) fail("schema_version", "missing required key");
    if (v != kSchemaVersion) fail("schema_version", "unsupported version " + std::to_string(v));
}

}  // namespace

ScenarioConfig parse_config(std::string_view text) {
    const json doc = parse_document(text);
    const Obj root(doc, "");
    root.allow({"schema_version", "name", "graph", "agents", "controller", "rbf", "target", "integrator", "baseline",
                "limits", "checks", "output"});
    check_schema(root);

    ScenarioConfig cfg;
    cfg.schema_version = kSchemaVersion;
    cfg.name = root.str("name", cfg.name);

    const Obj g = root.obj("graph");
    g.allow({"vertex_count", "edges", "desired_distances", "distance_bound", "reference_shape", "allow_non_rigid"});
    const long n = g.integer("vertex_count", 0);
    if (n < 1) fail(g.sub("vertex_count"), "must be a positive integer");
    cfg.vertex_count = static_cast<int>(n);
    cfg.edges = parse_edges(g.at("edges"), g.sub("edges"), cfg.vertex_count);
    cfg.desired_distances = parse_doubles(g.at("desired_distances"), g.sub("desired_distances"));
    if (cfg.desired_distances.size() != cfg.edges.size()) {
        fail(g.sub("desired_distances"), "needs one entry per edge (" + std::to_string(cfg.edges.size()) + ")");
    }
    cfg.distance_bound = g.num("distance_bound", cfg.distance_bound);
    if (g.has("reference_shape")) {
        const std::string p = g.sub("reference_shape");
        const json& shape = array_of(g.at("reference_shape"), p);
        for (std::size_t k = 0; k < shape.size(); ++k) cfg.reference_shape.push_back(parse_vec(shape[k], index_path(p, k)));
    }
    cfg.allow_non_rigid = g.boolean("allow_non_rigid", false);

    const std::string agents_path = "agents";
    const json& agents = array_of(root.at("agents"), agents_path);
    for (std::size_t k = 0; k < agents.size(); ++k) {
        const Obj a(agents[k], index_path(agents_path, k));
        a.allow({"params", "initial", "gains"});
        AgentConfig ac;
        const Obj p = a.obj("params");
        p.allow({"a1", "a2", "b1", "b2", "c1", "c2", "d1", "d2", "tau"});
        ac.params = {p.num("a1"), p.num("a2"), p.num("b1"), p.num("b2"), p.num("c1"),
                     p.num("c2"), p.num("d1", 0.1), p.num("d2", 0.1), p.num("tau", 0.0)};
        const Obj init = a.obj("initial");
        init.allow({"p", "v"});
        ac.initial.p = parse_vec(init.at("p"), init.sub("p"));
        ac.initial.v = parse_vec(init.at("v"), init.sub("v"));
        if (a.has("gains")) {
            const Obj gn = a.obj("gains");
            gn.allow({"kappa", "Pi", "Gamma", "g_lower", "o"});
            ac.gains.adapt.kappa = gn.num("kappa", ac.gains.adapt.kappa);
            ac.gains.adapt.Pi = gn.num("Pi", ac.gains.adapt.Pi);
            ac.gains.Gamma = gn.num("Gamma", ac.gains.Gamma);
            ac.gains.g_lower = gn.num("g_lower", ac.gains.g_lower);
            ac.gains.o = gn.num("o", ac.gains.o);
        }
        cfg.agents.push_back(ac);
    }

    if (root.has("controller")) {
        const Obj c = root.obj("controller");
        c.allow({"k_v", "k_r", "b", "k_c", "eps_sgn", "tau_M", "coupling"});
        cfg.k_v = c.num("k_v", cfg.k_v);
        cfg.k_r = c.num("k_r", cfg.k_r);
        cfg.b = c.num("b", cfg.b);
        cfg.k_c = c.num("k_c", cfg.k_c);
        cfg.eps_sgn = c.num("eps_sgn", cfg.eps_sgn);
        cfg.tau_M = c.num("tau_M", cfg.tau_M);
        const std::string form = c.str("coupling", "derived");
        if (form == "derived") {
            cfg.coupling = control::CouplingForm::Derived;
        } else if (form == "printed") {
            cfg.coupling = control::CouplingForm::Printed;
        } else {
            fail(c.sub("coupling"), "expected \"derived\" or \"printed\"");
        }
    }

    if (root.has("rbf")) {
        const Obj r = root.obj("rbf");
        r.allow({"neurons", "lower", "upper", "seed"});
        cfg.rbf.neurons = static_cast<int>(r.integer("neurons", cfg.rbf.neurons));
        if (r.has("lower")) cfg.rbf.lower = parse_fixed<nn::kInputDim>(r.at("lower"), r.sub("lower"));
        if (r.has("upper")) cfg.rbf.upper = parse_fixed<nn::kInputDim>(r.at("upper"), r.sub("upper"));
        if (r.has("seed")) {
            const json& s = r.at("seed");
            if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long>() >= 0)) {
                fail(r.sub("seed"), "expected a nonnegative integer");
            }
            cfg.rbf.seed = s.get<std::uint64_t>();
        }
    }

    if (root.has("target")) {
        const Obj t = root.obj("target");
        t.allow({"kind", "pieces"});
        const std::string kind = t.str("kind", "benchmark");
        if (kind == "benchmark") {
            if (t.has("pieces")) fail(t.sub("pieces"), "only valid for kind \"piecewise\"");
            cfg.target = dynamics::TargetTrajectory::benchmark();
        } else if (kind == "piecewise") {
            const std::string pp = t.sub("pieces");
            const json& pieces = array_of(t.at("pieces"), pp);
            std::vector<dynamics::PolynomialPiece> out;
            for (std::size_t k = 0; k < pieces.size(); ++k) {
                const Obj pc(pieces[k], index_path(pp, k));
                pc.allow({"t0", "t1", "cx", "cy"});
                out.push_back({pc.num("t0"), pc.num("t1"), parse_doubles(pc.at("cx"), pc.sub("cx")),
                               parse_doubles(pc.at("cy"), pc.sub("cy"))});
            }
            try {
                cfg.target = dynamics::TargetTrajectory::piecewise(std::move(out));
            } catch (const Error& e) {
                fail(pp, e.what());
            }
        } else {
            fail(t.sub("kind"), "expected \"benchmark\" or \"piecewise\"");
        }
    }

    if (root.has("integrator")) {
        const Obj in = root.obj("integrator");
        in.allow({"dt", "t_end"});
        cfg.integrator.dt = in.num("dt", cfg.integrator.dt);
        cfg.integrator.t_end = in.num("t_end", cfg.integrator.t_end);
    }
    if (root.has("baseline")) {
        const Obj b = root.obj("baseline");
        b.allow({"k_p", "k_d"});
        cfg.baseline.k_p = b.num("k_p", cfg.baseline.k_p);
        cfg.baseline.k_d = b.num("k_d", cfg.baseline.k_d);
    }
    if (root.has("limits")) {
        const Obj l = root.obj("limits");
        l.allow({"position", "velocity", "weight", "lyapunov", "divergence"});
        cfg.limits.position = l.num("position", cfg.limits.position);
        cfg.limits.velocity = l.num("velocity", cfg.limits.velocity);
        cfg.limits.weight = l.num("weight", cfg.limits.weight);
        cfg.limits.lyapunov = l.num("lyapunov", cfg.limits.lyapunov);
        cfg.limits.divergence = l.num("divergence", cfg.limits.divergence);
    }
    if (root.has("checks")) {
        const Obj c = root.obj("checks");
        c.allow({"settle_time", "zeta_max", "tracking_max", "sigma_tolerance"});
        cfg.checks.settle_time = c.num("settle_time", cfg.checks.settle_time);
        cfg.checks.zeta_max = c.num("zeta_max", cfg.checks.zeta_max);
        cfg.checks.tracking_max = c.num("tracking_max", cfg.checks.tracking_max);
        cfg.checks.sigma_tolerance = c.num("sigma_tolerance", cfg.checks.sigma_tolerance);
    }
    if (root.has("output")) {
        const Obj o = root.obj("output");
        o.allow({"decimation", "write_weights"});
        cfg.output.decimation = static_cast<int>(o.integer("decimation", cfg.output.decimation));
        cfg.output.write_weights = o.boolean("write_weights", cfg.output.write_weights);
    }
    return cfg;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    try {
        return parse_config(text);
    } catch (const Error& e) {
        throw Error(ErrorKind::Config, path.string() + ": " + e.what());
    }
}

// --- validation --------------------------------------------------------------

std::vector<std::string> validate(const ScenarioConfig& cfg) {
    std::vector<std::string> v;
    auto positive = [&v](double x, const std::string& name) {
        if (!(x > 0.0)) v.push_back("gain positivity: " + name + " must be > 0");
    };
    const int n = cfg.vertex_count;

    if (static_cast<int>(cfg.agents.size()) != n) {
        v.push_back("agent count: " + std::to_string(cfg.agents.size()) + " agents for " + std::to_string(n) +
                    " vertices");
    }

    std::optional<rigid::FormationGraph> graph;
    try {
        graph = cfg.graph();
    } catch (const Error& e) {
        v.push_back(std::string("graph invariants: ") + e.what());
    }

    positive(cfg.k_v, "k_v");
    positive(cfg.k_r, "k_r");
    if (!(cfg.b >= 0.0)) v.push_back("gain positivity: b must be >= 0");
    positive(cfg.k_c, "k_c");
    if (!(cfg.eps_sgn >= 0.0)) v.push_back("gain positivity: eps_sgn must be >= 0");
    if (!(cfg.tau_M >= 0.0)) v.push_back("delay bound: tau_M must be >= 0");
    for (std::size_t i = 0; i < cfg.agents.size(); ++i) {
        const auto& g = cfg.agents[i].gains;
        const std::string who = " (agent " + std::to_string(i + 1) + ")";
        positive(g.adapt.kappa, "kappa" + who);
        positive(g.adapt.Pi, "Pi" + who);
        positive(g.Gamma, "Gamma" + who);
        positive(g.g_lower, "g_lower" + who);
        positive(g.o, "o" + who);
    }

    double tau_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cfg.agents.size(); ++i) {
        const double tau = cfg.agents[i].params.tau;
        if (tau < 0.0) {
            v.push_back("delay bound: tau of agent " + std::to_string(i + 1) + " is negative");
        } else if (tau > cfg.tau_M) {
            std::ostringstream os;
            os << "delay bound: tau of agent " << i + 1 << " = " << tau << " exceeds tau_M = " << cfg.tau_M;
            v.push_back(os.str());
        }
        if (tau > 0.0) tau_min = std::min(tau_min, tau);
    }

    if (!(cfg.integrator.dt > 0.0)) v.push_back("step size: dt must be > 0");
    if (!(cfg.integrator.t_end >= 0.0)) v.push_back("horizon: t_end must be >= 0");
    if (std::isfinite(tau_min) && cfg.integrator.dt > tau_min / 4.0) {
        std::ostringstream os;
        os << "step size: dt = " << cfg.integrator.dt << " exceeds tau_min/4 = " << tau_min / 4.0;
        v.push_back(os.str());
    }
    if (cfg.output.decimation < 1) v.push_back("output: decimation must be >= 1");
    if (cfg.rbf.neurons < 1) v.push_back("rbf: neurons must be >= 1");
    for (std::size_t d = 0; d < nn::kInputDim; ++d) {
        if (!(cfg.rbf.upper[d] > cfg.rbf.lower[d])) {
            v.push_back("rbf: box axis " + std::to_string(d + 1) + " has no extent");
        }
    }
    if (!(cfg.baseline.k_p > 0.0) || !(cfg.baseline.k_d >= 0.0)) v.push_back("baseline gains: need k_p > 0, k_d >= 0");

    if (!graph || static_cast<int>(cfg.agents.size()) != n) return v;

    if (!cfg.reference_shape.empty()) {
        if (static_cast<int>(cfg.reference_shape.size()) != n) {
            v.push_back("reference shape: needs one point per agent");
        } else {
            for (std::size_t k = 0; k < graph->edges().size(); ++k) {
                const auto& e = graph->edges()[k];
                const double len = (cfg.reference_shape[e.i] - cfg.reference_shape[e.j]).norm();
                if (std::abs(len - graph->desired_distance(static_cast<int>(k))) > 1e-9) {
                    v.push_back("reference shape: edge (" + std::to_string(e.i + 1) + "," + std::to_string(e.j + 1) +
                                ") does not realize its desired distance");
                }
            }
        }
    }

    rigid::Framework fw{*graph, {}};
    for (const auto& a : cfg.agents) fw.positions.push_back(a.initial.p);
    bool positions_ok = true;
    try {
        fw.validate();
    } catch (const Error& e) {
        v.push_back(std::string("initial framework: ") + e.what());
        positions_ok = false;
    }

    if (n < 2) {
        v.push_back("minimal rigidity: needs at least 2 agents");
        return v;
    }
    if (!cfg.allow_non_rigid) {
        const int m = graph->edge_count();
        const int need = 2 * n - 3;
        if (m != need) {
            v.push_back("not minimally rigid: |E|=" + std::to_string(m) + " ≠ 2N−3=" + std::to_string(need));
        } else if (!rigid::is_laman_independent(n, graph->edges())) {
            v.push_back("not minimally rigid: some vertex subset spans more than 2k−3 edges");
        }
        if (positions_ok) {
            const int rank = rigid::numeric_rank(rigid::build_rigidity_matrix(fw).values);
            if (rank != need) {
                v.push_back("not infinitesimally rigid at t=0: rank(R_p)=" + std::to_string(rank) + " < " +
                            std::to_string(need));
            }
        }
    }

    if (positions_ok && !cfg.agents.empty()) {
        const auto gc = sim::check_gain_conditions(cfg);
        std::ostringstream os;
        os.precision(4);
        if (!gc.kv_sigma_ok) {
            os << "gain condition: k_v·σ_min(R̄_p(0)) = " << gc.kv_sigma << " < Γ/2 = "
               << gc.half_Gamma;
            v.push_back(os.str());
            os.str("");
        }
        if (!gc.kappa_ok) v.push_back("gain condition: κ_i < Γ/Π_i for some agent");
        if (!gc.k_c_ok) v.push_back("gain condition: k_c < Γ");
        if (!gc.b_ok) {
            os << "b < √(2N)·sup‖v̇_r‖ = " << gc.b_required;
            v.push_back(os.str());
        }
    }
    return v;
}

// --- framework files ---------------------------------------------------------

rigid::Framework parse_framework(std::string_view text) {
    const json doc = parse_document(text);
    const Obj root(doc, "");
    root.allow({"schema_version", "vertex_count", "edges", "positions", "desired_distances"});
    check_schema(root);
    const long n = root.integer("vertex_count", 0);
    if (n < 1) fail("vertex_count", "must be a positive integer");
    auto edges = parse_edges(root.at("edges"), "edges", static_cast<int>(n));
    const json& pos = array_of(root.at("positions"), "positions");
    if (pos.size() != static_cast<std::size_t>(n)) fail("positions", "needs one point per vertex");
    std::vector<Vec2> points;
    for (std::size_t k = 0; k < pos.size(); ++k) points.push_back(parse_vec(pos[k], index_path("positions", k)));

    std::vector<double> d;
    if (root.has("desired_distances")) {
        d = parse_doubles(root.at("desired_distances"), "desired_distances");
        if (d.size() != edges.size()) fail("desired_distances", "needs one entry per edge");
    } else {
        for (const auto& e : edges) {
            d.push_back((points[e.i] - points[e.j]).norm());
            if (!(d.back() > 0.0)) fail("positions", "edge endpoints coincide");
        }
    }
    try {
        rigid::Framework fw{rigid::FormationGraph(static_cast<int>(n), std::move(edges), std::move(d)),
                            std::move(points)};
        fw.validate();
        return fw;
    } catch (const Error& e) {
        throw Error(ErrorKind::Config, std::string("framework: ") + e.what());
    }
}

rigid::Framework load_framework(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    try {
        return parse_framework(text);
    } catch (const Error& e) {
        throw Error(ErrorKind::Config, path.string() + ": " + e.what());
    }
}

std::string framework_to_json(const rigid::Framework& fw) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["vertex_count"] = fw.graph.vertex_count();
    j["edges"] = edge_list(fw.graph.edges());
    json pos = json::array();
    for (const auto& p : fw.positions) pos.push_back(vec(p));
    j["positions"] = pos;
    j["desired_distances"] = doubles(fw.graph.desired_distances());
    return j.dump(2) + "\n";
}

}  // namespace nafc
