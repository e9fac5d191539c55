#include "nafc/rigid_graph.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <numeric>
#include <sstream>

namespace nafc::rigid {

namespace {

std::string edge_name(const Edge& e) {
    std::ostringstream os;
    os << "(" << e.i + 1 << "," << e.j + 1 << ")";
    return os.str();
}

}  // namespace

FormationGraph::FormationGraph(int vertex_count, std::vector<Edge> edges, std::vector<double> desired_distances,
                               double distance_bound)
    : vertex_count_(vertex_count), distance_bound_(distance_bound) {
    if (vertex_count < 1) {
        throw Error(ErrorKind::InvalidInput, "graph needs at least one vertex");
    }
    if (edges.size() != desired_distances.size()) {
        throw Error(ErrorKind::InvalidInput, "edge list and desired distances differ in length");
    }

    std::vector<std::pair<Edge, double>> tagged;
    tagged.reserve(edges.size());
    for (std::size_t k = 0; k < edges.size(); ++k) {
        Edge e = edges[k];
        if (e.i == e.j) {
            throw Error(ErrorKind::InvalidInput, "self-loop on vertex " + std::to_string(e.i + 1));
        }
        if (e.i < 0 || e.j < 0 || e.i >= vertex_count || e.j >= vertex_count) {
            throw Error(ErrorKind::InvalidInput, "edge " + edge_name(e) + " references a missing vertex");
        }
        if (e.i > e.j) std::swap(e.i, e.j);
        const double d = desired_distances[k];
        if (!(d > 0.0) || !std::isfinite(d)) {
            throw Error(ErrorKind::InvalidInput, "desired distance on edge " + edge_name(e) + " must be positive");
        }
        if (!(d < distance_bound)) {
            throw Error(ErrorKind::InvalidInput, "desired distance on edge " + edge_name(e) +
                                                     " is not below the distance bound D");
        }
        tagged.emplace_back(e, d);
    }
    std::sort(tagged.begin(), tagged.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t k = 1; k < tagged.size(); ++k) {
        if (tagged[k].first == tagged[k - 1].first) {
            throw Error(ErrorKind::InvalidInput, "duplicate edge " + edge_name(tagged[k].first));
        }
    }

    incidence_.assign(vertex_count, {});
    for (const auto& [e, d] : tagged) {
        const int idx = static_cast<int>(edges_.size());
        edges_.push_back(e);
        distances_.push_back(d);
        incidence_[e.i].push_back({e.j, idx, +1.0});
        incidence_[e.j].push_back({e.i, idx, -1.0});
    }
}

FormationGraph FormationGraph::topology(int vertex_count, std::vector<Edge> edges) {
    std::vector<double> ones(edges.size(), 1.0);
    return FormationGraph(vertex_count, std::move(edges), std::move(ones));
}

void Framework::validate() const {
    if (static_cast<int>(positions.size()) != graph.vertex_count()) {
        throw Error(ErrorKind::InvalidInput, "framework has " + std::to_string(positions.size()) +
                                                 " positions for " + std::to_string(graph.vertex_count()) +
                                                 " vertices");
    }
    for (const auto& p : positions) {
        if (!is_finite(p)) throw Error(ErrorKind::InvalidInput, "non-finite position in framework");
    }
    for (const auto& e : graph.edges()) {
        if (positions[e.i] == positions[e.j]) {
            throw Error(ErrorKind::DegenerateEdge, "edge " + edge_name(e) + " joins coincident points");
        }
    }
}

RigidityMatrix build_rigidity_matrix(const Framework& fw) {
    fw.validate();
    const auto& edges = fw.graph.edges();
    RigidityMatrix r;
    r.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(edges.size()), 2 * fw.graph.vertex_count());
    r.row_edges = edges;
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const Edge& e = edges[k];
        const Vec2 pij = fw.positions[e.i] - fw.positions[e.j];
        const auto row = static_cast<Eigen::Index>(k);
        r.values.block<1, 2>(row, 2 * e.i) = pij.transpose();
        r.values.block<1, 2>(row, 2 * e.j) = -pij.transpose();
    }
    return r;
}

RigidityMatrix normalize_rigidity_matrix(const RigidityMatrix& r, const Framework& fw) {
    if (r.row_edges.size() != static_cast<std::size_t>(r.values.rows())) {
        throw Error(ErrorKind::InvalidInput, "rigidity matrix rows and edge map disagree");
    }
    RigidityMatrix out = r;
    for (std::size_t k = 0; k < r.row_edges.size(); ++k) {
        const Edge& e = r.row_edges[k];
        const double len = (fw.positions[e.i] - fw.positions[e.j]).norm();
        if (!(len > 0.0)) {
            throw Error(ErrorKind::DegenerateEdge, "edge " + edge_name(e) + " has zero length");
        }
        out.values.row(static_cast<Eigen::Index>(k)) /= len;
    }
    return out;
}

std::vector<double> singular_values(const Eigen::MatrixXd& m) {
    if (!m.allFinite()) throw Error(ErrorKind::InvalidInput, "matrix has non-finite entries");
    if (m.size() == 0) return {};
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    std::vector<double> out(sv.data(), sv.data() + sv.size());
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

int numeric_rank(const Eigen::MatrixXd& m) {
    const auto sv = singular_values(m);
    if (sv.empty()) return 0;
    const double tol = static_cast<double>(std::max(m.rows(), m.cols())) * sv.front() * 1e-12;
    return static_cast<int>(std::count_if(sv.begin(), sv.end(), [tol](double s) { return s > tol; }));
}

namespace {

// (2,3) pebble game. Each vertex starts with two pebbles; an accepted edge is
// covered by one pebble from its tail. An edge is independent iff four pebbles
// can be gathered on its endpoints.
class PebbleGame {
public:
    explicit PebbleGame(int n) : pebbles_(n, 2), out_(n) {}

    bool try_insert(int u, int v) {
        while (pebbles_[u] < 2) {
            if (!gather(u, v)) return false;
        }
        while (pebbles_[v] < 2) {
            if (!gather(v, u)) return false;
        }
        --pebbles_[u];
        out_[u].push_back(v);
        return true;
    }

private:
    // Moves one free pebble to `root` by reversing a directed path that avoids
    // `blocked`.
    bool gather(int root, int blocked) {
        const int n = static_cast<int>(pebbles_.size());
        std::vector<int> parent(n, -1);
        std::vector<char> seen(n, 0);
        seen[root] = 1;
        seen[blocked] = 1;
        std::vector<int> stack{root};
        int found = -1;
        while (!stack.empty() && found < 0) {
            const int a = stack.back();
            stack.pop_back();
            for (int b : out_[a]) {
                if (seen[b]) continue;
                seen[b] = 1;
                parent[b] = a;
                if (pebbles_[b] > 0) {
                    found = b;
                    break;
                }
                stack.push_back(b);
            }
        }
        if (found < 0) return false;

        --pebbles_[found];
        ++pebbles_[root];
        for (int b = found; b != root; b = parent[b]) {
            const int a = parent[b];
            auto& list = out_[a];
            list.erase(std::find(list.begin(), list.end(), b));
            out_[b].push_back(a);
        }
        return true;
    }

    std::vector<int> pebbles_;
    std::vector<std::vector<int>> out_;
};

}  // namespace

bool is_laman_independent(int vertex_count, std::span<const Edge> edges) {
    PebbleGame game(vertex_count);
    for (const auto& e : edges) {
        if (!game.try_insert(e.i, e.j)) return false;
    }
    return true;
}

RigidityReport check_minimal_rigidity(const Framework& fw) {
    const int n = fw.graph.vertex_count();
    if (n < 2) throw Error(ErrorKind::InvalidInput, "rigidity check needs at least two vertices");

    RigidityReport rep;
    rep.required_rank = 2 * n - 3;
    rep.is_laman = fw.graph.edge_count() == rep.required_rank &&
                   is_laman_independent(n, fw.graph.edges());
    rep.rank = numeric_rank(build_rigidity_matrix(fw).values);
    rep.is_infinitesimally_rigid = rep.rank == rep.required_rank;
    return rep;
}

double rigidity_null_space_check(const RigidityMatrix& r, const Vec2& v) {
    if (r.values.cols() % 2 != 0) throw Error(ErrorKind::InvalidInput, "rigidity matrix must have 2N columns");
    const Eigen::Index n = r.values.cols() / 2;
    const Eigen::VectorXd translation = v.replicate(n, 1);
    if (r.values.rows() == 0) return 0.0;
    return (r.values * translation).cwiseAbs().maxCoeff();
}

SingularValueBounds normalized_singular_value_bounds(const FormationGraph& graph, std::span<const Vec2> positions) {
    const auto& edges = graph.edges();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(edges.size()), 2 * graph.vertex_count());
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const Edge& e = edges[k];
        const Vec2 pij = positions[e.i] - positions[e.j];
        const double len = pij.norm();
        if (!(len > 0.0)) throw Error(ErrorKind::DegenerateEdge, "edge " + edge_name(e) + " has zero length");
        const auto row = static_cast<Eigen::Index>(k);
        m.block<1, 2>(row, 2 * e.i) = pij.transpose() / len;
        m.block<1, 2>(row, 2 * e.j) = -pij.transpose() / len;
    }
    const auto sv = singular_values(m);
    if (sv.empty()) return {};
    return {sv.back(), sv.front()};
}

}  // namespace nafc::rigid
