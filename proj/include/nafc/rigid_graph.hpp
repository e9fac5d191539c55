#pragma once

#include "nafc/common.hpp"

#include <Eigen/Core>

#include <limits>
#include <span>
#include <vector>

namespace nafc::rigid {

/// Undirected edge between vertices `i < j` (0-based).
struct Edge {
    int i = 0;
    int j = 0;

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Neighbor of a vertex seen through one incident edge. `sign` is +1 when the
/// vertex is the edge's first endpoint, so `sign * (p_i - p_j)` points away
/// from the neighbor.
struct Incidence {
    int neighbor;
    int edge;
    double sign;
};

/// Interaction graph with prescribed inter-agent distances.
///
/// Edges are stored sorted lexicographically; every per-edge vector in the
/// library (rigidity rows, distance errors) follows that order.
class FormationGraph {
public:
    FormationGraph() = default;

    /// Takes edges in any orientation and order. Throws on self-loops,
    /// duplicates, out-of-range vertices, or distances outside (0, bound).
    FormationGraph(int vertex_count, std::vector<Edge> edges, std::vector<double> desired_distances,
                   double distance_bound = std::numeric_limits<double>::infinity());

    /// Graph without distance targets (every d_ij set to 1).
    static FormationGraph topology(int vertex_count, std::vector<Edge> edges);

    int vertex_count() const { return vertex_count_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<double>& desired_distances() const { return distances_; }
    double desired_distance(int edge) const { return distances_[edge]; }
    double distance_bound() const { return distance_bound_; }
    std::span<const Incidence> incident(int vertex) const { return incidence_[vertex]; }

private:
    int vertex_count_ = 0;
    std::vector<Edge> edges_;
    std::vector<double> distances_;
    double distance_bound_ = std::numeric_limits<double>::infinity();
    std::vector<std::vector<Incidence>> incidence_;
};

/// A graph embedded in the plane.
struct Framework {
    FormationGraph graph;
    std::vector<Vec2> positions;

    /// Throws InvalidInput on a size mismatch or non-finite point and
    /// DegenerateEdge when an edge joins coincident points.
    void validate() const;
};

struct RigidityMatrix {
    Eigen::MatrixXd values;  // |E| x 2N
    std::vector<Edge> row_edges;
};

RigidityMatrix build_rigidity_matrix(const Framework& fw);

/// Scales each row by its edge length, making the two nonzero blocks unit
/// vectors.
RigidityMatrix normalize_rigidity_matrix(const RigidityMatrix& r, const Framework& fw);

/// Singular values in nonincreasing order.
std::vector<double> singular_values(const Eigen::MatrixXd& m);

/// Count of singular values above `max(rows, cols) * sigma_max * 1e-12`.
int numeric_rank(const Eigen::MatrixXd& m);

/// True when the edge set is (2,3)-sparse, i.e. no vertex subset of size k >= 2
/// spans more than 2k - 3 edges. Decided with the (2,3) pebble game.
bool is_laman_independent(int vertex_count, std::span<const Edge> edges);

struct RigidityReport {
    bool is_laman = false;
    int rank = 0;
    int required_rank = 0;
    bool is_infinitesimally_rigid = false;
};

RigidityReport check_minimal_rigidity(const Framework& fw);

/// max-abs entry of R (1_N (x) v). Zero up to round-off for any rigidity
/// matrix, since a common translation does not change any p_ij.
double rigidity_null_space_check(const RigidityMatrix& r, const Vec2& v);

struct SingularValueBounds {
    double sigma_min = 0.0;
    double sigma_max = 0.0;
};

/// Extreme singular values of the normalized rigidity matrix at `positions`.
SingularValueBounds normalized_singular_value_bounds(const FormationGraph& graph,
                                                     std::span<const Vec2> positions);

}  // namespace nafc::rigid
