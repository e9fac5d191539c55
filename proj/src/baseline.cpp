#include "nafc/sim_engine.hpp"

namespace nafc::sim {

std::vector<Vec2> edge_offsets(const rigid::FormationGraph& graph, std::span<const Vec2> reference_shape) {
    if (reference_shape.size() != static_cast<std::size_t>(graph.vertex_count())) {
        throw Error(ErrorKind::InvalidInput, "reference shape needs one point per agent");
    }
    std::vector<Vec2> out;
    out.reserve(graph.edges().size());
    for (const auto& e : graph.edges()) out.push_back(reference_shape[e.i] - reference_shape[e.j]);
    return out;
}

std::vector<Vec2> displacement_baseline_control(const rigid::FormationGraph& graph, std::span<const Vec2> positions,
                                                std::span<const Vec2> velocities, std::span<const Vec2> offsets,
                                                const dynamics::TargetSample& target, const BaselineGains& gains) {
    const int n = graph.vertex_count();
    std::vector<Vec2> u(n, Vec2::Zero());
    for (int i = 0; i < n; ++i) {
        Vec2 dp = Vec2::Zero(), dv = Vec2::Zero();
        for (const auto& inc : graph.incident(i)) {
            dp += positions[i] - positions[inc.neighbor] - inc.sign * offsets[inc.edge];
            dv += velocities[i] - velocities[inc.neighbor];
        }
        u[i] = -gains.k_p * dp - gains.k_d * dv;
    }
    if (n > 0) u[0] -= gains.k_p * (positions[0] - target.p) + gains.k_d * (velocities[0] - target.v);
    return u;
}

}  // namespace nafc::sim
