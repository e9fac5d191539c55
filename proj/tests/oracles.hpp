#pragma once

// Independent reference computations used by the unit and acceptance tests.
// None of these call into the library code they check.

#include "nafc/rigid_graph.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

using nafc::Vec2;
using nafc::rigid::Edge;

// Every vertex subset of size >= 2 spans at most 2k - 3 edges.
inline bool laman_sparse_bruteforce(int n, const std::vector<Edge>& edges) {
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        const int k = __builtin_popcount(mask);
        if (k < 2) continue;
        int spanned = 0;
        for (const auto& e : edges) {
            if ((mask >> e.i & 1u) && (mask >> e.j & 1u)) ++spanned;
        }
        if (spanned > 2 * k - 3) return false;
    }
    return true;
}

inline bool laman_bruteforce(int n, const std::vector<Edge>& edges) {
    return static_cast<int>(edges.size()) == 2 * n - 3 && laman_sparse_bruteforce(n, edges);
}

// Rigidity matrix written out entry by entry.
inline Eigen::MatrixXd rigidity_matrix(int n, const std::vector<Edge>& edges, const std::vector<Vec2>& p,
                                       bool normalized) {
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(edges.size()), 2 * n);
    for (std::size_t k = 0; k < edges.size(); ++k) {
        Vec2 d = p[edges[k].i] - p[edges[k].j];
        if (normalized) d /= d.norm();
        const auto row = static_cast<Eigen::Index>(k);
        r(row, 2 * edges[k].i) = d.x();
        r(row, 2 * edges[k].i + 1) = d.y();
        r(row, 2 * edges[k].j) = -d.x();
        r(row, 2 * edges[k].j + 1) = -d.y();
    }
    return r;
}

// Singular values from the eigenvalues of the smaller Gram matrix, descending.
inline std::vector<double> singular_values_gram(const Eigen::MatrixXd& m) {
    const Eigen::MatrixXd g = m.rows() <= m.cols() ? Eigen::MatrixXd(m * m.transpose())
                                                    : Eigen::MatrixXd(m.transpose() * m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    std::vector<double> out;
    for (Eigen::Index k = es.eigenvalues().size() - 1; k >= 0; --k) out.push_back(std::sqrt(std::max(0.0, es.eigenvalues()[k])));
    return out;
}

struct RandomFramework {
    int n = 0;
    std::vector<Edge> edges;
    std::vector<Vec2> positions;
};

// Minimally rigid graph by Henneberg moves (vertex addition and edge split)
// on random generic positions. Rejects the rare near-degenerate draw by rank.
inline RandomFramework henneberg(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> coord(-3.0, 3.0);
    for (;;) {
        RandomFramework f;
        f.n = n;
        f.edges = {{0, 1}};
        for (int v = 2; v < n; ++v) {
            const bool split = v >= 3 && (rng() & 1u);
            if (split) {
                const std::size_t k = rng() % f.edges.size();
                const Edge e = f.edges[k];
                f.edges.erase(f.edges.begin() + static_cast<std::ptrdiff_t>(k));
                int c;
                do {
                    c = static_cast<int>(rng() % static_cast<std::uint64_t>(v));
                } while (c == e.i || c == e.j);
                f.edges.push_back({e.i, v});
                f.edges.push_back({e.j, v});
                f.edges.push_back({std::min(c, v), std::max(c, v)});
            } else {
                const int a = static_cast<int>(rng() % static_cast<std::uint64_t>(v));
                int b;
                do {
                    b = static_cast<int>(rng() % static_cast<std::uint64_t>(v));
                } while (b == a);
                f.edges.push_back({a, v});
                f.edges.push_back({b, v});
            }
        }
        for (int v = 0; v < n; ++v) f.positions.push_back({coord(rng), coord(rng)});

        bool spread = true;
        for (const auto& e : f.edges) spread = spread && (f.positions[e.i] - f.positions[e.j]).norm() > 0.2;
        if (!spread) continue;
        const auto sv = singular_values_gram(rigidity_matrix(n, f.edges, f.positions, true));
        if (sv.back() > 1e-3) return f;
    }
}

// x' = -x(t - tau), x = 1 for t <= 0, solved by the method of steps.
inline double pure_delay_solution(double t, double tau) {
    if (t <= 0.0) return 1.0;
    if (t <= tau) return 1.0 - t;
    const double s = t - tau;
    if (t <= 2.0 * tau) return 1.0 - t + 0.5 * s * s;
    return std::nan("");
}

}  // namespace oracle
