#pragma once

#include "nafc/common.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <vector>

namespace nafc::nn {

/// Input of the per-agent network: (s, p, v) stacked into R^6.
inline constexpr std::size_t kInputDim = 6;
using Input = std::array<double, kInputDim>;

inline Input make_input(const Vec2& s, const Vec2& p, const Vec2& v) {
    return {s.x(), s.y(), p.x(), p.y(), v.x(), v.y()};
}

/// sigma-modification gain and learning rate (F = Pi * I).
struct AdaptationParams {
    double kappa = 2.5;
    double Pi = 10.0;
};

/// Axis-aligned box and neuron count from which the lattice centers are drawn.
struct LatticeSpec {
    int neurons = 9;
    std::array<double, kInputDim> lower{-3.0, -3.0, -2.0, -2.0, -3.0, -3.0};
    std::array<double, kInputDim> upper{3.0, 3.0, 6.0, 6.0, 3.0, 3.0};
    std::uint64_t seed = 0;
};

/// Gaussian RBF network with an eta x 2 output weight matrix.
class RbfNetwork {
public:
    RbfNetwork() = default;

    /// `centers` holds one R^6 point per neuron; weights start at zero.
    RbfNetwork(std::vector<Input> centers, std::vector<double> widths);

    /// Each axis is split into `neurons` evenly spaced levels; every neuron
    /// takes one level per axis, with the per-axis assignment permuted by a
    /// seeded shuffle (a Latin-hypercube layout on the lattice). All widths
    /// equal the largest per-axis spacing.
    static RbfNetwork lattice(const LatticeSpec& spec);

    std::size_t eta() const { return widths_.size(); }
    const std::vector<double>& widths() const { return widths_; }
    Input center(std::size_t k) const;

    /// Row-major eta x 2.
    const Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>& weights() const { return w_; }
    Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>& weights() { return w_; }

    /// phi_k = exp(-|input - c_k|^2 / (2 width_k^2)), each in (0, 1].
    Eigen::VectorXd eval_basis(const Input& input) const;

    /// W_hat^T phi(input).
    Vec2 approximate(const Input& input) const;
    Vec2 approximate_with(const Eigen::VectorXd& phi) const;

private:
    std::vector<double> centers_;  // dimension-major, kInputDim rows of eta
    std::vector<double> widths_;
    std::vector<double> neg_half_inv_w2_;
    Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor> w_;
};

using WeightMatrix = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;

/// Adaptive law for the weight estimate:
///   dW_hat/dt = Pi * phi s^T - kappa * Pi * W_hat.
WeightMatrix weight_derivative(const RbfNetwork& net, const Eigen::VectorXd& phi, const Vec2& s,
                               const AdaptationParams& prm);

/// Same law writing into a raw eta x 2 row-major buffer (used by the integrator).
void weight_derivative_into(const double* phi, std::size_t eta, const Vec2& s, const double* w,
                            const AdaptationParams& prm, double* out);

}  // namespace nafc::nn
