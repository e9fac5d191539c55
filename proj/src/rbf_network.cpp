#include "nafc/rbf_network.hpp"

#include "nafc/simd/kernels.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace nafc::nn {

RbfNetwork::RbfNetwork(std::vector<Input> centers, std::vector<double> widths) : widths_(std::move(widths)) {
    if (centers.empty()) throw Error(ErrorKind::InvalidInput, "RBF network needs at least one neuron");
    if (centers.size() != widths_.size()) throw Error(ErrorKind::InvalidInput, "one width per center required");
    const std::size_t eta = centers.size();
    centers_.assign(kInputDim * eta, 0.0);
    neg_half_inv_w2_.resize(eta);
    for (std::size_t k = 0; k < eta; ++k) {
        const double w = widths_[k];
        if (!(w > 0.0) || !std::isfinite(w)) throw Error(ErrorKind::InvalidInput, "RBF widths must be positive");
        neg_half_inv_w2_[k] = -0.5 / (w * w);
        for (std::size_t d = 0; d < kInputDim; ++d) {
            if (!std::isfinite(centers[k][d])) throw Error(ErrorKind::InvalidInput, "non-finite RBF center");
            centers_[d * eta + k] = centers[k][d];
        }
    }
    w_ = WeightMatrix::Zero(static_cast<Eigen::Index>(eta), 2);
}

RbfNetwork RbfNetwork::lattice(const LatticeSpec& spec) {
    if (spec.neurons < 1) throw Error(ErrorKind::InvalidInput, "RBF lattice needs at least one neuron");
    const auto eta = static_cast<std::size_t>(spec.neurons);
    std::vector<Input> centers(eta);
    double width = 0.0;
    for (std::size_t d = 0; d < kInputDim; ++d) {
        const double lo = spec.lower[d], hi = spec.upper[d];
        if (!(hi > lo)) throw Error(ErrorKind::InvalidInput, "RBF lattice box must have positive extent");
        const double spacing = eta > 1 ? (hi - lo) / static_cast<double>(eta - 1) : hi - lo;
        width = std::max(width, spacing);

        std::vector<std::size_t> level(eta);
        std::iota(level.begin(), level.end(), std::size_t{0});
        // mt19937_64 output is fully specified by the standard; the
        // distributions are not, so draw indices directly.
        std::mt19937_64 rng(spec.seed * 0x9E3779B97F4A7C15ULL + d);
        for (std::size_t k = eta; k > 1; --k) std::swap(level[k - 1], level[rng() % k]);

        for (std::size_t k = 0; k < eta; ++k) {
            centers[k][d] = eta > 1 ? lo + spacing * static_cast<double>(level[k]) : 0.5 * (lo + hi);
        }
    }
    return RbfNetwork(std::move(centers), std::vector<double>(eta, width));
}

Input RbfNetwork::center(std::size_t k) const {
    Input c{};
    for (std::size_t d = 0; d < kInputDim; ++d) c[d] = centers_[d * eta() + k];
    return c;
}

Eigen::VectorXd RbfNetwork::eval_basis(const Input& input) const {
    Eigen::VectorXd phi(static_cast<Eigen::Index>(eta()));
    simd::active_kernels().rbf_activations(centers_.data(), eta(), kInputDim, neg_half_inv_w2_.data(), input.data(),
                                           phi.data());
    return phi;
}

Vec2 RbfNetwork::approximate(const Input& input) const { return approximate_with(eval_basis(input)); }

Vec2 RbfNetwork::approximate_with(const Eigen::VectorXd& phi) const {
    if (phi.size() != w_.rows()) throw Error(ErrorKind::InvalidInput, "basis length does not match network");
    return w_.transpose() * phi;
}

WeightMatrix weight_derivative(const RbfNetwork& net, const Eigen::VectorXd& phi, const Vec2& s,
                               const AdaptationParams& prm) {
    if (static_cast<std::size_t>(phi.size()) != net.eta()) {
        throw Error(ErrorKind::InvalidInput, "basis length does not match network");
    }
    WeightMatrix out(static_cast<Eigen::Index>(net.eta()), 2);
    weight_derivative_into(phi.data(), net.eta(), s, net.weights().data(), prm, out.data());
    return out;
}

void weight_derivative_into(const double* phi, std::size_t eta, const Vec2& s, const double* w,
                            const AdaptationParams& prm, double* out) {
    const double sv[2] = {s.x(), s.y()};
    simd::active_kernels().weight_rate(phi, eta, sv, w, prm.Pi, prm.kappa, out);
}

}  // namespace nafc::nn
