#pragma once

// Hand-rolled generators shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "gtl/assignment.hpp"
#include "gtl/geometry.hpp"
#include "gtl/network.hpp"
#include "gtl/numerics.hpp"

namespace gtl::test {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
    Matrix m(rows, cols);
    for (double& v : m.span()) v = scale * rng.normal();
    return m;
}

inline EmpiricalMeasure random_cloud(std::size_t m, std::size_t dim, Rng& rng, double scale = 1.0) {
    std::vector<Vector> pts;
    for (std::size_t i = 0; i < m; ++i) pts.push_back(gaussian_vector(dim, scale, rng));
    return EmpiricalMeasure(std::move(pts));
}

inline CostMatrix random_costs(std::size_t m, Rng& rng) {
    Matrix c(m, m);
    for (double& v : c.span()) v = rng.uniform(0.0, 10.0);
    return CostMatrix(std::move(c));
}

// Integer costs in [0, k) produce many exact ties.
inline CostMatrix random_integer_costs(std::size_t m, std::uint64_t k, Rng& rng) {
    Matrix c(m, m);
    for (double& v : c.span()) v = static_cast<double>(rng.below(k));
    return CostMatrix(std::move(c));
}

inline Track random_track(std::size_t segments, std::size_t dim, Rng& rng) {
    std::vector<Vector> states;
    for (std::size_t l = 0; l <= segments; ++l) states.push_back(gaussian_vector(dim, 1.0, rng));
    return Track(std::move(states));
}

// Random bias-free network: optional lift and head, one or two stages.
inline Network random_network(Rng& rng, ArchType type, std::size_t max_width = 8, std::size_t max_depth = 3) {
    Architecture arch;
    arch.type = type;
    arch.input_dim = 1 + rng.below(max_width);
    const std::size_t n_stages = 1 + rng.below(2);
    for (std::size_t k = 0; k < n_stages; ++k) arch.stage_widths.push_back(1 + rng.below(max_width));
    arch.blocks_per_stage = 1 + rng.below(max_depth);
    arch.output_dim = 1 + rng.below(max_width);
    return build_network(arch, rng.next_u64());
}

// Central differences on `coords` random weight coordinates; returns the
// largest |g - fd| / max(|g|, |fd|, 1e-4).
inline double max_fd_relative_error(Network net, const Matrix& inputs, const Matrix& targets, Loss loss,
                                    std::size_t coords, Rng& rng, double step = 1e-6) {
    const Gradients g = backward(net, inputs, targets, loss, false);
    auto ws = weights(net);
    const auto gs = weights(g.weights);
    double worst = 0.0;
    for (std::size_t c = 0; c < coords; ++c) {
        const std::size_t m = rng.below(ws.size());
        Matrix& w = *ws[m];
        const std::size_t i = rng.below(w.rows()), j = rng.below(w.cols());
        const double saved = w(i, j);
        w(i, j) = saved + step;
        const double up = batch_loss(forward_batch(net, inputs), targets, loss);
        w(i, j) = saved - step;
        const double down = batch_loss(forward_batch(net, inputs), targets, loss);
        w(i, j) = saved;
        const double fd = (up - down) / (2.0 * step);
        const double an = (*gs[m])(i, j);
        worst = std::max(worst, std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-4}));
    }
    return worst;
}

// Random layer, inputs and output gradient whose activation pattern keeps a
// margin of at least `margin` from zero in every pre-activation.
struct VariationInstance {
    Matrix w, x, g;
};

inline VariationInstance random_variation_instance(std::size_t rows, std::size_t dim, std::size_t m, Rng& rng,
                                                   double margin = 1e-2) {
    for (;;) {
        VariationInstance v{random_matrix(rows, dim, rng), random_matrix(dim, m, rng), random_matrix(rows, m, rng)};
        const Matrix pre = matmul(v.w, v.x);
        bool ok = true;
        for (double p : pre.values()) ok = ok && std::abs(p) >= margin;
        if (ok) return v;
    }
}

}  // namespace gtl::test
