#pragma once

// Exact linear assignment, discrete Wasserstein-2 distance between equal-size
// uniform point clouds, and the optimal transport score.

#include <cstddef>
#include <span>
#include <vector>

#include "gtl/numerics.hpp"

namespace gtl {

// Finite uniform-weight point cloud; every point carries mass 1/m.
class EmpiricalMeasure {
public:
    // Throws SizeError when empty, DimensionError on mixed dimensions.
    explicit EmpiricalMeasure(std::vector<Vector> points);

    std::size_t size() const noexcept { return points_.size(); }
    std::size_t dim() const noexcept { return points_.front().dim(); }
    const Vector& operator[](std::size_t i) const { return points_[i]; }
    const std::vector<Vector>& points() const noexcept { return points_; }

    EmpiricalMeasure translated(const Vector& shift) const;
    // Point i of the result is point order[i] of this cloud.
    EmpiricalMeasure permuted(std::span<const std::size_t> order) const;

private:
    std::vector<Vector> points_;
};

// Square matrix of nonnegative finite costs.
class CostMatrix {
public:
    explicit CostMatrix(Matrix costs);

    std::size_t size() const noexcept { return costs_.rows(); }
    double operator()(std::size_t i, std::size_t j) const { return costs_(i, j); }
    const Matrix& matrix() const noexcept { return costs_; }

private:
    Matrix costs_;
};

// c[i][j] = |a_i - b_j|^2
CostMatrix squared_distance_costs(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

struct AssignmentResult {
    // Row i is assigned to column permutation[i].
    std::vector<std::size_t> permutation;
    double total_cost = 0.0;
};

// Exhaustive search over all m! permutations in lexicographic order; the
// first strictly better permutation wins, so ties resolve to the
// lexicographically smallest one. Throws SizeError for m > 9.
AssignmentResult brute_force_lap(const CostMatrix& cost);

// Jonker-Volgenant shortest augmenting path solver, O(m^3).
//
// Deterministic for a fixed input: column reduction scans columns from last
// to first and rows from first to last; augmenting row reduction runs two
// passes over the free rows in list order; augmentation processes the
// remaining free rows in list order and always scans columns by index with
// strict comparisons, so the first minimum encountered wins.
AssignmentResult solve_lap(const CostMatrix& cost);

// sqrt(min_sigma (1/m) sum_i |a_i - b_sigma(i)|^2). Unequal sizes are rejected.
double wasserstein2(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

// Fraction of indices i whose optimal partner is i itself, where
// outputs[i] = f(inputs[i]). 1 means f is a discrete optimal transport map.
double ots(const EmpiricalMeasure& inputs, const EmpiricalMeasure& outputs);

// OTS and W2 from a single assignment solve.
struct TransportSummary {
    double ots = 0.0;
    double w2 = 0.0;
    AssignmentResult assignment;
};
TransportSummary transport_summary(const EmpiricalMeasure& inputs, const EmpiricalMeasure& outputs);

}  // namespace gtl
