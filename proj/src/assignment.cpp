#include "gtl/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace gtl {

EmpiricalMeasure::EmpiricalMeasure(std::vector<Vector> points) : points_(std::move(points)) {
    if (points_.empty()) throw SizeError("empirical measure: no points");
    const std::size_t d = points_.front().dim();
    for (const Vector& p : points_) {
        if (p.dim() != d) throw DimensionError("empirical measure: points of unequal dimension");
        if (!all_finite(p.span())) throw NonFiniteError("empirical measure: non-finite point");
    }
}

EmpiricalMeasure EmpiricalMeasure::translated(const Vector& shift) const {
    std::vector<Vector> pts = points_;
    for (Vector& p : pts) p += shift;
    return EmpiricalMeasure(std::move(pts));
}

EmpiricalMeasure EmpiricalMeasure::permuted(std::span<const std::size_t> order) const {
    if (order.size() != points_.size()) throw SizeError("permuted: order has wrong length");
    std::vector<Vector> pts;
    pts.reserve(order.size());
    for (std::size_t i : order) pts.push_back(points_.at(i));
    return EmpiricalMeasure(std::move(pts));
}

CostMatrix::CostMatrix(Matrix costs) : costs_(std::move(costs)) {
    if (costs_.rows() != costs_.cols()) {
        throw DimensionError("cost matrix: " + std::to_string(costs_.rows()) + "x" +
                             std::to_string(costs_.cols()) + " is not square");
    }
    for (double c : costs_.span()) {
        if (!std::isfinite(c)) throw NonFiniteError("cost matrix: non-finite cost");
        if (c < 0.0) throw RangeError("cost matrix: negative cost");
    }
}

namespace {

void require_paired(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    if (a.size() != b.size()) {
        throw SizeError("clouds of unequal size " + std::to_string(a.size()) + " and " +
                        std::to_string(b.size()));
    }
    if (a.dim() != b.dim()) {
        throw DimensionError("clouds of unequal dimension " + std::to_string(a.dim()) + " and " +
                             std::to_string(b.dim()));
    }
}

double assignment_cost(const CostMatrix& cost, std::span<const std::size_t> perm) {
    double total = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) total += cost(i, perm[i]);
    return total;
}

}  // namespace

CostMatrix squared_distance_costs(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    require_paired(a, b);
    const std::size_t m = a.size();
    Matrix c(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) c(i, j) = distance_sq(a[i], b[j]);
    return CostMatrix(std::move(c));
}

AssignmentResult brute_force_lap(const CostMatrix& cost) {
    const std::size_t m = cost.size();
    if (m > 9) throw SizeError("brute_force_lap: m = " + std::to_string(m) + " exceeds 9");
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    AssignmentResult best{perm, assignment_cost(cost, perm)};
    while (std::next_permutation(perm.begin(), perm.end())) {
        const double c = assignment_cost(cost, perm);
        if (c < best.total_cost) best = {perm, c};
    }
    return best;
}

AssignmentResult solve_lap(const CostMatrix& cost) {
    const std::size_t n = cost.size();
    if (n == 0) return {};
    constexpr long kNone = -1;
    constexpr double kBig = std::numeric_limits<double>::max();

    std::vector<long> rowsol(n, kNone), colsol(n, kNone);
    std::vector<double> v(n, 0.0);
    std::vector<std::size_t> matches(n, 0);
    std::vector<std::size_t> free_rows;
    free_rows.reserve(n);

    // Column reduction.
    for (std::size_t jj = n; jj-- > 0;) {
        double min = cost(0, jj);
        std::size_t imin = 0;
        for (std::size_t i = 1; i < n; ++i) {
            if (cost(i, jj) < min) {
                min = cost(i, jj);
                imin = i;
            }
        }
        v[jj] = min;
        if (++matches[imin] == 1) {
            rowsol[imin] = static_cast<long>(jj);
            colsol[jj] = static_cast<long>(imin);
        } else if (v[jj] < v[static_cast<std::size_t>(rowsol[imin])]) {
            const auto j1 = static_cast<std::size_t>(rowsol[imin]);
            rowsol[imin] = static_cast<long>(jj);
            colsol[jj] = static_cast<long>(imin);
            colsol[j1] = kNone;
        } else {
            colsol[jj] = kNone;
        }
    }

    // Reduction transfer from rows assigned exactly once.
    for (std::size_t i = 0; i < n; ++i) {
        if (matches[i] == 0) {
            free_rows.push_back(i);
        } else if (matches[i] == 1 && n > 1) {
            const auto j1 = static_cast<std::size_t>(rowsol[i]);
            double min = kBig;
            for (std::size_t j = 0; j < n; ++j)
                if (j != j1 && cost(i, j) - v[j] < min) min = cost(i, j) - v[j];
            v[j1] -= min;
        }
    }

    // Augmenting row reduction, two passes. The re-queue count is capped so
    // that near-ties cannot stall the pass; rows left over simply move on to
    // the augmentation phase.
    for (int pass = 0; pass < 2 && !free_rows.empty(); ++pass) {
        std::vector<std::size_t> work = std::move(free_rows);
        free_rows.clear();
        std::size_t k = 0;
        std::size_t requeues = 0;
        const std::size_t max_requeues = n * n;
        while (k < work.size()) {
            const std::size_t i = work[k++];
            double umin = cost(i, 0) - v[0];
            std::size_t j1 = 0, j2 = 0;
            double usubmin = kBig;
            for (std::size_t j = 1; j < n; ++j) {
                const double h = cost(i, j) - v[j];
                if (h < usubmin) {
                    if (h >= umin) {
                        usubmin = h;
                        j2 = j;
                    } else {
                        usubmin = umin;
                        umin = h;
                        j2 = j1;
                        j1 = j;
                    }
                }
            }
            long i0 = colsol[j1];
            const bool strict = umin < usubmin;
            if (strict) {
                v[j1] -= usubmin - umin;
            } else if (i0 != kNone) {
                j1 = j2;
                i0 = colsol[j2];
            }
            rowsol[i] = static_cast<long>(j1);
            colsol[j1] = static_cast<long>(i);
            if (i0 != kNone) {
                rowsol[static_cast<std::size_t>(i0)] = kNone;
                if (strict && requeues < max_requeues) {
                    work[--k] = static_cast<std::size_t>(i0);
                    ++requeues;
                } else {
                    free_rows.push_back(static_cast<std::size_t>(i0));
                }
            }
        }
    }

    // Augmentation: shortest alternating path from each free row.
    std::vector<double> d(n);
    std::vector<std::size_t> pred(n), collist(n);
    for (const std::size_t freerow : free_rows) {
        for (std::size_t j = 0; j < n; ++j) {
            d[j] = cost(freerow, j) - v[j];
            pred[j] = freerow;
            collist[j] = j;
        }
        std::size_t low = 0, up = 0, last = 0, endofpath = 0;
        double min = 0.0;
        bool found = false;
        do {
            if (up == low) {
                last = low;
                min = d[collist[up++]];
                for (std::size_t k = up; k < n; ++k) {
                    const std::size_t j = collist[k];
                    const double h = d[j];
                    if (h <= min) {
                        if (h < min) {
                            up = low;
                            min = h;
                        }
                        collist[k] = collist[up];
                        collist[up++] = j;
                    }
                }
                for (std::size_t k = low; k < up; ++k) {
                    if (colsol[collist[k]] == kNone) {
                        endofpath = collist[k];
                        found = true;
                        break;
                    }
                }
            }
            if (!found) {
                const std::size_t j1 = collist[low++];
                const auto i = static_cast<std::size_t>(colsol[j1]);
                const double h = cost(i, j1) - v[j1] - min;
                for (std::size_t k = up; k < n; ++k) {
                    const std::size_t j = collist[k];
                    const double v2 = cost(i, j) - v[j] - h;
                    if (v2 < d[j]) {
                        pred[j] = i;
                        if (v2 == min) {
                            if (colsol[j] == kNone) {
                                endofpath = j;
                                found = true;
                                break;
                            }
                            collist[k] = collist[up];
                            collist[up++] = j;
                        }
                        d[j] = v2;
                    }
                }
            }
        } while (!found);

        // Columns settled before the last scan get their prices updated.
        for (std::size_t k = 0; k < last; ++k) {
            const std::size_t j0 = collist[k];
            v[j0] += d[j0] - min;
        }
        std::size_t i;
        do {
            i = pred[endofpath];
            colsol[endofpath] = static_cast<long>(i);
            const std::size_t j1 = endofpath;
            endofpath = static_cast<std::size_t>(rowsol[i]);
            rowsol[i] = static_cast<long>(j1);
        } while (i != freerow);
    }

    AssignmentResult result;
    result.permutation.resize(n);
    for (std::size_t i = 0; i < n; ++i) result.permutation[i] = static_cast<std::size_t>(rowsol[i]);
    result.total_cost = assignment_cost(cost, result.permutation);
    return result;
}

TransportSummary transport_summary(const EmpiricalMeasure& inputs, const EmpiricalMeasure& outputs) {
    const CostMatrix cost = squared_distance_costs(inputs, outputs);
    TransportSummary s;
    s.assignment = solve_lap(cost);
    const auto m = static_cast<double>(inputs.size());
    std::size_t fixed = 0;
    for (std::size_t i = 0; i < s.assignment.permutation.size(); ++i)
        if (s.assignment.permutation[i] == i) ++fixed;
    s.ots = static_cast<double>(fixed) / m;
    s.w2 = std::sqrt(std::max(0.0, s.assignment.total_cost / m));
    return s;
}

double wasserstein2(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    return transport_summary(a, b).w2;
}

double ots(const EmpiricalMeasure& inputs, const EmpiricalMeasure& outputs) {
    return transport_summary(inputs, outputs).ots;
}

}  // namespace gtl
