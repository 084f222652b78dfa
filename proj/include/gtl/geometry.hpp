#pragma once

// Data tracks and their line-shape metrics, displacement interpolation along
// the Wasserstein geodesic, and the track separation bound of optimal maps.

#include <cstddef>
#include <span>
#include <vector>

#include "gtl/assignment.hpp"
#include "gtl/numerics.hpp"

namespace gtl {

// Norm below which a segment or chord counts as collapsed.
inline constexpr double kDegenerateNorm = 1e-12;

// x(0) -> x(1) -> ... -> x(n) for one sample; n >= 1 segments.
class Track {
public:
    explicit Track(std::vector<Vector> states);

    std::size_t segments() const noexcept { return states_.size() - 1; }
    std::size_t dim() const noexcept { return states_.front().dim(); }
    const Vector& operator[](std::size_t l) const { return states_[l]; }
    const Vector& front() const { return states_.front(); }
    const Vector& back() const { return states_.back(); }
    const std::vector<Vector>& states() const noexcept { return states_; }

private:
    std::vector<Vector> states_;
};

// A source point and its image under a transport map.
struct GeodesicPair {
    Vector source;
    Vector target;
};

// Polyline length over chord length. Throws DegenerateTrackError when the
// endpoints coincide.
double lsr(const Track& track);

// Line-shape score: chain the unit-normalized segments and divide the kept
// segment count by the resulting chord. Collapsed segments are skipped.
// Throws DegenerateTrackError when every segment collapses; returns +inf
// when the normalized chord itself collapses (kept segments cancel out).
double lss(const Track& track);

// min over l of |a(l) - b(l)|.
double track_distance(const Track& a, const Track& b);

// |xp-xq| |Txp-Txq| / sqrt(|xp-xq|^2 + |Txp-Txq|^2); 0 when both differences
// collapse.
double theorem1_bound(const Vector& xp, const Vector& xq, const Vector& txp, const Vector& txq);

// Fraction of track pairs i < j whose track_distance is at least
// theorem1_bound of their endpoints minus `tolerance`. Needs two tracks.
double track_separation_fraction(std::span<const Track> tracks, double tolerance = 1e-9);

// Points (1-t) x + t T(x); t must lie in [0, 1].
EmpiricalMeasure geodesic_interpolate(std::span<const GeodesicPair> pairs, double t);

// T(x) - x.
Vector optimal_velocity(const GeodesicPair& pair);

struct TrackAction {
    double length = 0.0;  // sum of segment norms
    double energy = 0.0;  // sum of squared segment norms
};
TrackAction track_action(const Track& track);

// Equally spaced states on the segment from x0 to xn.
Track straight_line_track(const Vector& x0, const Vector& xn, std::size_t n);

// Pairs x_i -> outputs[sigma(i)] under the optimal assignment between the two
// clouds.
std::vector<GeodesicPair> optimal_pairs(const EmpiricalMeasure& sources,
                                        const EmpiricalMeasure& targets);

}  // namespace gtl
