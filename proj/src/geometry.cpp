#include "gtl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace gtl {

Track::Track(std::vector<Vector> states) : states_(std::move(states)) {
    if (states_.size() < 2) throw SizeError("track: needs at least two states");
    const std::size_t d = states_.front().dim();
    for (const Vector& s : states_) {
        if (s.dim() != d) throw DimensionError("track: states of unequal dimension");
        if (!all_finite(s.span())) throw NonFiniteError("track: non-finite state");
    }
}

double lsr(const Track& track) {
    const double chord = distance(track.back(), track.front());
    if (chord <= kDegenerateNorm) throw DegenerateTrackError("lsr: track endpoints coincide");
    double length = 0.0;
    for (std::size_t l = 0; l < track.segments(); ++l) length += distance(track[l + 1], track[l]);
    return length / chord;
}

double lss(const Track& track) {
    Vector tip(track.dim());
    std::size_t kept = 0;
    for (std::size_t l = 0; l < track.segments(); ++l) {
        Vector seg = track[l + 1] - track[l];
        const double len = norm(seg);
        if (len <= kDegenerateNorm) continue;
        seg *= 1.0 / len;
        tip += seg;
        ++kept;
    }
    if (kept == 0) throw DegenerateTrackError("lss: every segment collapses");
    const double chord = norm(tip);
    if (chord <= kDegenerateNorm) return std::numeric_limits<double>::infinity();
    return static_cast<double>(kept) / chord;
}

double track_distance(const Track& a, const Track& b) {
    if (a.segments() != b.segments()) throw DimensionError("track_distance: segment counts differ");
    if (a.dim() != b.dim()) throw DimensionError("track_distance: dimensions differ");
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l <= a.segments(); ++l) best = std::min(best, distance(a[l], b[l]));
    return best;
}

double theorem1_bound(const Vector& xp, const Vector& xq, const Vector& txp, const Vector& txq) {
    if (xp.dim() != xq.dim() || txp.dim() != txq.dim() || xp.dim() != txp.dim())
        throw DimensionError("theorem1_bound: dimension mismatch");
    const double a = distance(xp, xq);
    const double b = distance(txp, txq);
    if (a <= kDegenerateNorm && b <= kDegenerateNorm) return 0.0;
    return a * b / std::hypot(a, b);
}

double track_separation_fraction(std::span<const Track> tracks, double tolerance) {
    if (tracks.size() < 2) throw SizeError("track_separation_fraction: need at least two tracks");
    std::size_t ok = 0, pairs = 0;
    for (std::size_t i = 0; i < tracks.size(); ++i)
        for (std::size_t j = i + 1; j < tracks.size(); ++j, ++pairs) {
            const double bound = theorem1_bound(tracks[i].front(), tracks[j].front(), tracks[i].back(), tracks[j].back());
            if (track_distance(tracks[i], tracks[j]) >= bound - tolerance) ++ok;
        }
    return static_cast<double>(ok) / static_cast<double>(pairs);
}

EmpiricalMeasure geodesic_interpolate(std::span<const GeodesicPair> pairs, double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw RangeError("geodesic_interpolate: t outside [0, 1]");
    std::vector<Vector> pts;
    pts.reserve(pairs.size());
    for (const GeodesicPair& p : pairs) {
        if (p.source.dim() != p.target.dim()) throw DimensionError("geodesic pair: dimension mismatch");
        if (t == 0.0) {
            pts.push_back(p.source);
        } else if (t == 1.0) {
            pts.push_back(p.target);
        } else {
            Vector x(p.source.dim());
            for (std::size_t i = 0; i < x.dim(); ++i) x[i] = (1.0 - t) * p.source[i] + t * p.target[i];
            pts.push_back(std::move(x));
        }
    }
    return EmpiricalMeasure(std::move(pts));
}

Vector optimal_velocity(const GeodesicPair& pair) { return pair.target - pair.source; }

TrackAction track_action(const Track& track) {
    TrackAction a;
    for (std::size_t l = 0; l < track.segments(); ++l) {
        const double sq = distance_sq(track[l + 1], track[l]);
        a.length += std::sqrt(sq);
        a.energy += sq;
    }
    return a;
}

Track straight_line_track(const Vector& x0, const Vector& xn, std::size_t n) {
    if (n == 0) throw SizeError("straight_line_track: n must be at least 1");
    if (x0.dim() != xn.dim()) throw DimensionError("straight_line_track: endpoint dimensions differ");
    std::vector<Vector> states;
    states.reserve(n + 1);
    states.push_back(x0);
    for (std::size_t l = 1; l < n; ++l) {
        const double s = static_cast<double>(l) / static_cast<double>(n);
        Vector x(x0.dim());
        for (std::size_t i = 0; i < x.dim(); ++i) x[i] = (1.0 - s) * x0[i] + s * xn[i];
        states.push_back(std::move(x));
    }
    states.push_back(xn);
    return Track(std::move(states));
}

std::vector<GeodesicPair> optimal_pairs(const EmpiricalMeasure& sources, const EmpiricalMeasure& targets) {
    const AssignmentResult r = solve_lap(squared_distance_costs(sources, targets));
    std::vector<GeodesicPair> pairs;
    pairs.reserve(sources.size());
    for (std::size_t i = 0; i < sources.size(); ++i)
        pairs.push_back({sources[i], targets[r.permutation[i]]});
    return pairs;
}

}  // namespace gtl
