#ifndef FAIRTUNE_HYPERVOLUME_HPP
#define FAIRTUNE_HYPERVOLUME_HPP

// Exact hypervolume by recursive slicing along the last objective, with a
// sweep for the two-dimensional base case. Intended for the small fronts
// (tens of points, up to six objectives) that multi-objective runs return.

#include <algorithm>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "fairtune/dominance.hpp"

namespace fairtune {

/// Reference point in minimization orientation. In normalized mode, points
/// are first rescaled per objective to [0,1] using [lower, upper].
struct ReferencePoint {
    Point values;
    bool normalized = false;
    Point lower;
    Point upper;

    /// Orient (and, in normalized mode, rescale) a raw objective vector.
    Point transform(std::span<double const> raw, ObjectiveSpec const& spec) const {
        Point p = orient(raw, spec);
        if (normalized) {
            for (std::size_t i = 0; i < p.size(); ++i) {
                double const range = upper[i] - lower[i];
                p[i] = range > 0.0 ? (p[i] - lower[i]) / range : 0.0;
            }
        }
        return p;
    }
};

/// Worst value of every objective over the union of fronts, plus epsilon.
inline ReferencePoint reference_point(std::vector<std::vector<Point>> const& fronts, ObjectiveSpec const& spec,
                                      double epsilon = 0.5, bool normalize = false) {
    std::optional<Point> lo, hi;
    for (auto const& front : fronts) {
        for (auto const& raw : front) {
            auto p = orient(raw, spec);
            if (!lo) {
                lo = p;
                hi = p;
                continue;
            }
            for (std::size_t i = 0; i < p.size(); ++i) {
                (*lo)[i] = std::min((*lo)[i], p[i]);
                (*hi)[i] = std::max((*hi)[i], p[i]);
            }
        }
    }
    if (!lo) throw std::invalid_argument("reference point of an empty set of fronts");
    ReferencePoint ref;
    ref.normalized = normalize;
    if (normalize) {
        ref.lower = *lo;
        ref.upper = *hi;
        ref.values.assign(spec.size(), 1.0 + epsilon);
    } else {
        ref.values = *hi;
        for (auto& v : ref.values) v += epsilon;
    }
    return ref;
}

namespace detail {

inline double hv2d(std::vector<Point> pts, double ref_x, double ref_y) {
    std::sort(pts.begin(), pts.end(), [](Point const& a, Point const& b) {
        return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]);
    });
    double area = 0.0;
    double ceiling = ref_y;
    for (auto const& p : pts) {
        if (p[1] < ceiling) {
            area += (ref_x - p[0]) * (ceiling - p[1]);
            ceiling = p[1];
        }
    }
    return area;
}

/// Inserts p into a mutually non-dominated set (first `dims` coordinates).
inline void insert_nondominated(std::vector<Point>& set, Point p, std::size_t dims) {
    auto head = [dims](Point const& v) { return std::span<double const>(v.data(), dims); };
    for (auto const& q : set) {
        auto c = compare_min(head(q), head(p));
        if (c == Dominance::Left || c == Dominance::Equal) return;
    }
    std::erase_if(set, [&](Point const& q) { return dominates_min(head(p), head(q)); });
    set.push_back(std::move(p));
}

inline double hv_recursive(std::vector<Point> pts, Point const& ref, std::size_t dims) {
    if (pts.empty()) return 0.0;
    if (dims == 1) {
        double best = ref[0];
        for (auto const& p : pts) best = std::min(best, p[0]);
        return ref[0] - best;
    }
    if (dims == 2) return hv2d(std::move(pts), ref[0], ref[1]);

    std::size_t const last = dims - 1;
    std::sort(pts.begin(), pts.end(), [last](Point const& a, Point const& b) { return a[last] < b[last]; });
    double volume = 0.0;
    std::vector<Point> slice;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        insert_nondominated(slice, pts[i], last);
        double const top = i + 1 < pts.size() ? pts[i + 1][last] : ref[last];
        double const depth = top - pts[i][last];
        if (depth > 0.0) volume += depth * hv_recursive(slice, ref, last);
    }
    return volume;
}

}  // namespace detail

/// Hypervolume of already-oriented points against a minimization reference.
inline double hypervolume_min(std::vector<Point> const& pts, Point const& ref) {
    for (auto const& p : pts) {
        if (p.size() != ref.size()) throw std::invalid_argument("objective arity mismatch");
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (p[i] > ref[i]) {
                std::ostringstream msg;
                msg << "point (";
                for (std::size_t k = 0; k < p.size(); ++k) msg << (k ? ", " : "") << p[k];
                msg << ") lies beyond the reference point in objective " << i;
                throw std::invalid_argument(msg.str());
            }
        }
    }
    std::vector<Point> filtered;
    for (auto const& p : pts) detail::insert_nondominated(filtered, p, ref.size());
    return detail::hv_recursive(std::move(filtered), ref, ref.size());
}

inline double hypervolume(std::vector<Point> const& front, ReferencePoint const& ref, ObjectiveSpec const& spec) {
    std::vector<Point> pts;
    pts.reserve(front.size());
    for (auto const& raw : front) pts.push_back(ref.transform(raw, spec));
    return hypervolume_min(pts, ref.values);
}

}  // namespace fairtune

#endif
