#ifndef FAIRTUNE_DOMINANCE_HPP
#define FAIRTUNE_DOMINANCE_HPP

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "fairtune/objectives.hpp"

namespace fairtune {

using Point = std::vector<double>;

/// Maps values to minimization orientation (maximized objectives negated).
inline Point orient(std::span<double const> values, ObjectiveSpec const& spec) {
    if (values.size() != spec.size()) throw std::invalid_argument("objective arity mismatch");
    Point p(values.begin(), values.end());
    for (std::size_t i = 0; i < p.size(); ++i)
        if (spec.direction(i) == Direction::Maximize) p[i] = -p[i];
    return p;
}

inline std::vector<Point> orient_all(std::vector<Point> const& points, ObjectiveSpec const& spec) {
    std::vector<Point> out;
    out.reserve(points.size());
    for (auto const& p : points) out.push_back(orient(p, spec));
    return out;
}

inline std::vector<Point> values_of(std::span<FitnessVector const> fitness) {
    std::vector<Point> out;
    out.reserve(fitness.size());
    for (auto const& f : fitness) out.push_back(f.values);
    return out;
}

enum class Dominance { Left, Right, None, Equal };

/// Pareto comparison of two minimization-oriented points.
inline Dominance compare_min(std::span<double const> a, std::span<double const> b) {
    bool a_better = false, b_better = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) a_better = true;
        else if (b[i] < a[i]) b_better = true;
        if (a_better && b_better) return Dominance::None;
    }
    if (a_better) return Dominance::Left;
    if (b_better) return Dominance::Right;
    return Dominance::Equal;
}

inline bool dominates_min(std::span<double const> a, std::span<double const> b) {
    return compare_min(a, b) == Dominance::Left;
}

/// Direction-aware: a no worse everywhere and strictly better somewhere.
inline bool dominates(std::span<double const> a, std::span<double const> b, ObjectiveSpec const& spec) {
    if (a.size() != spec.size() || b.size() != spec.size()) throw std::invalid_argument("objective arity mismatch");
    return dominates_min(orient(a, spec), orient(b, spec));
}

using Fronts = std::vector<std::vector<std::size_t>>;

/// Deb's fast non-dominated sort over minimization-oriented points.
inline Fronts non_dominated_sort_min(std::vector<Point> const& pts) {
    auto const n = pts.size();
    Fronts fronts;
    if (n == 0) return fronts;
    std::vector<std::vector<std::size_t>> dominated_by(n);
    std::vector<std::size_t> domination_count(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            switch (compare_min(pts[i], pts[j])) {
                case Dominance::Left:
                    dominated_by[i].push_back(j);
                    ++domination_count[j];
                    break;
                case Dominance::Right:
                    dominated_by[j].push_back(i);
                    ++domination_count[i];
                    break;
                default: break;
            }
        }
    }
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i)
        if (domination_count[i] == 0) current.push_back(i);
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (auto i : current)
            for (auto j : dominated_by[i])
                if (--domination_count[j] == 0) next.push_back(j);
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

inline void check_arity(std::vector<Point> const& points, ObjectiveSpec const& spec) {
    for (auto const& p : points)
        if (p.size() != spec.size()) throw std::invalid_argument("objective arity mismatch");
}

inline Fronts fast_non_dominated_sort(std::vector<Point> const& points, ObjectiveSpec const& spec) {
    check_arity(points, spec);
    return non_dominated_sort_min(orient_all(points, spec));
}

inline Fronts fast_non_dominated_sort(std::span<FitnessVector const> fitness, ObjectiveSpec const& spec) {
    return fast_non_dominated_sort(values_of(fitness), spec);
}

/// Rank (front index) of every point.
inline std::vector<std::size_t> ranks_from_fronts(Fronts const& fronts, std::size_t n) {
    std::vector<std::size_t> rank(n, 0);
    for (std::size_t r = 0; r < fronts.size(); ++r)
        for (auto i : fronts[r]) rank[i] = r;
    return rank;
}

/// Indices of the non-dominated subset, ascending.
inline std::vector<std::size_t> pareto_front(std::vector<Point> const& points, ObjectiveSpec const& spec) {
    check_arity(points, spec);
    auto const pts = orient_all(points, spec);
    std::vector<std::size_t> front;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < pts.size() && !dominated; ++j)
            dominated = j != i && dominates_min(pts[j], pts[i]);
        if (!dominated) front.push_back(i);
    }
    return front;
}

inline std::vector<std::size_t> pareto_front(std::span<FitnessVector const> fitness, ObjectiveSpec const& spec) {
    return pareto_front(values_of(fitness), spec);
}

/// NSGA-II crowding distance. Boundary points of every objective get +inf;
/// objectives with zero range contribute nothing.
inline std::vector<double> crowding_distance(std::vector<Point> const& front) {
    if (front.empty()) throw std::invalid_argument("crowding distance of an empty front");
    auto const n = front.size();
    auto const m = front.front().size();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, 0.0);
    if (n <= 2) {
        std::fill(dist.begin(), dist.end(), inf);
        return dist;
    }
    std::vector<std::size_t> order(n);
    for (std::size_t k = 0; k < m; ++k) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return front[a][k] < front[b][k]; });
        double const lo = front[order.front()][k];
        double const hi = front[order.back()][k];
        dist[order.front()] = inf;
        dist[order.back()] = inf;
        double const range = hi - lo;
        if (range <= 0.0) continue;
        for (std::size_t i = 1; i + 1 < n; ++i)
            dist[order[i]] += (front[order[i + 1]][k] - front[order[i - 1]][k]) / range;
    }
    return dist;
}

}  // namespace fairtune

#endif
