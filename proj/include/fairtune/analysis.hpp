#ifndef FAIRTUNE_ANALYSIS_HPP
#define FAIRTUNE_ANALYSIS_HPP

// Strategy-level comparisons over persisted runs: per-objective statistics,
// pooled Pareto counts, hypervolume distributions, run-to-run variability
// and objective correlations.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairtune/dominance.hpp"
#include "fairtune/hypervolume.hpp"
#include "fairtune/runlog.hpp"
#include "fairtune/stats.hpp"

namespace fairtune {

/// Pools every solution, extracts the global front and counts how many
/// members each label contributed. Equal vectors do not dominate each other,
/// so duplicates from different labels are all counted.
inline std::map<std::string, int> count_optimal_by_strategy(std::vector<std::pair<std::string, Point>> const& all,
                                                            ObjectiveSpec const& spec) {
    std::vector<Point> pts;
    std::map<std::string, int> counts;
    for (auto const& [label, p] : all) {
        pts.push_back(p);
        counts.emplace(label, 0);
    }
    for (auto i : pareto_front(pts, spec)) ++counts[all[i].first];
    return counts;
}

struct StrategyResults {
    Strategy strategy = Strategy::SustainDiffusion;
    std::vector<LoadedRun> runs;  // ordered by repetition
};

inline std::vector<StrategyResults> group_by_strategy(std::vector<LoadedRun> runs) {
    std::vector<StrategyResults> out;
    for (auto s : kAllStrategies) {
        StrategyResults g{s, {}};
        for (auto& r : runs)
            if (r.log.strategy == s) g.runs.push_back(r);
        if (g.runs.empty()) continue;
        std::stable_sort(g.runs.begin(), g.runs.end(),
                         [](auto const& a, auto const& b) { return a.info.repetition < b.info.repetition; });
        out.push_back(std::move(g));
    }
    return out;
}

inline std::vector<Point> front_points(LoadedRun const& run, ObjectiveSpec const& spec) {
    std::vector<Point> pts;
    for (auto const& e : run.log.final_front) pts.push_back(e.fitness.metrics.project(spec));
    return pts;
}

/// Mean of one metric over a run's final front.
inline double front_mean(LoadedRun const& run, Objective o) {
    std::vector<double> v;
    for (auto const& e : run.log.final_front) v.push_back(e.fitness.metrics.get(o));
    return stats::mean(v);
}

/// The two series restricted to repetitions present in both, in repetition
/// order, so paired tests never match runs from different seeds.
inline std::pair<std::vector<double>, std::vector<double>> pair_by_repetition(std::vector<int> const& reps_a,
                                                                             std::vector<double> const& a,
                                                                             std::vector<int> const& reps_b,
                                                                             std::vector<double> const& b) {
    std::map<int, double> mb;
    for (std::size_t i = 0; i < reps_b.size(); ++i) mb.emplace(reps_b[i], b[i]);
    std::map<int, std::pair<double, double>> both;
    for (std::size_t i = 0; i < reps_a.size(); ++i)
        if (auto it = mb.find(reps_a[i]); it != mb.end()) both.emplace(reps_a[i], std::pair{a[i], it->second});
    std::pair<std::vector<double>, std::vector<double>> out;
    for (auto const& [rep, v] : both) {
        out.first.push_back(v.first);
        out.second.push_back(v.second);
    }
    return out;
}

inline std::vector<int> repetitions_of(StrategyResults const& g) {
    std::vector<int> r;
    for (auto const& run : g.runs) r.push_back(run.info.repetition);
    return r;
}

struct ObjectiveComparison {
    stats::TestResult wilcoxon;
    stats::EffectSize a12;  // > 0.5: reference strategy improves on the other
};

struct ObjectiveSummary {
    Strategy strategy;
    Objective objective;
    std::vector<double> per_run;  // front mean per repetition
    double mean = 0.0;
    double stddev = 0.0;
    std::optional<ObjectiveComparison> vs_reference;
};

inline constexpr int kObjectiveComparisons = 6;

/// Per-run front means for every tracked objective. When `reference` is
/// present, every other strategy is compared to it over their shared
/// repetitions with a one-sided paired Wilcoxon test ("reference improves")
/// at the Bonferroni threshold 0.05/6, plus A12 in the improvement direction.
inline std::vector<ObjectiveSummary> summarize_objectives(std::vector<StrategyResults> const& groups,
                                                          std::optional<Strategy> reference) {
    StrategyResults const* ref = nullptr;
    if (reference)
        for (auto const& g : groups)
            if (g.strategy == *reference) ref = &g;

    std::vector<ObjectiveSummary> out;
    for (auto const& g : groups) {
        for (auto o : kAllObjectives) {
            ObjectiveSummary s{g.strategy, o, {}, 0.0, 0.0, std::nullopt};
            for (auto const& r : g.runs) s.per_run.push_back(front_mean(r, o));
            s.mean = stats::mean(s.per_run);
            s.stddev = stats::stddev(s.per_run);
            if (ref && &g != ref) {
                std::vector<double> base;
                for (auto const& r : ref->runs) base.push_back(front_mean(r, o));
                auto [x, y] = pair_by_repetition(repetitions_of(*ref), base, repetitions_of(g), s.per_run);
                if (!x.empty()) {
                    bool const lower_better = direction_of(o) == Direction::Minimize;
                    auto const alt = lower_better ? stats::Alternative::Less : stats::Alternative::Greater;
                    ObjectiveComparison c;
                    c.wilcoxon = stats::wilcoxon_signed_rank(
                        x, y, alt, stats::bonferroni_threshold(stats::kAlpha, kObjectiveComparisons));
                    c.a12 = stats::a12_improvement(x, y, lower_better);
                    s.vs_reference = c;
                }
            }
            out.push_back(std::move(s));
        }
    }
    return out;
}

struct ParetoMember {
    Strategy strategy;
    int repetition;
    std::string path;
    int line;
    Evaluated solution;
};

struct ParetoCounts {
    std::vector<std::pair<Strategy, int>> counts;  // every strategy, in canonical order
    std::vector<ParetoMember> front;
    std::size_t pooled = 0;
};

inline ParetoCounts pareto_counts(std::vector<StrategyResults> const& groups, ObjectiveSpec const& spec) {
    std::vector<ParetoMember> all;
    std::vector<Point> pts;
    for (auto const& g : groups)
        for (auto const& r : g.runs)
            for (auto const& e : r.log.final_front) {
                all.push_back({g.strategy, r.info.repetition, r.path, r.front_line, e});
                pts.push_back(e.fitness.metrics.project(spec));
            }
    ParetoCounts out;
    out.pooled = all.size();
    std::map<Strategy, int> counts;
    for (auto const& g : groups) counts[g.strategy] = 0;
    for (auto i : pareto_front(pts, spec)) {
        ++counts[all[i].strategy];
        out.front.push_back(all[i]);
    }
    for (auto const& g : groups) out.counts.emplace_back(g.strategy, counts[g.strategy]);
    return out;
}

struct HypervolumeSeries {
    Strategy strategy;
    std::vector<int> repetitions;
    std::vector<std::string> paths;
    std::vector<double> values;
    std::optional<ObjectiveComparison> vs_reference;  // reference HV greater
};

struct HypervolumeReport {
    ObjectiveSpec spec;
    ReferencePoint reference;
    double epsilon = 0.5;
    std::vector<HypervolumeSeries> series;
};

/// Per-run hypervolume against one reference point built from the union of
/// every run's front.
inline HypervolumeReport hypervolume_report(std::vector<StrategyResults> const& groups, ObjectiveSpec const& spec,
                                            double epsilon, bool normalize, std::optional<Strategy> reference) {
    std::vector<std::vector<Point>> fronts;
    for (auto const& g : groups)
        for (auto const& r : g.runs) fronts.push_back(front_points(r, spec));
    HypervolumeReport rep{spec, reference_point(fronts, spec, epsilon, normalize), epsilon, {}};
    for (auto const& g : groups) {
        HypervolumeSeries s{g.strategy, {}, {}, {}, std::nullopt};
        for (auto const& r : g.runs) {
            s.repetitions.push_back(r.info.repetition);
            s.paths.push_back(r.path);
            s.values.push_back(hypervolume(front_points(r, spec), rep.reference, spec));
        }
        rep.series.push_back(std::move(s));
    }
    if (reference) {
        HypervolumeSeries const* ref = nullptr;
        for (auto const& s : rep.series)
            if (s.strategy == *reference) ref = &s;
        for (auto& s : rep.series) {
            if (!ref || &s == ref) continue;
            auto [x, y] = pair_by_repetition(ref->repetitions, ref->values, s.repetitions, s.values);
            if (x.empty()) continue;
            ObjectiveComparison c;
            c.wilcoxon = stats::wilcoxon_signed_rank(x, y, stats::Alternative::Greater);
            c.a12 = stats::a12_improvement(x, y, false);
            s.vs_reference = c;
        }
    }
    return rep;
}

struct VariabilityRow {
    Objective objective;
    stats::TestResult kruskal;
    std::optional<double> dunn_significant_fraction;  // only when Kruskal-Wallis is significant
};

/// Run-to-run consistency of one strategy: Kruskal-Wallis over the per-run
/// front values of each objective, Dunn's test when significant.
inline std::vector<VariabilityRow> variability(StrategyResults const& g) {
    std::vector<VariabilityRow> out;
    if (g.runs.size() < 2) return out;
    for (auto o : kAllObjectives) {
        std::vector<std::vector<double>> groups;
        for (auto const& r : g.runs) {
            std::vector<double> v;
            for (auto const& e : r.log.final_front) v.push_back(e.fitness.metrics.get(o));
            groups.push_back(std::move(v));
        }
        VariabilityRow row{o, stats::kruskal_wallis(groups), std::nullopt};
        if (row.kruskal.significant) row.dunn_significant_fraction = stats::significant_pair_fraction(stats::dunn_posthoc(groups));
        out.push_back(row);
    }
    return out;
}

struct CorrelationRow {
    Objective a;
    Objective b;
    std::optional<double> rho;
};

/// Spearman correlation between every pair of tracked objectives over the
/// pooled final-front solutions of one strategy.
inline std::vector<CorrelationRow> objective_correlations(StrategyResults const& g) {
    std::vector<CorrelationRow> out;
    std::vector<Metrics> pooled;
    for (auto const& r : g.runs)
        for (auto const& e : r.log.final_front) pooled.push_back(e.fitness.metrics);
    for (std::size_t i = 0; i < kAllObjectives.size(); ++i)
        for (std::size_t j = i + 1; j < kAllObjectives.size(); ++j) {
            CorrelationRow row{kAllObjectives[i], kAllObjectives[j], std::nullopt};
            if (pooled.size() >= 3) {
                std::vector<double> x, y;
                for (auto const& m : pooled) {
                    x.push_back(m.get(row.a));
                    y.push_back(m.get(row.b));
                }
                row.rho = stats::spearman(x, y);
            }
            out.push_back(row);
        }
    return out;
}

}  // namespace fairtune

#endif
