#ifndef FAIRTUNE_STATS_HPP
#define FAIRTUNE_STATS_HPP

// Non-parametric tests used to compare search strategies: Wilcoxon
// signed-rank (exact for small samples), Vargha-Delaney A12, Kruskal-Wallis
// with Dunn's post-hoc comparisons, and Spearman's rank correlation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

namespace fairtune::stats {

inline constexpr double kAlpha = 0.05;

/// Per-comparison threshold after Bonferroni correction over m tests.
inline constexpr double bonferroni_threshold(double alpha, int comparisons) { return alpha / comparisons; }

enum class Alternative { Greater, Less, TwoSided };
enum class EffectClass { Small, Medium, Large };

inline std::string_view to_string(EffectClass c) {
    switch (c) {
        case EffectClass::Small: return "small";
        case EffectClass::Medium: return "medium";
        case EffectClass::Large: return "large";
    }
    return "?";
}

struct EffectSize {
    double value = 0.5;
    EffectClass magnitude = EffectClass::Small;
};

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    double raw_p_value = 1.0;  // before any multiple-comparison correction
    bool significant = false;
    bool degenerate = false;  // e.g. all paired differences zero
    std::optional<EffectSize> effect;
};

/// >= 0.72 large, [0.64, 0.72) medium, otherwise small.
inline EffectClass classify_a12(double a12) {
    if (a12 >= 0.72) return EffectClass::Large;
    if (a12 >= 0.64) return EffectClass::Medium;
    return EffectClass::Small;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

inline double chi_square_sf(double x, double df) {
    if (x <= 0.0) return 1.0;
    return boost::math::gamma_q(df / 2.0, x / 2.0);
}

struct Ranking {
    std::vector<double> ranks;             // 1-based, ties share the average rank
    std::vector<std::size_t> tie_sizes;    // sizes of tie groups with more than one member
};

inline Ranking average_ranks(std::vector<double> const& values) {
    auto const n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    Ranking r;
    r.ranks.assign(n, 0.0);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        double const avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) r.ranks[order[k]] = avg;
        if (j > i) r.tie_sizes.push_back(j - i + 1);
        i = j + 1;
    }
    return r;
}

inline double tie_sum(Ranking const& r) {
    double s = 0.0;
    for (auto t : r.tie_sizes) s += std::pow(static_cast<double>(t), 3) - static_cast<double>(t);
    return s;
}

inline constexpr std::size_t kWilcoxonExactLimit = 20;

/// Paired signed-rank test on a - b. Zero differences are dropped, tied
/// |differences| share average ranks. Exact null distribution (conditional on
/// the observed ranks) for up to 20 non-zero pairs, normal approximation with
/// tie and continuity correction beyond. The statistic is W+, the rank sum of
/// positive differences; "greater" tests a > b.
inline TestResult wilcoxon_signed_rank(std::vector<double> const& a, std::vector<double> const& b,
                                       Alternative alt = Alternative::TwoSided, double threshold = kAlpha) {
    if (a.size() != b.size()) throw std::invalid_argument("wilcoxon: samples must be paired");
    std::vector<double> diffs;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) diffs.push_back(a[i] - b[i]);

    TestResult res;
    if (diffs.empty()) {
        res.degenerate = true;
        return res;
    }
    std::vector<double> mags;
    for (double d : diffs) mags.push_back(std::fabs(d));
    auto const ranking = average_ranks(mags);
    auto const n = diffs.size();

    double w_plus = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (diffs[i] > 0) w_plus += ranking.ranks[i];
    res.statistic = w_plus;

    double p_greater = 1.0, p_less = 1.0;
    if (n <= kWilcoxonExactLimit) {
        // Average ranks are multiples of 1/2, so doubled ranks are integers.
        std::vector<int> doubled(n);
        int total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            doubled[i] = static_cast<int>(std::lround(ranking.ranks[i] * 2.0));
            total += doubled[i];
        }
        std::vector<std::uint64_t> ways(static_cast<std::size_t>(total) + 1, 0);
        ways[0] = 1;
        int reach = 0;
        for (int r : doubled) {
            for (int s = reach; s >= 0; --s)
                if (ways[static_cast<std::size_t>(s)]) ways[static_cast<std::size_t>(s + r)] += ways[static_cast<std::size_t>(s)];
            reach += r;
        }
        auto const observed = static_cast<int>(std::lround(w_plus * 2.0));
        std::uint64_t ge = 0, le = 0;
        for (int s = 0; s <= total; ++s) {
            if (s >= observed) ge += ways[static_cast<std::size_t>(s)];
            if (s <= observed) le += ways[static_cast<std::size_t>(s)];
        }
        double const all = std::ldexp(1.0, static_cast<int>(n));
        p_greater = static_cast<double>(ge) / all;
        p_less = static_cast<double>(le) / all;
    } else {
        double const nn = static_cast<double>(n);
        double const mean = nn * (nn + 1.0) / 4.0;
        double const var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_sum(ranking) / 48.0;
        double const sd = std::sqrt(var);
        p_greater = normal_sf((w_plus - mean - 0.5) / sd);
        p_less = normal_cdf((w_plus - mean + 0.5) / sd);
    }
    switch (alt) {
        case Alternative::Greater: res.p_value = p_greater; break;
        case Alternative::Less: res.p_value = p_less; break;
        case Alternative::TwoSided: res.p_value = std::min(1.0, 2.0 * std::min(p_greater, p_less)); break;
    }
    res.p_value = std::clamp(res.p_value, 0.0, 1.0);
    res.raw_p_value = res.p_value;
    res.significant = res.p_value < threshold;
    return res;
}

/// Probability that a draw from `a` exceeds one from `b` (ties count half).
inline EffectSize vargha_delaney_a12(std::vector<double> const& a, std::vector<double> const& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("A12 needs two non-empty samples");
    double wins = 0.0;
    for (double x : a)
        for (double y : b) {
            if (x > y) wins += 1.0;
            else if (x == y) wins += 0.5;
        }
    double const v = wins / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
    return {v, classify_a12(v)};
}

/// A12 oriented so that values above 0.5 mean `a` improves on `b`: for a
/// minimized quantity this is 1 - A12(a, b).
inline EffectSize a12_improvement(std::vector<double> const& a, std::vector<double> const& b, bool lower_is_better) {
    auto e = vargha_delaney_a12(a, b);
    if (lower_is_better) e.value = 1.0 - e.value;
    e.magnitude = classify_a12(e.value);
    return e;
}

namespace detail {

struct PooledRanks {
    std::vector<std::vector<double>> group_ranks;
    Ranking ranking;
    std::size_t total = 0;
};

inline PooledRanks pool_ranks(std::vector<std::vector<double>> const& groups) {
    std::vector<double> pooled;
    for (auto const& g : groups) pooled.insert(pooled.end(), g.begin(), g.end());
    PooledRanks out;
    out.ranking = average_ranks(pooled);
    out.total = pooled.size();
    std::size_t k = 0;
    for (auto const& g : groups) {
        out.group_ranks.emplace_back(out.ranking.ranks.begin() + static_cast<std::ptrdiff_t>(k),
                                     out.ranking.ranks.begin() + static_cast<std::ptrdiff_t>(k + g.size()));
        k += g.size();
    }
    return out;
}

inline void check_groups(std::vector<std::vector<double>> const& groups) {
    if (groups.size() < 2) throw std::invalid_argument("need at least two groups");
    for (auto const& g : groups)
        if (g.empty()) throw std::invalid_argument("empty group");
}

}  // namespace detail

/// H statistic on pooled average ranks with tie correction; p from the
/// chi-square distribution with k-1 degrees of freedom.
inline TestResult kruskal_wallis(std::vector<std::vector<double>> const& groups, double threshold = kAlpha) {
    detail::check_groups(groups);
    auto const pr = detail::pool_ranks(groups);
    double const n = static_cast<double>(pr.total);
    double const correction = 1.0 - tie_sum(pr.ranking) / (n * n * n - n);
    TestResult res;
    if (correction <= 0.0) {
        res.degenerate = true;  // every value identical
        return res;
    }
    double sum = 0.0;
    for (auto const& r : pr.group_ranks) {
        double const rs = std::accumulate(r.begin(), r.end(), 0.0);
        sum += rs * rs / static_cast<double>(r.size());
    }
    double const h = (12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0)) / correction;
    res.statistic = std::max(h, 0.0);
    res.p_value = chi_square_sf(res.statistic, static_cast<double>(groups.size() - 1));
    res.raw_p_value = res.p_value;
    res.significant = res.p_value < threshold;
    return res;
}

/// Pairwise Dunn z-tests on mean ranks (tie-corrected), two-sided, with
/// Bonferroni-adjusted p-values. Result is a symmetric k x k matrix; the
/// diagonal is p = 1.
inline std::vector<std::vector<TestResult>> dunn_posthoc(std::vector<std::vector<double>> const& groups,
                                                        double alpha = kAlpha) {
    detail::check_groups(groups);
    auto const k = groups.size();
    auto const pr = detail::pool_ranks(groups);
    double const n = static_cast<double>(pr.total);
    double const base_var = n * (n + 1.0) / 12.0 - tie_sum(pr.ranking) / (12.0 * (n - 1.0));
    double const comparisons = static_cast<double>(k * (k - 1) / 2);

    std::vector<double> mean_rank(k);
    for (std::size_t i = 0; i < k; ++i)
        mean_rank[i] = std::accumulate(pr.group_ranks[i].begin(), pr.group_ranks[i].end(), 0.0) /
                       static_cast<double>(pr.group_ranks[i].size());

    std::vector<std::vector<TestResult>> out(k, std::vector<TestResult>(k));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            TestResult t;
            double const se = std::sqrt(base_var * (1.0 / static_cast<double>(groups[i].size()) +
                                                    1.0 / static_cast<double>(groups[j].size())));
            double const diff = mean_rank[i] - mean_rank[j];
            if (se > 0.0) {
                t.statistic = diff / se;
                t.raw_p_value = std::min(1.0, 2.0 * normal_sf(std::fabs(t.statistic)));
            } else {
                t.degenerate = true;
                t.raw_p_value = 1.0;
            }
            t.p_value = std::min(1.0, t.raw_p_value * comparisons);
            t.significant = t.p_value < alpha;
            out[i][j] = t;
            t.statistic = -t.statistic;
            out[j][i] = t;
        }
    }
    return out;
}

/// Fraction of the k(k-1)/2 group pairs Dunn's test flags as significant.
inline double significant_pair_fraction(std::vector<std::vector<TestResult>> const& dunn) {
    std::size_t sig = 0, pairs = 0;
    for (std::size_t i = 0; i < dunn.size(); ++i)
        for (std::size_t j = i + 1; j < dunn.size(); ++j) {
            ++pairs;
            if (dunn[i][j].significant) ++sig;
        }
    return pairs ? static_cast<double>(sig) / static_cast<double>(pairs) : 0.0;
}

/// Pearson correlation of average ranks; nullopt when either side has no
/// rank variance.
inline std::optional<double> spearman(std::vector<double> const& x, std::vector<double> const& y) {
    if (x.size() != y.size()) throw std::invalid_argument("spearman: samples must be paired");
    if (x.size() < 3) throw std::invalid_argument("spearman: need at least three pairs");
    auto const rx = average_ranks(x).ranks;
    auto const ry = average_ranks(y).ranks;
    double const n = static_cast<double>(x.size());
    double const mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    double const my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline double mean(std::vector<double> const& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Sample standard deviation (n - 1); 0 for fewer than two values.
inline double stddev(std::vector<double> const& v) {
    if (v.size() < 2) return 0.0;
    double const m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace fairtune::stats

#endif
