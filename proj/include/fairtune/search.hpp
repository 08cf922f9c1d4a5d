#ifndef FAIRTUNE_SEARCH_HPP
#define FAIRTUNE_SEARCH_HPP

// Search strategies over configurations: NSGA-II, random search, a
// single-objective tournament GA, and the fixed-configuration baselines.
// Every strategy is deterministic given its seed and evaluator.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "fairtune/dominance.hpp"
#include "fairtune/evaluation.hpp"
#include "fairtune/genotype.hpp"
#include "fairtune/objectives.hpp"
#include "fairtune/rng.hpp"

namespace fairtune {

inline constexpr std::string_view kDefaultBasePrompt = "Photo portrait of a Software Engineer that codes";
inline constexpr std::string_view kFairPromptSuffix = "such that it fairly represents different genders and ethnicities";

enum class Strategy {
    SustainDiffusion,
    RandomSearch,
    GA_Single,
    Ablation_Q,
    Ablation_QB,
    Ablation_QE,
    NoPromptEng,
    SD3Default,
    FairPrompt,
};

inline constexpr std::array<Strategy, 9> kAllStrategies{
    Strategy::SustainDiffusion, Strategy::RandomSearch, Strategy::GA_Single,  Strategy::Ablation_Q, Strategy::Ablation_QB,
    Strategy::Ablation_QE,      Strategy::NoPromptEng,  Strategy::SD3Default, Strategy::FairPrompt};

inline std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::SustainDiffusion: return "SustainDiffusion";
        case Strategy::RandomSearch: return "RandomSearch";
        case Strategy::GA_Single: return "GA_Single";
        case Strategy::Ablation_Q: return "Ablation_Q";
        case Strategy::Ablation_QB: return "Ablation_QB";
        case Strategy::Ablation_QE: return "Ablation_QE";
        case Strategy::NoPromptEng: return "NoPromptEng";
        case Strategy::SD3Default: return "SD3Default";
        case Strategy::FairPrompt: return "FairPrompt";
    }
    return "?";
}

inline std::optional<Strategy> parse_strategy(std::string_view s) {
    for (auto st : kAllStrategies)
        if (s == to_string(st)) return st;
    return std::nullopt;
}

struct SearchConfig {
    int population_size = 30;
    int generations = 25;
    double crossover_prob = 0.8;
    double mutation_prob = 0.2;
    double inner_mutation_prob = 0.2;
    int selection_rate = 5;  // size of the mating pool drawn from the ranked population
    ObjectiveSpec objective_spec = ObjectiveSpec::search_default();
    std::uint64_t seed = 0;
    int images_per_individual = 20;
    std::string base_prompt = std::string(kDefaultBasePrompt);
    SearchBounds bounds;

    void validate() const {
        auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
        if (!prob(crossover_prob) || !prob(mutation_prob) || !prob(inner_mutation_prob))
            throw ConfigError("probabilities must lie in [0,1]");
        if (population_size < 2) throw ConfigError("population size must be at least 2");
        if (generations < 0) throw ConfigError("generations must be non-negative");
        if (selection_rate < 1) throw ConfigError("selection rate must be at least 1");
        if (images_per_individual < 1) throw ConfigError("images per individual must be at least 1");
        if (base_prompt.empty()) throw ConfigError("base prompt must not be empty");
        bounds.validate();
    }
};

/// An evaluated configuration as it appears in logs.
struct Evaluated {
    Individual individual;
    std::string key;
    FitnessVector fitness;

    friend bool operator==(Evaluated const&, Evaluated const&) = default;
};

struct GenerationSnapshot {
    int generation_index = 0;
    std::vector<Evaluated> population;
    int new_evaluations = 0;
    std::vector<std::size_t> front_ranks;

    friend bool operator==(GenerationSnapshot const&, GenerationSnapshot const&) = default;
};

struct RunLog {
    Strategy strategy = Strategy::SustainDiffusion;
    SearchConfig config;
    std::vector<GenerationSnapshot> snapshots;
    std::vector<Evaluated> final_front;
    int total_evaluations = 0;
};

// ---------------------------------------------------------------------------
// Variation operators

/// Child 1 takes genes [0, cut] from a and the rest from b; child 2 the
/// opposite. Keyword-set overlap created by the exchange is repaired.
inline std::pair<Individual, Individual> crossover_single_point(Individual const& a, Individual const& b,
                                                                std::size_t cut) {
    if (cut >= kGeneCount) throw std::invalid_argument("crossover cut out of range");
    Individual c1 = a, c2 = b;
    for (std::size_t i = cut + 1; i < kGeneCount; ++i) {
        copy_gene(c1, b, kGeneOrder[i]);
        copy_gene(c2, a, kGeneOrder[i]);
    }
    repair_disjoint(c1);
    repair_disjoint(c2);
    return {std::move(c1), std::move(c2)};
}

/// Random-reset mutation: every gene is independently replaced, with
/// probability inner_p, by the corresponding gene of one fresh random individual.
inline Individual mutate(Individual const& ind, Rng& rng, double inner_p, SearchBounds const& bounds,
                         KeywordPools const& pools) {
    auto const donor = new_random(rng, bounds, pools);
    Individual out = ind;
    for (auto gene : kGeneOrder)
        if (rng.bernoulli(inner_p)) copy_gene(out, donor, gene);
    repair_disjoint(out);
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation bookkeeping shared by all strategies

class SearchContext {
public:
    SearchContext(SearchConfig const& cfg, Evaluator& evaluator, KeywordPools const& pools,
                  EvaluationCache* shared_cache = nullptr, EvaluationListener listener = {})
        : cfg_(cfg), evaluator_(evaluator), pools_(pools), cache_(shared_cache ? shared_cache : &own_cache_),
          listener_(std::move(listener)) {}

    /// Evaluates (or recalls) one configuration; counts fresh evaluations.
    Evaluated evaluate(Individual const& ind, std::string const& base_prompt) {
        check_valid(ind, cfg_.bounds, &pools_);
        auto key = canonical_key(ind);
        auto res = cache_get_or_evaluate(*cache_, evaluator_, ind, base_prompt, cfg_.images_per_individual,
                                         request_seed(cfg_.seed, key), listener_);
        if (!res.was_cached) ++fresh_;
        return {ind, std::move(key), fitness_vector(res.batch, cfg_.objective_spec)};
    }
    Evaluated evaluate(Individual const& ind) { return evaluate(ind, cfg_.base_prompt); }

    /// Fresh evaluations since the last call.
    int take_fresh() { return std::exchange(fresh_, 0); }

private:
    SearchConfig const& cfg_;
    Evaluator& evaluator_;
    KeywordPools const& pools_;
    EvaluationCache own_cache_;
    EvaluationCache* cache_;
    EvaluationListener listener_;
    int fresh_ = 0;
};

namespace detail {

inline std::vector<Point> oriented_values(std::vector<Evaluated> const& pop, ObjectiveSpec const& spec) {
    std::vector<Point> out;
    out.reserve(pop.size());
    for (auto const& e : pop) out.push_back(orient(e.fitness.values, spec));
    return out;
}

struct RankInfo {
    std::vector<std::size_t> rank;
    std::vector<double> crowding;
};

inline RankInfo rank_population(std::vector<Evaluated> const& pop, ObjectiveSpec const& spec) {
    auto const pts = oriented_values(pop, spec);
    auto const fronts = non_dominated_sort_min(pts);
    RankInfo info;
    info.rank = ranks_from_fronts(fronts, pop.size());
    info.crowding.assign(pop.size(), 0.0);
    for (auto const& front : fronts) {
        std::vector<Point> fp;
        for (auto i : front) fp.push_back(pts[i]);
        auto const cd = crowding_distance(fp);
        for (std::size_t k = 0; k < front.size(); ++k) info.crowding[front[k]] = cd[k];
    }
    return info;
}

/// (rank asc, crowding desc, position asc)
inline bool crowded_less(RankInfo const& info, std::size_t a, std::size_t b) {
    if (info.rank[a] != info.rank[b]) return info.rank[a] < info.rank[b];
    if (info.crowding[a] != info.crowding[b]) return info.crowding[a] > info.crowding[b];
    return a < b;
}

/// Keeps the first occurrence of every genotype; later copies go to `dups`.
inline std::vector<Evaluated> split_unique(std::vector<Evaluated> all, std::vector<Evaluated>& dups) {
    std::unordered_set<std::string> seen;
    std::vector<Evaluated> unique;
    for (auto& e : all) {
        if (seen.insert(e.key).second) unique.push_back(std::move(e));
        else dups.push_back(std::move(e));
    }
    return unique;
}

/// NSGA-II environmental selection: whole fronts while they fit, the
/// overflowing front truncated by crowding distance.
inline std::vector<Evaluated> nsga2_truncate(std::vector<Evaluated> candidates, std::size_t n, ObjectiveSpec const& spec) {
    if (candidates.size() <= n) return candidates;
    auto const pts = oriented_values(candidates, spec);
    auto const fronts = non_dominated_sort_min(pts);
    std::vector<std::size_t> chosen;
    for (auto const& front : fronts) {
        if (chosen.size() + front.size() <= n) {
            chosen.insert(chosen.end(), front.begin(), front.end());
            if (chosen.size() == n) break;
            continue;
        }
        std::vector<Point> fp;
        for (auto i : front) fp.push_back(pts[i]);
        auto const cd = crowding_distance(fp);
        std::vector<std::size_t> order(front.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return cd[a] > cd[b]; });
        for (std::size_t k = 0; chosen.size() < n; ++k) chosen.push_back(front[order[k]]);
        break;
    }
    std::sort(chosen.begin(), chosen.end());
    std::vector<Evaluated> out;
    out.reserve(n);
    for (auto i : chosen) out.push_back(std::move(candidates[i]));
    return out;
}

/// Survivors for the next generation from parents + offspring. Duplicated
/// genotypes are only used to fill places distinct ones cannot.
template <typename Truncate>
std::vector<Evaluated> select_survivors(std::vector<Evaluated> parents, std::vector<Evaluated> offspring, std::size_t n,
                                        Truncate truncate) {
    std::vector<Evaluated> all = std::move(parents);
    for (auto& o : offspring) all.push_back(std::move(o));
    std::vector<Evaluated> dups;
    auto unique = split_unique(std::move(all), dups);
    if (unique.size() >= n) return truncate(std::move(unique), n);
    for (std::size_t i = 0; unique.size() < n && i < dups.size(); ++i) unique.push_back(std::move(dups[i]));
    return unique;
}

inline std::vector<Individual> initial_population(Rng& rng, SearchConfig const& cfg, KeywordPools const& pools) {
    std::vector<Individual> pop;
    std::unordered_set<std::string> seen;
    auto const target = static_cast<std::size_t>(cfg.population_size);
    std::size_t attempts = 0;
    while (pop.size() < target) {
        if (++attempts > 1000 * target) throw ConfigError("search space too small for a duplicate-free population");
        auto ind = new_random(rng, cfg.bounds, pools);
        if (seen.insert(canonical_key(ind)).second) pop.push_back(std::move(ind));
    }
    return pop;
}

template <typename SelectParent>
std::vector<Individual> make_offspring(Rng& rng, SearchConfig const& cfg, KeywordPools const& pools,
                                       SelectParent select_parent) {
    std::vector<Individual> kids;
    auto const n = static_cast<std::size_t>(cfg.population_size);
    while (kids.size() < n) {
        Individual c1 = select_parent();
        Individual c2 = select_parent();
        if (rng.bernoulli(cfg.crossover_prob)) {
            auto const cut = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(kGeneCount) - 2));
            std::tie(c1, c2) = crossover_single_point(c1, c2, cut);
        }
        if (rng.bernoulli(cfg.mutation_prob)) c1 = mutate(c1, rng, cfg.inner_mutation_prob, cfg.bounds, pools);
        if (rng.bernoulli(cfg.mutation_prob)) c2 = mutate(c2, rng, cfg.inner_mutation_prob, cfg.bounds, pools);
        kids.push_back(std::move(c1));
        if (kids.size() < n) kids.push_back(std::move(c2));
    }
    return kids;
}

inline GenerationSnapshot snapshot(int index, std::vector<Evaluated> const& pop, int fresh, ObjectiveSpec const& spec) {
    GenerationSnapshot s;
    s.generation_index = index;
    s.population = pop;
    s.new_evaluations = fresh;
    s.front_ranks = ranks_from_fronts(non_dominated_sort_min(oriented_values(pop, spec)), pop.size());
    return s;
}

inline std::vector<Evaluated> nondominated_members(std::vector<Evaluated> const& pop, ObjectiveSpec const& spec) {
    std::vector<Point> vals;
    for (auto const& e : pop) vals.push_back(e.fitness.values);
    std::vector<Evaluated> out;
    std::unordered_set<std::string> seen;
    for (auto i : pareto_front(vals, spec))
        if (seen.insert(pop[i].key).second) out.push_back(pop[i]);
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Strategies

/// NSGA-II with (mu + lambda) survival. Parents come from binary tournaments
/// on (rank, crowding) within the `selection_rate` best-ranked individuals.
inline RunLog run_nsga2(SearchConfig const& cfg, SearchContext& ctx, KeywordPools const& pools,
                        Strategy strategy = Strategy::SustainDiffusion) {
    cfg.validate();
    auto const& spec = cfg.objective_spec;
    auto const n = static_cast<std::size_t>(cfg.population_size);
    Rng rng(cfg.seed);
    RunLog log;
    log.strategy = strategy;
    log.config = cfg;

    std::vector<Evaluated> pop;
    for (auto const& ind : detail::initial_population(rng, cfg, pools)) pop.push_back(ctx.evaluate(ind));
    int fresh = ctx.take_fresh();
    log.total_evaluations += fresh;
    log.snapshots.push_back(detail::snapshot(0, pop, fresh, spec));

    for (int gen = 1; gen <= cfg.generations; ++gen) {
        auto const info = detail::rank_population(pop, spec);
        std::vector<std::size_t> order(pop.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return detail::crowded_less(info, a, b); });
        order.resize(std::min(order.size(), static_cast<std::size_t>(cfg.selection_rate)));

        auto tournament = [&]() -> Individual {
            auto a = order[rng.index(order.size())];
            auto b = order[rng.index(order.size())];
            return pop[detail::crowded_less(info, b, a) ? b : a].individual;
        };
        auto kids = detail::make_offspring(rng, cfg, pools, tournament);

        std::vector<Evaluated> offspring;
        for (auto const& k : kids) offspring.push_back(ctx.evaluate(k));
        fresh = ctx.take_fresh();
        log.total_evaluations += fresh;

        pop = detail::select_survivors(std::move(pop), std::move(offspring), n,
                                       [&](std::vector<Evaluated> c, std::size_t m) {
                                           return detail::nsga2_truncate(std::move(c), m, spec);
                                       });
        log.snapshots.push_back(detail::snapshot(gen, pop, fresh, spec));
    }
    log.final_front = detail::nondominated_members(pop, spec);
    return log;
}

/// Single-objective GA: tournament parent selection, elitist (mu + lambda)
/// survival on the one objective.
inline RunLog run_single_objective_ga(SearchConfig const& cfg, SearchContext& ctx, KeywordPools const& pools,
                                      int tournament_k = 5, Strategy strategy = Strategy::GA_Single) {
    cfg.validate();
    auto const& spec = cfg.objective_spec;
    if (spec.size() != 1) throw ConfigError("single-objective GA needs exactly one objective");
    if (tournament_k < 1) throw ConfigError("tournament size must be positive");
    auto const n = static_cast<std::size_t>(cfg.population_size);
    double const sign = spec.direction(0) == Direction::Maximize ? -1.0 : 1.0;
    auto score = [sign](Evaluated const& e) { return sign * e.fitness.values[0]; };

    Rng rng(cfg.seed);
    RunLog log;
    log.strategy = strategy;
    log.config = cfg;

    std::vector<Evaluated> pop;
    for (auto const& ind : detail::initial_population(rng, cfg, pools)) pop.push_back(ctx.evaluate(ind));
    int fresh = ctx.take_fresh();
    log.total_evaluations += fresh;
    log.snapshots.push_back(detail::snapshot(0, pop, fresh, spec));

    auto truncate = [&](std::vector<Evaluated> c, std::size_t m) {
        std::vector<std::size_t> idx(c.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return score(c[a]) < score(c[b]); });
        idx.resize(m);
        std::vector<Evaluated> out;
        for (auto i : idx) out.push_back(std::move(c[i]));
        return out;
    };

    for (int gen = 1; gen <= cfg.generations; ++gen) {
        auto tournament = [&]() -> Individual {
            std::size_t best = rng.index(pop.size());
            for (int t = 1; t < tournament_k; ++t) {
                auto c = rng.index(pop.size());
                if (score(pop[c]) < score(pop[best]) || (score(pop[c]) == score(pop[best]) && c < best)) best = c;
            }
            return pop[best].individual;
        };
        auto kids = detail::make_offspring(rng, cfg, pools, tournament);
        std::vector<Evaluated> offspring;
        for (auto const& k : kids) offspring.push_back(ctx.evaluate(k));
        fresh = ctx.take_fresh();
        log.total_evaluations += fresh;
        pop = detail::select_survivors(std::move(pop), std::move(offspring), n, truncate);
        log.snapshots.push_back(detail::snapshot(gen, pop, fresh, spec));
    }
    log.final_front = detail::nondominated_members(pop, spec);
    return log;
}

inline constexpr int kRandomSearchRetries = 100;

/// Evaluates `evals_per_iter` not-yet-seen random configurations per
/// iteration; the front is taken over everything evaluated.
inline RunLog run_random_search(SearchConfig const& cfg, SearchContext& ctx, KeywordPools const& pools,
                                int evals_per_iter = 4, int iterations = 25) {
    cfg.validate();
    if (evals_per_iter < 1) throw ConfigError("random search needs at least one evaluation per iteration");
    if (iterations < 1) throw ConfigError("random search needs at least one iteration");
    auto const& spec = cfg.objective_spec;
    Rng rng(cfg.seed);
    RunLog log;
    log.strategy = Strategy::RandomSearch;
    log.config = cfg;

    std::unordered_set<std::string> seen;
    std::vector<Evaluated> archive;
    for (int it = 0; it < iterations; ++it) {
        std::vector<Evaluated> batch;
        for (int e = 0; e < evals_per_iter; ++e) {
            auto ind = new_random(rng, cfg.bounds, pools);
            for (int retry = 0; retry < kRandomSearchRetries && seen.count(canonical_key(ind)); ++retry)
                ind = new_random(rng, cfg.bounds, pools);
            seen.insert(canonical_key(ind));
            batch.push_back(ctx.evaluate(ind));
        }
        int const fresh = ctx.take_fresh();
        log.total_evaluations += fresh;
        archive.insert(archive.end(), batch.begin(), batch.end());
        log.snapshots.push_back(detail::snapshot(it, batch, fresh, spec));
    }
    log.final_front = detail::nondominated_members(archive, spec);
    return log;
}

/// One fixed configuration evaluated once (SD3 default / fair-prompt baselines).
inline RunLog run_fixed_configuration(SearchConfig const& cfg, SearchContext& ctx, Individual const& ind,
                                      Strategy strategy) {
    cfg.validate();
    RunLog log;
    log.strategy = strategy;
    log.config = cfg;
    std::vector<Evaluated> pop{ctx.evaluate(ind)};
    int const fresh = ctx.take_fresh();
    log.total_evaluations = fresh;
    log.snapshots.push_back(detail::snapshot(0, pop, fresh, cfg.objective_spec));
    log.final_front = pop;
    return log;
}

inline std::string fair_prompt(std::string const& base_prompt) { return base_prompt + " " + std::string(kFairPromptSuffix); }

struct StrategyOptions {
    int random_evals_per_iter = 4;
    int random_iterations = 25;
    Objective single_objective = Objective::CpuEnergy;
    int tournament_k = 5;
};

/// Objective set searched by each strategy.
inline ObjectiveSpec objectives_for(Strategy s, StrategyOptions const& opt = {}) {
    switch (s) {
        case Strategy::GA_Single: return ObjectiveSpec{opt.single_objective};
        case Strategy::Ablation_Q: return ObjectiveSpec{Objective::ImageQuality};
        case Strategy::Ablation_QB:
            return ObjectiveSpec{Objective::ImageQuality, Objective::GenderBias, Objective::EthnicBias};
        case Strategy::Ablation_QE: return ObjectiveSpec{Objective::ImageQuality, Objective::CpuEnergy};
        default: return ObjectiveSpec::search_default();
    }
}

/// Specializes a base configuration for a strategy (objectives, bounds, prompt).
inline SearchConfig configure_for(Strategy s, SearchConfig cfg, StrategyOptions const& opt = {}) {
    cfg.objective_spec = objectives_for(s, opt);
    if (s == Strategy::NoPromptEng) cfg.bounds = cfg.bounds.without_keywords();
    if (s == Strategy::FairPrompt) cfg.base_prompt = fair_prompt(cfg.base_prompt);
    return cfg;
}

/// Runs one strategy with an already specialized configuration.
inline RunLog run_strategy(Strategy s, SearchConfig const& cfg, SearchContext& ctx, KeywordPools const& pools,
                           StrategyOptions const& opt = {}) {
    switch (s) {
        case Strategy::SustainDiffusion:
        case Strategy::Ablation_QB:
        case Strategy::Ablation_QE:
        case Strategy::NoPromptEng: return run_nsga2(cfg, ctx, pools, s);
        case Strategy::GA_Single:
        case Strategy::Ablation_Q: return run_single_objective_ga(cfg, ctx, pools, opt.tournament_k, s);
        case Strategy::RandomSearch: return run_random_search(cfg, ctx, pools, opt.random_evals_per_iter, opt.random_iterations);
        case Strategy::SD3Default:
        case Strategy::FairPrompt: return run_fixed_configuration(cfg, ctx, default_individual(), s);
    }
    throw std::logic_error("unhandled strategy");
}

}  // namespace fairtune

#endif
