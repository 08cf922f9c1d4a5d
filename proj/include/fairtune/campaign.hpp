#ifndef FAIRTUNE_CAMPAIGN_HPP
#define FAIRTUNE_CAMPAIGN_HPP

// Experiment orchestration: strategy x repetition runs persisted as RunLogs,
// a per-run evaluation journal for resuming after evaluator failures, and the
// cross-prompt generalisation experiment.
//
// Campaign directory layout:
//   campaign.json              config echo + per-run status
//   runs/<Strategy>_repNN.jsonl
//   journal/<name>.jsonl       fresh evaluations of an unfinished run
//   generalisation.jsonl       per-prompt candidate/baseline metrics

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "fairtune/analysis.hpp"
#include "fairtune/bridge.hpp"
#include "fairtune/runlog.hpp"
#include "fairtune/synthetic.hpp"
#include "fairtune/win_tie_loss.hpp"

namespace fairtune {

namespace fs = std::filesystem;

inline constexpr int kCampaignFormat = 1;

struct AnalysisOptions {
    bool hv_normalize = false;
    double hv_epsilon = 0.5;
    TieRule tie_rule = TieRule::StrictlyBetter;
    ObjectiveSpec objectives = ObjectiveSpec::search_default();  // Pareto pooling and hypervolume
};

struct GeneralisationOptions {
    bool enabled = true;
    std::vector<Strategy> baselines{Strategy::SD3Default, Strategy::RandomSearch, Strategy::FairPrompt};
};

enum class EvaluatorKind { Synthetic, Bridge };

struct CampaignConfig {
    std::uint64_t campaign_seed = 0;
    std::vector<Strategy> strategies{Strategy::SustainDiffusion, Strategy::RandomSearch};
    int repetitions = 10;
    SearchConfig search;                  // seed is replaced per run
    StrategyOptions strategy_options;
    std::vector<std::string> prompts;     // generalisation prompts (empty: experiment skipped)
    std::string positive_keywords_path;   // empty: built-in pool
    std::string negative_keywords_path;
    EvaluatorKind evaluator = EvaluatorKind::Synthetic;
    std::string endpoint;
    SyntheticLandscape landscape;
    AnalysisOptions analysis;
    GeneralisationOptions generalisation;
    fs::path output_dir = "campaign";
    int parallel = 1;                     // worker threads; synthetic evaluator only
    nlohmann::ordered_json source;        // the config as written, echoed into campaign.json

    void validate() const {
        if (repetitions < 1) throw ConfigError("repetitions must be at least 1");
        if (strategies.empty()) throw ConfigError("no strategies selected");
        for (std::size_t i = 0; i < strategies.size(); ++i)
            for (std::size_t j = i + 1; j < strategies.size(); ++j)
                if (strategies[i] == strategies[j])
                    throw ConfigError("strategy listed twice: " + std::string(to_string(strategies[i])));
        if (parallel < 1) throw ConfigError("parallel must be at least 1");
        if (parallel > 1 && evaluator != EvaluatorKind::Synthetic)
            throw ConfigError("parallel runs are only allowed with the synthetic evaluator");
        if (evaluator == EvaluatorKind::Bridge && endpoint.empty()) throw ConfigError("bridge evaluator needs an endpoint");
        if (analysis.hv_epsilon < 0.0) throw ConfigError("hypervolume epsilon must be non-negative");
        if (strategy_options.random_evals_per_iter < 1 || strategy_options.random_iterations < 1)
            throw ConfigError("random search budget must be positive");
        if (strategy_options.tournament_k < 1) throw ConfigError("tournament size must be at least 1");
        for (auto s : strategies) configure_for(s, search, strategy_options).validate();
    }
};

/// Prompt dataset: one prompt per line; blank lines and '#' comments skipped.
inline std::vector<std::string> load_prompts(std::string const& path) {
    auto prompts = read_line_list(path);
    if (prompts.empty()) throw ConfigError("prompt dataset " + path + " is empty");
    std::set<std::string> seen;
    for (auto const& p : prompts)
        if (!seen.insert(p).second) throw ConfigError("prompt dataset repeats '" + p + "'");
    return prompts;
}

namespace detail {

inline std::string resolve(fs::path const& base, std::string const& p) {
    if (p.empty()) return p;
    fs::path path(p);
    return (path.is_absolute() ? path : base / path).lexically_normal().string();
}

inline Strategy strategy_from(std::string const& name) {
    auto s = parse_strategy(name);
    if (!s) throw ConfigError("unknown strategy '" + name + "'");
    return *s;
}

inline TieRule tie_rule_from(std::string const& name) {
    if (name == "strict") return TieRule::StrictlyBetter;
    if (name == "non_worse") return TieRule::NoWorse;
    throw ConfigError("unknown tie rule '" + name + "' (expected strict or non_worse)");
}

}  // namespace detail

template <typename Json>
AnalysisOptions analysis_options_from_json(Json const& a, AnalysisOptions o = {}) {
    if (a.contains("hv_normalize")) o.hv_normalize = a.at("hv_normalize").template get<bool>();
    if (a.contains("hv_epsilon")) o.hv_epsilon = a.at("hv_epsilon").template get<double>();
    if (a.contains("tie_rule")) o.tie_rule = detail::tie_rule_from(a.at("tie_rule").template get<std::string>());
    if (a.contains("objectives")) o.objectives = objectives_from_json(a.at("objectives"));
    return o;
}

inline ojson to_json(AnalysisOptions const& o) {
    return ojson{{"hv_normalize", o.hv_normalize},
                 {"hv_epsilon", o.hv_epsilon},
                 {"tie_rule", std::string(to_string(o.tie_rule))},
                 {"objectives", objectives_to_json(o.objectives)}};
}

/// Parses a campaign config; relative paths are resolved against `base_dir`.
inline CampaignConfig campaign_config_from_json(ojson const& j, fs::path const& base_dir) {
    CampaignConfig c;
    c.source = j;
    try {
        if (!j.is_object()) throw ConfigError("campaign config must be a JSON object");
        static const std::set<std::string> known{"campaign_seed", "strategies",      "repetitions",      "base_prompt",
                                                 "prompt_dataset", "keywords",       "evaluator",        "search",
                                                 "strategy_options", "analysis",     "generalisation",   "output_dir",
                                                 "parallel"};
        for (auto const& [k, v] : j.items())
            if (!known.count(k)) throw ConfigError("unknown config key '" + k + "'");

        c.campaign_seed = j.value("campaign_seed", std::uint64_t{0});
        if (j.contains("strategies")) {
            c.strategies.clear();
            for (auto const& s : j.at("strategies")) c.strategies.push_back(detail::strategy_from(s.get<std::string>()));
        }
        c.repetitions = j.value("repetitions", c.repetitions);
        if (j.contains("search")) c.search = search_config_from_json(j.at("search"), c.search);
        if (j.contains("base_prompt")) c.search.base_prompt = j.at("base_prompt").get<std::string>();
        if (j.contains("prompt_dataset"))
            c.prompts = load_prompts(detail::resolve(base_dir, j.at("prompt_dataset").get<std::string>()));
        if (j.contains("keywords")) {
            auto const& k = j.at("keywords");
            c.positive_keywords_path = detail::resolve(base_dir, k.value("positive", std::string{}));
            c.negative_keywords_path = detail::resolve(base_dir, k.value("negative", std::string{}));
            if (c.positive_keywords_path.empty() != c.negative_keywords_path.empty())
                throw ConfigError("keywords needs both 'positive' and 'negative' files");
        }
        if (j.contains("strategy_options")) {
            auto const& o = j.at("strategy_options");
            auto& so = c.strategy_options;
            so.random_evals_per_iter = o.value("random_evals_per_iter", so.random_evals_per_iter);
            so.random_iterations = o.value("random_iterations", so.random_iterations);
            so.tournament_k = o.value("tournament_k", so.tournament_k);
            if (o.contains("single_objective")) {
                auto name = o.at("single_objective").get<std::string>();
                auto obj = parse_objective(name);
                if (!obj) throw ConfigError("unknown objective '" + name + "'");
                so.single_objective = *obj;
            }
        }
        if (j.contains("evaluator")) {
            auto const& e = j.at("evaluator");
            auto kind = e.value("kind", std::string("synthetic"));
            if (kind == "synthetic") {
                c.evaluator = EvaluatorKind::Synthetic;
                if (e.contains("landscape")) c.landscape = landscape_from_json(nlohmann::json::parse(e.at("landscape").dump()));
            } else if (kind == "bridge") {
                c.evaluator = EvaluatorKind::Bridge;
                c.endpoint = e.value("endpoint", std::string{});
            } else {
                throw ConfigError("unknown evaluator kind '" + kind + "'");
            }
        }
        if (j.contains("analysis")) c.analysis = analysis_options_from_json(j.at("analysis"), c.analysis);
        if (j.contains("generalisation")) {
            auto const& g = j.at("generalisation");
            c.generalisation.enabled = g.value("enabled", c.generalisation.enabled);
            if (g.contains("baselines")) {
                c.generalisation.baselines.clear();
                for (auto const& s : g.at("baselines"))
                    c.generalisation.baselines.push_back(detail::strategy_from(s.get<std::string>()));
            }
        }
        c.output_dir = detail::resolve(base_dir, j.value("output_dir", std::string("campaign")));
        c.parallel = j.value("parallel", c.parallel);
    } catch (ojson::exception const& e) {
        throw ConfigError(std::string("campaign config: ") + e.what());
    }
    c.validate();
    if (!c.positive_keywords_path.empty()) {
        for (auto const& p : {c.positive_keywords_path, c.negative_keywords_path})
            if (!fs::exists(p)) throw ConfigError("keyword file not found: " + p);
    }
    return c;
}

inline CampaignConfig load_campaign_config(fs::path const& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    ojson j;
    try {
        j = ojson::parse(in);
    } catch (ojson::parse_error const& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    return campaign_config_from_json(j, fs::absolute(path).parent_path());
}

inline KeywordPools campaign_pools(CampaignConfig const& c) {
    if (c.positive_keywords_path.empty()) return KeywordPools{};
    return KeywordPools::from_files(c.positive_keywords_path, c.negative_keywords_path);
}

inline std::uint64_t run_seed(std::uint64_t campaign_seed, Strategy s, int repetition) {
    return hash_all(campaign_seed, to_string(s), static_cast<std::uint64_t>(repetition));
}

inline std::string run_name(Strategy s, int repetition) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "_rep%02d", repetition);
    return std::string(to_string(s)) + buf;
}

// ---------------------------------------------------------------------------
// Evaluation journal

/// Replays journaled responses and appends every fresh one. A run resumed
/// from its journal therefore sees exactly the responses (and issues exactly
/// the evaluations, as far as its own bookkeeping is concerned) of an
/// uninterrupted run.
class JournalingEvaluator final : public Evaluator {
public:
    JournalingEvaluator(Evaluator& inner, fs::path path) : inner_(inner), path_(std::move(path)) {
        std::ifstream in(path_);
        std::string line;
        while (std::getline(in, line)) {
            // A torn last line from a crash is ignored; its evaluation is simply redone.
            try {
                auto j = nlohmann::json::parse(line);
                std::vector<ImageRecord> records;
                for (auto const& r : j.at("records")) records.push_back(protocol::record_from_json(r));
                replay_.insert_or_assign(j.at("request").get<std::string>(), std::move(records));
            } catch (std::exception const&) {
            }
        }
        in.close();
        out_.open(path_, std::ios::app | std::ios::binary);
        if (!out_) throw Error("cannot open journal " + path_.string());
    }

    EvaluationResponse evaluate(EvaluationRequest const& req) override {
        auto const key = journal_key(req);
        if (auto it = replay_.find(key); it != replay_.end()) {
            ++replayed_;
            return EvaluationResponse{req.request_id, it->second, std::nullopt};
        }
        auto resp = inner_.evaluate(req);
        if (!resp.error) {
            nlohmann::json recs = nlohmann::json::array();
            for (auto const& r : resp.records) recs.push_back(protocol::record_to_json(r));
            out_ << nlohmann::json{{"request", key}, {"records", std::move(recs)}}.dump() << '\n';
            out_.flush();
        }
        return resp;
    }

    std::string describe() const override { return inner_.describe(); }
    std::size_t replayed() const { return replayed_; }

    static std::string journal_key(EvaluationRequest req) {
        req.request_id = 0;
        return protocol::encode(req);
    }

private:
    Evaluator& inner_;
    fs::path path_;
    std::ofstream out_;
    std::map<std::string, std::vector<ImageRecord>> replay_;
    std::size_t replayed_ = 0;
};

// ---------------------------------------------------------------------------
// Generalisation experiment

struct GeneralisationEntry {
    Strategy strategy;
    int repetition = -1;  // source run of the individual; -1 for fixed configurations
    std::string prompt;   // prompt actually sent
    Evaluated result;     // fitness over every tracked objective
};

struct GeneralisationRow {
    std::size_t index = 0;
    std::string prompt;
    std::uint64_t seed = 0;
    GeneralisationEntry candidate;
    std::vector<GeneralisationEntry> baselines;  // in configured order
};

struct PooledIndividual {
    Individual individual;
    int repetition;
};

/// Final-front members of every run, in repetition then front order.
inline std::vector<PooledIndividual> pooled_front(std::vector<LoadedRun> const& runs) {
    std::vector<PooledIndividual> out;
    for (auto const& r : runs)
        for (auto const& e : r.log.final_front) out.push_back({e.individual, r.info.repetition});
    return out;
}

struct GeneralisationInputs {
    std::vector<PooledIndividual> candidates;                       // aggregated candidate fronts
    std::map<Strategy, std::vector<PooledIndividual>> searched;     // fronts of searched baselines
    std::vector<Strategy> baselines;
    std::vector<std::string> prompts;
    std::uint64_t seed = 0;
    int images = 20;
};

/// For every prompt: one candidate drawn uniformly from the aggregated front,
/// each baseline evaluated on the same prompt with the same image seed.
/// Fixed baselines use the default configuration (FairPrompt with the
/// fairness sentence appended); searched baselines draw from their own fronts.
inline std::vector<GeneralisationRow> generalisation_experiment(Evaluator& evaluator, GeneralisationInputs const& in) {
    if (in.candidates.empty()) throw std::invalid_argument("generalisation: no front individual available");
    auto const spec = ObjectiveSpec::all_tracked();
    Rng rng(hash_all(in.seed, std::string_view("generalisation")));
    auto eval = [&](Individual const& ind, std::string const& prompt, std::uint64_t seed) {
        auto batch = evaluate(evaluator, ind, prompt, in.images, seed);
        return Evaluated{ind, canonical_key(ind), fitness_vector(batch, spec)};
    };
    std::vector<GeneralisationRow> rows;
    for (std::size_t i = 0; i < in.prompts.size(); ++i) {
        GeneralisationRow row;
        row.index = i;
        row.prompt = in.prompts[i];
        row.seed = hash_all(in.seed, std::string_view("generalisation-prompt"), static_cast<std::uint64_t>(i)) &
                   kSeedMask;
        auto const& pick = in.candidates[rng.index(in.candidates.size())];
        row.candidate = {Strategy::SustainDiffusion, pick.repetition, row.prompt, eval(pick.individual, row.prompt, row.seed)};
        for (auto b : in.baselines) {
            GeneralisationEntry e{b, -1, row.prompt, {}};
            Individual ind = default_individual();
            if (b == Strategy::FairPrompt) {
                e.prompt = fair_prompt(row.prompt);
            } else if (b != Strategy::SD3Default) {
                auto it = in.searched.find(b);
                if (it == in.searched.end() || it->second.empty())
                    throw std::invalid_argument("generalisation: no front for baseline " + std::string(to_string(b)));
                auto const& p = it->second[rng.index(it->second.size())];
                ind = p.individual;
                e.repetition = p.repetition;
            }
            e.result = eval(ind, e.prompt, row.seed);
            row.baselines.push_back(std::move(e));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

struct WinTieLossRow {
    Strategy baseline;
    std::string objective_set;  // "all" or "no_quality"
    WinTieLoss counts;
};

inline ObjectiveSpec without_quality(ObjectiveSpec const& spec) {
    std::vector<Objective> objs;
    for (auto o : spec)
        if (o != Objective::ImageQuality) objs.push_back(o);
    return ObjectiveSpec(std::move(objs));
}

/// Candidate vs each baseline over every prompt, on all tracked objectives
/// and again with image quality dropped.
inline std::vector<WinTieLossRow> generalisation_win_tie_loss(std::vector<GeneralisationRow> const& rows, TieRule rule) {
    std::vector<WinTieLossRow> out;
    if (rows.empty()) return out;
    auto const full = ObjectiveSpec::all_tracked();
    auto const reduced = without_quality(full);
    for (std::size_t b = 0; b < rows.front().baselines.size(); ++b) {
        for (auto const* spec : {&full, &reduced}) {
            std::vector<Point> cand, base;
            for (auto const& r : rows) {
                cand.push_back(r.candidate.result.fitness.metrics.project(*spec));
                base.push_back(r.baselines.at(b).result.fitness.metrics.project(*spec));
            }
            out.push_back({rows.front().baselines[b].strategy, spec == &full ? "all" : "no_quality",
                           win_tie_loss(cand, base, *spec, rule)});
        }
    }
    return out;
}

inline ojson to_json(GeneralisationEntry const& e) {
    return ojson{{"strategy", std::string(to_string(e.strategy))},
                 {"repetition", e.repetition},
                 {"prompt", e.prompt},
                 {"solution", to_json(e.result)}};
}

template <typename Json>
GeneralisationEntry generalisation_entry_from_json(Json const& j) {
    return {detail::strategy_from(j.at("strategy").template get<std::string>()), j.at("repetition").template get<int>(),
            j.at("prompt").template get<std::string>(), evaluated_from_json(j.at("solution"))};
}

inline void write_generalisation(fs::path const& path, std::vector<GeneralisationRow> const& rows) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        for (auto const& r : rows) {
            ojson b = ojson::array();
            for (auto const& e : r.baselines) b.push_back(to_json(e));
            out << ojson{{"index", r.index},
                         {"prompt", r.prompt},
                         {"seed", r.seed},
                         {"candidate", to_json(r.candidate)},
                         {"baselines", std::move(b)}}
                       .dump()
                << '\n';
        }
    }
    fs::rename(tmp, path);
}

inline std::vector<GeneralisationRow> read_generalisation(fs::path const& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<GeneralisationRow> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            auto j = ojson::parse(line);
            GeneralisationRow r;
            r.index = j.at("index").get<std::size_t>();
            r.prompt = j.at("prompt").get<std::string>();
            r.seed = j.at("seed").get<std::uint64_t>();
            r.candidate = generalisation_entry_from_json(j.at("candidate"));
            for (auto const& b : j.at("baselines")) r.baselines.push_back(generalisation_entry_from_json(b));
            rows.push_back(std::move(r));
        } catch (std::exception const& e) {
            throw Error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Campaign runner

using EvaluatorFactory = std::function<std::unique_ptr<Evaluator>()>;

enum class CampaignStatus { Complete, Partial };

struct CampaignResult {
    CampaignStatus status = CampaignStatus::Complete;
    int runs_completed = 0;     // in this invocation
    int runs_skipped = 0;       // already on disk
    int runs_failed = 0;
    std::size_t evaluations = 0;  // evaluator calls made in this invocation (journal replays excluded)
    std::vector<std::string> errors;
};

struct RunJob {
    Strategy strategy;
    int repetition;
    std::uint64_t seed;
    std::string name;
};

inline std::vector<RunJob> campaign_jobs(CampaignConfig const& c) {
    std::vector<RunJob> jobs;
    for (auto s : c.strategies)
        for (int r = 0; r < c.repetitions; ++r) jobs.push_back({s, r, run_seed(c.campaign_seed, s, r), run_name(s, r)});
    return jobs;
}

inline bool run_complete(fs::path const& path) {
    if (!fs::exists(path)) return false;
    try {
        load_runlog(path);
        return true;
    } catch (Error const&) {
        return false;
    }
}

/// Counts calls reaching the real evaluator.
class CountingEvaluator final : public Evaluator {
public:
    explicit CountingEvaluator(Evaluator& inner) : inner_(inner) {}
    EvaluationResponse evaluate(EvaluationRequest const& req) override {
        ++calls_;
        return inner_.evaluate(req);
    }
    std::string describe() const override { return inner_.describe(); }
    std::size_t calls() const { return calls_; }

private:
    Evaluator& inner_;
    std::size_t calls_ = 0;
};

namespace detail {

inline void write_campaign_manifest(CampaignConfig const& c, std::vector<RunJob> const& jobs, CampaignStatus status,
                                    std::string const& generalisation_state) {
    ojson runs = ojson::array();
    for (auto const& j : jobs) {
        auto const file = "runs/" + j.name + ".jsonl";
        runs.push_back(ojson{{"strategy", std::string(to_string(j.strategy))},
                             {"repetition", j.repetition},
                             {"seed", j.seed},
                             {"file", file},
                             {"complete", run_complete(c.output_dir / file)}});
    }
    ojson m{{"format", kCampaignFormat},
            {"campaign_seed", c.campaign_seed},
            {"status", status == CampaignStatus::Complete ? "complete" : "partial"},
            {"generalisation", generalisation_state},
            {"analysis", to_json(c.analysis)},
            {"config", c.source},
            {"runs", std::move(runs)}};
    auto const path = c.output_dir / "campaign.json";
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << m.dump(2) << '\n';
    }
    fs::rename(tmp, path);
}

inline bool is_evaluator_failure(std::exception_ptr const& e) {
    try {
        std::rethrow_exception(e);
    } catch (EvaluatorUnavailable const&) {
        return true;
    } catch (ProtocolError const&) {
        return true;
    } catch (Timeout const&) {
        return true;
    } catch (...) {
        return false;
    }
}

}  // namespace detail

/// Runs every pending (strategy, repetition), then the generalisation
/// experiment. Evaluator failures stop the affected run, leave its journal
/// behind and mark the campaign partial; rerunning resumes where it stopped.
/// Other exceptions propagate.
inline CampaignResult run_campaign(CampaignConfig const& c, EvaluatorFactory const& factory) {
    c.validate();
    fs::create_directories(c.output_dir / "runs");
    fs::create_directories(c.output_dir / "journal");
    auto const pools = campaign_pools(c);
    auto const jobs = campaign_jobs(c);

    CampaignResult result;
    std::vector<RunJob> pending;
    for (auto const& j : jobs) {
        if (run_complete(c.output_dir / "runs" / (j.name + ".jsonl"))) ++result.runs_skipped;
        else pending.push_back(j);
    }

    std::mutex mu;
    std::atomic<bool> stop{false};
    auto execute = [&](RunJob const& job, Evaluator& evaluator) {
        auto const journal = c.output_dir / "journal" / (job.name + ".jsonl");
        CountingEvaluator counting(evaluator);
        JournalingEvaluator journaling(counting, journal);
        auto cfg = configure_for(job.strategy, c.search, c.strategy_options);
        cfg.seed = job.seed;
        SearchContext ctx(cfg, journaling, pools);
        auto log = run_strategy(job.strategy, cfg, ctx, pools, c.strategy_options);
        save_runlog(c.output_dir / "runs" / (job.name + ".jsonl"), log, RunInfo{job.repetition, c.campaign_seed});
        fs::remove(journal);
        return counting.calls();
    };
    auto guarded = [&](RunJob const& job, Evaluator& evaluator) {
        try {
            auto calls = execute(job, evaluator);
            std::lock_guard lock(mu);
            ++result.runs_completed;
            result.evaluations += calls;
        } catch (...) {
            auto e = std::current_exception();
            if (!detail::is_evaluator_failure(e)) throw;
            std::string what;
            try {
                std::rethrow_exception(e);
            } catch (std::exception const& ex) {
                what = ex.what();
            }
            std::lock_guard lock(mu);
            ++result.runs_failed;
            result.errors.push_back(job.name + ": " + what);
            stop = true;
        }
    };

    std::unique_ptr<Evaluator> shared;
    auto shared_evaluator = [&]() -> Evaluator& {
        if (!shared) shared = factory();
        return *shared;
    };

    if (!pending.empty()) {
        if (c.parallel <= 1) {
            auto& ev = shared_evaluator();
            for (auto const& job : pending) {
                guarded(job, ev);
                if (stop) break;
            }
        } else {
            std::atomic<std::size_t> next{0};
            std::exception_ptr fatal;
            std::vector<std::thread> workers;
            int const n = std::min<int>(c.parallel, static_cast<int>(pending.size()));
            for (int w = 0; w < n; ++w)
                workers.emplace_back([&] {
                    try {
                        auto ev = factory();
                        for (std::size_t i = next++; i < pending.size() && !stop; i = next++) guarded(pending[i], *ev);
                    } catch (...) {
                        std::lock_guard lock(mu);
                        if (!fatal) fatal = std::current_exception();
                        stop = true;
                    }
                });
            for (auto& t : workers) t.join();
            if (fatal) std::rethrow_exception(fatal);
        }
    }

    bool const runs_done = result.runs_failed == 0 && !stop;
    std::string gen_state = "skipped";
    auto const gen_path = c.output_dir / "generalisation.jsonl";
    bool const want_gen = c.generalisation.enabled && !c.prompts.empty() &&
                          std::find(c.strategies.begin(), c.strategies.end(), Strategy::SustainDiffusion) !=
                              c.strategies.end();
    if (want_gen) {
        gen_state = "pending";
        if (runs_done && fs::exists(gen_path)) {
            gen_state = "complete";
        } else if (runs_done) {
            std::map<Strategy, std::vector<LoadedRun>> by_strategy;
            for (auto const& j : jobs)
                by_strategy[j.strategy].push_back(load_runlog(c.output_dir / "runs" / (j.name + ".jsonl")));
            GeneralisationInputs in;
            in.candidates = pooled_front(by_strategy[Strategy::SustainDiffusion]);
            for (auto b : c.generalisation.baselines) {
                if (b == Strategy::SD3Default || b == Strategy::FairPrompt) {
                    in.baselines.push_back(b);
                } else if (by_strategy.count(b)) {
                    in.baselines.push_back(b);
                    in.searched[b] = pooled_front(by_strategy[b]);
                }
            }
            in.prompts = c.prompts;
            in.seed = c.campaign_seed;
            in.images = c.search.images_per_individual;
            auto const journal = c.output_dir / "journal" / "generalisation.jsonl";
            try {
                CountingEvaluator counting(shared_evaluator());
                JournalingEvaluator journaling(counting, journal);
                auto rows = generalisation_experiment(journaling, in);
                write_generalisation(gen_path, rows);
                result.evaluations += counting.calls();
                fs::remove(journal);
                gen_state = "complete";
            } catch (...) {
                auto e = std::current_exception();
                if (!detail::is_evaluator_failure(e)) throw;
                try {
                    std::rethrow_exception(e);
                } catch (std::exception const& ex) {
                    result.errors.push_back(std::string("generalisation: ") + ex.what());
                }
            }
        }
    }

    result.status = runs_done && gen_state != "pending" ? CampaignStatus::Complete : CampaignStatus::Partial;
    if (result.status == CampaignStatus::Complete) {
        std::error_code ec;
        fs::remove(c.output_dir / "journal", ec);  // only succeeds when empty
    }
    detail::write_campaign_manifest(c, jobs, result.status, gen_state);
    return result;
}

/// Synthetic landscape or bridge connection, as configured.
inline EvaluatorFactory default_evaluator_factory(CampaignConfig const& c) {
    if (c.evaluator == EvaluatorKind::Synthetic)
        return [land = c.landscape] { return std::make_unique<SyntheticEvaluator>(land); };
    return [endpoint = c.endpoint]() -> std::unique_ptr<Evaluator> { return connect_bridge(endpoint); };
}

}  // namespace fairtune

#endif
