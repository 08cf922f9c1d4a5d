#include <gtest/gtest.h>

#include "fairtune/campaign.hpp"
#include "fairtune/report.hpp"
#include "../support/oracles.hpp"
#include "../support/tempdir.hpp"

using namespace fairtune;
using fixtures::TempDir;

namespace {

CampaignConfig tiny(fs::path out, std::vector<Strategy> strategies = {Strategy::SustainDiffusion, Strategy::RandomSearch},
                    int reps = 10) {
    CampaignConfig c;
    c.campaign_seed = 21;
    c.strategies = std::move(strategies);
    c.repetitions = reps;
    c.search.population_size = 8;
    c.search.generations = 3;
    c.search.images_per_individual = 6;
    c.strategy_options.random_evals_per_iter = 4;
    c.strategy_options.random_iterations = 6;
    c.output_dir = std::move(out);
    return c;
}

std::vector<std::string> some_prompts(int n) {
    std::vector<std::string> p;
    for (int i = 0; i < n; ++i) p.push_back("Photo portrait of a Software Engineer that task " + std::to_string(i));
    return p;
}

/// Synthetic evaluator that goes away after a fixed number of calls,
/// shared across every instance the factory hands out.
struct FlakyFactory {
    std::shared_ptr<std::atomic<int>> remaining;
    explicit FlakyFactory(int calls) : remaining(std::make_shared<std::atomic<int>>(calls)) {}

    std::unique_ptr<Evaluator> operator()() const {
        class Flaky final : public Evaluator {
        public:
            explicit Flaky(std::shared_ptr<std::atomic<int>> r) : r_(std::move(r)) {}
            EvaluationResponse evaluate(EvaluationRequest const& req) override {
                if ((*r_)-- <= 0) throw EvaluatorUnavailable("bridge went away");
                return inner_.evaluate(req);
            }
            std::string describe() const override { return "flaky"; }

        private:
            std::shared_ptr<std::atomic<int>> r_;
            SyntheticEvaluator inner_;
        };
        return std::make_unique<Flaky>(remaining);
    }
};

EvaluatorFactory synthetic() {
    return [] { return std::make_unique<SyntheticEvaluator>(); };
}

}  // namespace

TEST(Campaign, OneLogPerStrategyAndRepetition) {
    TempDir dir("campaign_count");
    auto c = tiny(dir.path());
    auto r = run_campaign(c, synthetic());
    EXPECT_EQ(r.status, CampaignStatus::Complete);
    EXPECT_EQ(r.runs_completed, 20);
    int files = 0;
    for (auto const& e : fs::directory_iterator(dir / "runs")) files += e.path().extension() == ".jsonl";
    EXPECT_EQ(files, 20);
    EXPECT_FALSE(fs::exists(dir / "journal"));
    auto manifest = ojson::parse(fixtures::slurp(dir / "campaign.json"));
    EXPECT_EQ(manifest["status"], "complete");
    EXPECT_EQ(manifest["runs"].size(), 20u);
    for (auto const& run : manifest["runs"]) EXPECT_TRUE(run["complete"].get<bool>());
}

TEST(Campaign, RunSeedsAndNames) {
    EXPECT_EQ(run_name(Strategy::RandomSearch, 3), "RandomSearch_rep03");
    EXPECT_EQ(run_seed(1, Strategy::SustainDiffusion, 0), run_seed(1, Strategy::SustainDiffusion, 0));
    EXPECT_NE(run_seed(1, Strategy::SustainDiffusion, 0), run_seed(1, Strategy::SustainDiffusion, 1));
    EXPECT_NE(run_seed(1, Strategy::SustainDiffusion, 0), run_seed(1, Strategy::RandomSearch, 0));
    EXPECT_NE(run_seed(1, Strategy::SustainDiffusion, 0), run_seed(2, Strategy::SustainDiffusion, 0));
    TempDir dir("campaign_seed");
    auto c = tiny(dir.path(), {Strategy::SustainDiffusion}, 2);
    run_campaign(c, synthetic());
    auto log = load_runlog(dir / "runs/SustainDiffusion_rep01.jsonl");
    EXPECT_EQ(log.log.config.seed, run_seed(21, Strategy::SustainDiffusion, 1));
    EXPECT_EQ(log.info.repetition, 1);
}

TEST(Campaign, RerunIsByteIdentical) {
    TempDir a("campaign_a"), b("campaign_b");
    auto ca = tiny(a.path());
    auto cb = tiny(b.path());
    run_campaign(ca, synthetic());
    run_campaign(cb, synthetic());
    auto ta = fixtures::tree(a.path()), tb = fixtures::tree(b.path());
    EXPECT_EQ(ta, tb);
    generate_report(load_campaign(a.path()), a / "report");
    generate_report(load_campaign(b.path()), b / "report");
    EXPECT_EQ(fixtures::tree(a / "report"), fixtures::tree(b / "report"));

    // Running again in place finds every run complete and changes nothing.
    auto again = run_campaign(ca, synthetic());
    EXPECT_EQ(again.runs_skipped, 20);
    EXPECT_EQ(again.evaluations, 0u);
    auto after = fixtures::tree(a.path());
    for (auto const& [k, v] : ta) EXPECT_EQ(after[k], v) << k;
}

TEST(Campaign, ResumeAfterEvaluatorFailureMatchesUninterrupted) {
    TempDir ref("campaign_ref"), cut("campaign_cut");
    auto c_ref = tiny(ref.path(), {Strategy::SustainDiffusion, Strategy::RandomSearch}, 6);
    auto c_cut = tiny(cut.path(), {Strategy::SustainDiffusion, Strategy::RandomSearch}, 6);
    c_ref.prompts = c_cut.prompts = some_prompts(5);
    auto const reference_calls = run_campaign(c_ref, synthetic()).evaluations;

    // Measure how many evaluator calls four repetitions take, then die midway through the fifth.
    TempDir probe("campaign_probe");
    auto c_probe = tiny(probe.path(), {Strategy::SustainDiffusion}, 4);
    auto const four = run_campaign(c_probe, synthetic()).evaluations;
    auto partial = run_campaign(c_cut, FlakyFactory(static_cast<int>(four) + 7));
    EXPECT_EQ(partial.status, CampaignStatus::Partial);
    EXPECT_EQ(partial.runs_completed, 4);
    EXPECT_EQ(partial.runs_failed, 1);
    ASSERT_EQ(partial.errors.size(), 1u);
    EXPECT_NE(partial.errors[0].find("SustainDiffusion_rep04"), std::string::npos);
    EXPECT_TRUE(fs::exists(cut / "journal/SustainDiffusion_rep04.jsonl"));
    EXPECT_EQ(ojson::parse(fixtures::slurp(cut / "campaign.json"))["status"], "partial");

    auto resumed = run_campaign(c_cut, synthetic());
    EXPECT_EQ(resumed.status, CampaignStatus::Complete);
    EXPECT_EQ(resumed.runs_skipped, 4);
    // The seven calls journaled before the failure are replayed, not repeated.
    EXPECT_EQ(resumed.evaluations, reference_calls - four - 7);
    EXPECT_FALSE(fs::exists(cut / "journal"));

    auto tr = fixtures::tree(ref.path()), tc = fixtures::tree(cut.path());
    EXPECT_EQ(tr, tc);
}

TEST(Campaign, ParallelWorkersMatchSequential) {
    TempDir s("campaign_seq"), p("campaign_par");
    auto cs = tiny(s.path(), {Strategy::SustainDiffusion, Strategy::RandomSearch, Strategy::GA_Single}, 3);
    auto cp = tiny(p.path(), {Strategy::SustainDiffusion, Strategy::RandomSearch, Strategy::GA_Single}, 3);
    cp.parallel = 3;
    run_campaign(cs, synthetic());
    run_campaign(cp, synthetic());
    EXPECT_EQ(fixtures::tree(s / "runs"), fixtures::tree(p / "runs"));
}

TEST(Campaign, FixedBaselines) {
    TempDir dir("campaign_fixed");
    auto c = tiny(dir.path(), {Strategy::SD3Default, Strategy::FairPrompt}, 2);
    run_campaign(c, synthetic());
    for (int rep = 0; rep < 2; ++rep) {
        auto d = load_runlog(dir / ("runs/" + run_name(Strategy::SD3Default, rep) + ".jsonl"));
        ASSERT_EQ(d.log.final_front.size(), 1u);
        EXPECT_EQ(d.log.final_front[0].individual, default_individual());
        EXPECT_EQ(d.log.final_front[0].individual.guidance_tenths, 70);
        EXPECT_EQ(d.log.final_front[0].individual.inference_steps, 50);
        auto f = load_runlog(dir / ("runs/" + run_name(Strategy::FairPrompt, rep) + ".jsonl"));
        EXPECT_EQ(f.log.config.base_prompt, std::string(kDefaultBasePrompt) +
                                                " such that it fairly represents different genders and ethnicities");
    }
}

TEST(Generalisation, RowSumsAndRebucketing) {
    TempDir dir("campaign_gen");
    auto c = tiny(dir.path(), {Strategy::SustainDiffusion, Strategy::RandomSearch, Strategy::SD3Default, Strategy::FairPrompt}, 2);
    c.prompts = some_prompts(56);
    auto r = run_campaign(c, synthetic());
    ASSERT_EQ(r.status, CampaignStatus::Complete);
    auto rows = read_generalisation(dir / "generalisation.jsonl");
    ASSERT_EQ(rows.size(), 56u);
    for (auto const& row : rows) {
        ASSERT_EQ(row.baselines.size(), 3u);
        EXPECT_EQ(row.baselines[0].strategy, Strategy::SD3Default);
        EXPECT_EQ(row.baselines[2].prompt, fair_prompt(row.prompt));
        EXPECT_EQ(row.candidate.result.fitness.values.size(), 6u);
    }
    auto wtl = generalisation_win_tie_loss(rows, TieRule::StrictlyBetter);
    ASSERT_EQ(wtl.size(), 6u);
    for (auto const& w : wtl) EXPECT_EQ(w.counts.total(), 56);

    // The no-quality rows agree with the counting oracle on the same vectors.
    auto const reduced = without_quality(ObjectiveSpec::all_tracked());
    for (std::size_t b = 0; b < 3; ++b) {
        std::vector<oracle::Vec> cand, base;
        for (auto const& row : rows) {
            cand.push_back(orient(row.candidate.result.fitness.metrics.project(reduced), reduced));
            base.push_back(orient(row.baselines[b].result.fitness.metrics.project(reduced), reduced));
        }
        auto o = oracle::wtl_strict(cand, base);
        EXPECT_EQ(wtl[2 * b + 1].objective_set, "no_quality");
        EXPECT_EQ(wtl[2 * b + 1].counts, (WinTieLoss{o.w, o.t, o.l}));
    }
}

TEST(Generalisation, IdenticalOutputsAreAllLosses) {
    SyntheticEvaluator ev;
    GeneralisationInputs in;
    in.candidates = {{default_individual(), 0}};
    in.baselines = {Strategy::SD3Default};
    in.prompts = some_prompts(56);
    in.seed = 4;
    auto rows = generalisation_experiment(ev, in);
    auto wtl = generalisation_win_tie_loss(rows, TieRule::StrictlyBetter);
    EXPECT_EQ(wtl[0].counts, (WinTieLoss{0, 0, 56}));
    EXPECT_EQ(wtl[1].counts, (WinTieLoss{0, 0, 56}));
}

TEST(Generalisation, PersistenceRoundTrip) {
    TempDir dir("gen_io");
    SyntheticEvaluator ev;
    GeneralisationInputs in;
    Individual other;
    other.inference_steps = 30;
    in.candidates = {{default_individual(), 0}, {other, 1}};
    in.baselines = {Strategy::SD3Default, Strategy::RandomSearch, Strategy::FairPrompt};
    in.searched[Strategy::RandomSearch] = {{other, 3}};
    in.prompts = some_prompts(7);
    in.seed = 9;
    auto rows = generalisation_experiment(ev, in);
    write_generalisation(dir / "g.jsonl", rows);
    auto back = read_generalisation(dir / "g.jsonl");
    ASSERT_EQ(back.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(back[i].prompt, rows[i].prompt);
        EXPECT_EQ(back[i].seed, rows[i].seed);
        EXPECT_EQ(back[i].candidate.result, rows[i].candidate.result);
        EXPECT_EQ(back[i].baselines[1].repetition, 3);
    }
    EXPECT_THROW(generalisation_experiment(ev, GeneralisationInputs{}), std::invalid_argument);
}

TEST(Journal, ReplaysAndIgnoresTornLines) {
    TempDir dir("journal");
    auto path = dir / "j.jsonl";
    SyntheticEvaluator inner;
    auto req = make_request(default_individual(), "base", 4, 11);
    EvaluationResponse first;
    {
        JournalingEvaluator j(inner, path);
        first = j.evaluate(req);
    }
    std::ofstream(path, std::ios::app) << "{\"request\":{\"id\":0,";  // crash mid-write
    SyntheticEvaluator fresh;
    JournalingEvaluator j(fresh, path);
    auto again = j.evaluate(req);
    EXPECT_EQ(again.records, first.records);
    EXPECT_EQ(fresh.calls(), 0u);
    EXPECT_EQ(j.replayed(), 1u);
    req.request_id = 77;  // ids are not part of the journal key
    EXPECT_EQ(j.evaluate(req).request_id, 77);
}

TEST(CampaignConfig, ParsesAndResolvesPaths) {
    TempDir dir("config");
    fixtures::spit(dir / "p.txt", "# prompts\nfirst prompt\nsecond prompt\n");
    fixtures::spit(dir / "pos.txt", "a\nb\n");
    fixtures::spit(dir / "neg.txt", "c\n");
    fixtures::spit(dir / "cfg.json", R"({
        "campaign_seed": 5, "strategies": ["SustainDiffusion", "GA_Single"], "repetitions": 2,
        "prompt_dataset": "p.txt", "keywords": {"positive": "pos.txt", "negative": "neg.txt"},
        "search": {"population_size": 10, "generations": 2},
        "strategy_options": {"single_objective": "GpuEnergy"},
        "evaluator": {"kind": "synthetic", "landscape": {"seed": 3}},
        "analysis": {"hv_normalize": true, "tie_rule": "non_worse", "objectives": ["ImageQuality", "CpuEnergy"]},
        "output_dir": "out"})");
    auto c = load_campaign_config(dir / "cfg.json");
    EXPECT_EQ(c.campaign_seed, 5u);
    EXPECT_EQ(c.strategies.size(), 2u);
    EXPECT_EQ(c.prompts.size(), 2u);
    EXPECT_EQ(c.search.population_size, 10);
    EXPECT_EQ(c.strategy_options.single_objective, Objective::GpuEnergy);
    EXPECT_EQ(c.landscape.seed, 3u);
    EXPECT_TRUE(c.analysis.hv_normalize);
    EXPECT_EQ(c.analysis.tie_rule, TieRule::NoWorse);
    EXPECT_EQ(c.analysis.objectives.size(), 2u);
    EXPECT_EQ(fs::weakly_canonical(c.output_dir), fs::weakly_canonical(dir / "out"));
    EXPECT_EQ(campaign_pools(c).positive().size(), 2u);
}

TEST(CampaignConfig, RejectsBadConfigs) {
    TempDir dir("config_bad");
    auto parse = [&](std::string const& text) { return campaign_config_from_json(ojson::parse(text), dir.path()); };
    EXPECT_THROW(parse(R"({"colour": "blue"})"), ConfigError);
    EXPECT_THROW(parse(R"({"repetitions": 0})"), ConfigError);
    EXPECT_THROW(parse(R"({"strategies": ["Hillclimb"]})"), ConfigError);
    EXPECT_THROW(parse(R"({"strategies": ["RandomSearch", "RandomSearch"]})"), ConfigError);
    EXPECT_THROW(parse(R"({"evaluator": {"kind": "bridge"}})"), ConfigError);
    EXPECT_THROW(parse(R"({"evaluator": {"kind": "bridge", "endpoint": "exec:x"}, "parallel": 2})"), ConfigError);
    EXPECT_THROW(parse(R"({"evaluator": {"kind": "quantum"}})"), ConfigError);
    EXPECT_THROW(parse(R"({"prompt_dataset": "nope.txt"})"), ConfigError);
    EXPECT_THROW(parse(R"({"keywords": {"positive": "a.txt"}})"), ConfigError);
    EXPECT_THROW(parse(R"({"search": {"mutation_prob": 2}})"), ConfigError);
    EXPECT_THROW(parse(R"({"repetitions": "ten"})"), ConfigError);
    EXPECT_THROW(parse(R"({"analysis": {"tie_rule": "lenient"}})"), ConfigError);
    EXPECT_THROW(parse("[]"), ConfigError);
    fixtures::spit(dir / "dup.txt", "same\nsame\n");
    EXPECT_THROW(parse(R"({"prompt_dataset": "dup.txt"})"), ConfigError);
    EXPECT_NO_THROW(parse("{}"));
}
