// Command-line front end: run campaigns, analyze/report/compare campaign
// directories, and check bridge conformance.
//
// Exit codes: 0 success, 2 configuration error, 3 evaluator error,
// 4 partial campaign (rerun to resume), 1 anything else.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fairtune/campaign.hpp"
#include "fairtune/conformance.hpp"
#include "fairtune/report.hpp"

namespace {

using namespace fairtune;

enum Exit { kOk = 0, kOther = 1, kConfig = 2, kEvaluator = 3, kPartial = 4 };

struct AnalysisFlags {
    std::optional<bool> normalize;
    std::optional<double> epsilon;
    std::optional<std::string> tie_rule;
    std::vector<std::string> objectives;

    void add_to(CLI::App* cmd) {
        cmd->add_flag("--normalize,!--raw", normalize, "Hypervolume on [0,1]-normalized objectives");
        cmd->add_option("--epsilon", epsilon, "Hypervolume reference offset");
        cmd->add_option("--tie-rule", tie_rule, "Win-tie-loss tie rule")->check(CLI::IsMember({"strict", "non_worse"}));
        cmd->add_option("--objectives", objectives, "Objectives for Pareto pooling and hypervolume");
    }
    void apply(AnalysisOptions& o) const {
        ojson j = ojson::object();
        if (normalize) j["hv_normalize"] = *normalize;
        if (epsilon) j["hv_epsilon"] = *epsilon;
        if (tie_rule) j["tie_rule"] = *tie_rule;
        if (!objectives.empty()) j["objectives"] = objectives;
        o = analysis_options_from_json(j, o);
    }
};

int cmd_run(std::string const& config_path, std::optional<std::string> const& output, std::optional<int> parallel,
            bool skip_report) {
    auto cfg = load_campaign_config(config_path);
    if (output) cfg.output_dir = *output;
    if (parallel) cfg.parallel = *parallel;
    cfg.validate();
    std::cerr << "campaign: " << cfg.strategies.size() << " strategies x " << cfg.repetitions << " repetitions -> "
              << cfg.output_dir.string() << '\n';
    auto res = run_campaign(cfg, default_evaluator_factory(cfg));
    std::cerr << "runs completed " << res.runs_completed << ", already present " << res.runs_skipped << ", failed "
              << res.runs_failed << ", evaluator calls " << res.evaluations << '\n';
    for (auto const& e : res.errors) std::cerr << "error: " << e << '\n';
    if (res.status == CampaignStatus::Partial) {
        std::cerr << "campaign is partial; rerun the same command to resume\n";
        return kPartial;
    }
    if (!skip_report) {
        auto data = load_campaign(cfg.output_dir);
        auto files = generate_report(data, cfg.output_dir / "report");
        std::cerr << "report: " << files.size() << " files in " << (cfg.output_dir / "report").string() << '\n';
    }
    return kOk;
}

int cmd_analyze(std::string const& dir, AnalysisFlags const& flags) {
    auto data = load_campaign(dir);
    flags.apply(data.analysis);
    std::cout << summary_text(data);
    return data.runs.empty() ? kConfig : kOk;
}

int cmd_report(std::string const& dir, std::optional<std::string> const& out, AnalysisFlags const& flags) {
    auto data = load_campaign(dir);
    flags.apply(data.analysis);
    if (data.runs.empty()) throw ConfigError("no complete run logs in " + dir);
    fs::path const target = out ? fs::path(*out) : fs::path(dir) / "report";
    auto files = generate_report(data, target);
    for (auto const& m : data.missing) std::cerr << "missing: " << m << '\n';
    for (auto const& f : files) std::cout << (target / f).string() << '\n';
    return kOk;
}

int cmd_compare(std::vector<std::string> const& dirs, std::string const& out, AnalysisFlags const& flags) {
    std::vector<fs::path> paths(dirs.begin(), dirs.end());
    auto data = load_campaigns(paths);
    flags.apply(data.analysis);
    if (data.runs.empty()) throw ConfigError("no complete run logs in the given directories");
    auto files = generate_report(data, out);
    std::cout << summary_text(data);
    for (auto const& f : files) std::cout << (fs::path(out) / f).string() << '\n';
    return kOk;
}

int cmd_protocol_check(std::string const& endpoint, int timeout_ms) {
    BridgeOptions opt;
    opt.handshake_timeout = std::chrono::milliseconds(timeout_ms);
    opt.request_timeout = std::chrono::milliseconds(timeout_ms);
    auto bridge = connect_bridge(endpoint, opt);
    auto results = run_conformance(*bridge);
    bool ok = true;
    for (auto const& r : results) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
        ok = ok && r.passed;
    }
    return ok ? kOk : kEvaluator;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-objective configuration search for text-to-image models"};
    app.require_subcommand(1);

    std::string config_path, dir, out, endpoint;
    std::vector<std::string> dirs;
    std::optional<std::string> output, report_out;
    std::optional<int> parallel;
    bool skip_report = false;
    int timeout_ms = 60'000;
    AnalysisFlags flags;

    auto* run = app.add_subcommand("run", "Run (or resume) a campaign");
    run->add_option("config", config_path, "Campaign config (JSON)")->required();
    run->add_option("--output", output, "Override the output directory");
    run->add_option("--parallel", parallel, "Worker threads (synthetic evaluator only)");
    run->add_flag("--no-report", skip_report, "Do not write the report after a complete campaign");

    auto* analyze = app.add_subcommand("analyze", "Print a summary of a campaign directory");
    analyze->add_option("campaign-dir", dir)->required();
    flags.add_to(analyze);

    auto* report = app.add_subcommand("report", "Write CSV/JSON reports for a campaign directory");
    report->add_option("campaign-dir", dir)->required();
    report->add_option("--out", report_out, "Report directory (default <campaign-dir>/report)");
    flags.add_to(report);

    auto* compare = app.add_subcommand("compare", "Pool several campaign directories into one report");
    compare->add_option("dirs", dirs)->required()->expected(1, -1);
    compare->add_option("--out", out, "Report directory")->required();
    flags.add_to(compare);

    auto* check = app.add_subcommand("protocol-check", "Check a bridge for protocol conformance");
    check->add_option("endpoint", endpoint, "exec:<command> or tcp://host:port")->required();
    check->add_option("--timeout-ms", timeout_ms, "Per-message timeout");

    try {
        app.parse(argc, argv);
    } catch (CLI::ParseError const& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (*run) return cmd_run(config_path, output, parallel, skip_report);
        if (*analyze) return cmd_analyze(dir, flags);
        if (*report) return cmd_report(dir, report_out, flags);
        if (*compare) return cmd_compare(dirs, out, flags);
        if (*check) return cmd_protocol_check(endpoint, timeout_ms);
    } catch (ConfigError const& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfig;
    } catch (EvaluatorUnavailable const& e) {
        std::cerr << "evaluator error: " << e.what() << '\n';
        return kEvaluator;
    } catch (ProtocolError const& e) {
        std::cerr << "evaluator error: " << e.what() << '\n';
        return kEvaluator;
    } catch (Timeout const& e) {
        std::cerr << "evaluator error: " << e.what() << '\n';
        return kEvaluator;
    } catch (std::exception const& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kOther;
    }
    return kOther;
}
