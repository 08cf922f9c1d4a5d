#ifndef FAIRTUNE_REPORT_HPP
#define FAIRTUNE_REPORT_HPP

// Report generation over one or more campaign directories. Every table is
// written with fixed ordering and "%.10g" numbers, so the same logs always
// produce the same bytes. Rows carry the run file (and trailer line) they
// were computed from.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fairtune/analysis.hpp"
#include "fairtune/campaign.hpp"

namespace fairtune {

/// Everything the report needs, loaded from disk.
struct CampaignData {
    std::vector<LoadedRun> runs;
    std::vector<std::string> missing;  // expected or present-but-unreadable run files, with reason
    std::vector<GeneralisationRow> generalisation;
    AnalysisOptions analysis;
};

namespace detail {

inline std::string join_path(std::string const& prefix, std::string const& rel) {
    return prefix.empty() ? rel : (fs::path(prefix) / rel).generic_string();
}

}  // namespace detail

/// Loads a campaign directory. `label` prefixes recorded paths (empty: paths
/// relative to the directory), which keeps reports independent of where the
/// campaign lives on disk.
inline void load_campaign_dir(fs::path const& dir, std::string const& label, CampaignData& data) {
    if (!fs::is_directory(dir)) throw ConfigError("not a campaign directory: " + dir.string());
    std::set<std::string> expected;
    if (auto manifest = dir / "campaign.json"; fs::exists(manifest)) {
        std::ifstream in(manifest);
        try {
            auto m = ojson::parse(in);
            if (m.contains("analysis")) data.analysis = analysis_options_from_json(m.at("analysis"), data.analysis);
            for (auto const& r : m.at("runs")) expected.insert(r.at("file").get<std::string>());
        } catch (ojson::exception const& e) {
            throw ConfigError(manifest.string() + ": " + e.what());
        }
    }
    std::vector<fs::path> files;
    if (fs::is_directory(dir / "runs"))
        for (auto const& e : fs::directory_iterator(dir / "runs"))
            if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::set<std::string> loaded;
    for (auto const& f : files) {
        auto const rel = "runs/" + f.filename().string();
        std::ifstream in(f, std::ios::binary);
        try {
            data.runs.push_back(read_runlog(in, detail::join_path(label, rel)));
            loaded.insert(rel);
        } catch (Error const& e) {
            data.missing.push_back(detail::join_path(label, rel) + ": " + e.what());
            loaded.insert(rel);
        }
    }
    for (auto const& rel : expected)
        if (!loaded.count(rel)) data.missing.push_back(detail::join_path(label, rel) + ": not found");
    if (auto g = dir / "generalisation.jsonl"; fs::exists(g)) {
        auto rows = read_generalisation(g);
        data.generalisation.insert(data.generalisation.end(), rows.begin(), rows.end());
    }
}

inline CampaignData load_campaign(fs::path const& dir) {
    CampaignData d;
    load_campaign_dir(dir, "", d);
    return d;
}

/// Several campaigns pooled (e.g. one strategy per directory). A strategy
/// repetition present in two directories is an error.
inline CampaignData load_campaigns(std::vector<fs::path> const& dirs) {
    CampaignData d;
    for (auto const& dir : dirs) load_campaign_dir(dir, dir.generic_string(), d);
    std::set<std::pair<Strategy, int>> seen;
    for (auto const& r : d.runs)
        if (!seen.insert({r.log.strategy, r.info.repetition}).second)
            throw ConfigError("run " + run_name(r.log.strategy, r.info.repetition) + " appears in more than one directory");
    return d;
}

// ---------------------------------------------------------------------------
// Formatting

inline std::string fmt_num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);  // shortest form that reads back exactly
    return std::string(buf, res.ptr);
}

inline std::string csv_field(std::string const& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : width_(header.size()) { row(header); }

    void row(std::vector<std::string> const& cells) {
        if (cells.size() != width_) throw std::logic_error("csv row width mismatch");
        for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << csv_field(cells[i]);
        os_ << '\n';
    }
    std::string str() const { return os_.str(); }

private:
    std::size_t width_;
    std::ostringstream os_;
};

// ---------------------------------------------------------------------------
// Tables

inline std::string runs_csv(std::vector<StrategyResults> const& groups) {
    std::vector<std::string> header{"strategy", "repetition", "seed", "file", "front_line", "front_size",
                                    "generations", "total_evaluations", "mean_new_evaluations"};
    for (auto o : kAllObjectives) header.push_back("front_mean_" + std::string(to_string(o)));
    CsvWriter w(header);
    for (auto const& g : groups)
        for (auto const& r : g.runs) {
            double mean_new = 0.0;
            int gens = 0;
            for (auto const& s : r.log.snapshots)
                if (s.generation_index > 0) {
                    mean_new += s.new_evaluations;
                    ++gens;
                }
            std::vector<std::string> row{std::string(to_string(g.strategy)), std::to_string(r.info.repetition),
                                         std::to_string(r.log.config.seed), r.path, std::to_string(r.front_line),
                                         std::to_string(r.log.final_front.size()), std::to_string(gens),
                                         std::to_string(r.log.total_evaluations), gens ? fmt_num(mean_new / gens) : ""};
            for (auto o : kAllObjectives) row.push_back(fmt_num(front_mean(r, o)));
            w.row(row);
        }
    return w.str();
}

/// Mean and standard deviation per objective and strategy; comparison columns
/// (one-sided Wilcoxon vs the reference strategy, Bonferroni threshold, A12)
/// appear only when at least one comparison exists.
inline std::string objectives_csv(std::vector<ObjectiveSummary> const& rows) {
    bool const compare = std::any_of(rows.begin(), rows.end(), [](auto const& r) { return r.vs_reference.has_value(); });
    std::vector<std::string> header{"strategy", "objective", "direction", "runs", "mean", "std"};
    if (compare)
        for (char const* h : {"wilcoxon_w", "p_value", "threshold", "significant", "a12", "a12_magnitude"})
            header.push_back(h);
    CsvWriter w(header);
    double const threshold = stats::bonferroni_threshold(stats::kAlpha, kObjectiveComparisons);
    for (auto const& r : rows) {
        std::vector<std::string> row{std::string(to_string(r.strategy)), std::string(to_string(r.objective)),
                                     direction_of(r.objective) == Direction::Maximize ? "max" : "min",
                                     std::to_string(r.per_run.size()), fmt_num(r.mean), fmt_num(r.stddev)};
        if (compare) {
            if (r.vs_reference) {
                auto const& c = *r.vs_reference;
                row.insert(row.end(), {fmt_num(c.wilcoxon.statistic), fmt_num(c.wilcoxon.p_value), fmt_num(threshold),
                                       c.wilcoxon.significant ? "yes" : "no", fmt_num(c.a12.value),
                                       std::string(to_string(c.a12.magnitude))});
            } else {
                row.insert(row.end(), 6, "");
            }
        }
        w.row(row);
    }
    return w.str();
}

inline std::string pareto_counts_csv(ParetoCounts const& pc) {
    CsvWriter w({"strategy", "front_members", "pooled_solutions"});
    for (auto const& [s, n] : pc.counts) w.row({std::string(to_string(s)), std::to_string(n), std::to_string(pc.pooled)});
    return w.str();
}

inline std::string pareto_front_csv(ParetoCounts const& pc) {
    std::vector<std::string> header{"strategy", "repetition", "file", "line", "key"};
    for (auto o : kAllObjectives) header.emplace_back(to_string(o));
    CsvWriter w(header);
    for (auto const& m : pc.front) {
        std::vector<std::string> row{std::string(to_string(m.strategy)), std::to_string(m.repetition), m.path,
                                     std::to_string(m.line), m.solution.key};
        for (auto o : kAllObjectives) row.push_back(fmt_num(m.solution.fitness.metrics.get(o)));
        w.row(row);
    }
    return w.str();
}

inline std::string hypervolume_csv(HypervolumeReport const& hv) {
    CsvWriter w({"strategy", "repetition", "file", "hypervolume"});
    for (auto const& s : hv.series)
        for (std::size_t i = 0; i < s.values.size(); ++i)
            w.row({std::string(to_string(s.strategy)), std::to_string(s.repetitions[i]), s.paths[i], fmt_num(s.values[i])});
    return w.str();
}

inline double median_of(std::vector<double> v) { return v.empty() ? 0.0 : median(v); }

inline std::string hypervolume_json(HypervolumeReport const& hv) {
    ojson strategies = ojson::object();
    for (auto const& s : hv.series) {
        ojson e{{"values", s.values}, {"median", median_of(s.values)}, {"mean", stats::mean(s.values)}};
        if (s.vs_reference) {
            e["vs_reference"] = ojson{{"wilcoxon_w", s.vs_reference->wilcoxon.statistic},
                                      {"p_value", s.vs_reference->wilcoxon.p_value},
                                      {"significant", s.vs_reference->wilcoxon.significant},
                                      {"a12", s.vs_reference->a12.value},
                                      {"a12_magnitude", std::string(to_string(s.vs_reference->a12.magnitude))}};
        }
        strategies[std::string(to_string(s.strategy))] = std::move(e);
    }
    ojson j{{"mode", hv.reference.normalized ? "normalized" : "raw"},
            {"epsilon", hv.epsilon},
            {"objectives", objectives_to_json(hv.spec)},
            {"reference_point", hv.reference.values},
            {"reference_strategy", std::string(to_string(Strategy::SustainDiffusion))},
            {"strategies", std::move(strategies)}};
    return j.dump(2) + "\n";
}

inline std::string variability_csv(std::vector<StrategyResults> const& groups) {
    CsvWriter w({"strategy", "objective", "kruskal_h", "p_value", "significant", "dunn_significant_pair_fraction"});
    for (auto const& g : groups)
        for (auto const& v : variability(g))
            w.row({std::string(to_string(g.strategy)), std::string(to_string(v.objective)), fmt_num(v.kruskal.statistic),
                   fmt_num(v.kruskal.p_value), v.kruskal.significant ? "yes" : "no",
                   v.dunn_significant_fraction ? fmt_num(*v.dunn_significant_fraction) : ""});
    return w.str();
}

inline std::string correlation_csv(std::vector<StrategyResults> const& groups) {
    CsvWriter w({"strategy", "objective_a", "objective_b", "spearman_rho"});
    for (auto const& g : groups)
        for (auto const& c : objective_correlations(g))
            w.row({std::string(to_string(g.strategy)), std::string(to_string(c.a)), std::string(to_string(c.b)),
                   c.rho ? fmt_num(*c.rho) : "undefined"});
    return w.str();
}

inline std::string win_tie_loss_csv(std::vector<GeneralisationRow> const& rows, TieRule rule) {
    CsvWriter w({"baseline", "objectives", "tie_rule", "wins", "ties", "losses", "prompts"});
    for (auto const& r : generalisation_win_tie_loss(rows, rule))
        w.row({std::string(to_string(r.baseline)), r.objective_set, std::string(to_string(rule)),
               std::to_string(r.counts.wins), std::to_string(r.counts.ties), std::to_string(r.counts.losses),
               std::to_string(r.counts.total())});
    return w.str();
}

inline std::string generalisation_csv(std::vector<GeneralisationRow> const& rows) {
    std::vector<std::string> header{"prompt_index", "prompt", "configuration", "source_repetition"};
    for (auto o : kAllObjectives) header.emplace_back(to_string(o));
    CsvWriter w(header);
    auto emit = [&](GeneralisationRow const& r, GeneralisationEntry const& e) {
        std::vector<std::string> row{std::to_string(r.index), r.prompt, std::string(to_string(e.strategy)),
                                     e.repetition >= 0 ? std::to_string(e.repetition) : ""};
        for (auto o : kAllObjectives) row.push_back(fmt_num(e.result.fitness.metrics.get(o)));
        w.row(row);
    };
    for (auto const& r : rows) {
        emit(r, r.candidate);
        for (auto const& b : r.baselines) emit(r, b);
    }
    return w.str();
}

// ---------------------------------------------------------------------------

struct ReportFile {
    std::string name;
    std::string content;
};

/// Builds every report table in memory.
inline std::vector<ReportFile> build_report(CampaignData const& data) {
    std::vector<ReportFile> files;
    auto groups = group_by_strategy(data.runs);
    std::string missing = "missing\n";
    for (auto const& m : data.missing) missing += csv_field(m) + "\n";
    files.push_back({"missing_runs.csv", missing});
    if (groups.empty()) return files;

    std::optional<Strategy> ref = Strategy::SustainDiffusion;
    auto const& a = data.analysis;
    files.push_back({"runs.csv", runs_csv(groups)});
    files.push_back({"objectives.csv", objectives_csv(summarize_objectives(groups, ref))});
    auto pc = pareto_counts(groups, a.objectives);
    files.push_back({"pareto_counts.csv", pareto_counts_csv(pc)});
    files.push_back({"pareto_front.csv", pareto_front_csv(pc)});
    auto hv = hypervolume_report(groups, a.objectives, a.hv_epsilon, a.hv_normalize, ref);
    files.push_back({"hypervolume.csv", hypervolume_csv(hv)});
    files.push_back({"hypervolume.json", hypervolume_json(hv)});
    files.push_back({"variability.csv", variability_csv(groups)});
    files.push_back({"correlation.csv", correlation_csv(groups)});
    if (!data.generalisation.empty()) {
        files.push_back({"generalisation.csv", generalisation_csv(data.generalisation)});
        files.push_back({"win_tie_loss.csv", win_tie_loss_csv(data.generalisation, a.tie_rule)});
    }
    std::sort(files.begin(), files.end(), [](auto const& x, auto const& y) { return x.name < y.name; });
    return files;
}

/// Writes the report tables into `out_dir`; returns the file names written.
inline std::vector<std::string> generate_report(CampaignData const& data, fs::path const& out_dir) {
    fs::create_directories(out_dir);
    std::vector<std::string> names;
    for (auto const& f : build_report(data)) {
        std::ofstream out(out_dir / f.name, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + (out_dir / f.name).string());
        out << f.content;
        names.push_back(f.name);
    }
    return names;
}

/// Short human-readable digest for the terminal.
inline std::string summary_text(CampaignData const& data) {
    std::ostringstream os;
    auto groups = group_by_strategy(data.runs);
    os << "runs loaded: " << data.runs.size() << ", missing: " << data.missing.size() << '\n';
    if (groups.empty()) return os.str();
    auto const& a = data.analysis;
    auto hv = hypervolume_report(groups, a.objectives, a.hv_epsilon, a.hv_normalize, Strategy::SustainDiffusion);
    auto pc = pareto_counts(groups, a.objectives);
    os << "hypervolume (" << (a.hv_normalize ? "normalized" : "raw") << ", epsilon " << fmt_num(a.hv_epsilon) << ")\n";
    for (auto const& s : hv.series) {
        os << "  " << to_string(s.strategy) << ": median " << fmt_num(median_of(s.values)) << " over " << s.values.size()
           << " runs";
        if (s.vs_reference)
            os << "; reference greater p=" << fmt_num(s.vs_reference->wilcoxon.p_value)
               << " A12=" << fmt_num(s.vs_reference->a12.value);
        os << '\n';
    }
    os << "pooled Pareto front: " << pc.front.size() << " of " << pc.pooled << " solutions\n";
    for (auto const& [s, n] : pc.counts) os << "  " << to_string(s) << ": " << n << '\n';
    if (!data.generalisation.empty()) {
        os << "win/tie/loss over " << data.generalisation.size() << " prompts (" << to_string(a.tie_rule) << ")\n";
        for (auto const& r : generalisation_win_tie_loss(data.generalisation, a.tie_rule))
            os << "  vs " << to_string(r.baseline) << " [" << r.objective_set << "]: " << r.counts.wins << '/'
               << r.counts.ties << '/' << r.counts.losses << '\n';
    }
    return os.str();
}

}  // namespace fairtune

#endif
