#ifndef FAIRTUNE_RUNLOG_HPP
#define FAIRTUNE_RUNLOG_HPP

// RunLog persistence as JSONL: a header line (strategy, config, seed), one
// line per generation snapshot, and a trailer with the final front.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fairtune/error.hpp"
#include "fairtune/search.hpp"

namespace fairtune {

using ojson = nlohmann::ordered_json;

inline constexpr int kRunLogFormat = 1;

inline ojson to_json(SearchBounds const& b) {
    return ojson{{"guidance_min_tenths", b.guidance_min_tenths}, {"guidance_max_tenths", b.guidance_max_tenths},
                 {"guidance_step_tenths", b.guidance_step_tenths}, {"steps_min", b.steps_min},
                 {"steps_max", b.steps_max},                     {"steps_step", b.steps_step},
                 {"pos_count_max", b.pos_count_max},             {"neg_count_max", b.neg_count_max},
                 {"weight_min", b.weight_min},                   {"weight_max", b.weight_max}};
}

template <typename Json>
SearchBounds bounds_from_json(Json const& j, SearchBounds b = {}) {
    auto get = [&](char const* k, int& dst) {
        if (j.contains(k)) dst = j.at(k).template get<int>();
    };
    get("guidance_min_tenths", b.guidance_min_tenths);
    get("guidance_max_tenths", b.guidance_max_tenths);
    get("guidance_step_tenths", b.guidance_step_tenths);
    get("steps_min", b.steps_min);
    get("steps_max", b.steps_max);
    get("steps_step", b.steps_step);
    get("pos_count_max", b.pos_count_max);
    get("neg_count_max", b.neg_count_max);
    get("weight_min", b.weight_min);
    get("weight_max", b.weight_max);
    return b;
}

inline ojson objectives_to_json(ObjectiveSpec const& spec) {
    ojson a = ojson::array();
    for (auto o : spec) a.push_back(std::string(to_string(o)));
    return a;
}

template <typename Json>
ObjectiveSpec objectives_from_json(Json const& j) {
    std::vector<Objective> objs;
    for (auto const& v : j) {
        auto o = parse_objective(v.template get<std::string>());
        if (!o) throw ConfigError("unknown objective '" + v.template get<std::string>() + "'");
        objs.push_back(*o);
    }
    try {
        return ObjectiveSpec(std::move(objs));
    } catch (std::invalid_argument const& e) {
        throw ConfigError(e.what());
    }
}

inline ojson to_json(SearchConfig const& c) {
    return ojson{{"population_size", c.population_size},
                 {"generations", c.generations},
                 {"crossover_prob", c.crossover_prob},
                 {"mutation_prob", c.mutation_prob},
                 {"inner_mutation_prob", c.inner_mutation_prob},
                 {"selection_rate", c.selection_rate},
                 {"objectives", objectives_to_json(c.objective_spec)},
                 {"seed", c.seed},
                 {"images_per_individual", c.images_per_individual},
                 {"base_prompt", c.base_prompt},
                 {"bounds", to_json(c.bounds)}};
}

/// Missing keys keep the values already in `c`.
template <typename Json>
SearchConfig search_config_from_json(Json const& j, SearchConfig c = {}) {
    auto get = [&](char const* k, auto& dst) {
        if (j.contains(k)) dst = j.at(k).template get<std::decay_t<decltype(dst)>>();
    };
    get("population_size", c.population_size);
    get("generations", c.generations);
    get("crossover_prob", c.crossover_prob);
    get("mutation_prob", c.mutation_prob);
    get("inner_mutation_prob", c.inner_mutation_prob);
    get("selection_rate", c.selection_rate);
    get("seed", c.seed);
    get("images_per_individual", c.images_per_individual);
    get("base_prompt", c.base_prompt);
    if (j.contains("objectives")) c.objective_spec = objectives_from_json(j.at("objectives"));
    if (j.contains("bounds")) c.bounds = bounds_from_json(j.at("bounds"), c.bounds);
    return c;
}

inline ojson to_json(Individual const& ind) {
    return ojson{{"guidance_tenths", ind.guidance_tenths},
                 {"inference_steps", ind.inference_steps},
                 {"positive_keywords", ind.positive_keywords},
                 {"negative_keywords", ind.negative_keywords},
                 {"weight", ind.weight}};
}

template <typename Json>
Individual individual_from_json(Json const& j) {
    Individual ind;
    ind.guidance_tenths = j.at("guidance_tenths").template get<int>();
    ind.inference_steps = j.at("inference_steps").template get<int>();
    ind.positive_keywords = j.at("positive_keywords").template get<std::vector<std::string>>();
    ind.negative_keywords = j.at("negative_keywords").template get<std::vector<std::string>>();
    ind.weight = j.at("weight").template get<int>();
    return ind;
}

inline ojson to_json(Metrics const& m) {
    return ojson{{"ImageQuality", m.image_quality}, {"GenderBias", m.gender_bias}, {"EthnicBias", m.ethnic_bias},
                 {"CpuEnergy", m.cpu_kwh},          {"GpuEnergy", m.gpu_kwh},      {"Duration", m.duration_s}};
}

template <typename Json>
Metrics metrics_from_json(Json const& j) {
    Metrics m;
    m.image_quality = j.at("ImageQuality").template get<double>();
    m.gender_bias = j.at("GenderBias").template get<double>();
    m.ethnic_bias = j.at("EthnicBias").template get<double>();
    m.cpu_kwh = j.at("CpuEnergy").template get<double>();
    m.gpu_kwh = j.at("GpuEnergy").template get<double>();
    m.duration_s = j.at("Duration").template get<double>();
    return m;
}

inline ojson to_json(Evaluated const& e) {
    return ojson{{"key", e.key},
                 {"individual", to_json(e.individual)},
                 {"fitness", e.fitness.values},
                 {"metrics", to_json(e.fitness.metrics)}};
}

template <typename Json>
Evaluated evaluated_from_json(Json const& j) {
    Evaluated e;
    e.individual = individual_from_json(j.at("individual"));
    e.key = j.at("key").template get<std::string>();
    e.fitness.values = j.at("fitness").template get<std::vector<double>>();
    e.fitness.metrics = metrics_from_json(j.at("metrics"));
    return e;
}

/// Provenance attached to a persisted run.
struct RunInfo {
    int repetition = 0;
    std::uint64_t campaign_seed = 0;
};

inline void write_runlog(std::ostream& out, RunLog const& log, RunInfo const& info = {}) {
    out << ojson{{"type", "header"},
                 {"format", kRunLogFormat},
                 {"strategy", std::string(to_string(log.strategy))},
                 {"repetition", info.repetition},
                 {"campaign_seed", info.campaign_seed},
                 {"seed", log.config.seed},
                 {"config", to_json(log.config)}}
               .dump()
        << '\n';
    for (auto const& s : log.snapshots) {
        ojson pop = ojson::array();
        for (std::size_t i = 0; i < s.population.size(); ++i) {
            auto e = to_json(s.population[i]);
            e["rank"] = i < s.front_ranks.size() ? s.front_ranks[i] : 0;
            pop.push_back(std::move(e));
        }
        out << ojson{{"type", "generation"},
                     {"generation", s.generation_index},
                     {"new_evaluations", s.new_evaluations},
                     {"population", std::move(pop)}}
                   .dump()
            << '\n';
    }
    ojson front = ojson::array();
    for (auto const& e : log.final_front) front.push_back(to_json(e));
    out << ojson{{"type", "final_front"}, {"total_evaluations", log.total_evaluations}, {"front", std::move(front)}}.dump()
        << '\n';
}

inline std::string runlog_to_string(RunLog const& log, RunInfo const& info = {}) {
    std::ostringstream os;
    write_runlog(os, log, info);
    return os.str();
}

/// Writes via a temporary file and rename, so a log on disk is always complete.
inline void save_runlog(std::filesystem::path const& path, RunLog const& log, RunInfo const& info = {}) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        write_runlog(out, log, info);
        if (!out) throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

struct LoadedRun {
    RunLog log;
    RunInfo info;
    std::string path;
    int front_line = 0;  // 1-based line of the final-front trailer
};

inline LoadedRun read_runlog(std::istream& in, std::string const& name = "<stream>") {
    LoadedRun run;
    run.path = name;
    std::string line;
    int line_no = 0;
    bool have_header = false, have_trailer = false;
    auto fail = [&](std::string const& what) {
        return Error(name + ":" + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ojson j;
        try {
            j = ojson::parse(line);
        } catch (ojson::parse_error const&) {
            throw fail("malformed JSON");
        }
        try {
            auto const type = j.at("type").get<std::string>();
            if (type == "header") {
                auto s = parse_strategy(j.at("strategy").get<std::string>());
                if (!s) throw fail("unknown strategy");
                run.log.strategy = *s;
                run.log.config = search_config_from_json(j.at("config"));
                run.info.repetition = j.value("repetition", 0);
                run.info.campaign_seed = j.value("campaign_seed", std::uint64_t{0});
                have_header = true;
            } else if (type == "generation") {
                GenerationSnapshot s;
                s.generation_index = j.at("generation").get<int>();
                s.new_evaluations = j.at("new_evaluations").get<int>();
                for (auto const& e : j.at("population")) {
                    s.population.push_back(evaluated_from_json(e));
                    s.front_ranks.push_back(e.value("rank", std::size_t{0}));
                }
                run.log.snapshots.push_back(std::move(s));
            } else if (type == "final_front") {
                run.log.total_evaluations = j.at("total_evaluations").get<int>();
                for (auto const& e : j.at("front")) run.log.final_front.push_back(evaluated_from_json(e));
                run.front_line = line_no;
                have_trailer = true;
            } else {
                throw fail("unknown record type '" + type + "'");
            }
        } catch (ojson::exception const& e) {
            throw fail(e.what());
        } catch (ConfigError const& e) {
            throw fail(e.what());
        }
    }
    if (!have_header) throw Error(name + ": missing header line");
    if (!have_trailer) throw Error(name + ": incomplete run (no final front)");
    return run;
}

inline LoadedRun load_runlog(std::filesystem::path const& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return read_runlog(in, path.string());
}

}  // namespace fairtune

#endif
