#ifndef FAIRTUNE_SYNTHETIC_HPP
#define FAIRTUNE_SYNTHETIC_HPP

// Deterministic stand-in for the diffusion/detector/VQA stack. It reads the
// same rendered request a real bridge would receive, so every search and
// analysis path can be exercised without a GPU.
//
//   quality     peaked in guidance around quality_peak_guidance, rising mildly
//               with steps, plus a bonus per recognised quality keyword
//   labels      gender/ethnicity drawn from a skewed distribution whose skew
//               shrinks with the number of bias keywords in either prompt
//   energy      cpu/gpu/duration proportional to inference steps
//
// Randomness is a counter-based hash of (landscape seed, request seed, image
// index), so a response is a pure function of (landscape, request).

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fairtune/evaluation.hpp"

namespace fairtune {

struct SyntheticLandscape {
    double quality_peak_guidance = 7.0;
    double quality_width = 3.0;         // guidance distance at which the peak term falls to 1/e
    double quality_floor = 0.30;
    double quality_span = 0.45;
    double steps_quality_gain = 0.08;   // extra quality at the top of the steps range
    int steps_range_min = 25;
    int steps_range_max = 80;
    double keyword_bonus = 0.012;       // per quality keyword, scaled by the weight factor
    double keyword_bonus_cap = 0.12;
    double bias_keyword_quality_cost = 0.008;
    double weight_gain = 0.15;          // weight factor = 1 + weight_gain * weight
    int overweight_threshold = 3;
    double overweight_penalty = 0.01;   // per weight unit above the threshold
    double noise_amplitude = 0.02;

    double gender_skew = 0.45;          // P(male) - 0.5 with no bias keywords
    std::array<double, 4> ethnic_tilt{-0.2, 0.1, -0.2, 0.3};  // arab, asian, black, white; sums to 0
    double bias_decay = 0.6;
    double fair_phrase_strength = 1.0;  // bias-keyword equivalents of the fairness sentence
    std::string fair_phrase = "fairly represents";
    double unknown_rate = 0.0;

    double energy_per_step = 4.0e-6;    // kWh CPU per denoising step
    double gpu_energy_per_step = 3.8e-5;
    double seconds_per_step = 0.68;

    std::set<std::string> bias_keyword_ids{default_bias_keywords().begin(), default_bias_keywords().end()};
    std::set<std::string> quality_keywords = default_quality_keywords();
    std::set<std::string> artifact_keywords = default_artifact_keywords();

    std::uint64_t seed = 0;

    static std::set<std::string> default_quality_keywords() {
        std::set<std::string> s(default_positive_keywords().begin(), default_positive_keywords().end());
        for (auto const& b : default_bias_keywords()) s.erase(b);
        return s;
    }
    static std::set<std::string> default_artifact_keywords() {
        std::set<std::string> s(default_negative_keywords().begin(), default_negative_keywords().end());
        for (auto const& b : default_bias_keywords()) s.erase(b);
        return s;
    }

    /// Skew multiplier in (0, 1]: 1 with no bias keywords.
    double skew_factor(double bias_strength) const { return 1.0 / (1.0 + bias_decay * bias_strength); }
};

/// Keywords recognised in a rendered prompt pair.
struct PromptFeatures {
    int quality_keywords = 0;   // quality keywords in the positive prompt
    int artifact_keywords = 0;  // artifact keywords in the negative prompt
    int bias_keywords = 0;      // distinct bias keywords in either prompt
    int weight = 0;             // '+' suffix length
    bool fair_phrase = false;
};

namespace detail {

inline std::vector<std::string_view> split_segments(std::string_view s) {
    std::vector<std::string_view> out;
    while (!s.empty()) {
        auto pos = s.find(',');
        auto seg = s.substr(0, pos);
        while (!seg.empty() && seg.front() == ' ') seg.remove_prefix(1);
        while (!seg.empty() && seg.back() == ' ') seg.remove_suffix(1);
        if (!seg.empty()) out.push_back(seg);
        if (pos == std::string_view::npos) break;
        s.remove_prefix(pos + 1);
    }
    return out;
}

}  // namespace detail

inline PromptFeatures extract_features(SyntheticLandscape const& land, EvaluationRequest const& req) {
    PromptFeatures f;
    std::set<std::string, std::less<>> bias_seen;
    auto scan = [&](std::string_view prompt, bool positive) {
        for (auto seg : detail::split_segments(prompt)) {
            int plus = 0;
            while (!seg.empty() && seg.back() == '+') {
                seg.remove_suffix(1);
                ++plus;
            }
            std::string const word(seg);
            bool known = false;
            if (land.bias_keyword_ids.count(word)) {
                bias_seen.insert(word);
                known = true;
            } else if (positive && land.quality_keywords.count(word)) {
                ++f.quality_keywords;
                known = true;
            } else if (!positive && land.artifact_keywords.count(word)) {
                ++f.artifact_keywords;
                known = true;
            }
            if (known) f.weight = std::max(f.weight, plus);
        }
    };
    scan(req.positive_prompt, true);
    scan(req.negative_prompt, false);
    f.bias_keywords = static_cast<int>(bias_seen.size());
    f.fair_phrase = !land.fair_phrase.empty() && req.positive_prompt.find(land.fair_phrase) != std::string::npos;
    return f;
}

/// Expected per-image quality before noise and clamping.
inline double expected_quality(SyntheticLandscape const& land, EvaluationRequest const& req, PromptFeatures const& f) {
    double const weight_factor = 1.0 + land.weight_gain * f.weight;
    double const peak = std::exp(-std::fabs(req.guidance_scale - land.quality_peak_guidance) / land.quality_width);
    double const steps_frac = std::clamp(static_cast<double>(req.inference_steps - land.steps_range_min) /
                                             static_cast<double>(land.steps_range_max - land.steps_range_min),
                                         0.0, 1.0);
    double const bonus =
        std::min(land.keyword_bonus_cap, land.keyword_bonus * (f.quality_keywords + f.artifact_keywords) * weight_factor);
    double const overweight = land.overweight_penalty * std::max(0, f.weight - land.overweight_threshold);
    return land.quality_floor + land.quality_span * peak + land.steps_quality_gain * steps_frac + bonus -
           land.bias_keyword_quality_cost * f.bias_keywords - overweight;
}

/// Label distribution implied by a request.
struct LabelModel {
    double p_male = 0.5;
    std::array<double, 4> p_ethnicity{0.25, 0.25, 0.25, 0.25};
};

inline LabelModel label_model(SyntheticLandscape const& land, PromptFeatures const& f) {
    double const strength =
        f.bias_keywords * (1.0 + land.weight_gain * f.weight) + (f.fair_phrase ? land.fair_phrase_strength : 0.0);
    double const skew = land.skew_factor(strength);
    LabelModel m;
    m.p_male = 0.5 + land.gender_skew * skew;
    for (std::size_t i = 0; i < 4; ++i) m.p_ethnicity[i] = 0.25 + land.ethnic_tilt[i] * skew;
    return m;
}

inline EvaluationResponse synthetic_evaluate(SyntheticLandscape const& land, EvaluationRequest const& req) {
    EvaluationResponse resp;
    resp.request_id = req.request_id;
    if (req.image_count < 1) {
        resp.error = "image_count must be at least 1";
        return resp;
    }
    auto const features = extract_features(land, req);
    double const q_mean = expected_quality(land, req, features);
    auto const labels = label_model(land, features);
    double const steps = static_cast<double>(req.inference_steps);
    double const energy_noise = 0.5 * land.noise_amplitude;

    resp.records.reserve(static_cast<std::size_t>(req.image_count));
    for (int i = 0; i < req.image_count; ++i) {
        CounterRng rng(hash_all(land.seed, req.seed, static_cast<std::uint64_t>(i)));
        ImageRecord rec;
        rec.quality = std::clamp(q_mean + land.noise_amplitude * rng.symmetric(0), 0.0, 1.0);

        if (rng.uniform(1) < land.unknown_rate) rec.gender = Gender::Unknown;
        else rec.gender = rng.uniform(2) < labels.p_male ? Gender::Male : Gender::Female;

        if (rng.uniform(3) < land.unknown_rate) {
            rec.ethnicity = Ethnicity::Unknown;
        } else {
            double u = rng.uniform(4), acc = 0.0;
            rec.ethnicity = Ethnicity::White;
            for (std::size_t e = 0; e < 4; ++e) {
                acc += labels.p_ethnicity[e];
                if (u < acc) {
                    rec.ethnicity = kEthnicityClasses[e];
                    break;
                }
            }
        }
        rec.cpu_kwh = land.energy_per_step * steps * (1.0 + energy_noise * rng.symmetric(5));
        rec.gpu_kwh = land.gpu_energy_per_step * steps * (1.0 + energy_noise * rng.symmetric(6));
        rec.duration_s = land.seconds_per_step * steps * (1.0 + energy_noise * rng.symmetric(7));
        resp.records.push_back(rec);
    }
    return resp;
}

class SyntheticEvaluator final : public Evaluator {
public:
    explicit SyntheticEvaluator(SyntheticLandscape landscape = {}) : landscape_(std::move(landscape)) {}

    EvaluationResponse evaluate(EvaluationRequest const& request) override {
        ++calls_;
        return synthetic_evaluate(landscape_, request);
    }
    std::string describe() const override { return "synthetic(seed=" + std::to_string(landscape_.seed) + ")"; }

    SyntheticLandscape const& landscape() const { return landscape_; }
    std::size_t calls() const { return calls_; }

private:
    SyntheticLandscape landscape_;
    std::size_t calls_ = 0;
};

inline nlohmann::json to_json(SyntheticLandscape const& l) {
    return nlohmann::json{{"quality_peak_guidance", l.quality_peak_guidance},
                          {"quality_width", l.quality_width},
                          {"quality_floor", l.quality_floor},
                          {"quality_span", l.quality_span},
                          {"steps_quality_gain", l.steps_quality_gain},
                          {"keyword_bonus", l.keyword_bonus},
                          {"keyword_bonus_cap", l.keyword_bonus_cap},
                          {"bias_keyword_quality_cost", l.bias_keyword_quality_cost},
                          {"weight_gain", l.weight_gain},
                          {"noise_amplitude", l.noise_amplitude},
                          {"gender_skew", l.gender_skew},
                          {"ethnic_tilt", l.ethnic_tilt},
                          {"bias_decay", l.bias_decay},
                          {"unknown_rate", l.unknown_rate},
                          {"energy_per_step", l.energy_per_step},
                          {"gpu_energy_per_step", l.gpu_energy_per_step},
                          {"seconds_per_step", l.seconds_per_step},
                          {"bias_keyword_ids", l.bias_keyword_ids},
                          {"seed", l.seed}};
}

/// Missing keys keep their defaults.
inline SyntheticLandscape landscape_from_json(nlohmann::json const& j) {
    SyntheticLandscape l;
    auto get = [&](char const* key, auto& dst) {
        if (j.contains(key)) dst = j.at(key).get<std::decay_t<decltype(dst)>>();
    };
    get("quality_peak_guidance", l.quality_peak_guidance);
    get("quality_width", l.quality_width);
    get("quality_floor", l.quality_floor);
    get("quality_span", l.quality_span);
    get("steps_quality_gain", l.steps_quality_gain);
    get("keyword_bonus", l.keyword_bonus);
    get("keyword_bonus_cap", l.keyword_bonus_cap);
    get("bias_keyword_quality_cost", l.bias_keyword_quality_cost);
    get("weight_gain", l.weight_gain);
    get("noise_amplitude", l.noise_amplitude);
    get("gender_skew", l.gender_skew);
    get("ethnic_tilt", l.ethnic_tilt);
    get("bias_decay", l.bias_decay);
    get("unknown_rate", l.unknown_rate);
    get("energy_per_step", l.energy_per_step);
    get("gpu_energy_per_step", l.gpu_energy_per_step);
    get("seconds_per_step", l.seconds_per_step);
    get("bias_keyword_ids", l.bias_keyword_ids);
    get("seed", l.seed);
    return l;
}

}  // namespace fairtune

#endif
