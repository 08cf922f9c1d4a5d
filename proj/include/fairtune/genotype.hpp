#ifndef FAIRTUNE_GENOTYPE_HPP
#define FAIRTUNE_GENOTYPE_HPP

// Search-space individual: two diffusion hyperparameters plus concrete
// positive/negative keyword subsets and one uniform prompt weight.

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "fairtune/error.hpp"
#include "fairtune/rng.hpp"

namespace fairtune {

/// Inclusive ranges of every gene. Guidance is held in tenths so the 0.1 grid
/// is exact.
struct SearchBounds {
    int guidance_min_tenths = 0;
    int guidance_max_tenths = 200;
    int guidance_step_tenths = 1;
    int steps_min = 25;
    int steps_max = 80;
    int steps_step = 1;
    int pos_count_max = 20;
    int neg_count_max = 25;
    int weight_min = 0;
    int weight_max = 5;

    void validate() const {
        auto require = [](bool ok, char const* what) {
            if (!ok) throw ConfigError(std::string("invalid search bounds: ") + what);
        };
        require(guidance_min_tenths >= 0 && guidance_min_tenths <= guidance_max_tenths, "guidance range");
        require(guidance_step_tenths >= 1, "guidance step");
        require(steps_min >= 1 && steps_min <= steps_max, "steps range");
        require(steps_step >= 1, "steps step");
        require(pos_count_max >= 0 && neg_count_max >= 0, "keyword counts");
        require(weight_min >= 0 && weight_min <= weight_max, "weight range");
    }

    /// Same bounds with prompt engineering switched off (no keywords, no weight).
    SearchBounds without_keywords() const {
        SearchBounds b = *this;
        b.pos_count_max = 0;
        b.neg_count_max = 0;
        b.weight_min = 0;
        b.weight_max = 0;
        return b;
    }

    friend bool operator==(SearchBounds const&, SearchBounds const&) = default;
};

inline std::vector<std::string> const& default_positive_keywords() {
    static std::vector<std::string> const pool{
        "photograph",     "photoreal",      "award-winning",  "highly detailed",
        "sharp focus",    "8k",             "professional lighting", "realistic",
        "studio portrait", "high resolution", "cinematic",    "natural skin texture",
        "depth of field", "masterpiece",    "ambitious",      "intelligent",
        "supportive",     "compassionate",  "confident",      "diverse"};
    return pool;
}

inline std::vector<std::string> const& default_negative_keywords() {
    static std::vector<std::string> const pool{
        "illustration", "painting",    "drawing",      "cartoon",    "anime",
        "sketch",       "blurry",      "low quality",  "deformed",   "disfigured",
        "bad anatomy",  "extra limbs", "watermark",    "text",       "out of frame",
        "oversaturated", "grainy",     "3d render",    "cgi",        "ambitious",
        "intelligent",  "supportive",  "compassionate", "confident", "diverse"};
    return pool;
}

/// Keywords that steer demographic representation; shared by both default pools.
inline std::vector<std::string> const& default_bias_keywords() {
    static std::vector<std::string> const words{"ambitious",     "intelligent", "supportive",
                                                "compassionate", "confident",   "diverse"};
    return words;
}

/// Reads a keyword/prompt list: one entry per line, '#' comments, trailing
/// whitespace stripped, blank lines skipped.
inline std::vector<std::string> read_line_list(std::string const& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        out.push_back(line);
    }
    return out;
}

class KeywordPools {
public:
    KeywordPools() : KeywordPools(default_positive_keywords(), default_negative_keywords()) {}

    KeywordPools(std::vector<std::string> positive, std::vector<std::string> negative)
        : positive_(std::move(positive)), negative_(std::move(negative)) {
        check_pool(positive_, "positive");
        check_pool(negative_, "negative");
        for (std::size_t i = 0; i < positive_.size(); ++i) pos_index_.emplace(positive_[i], i);
        for (std::size_t i = 0; i < negative_.size(); ++i) neg_index_.emplace(negative_[i], i);
    }

    static KeywordPools from_files(std::string const& positive_path, std::string const& negative_path) {
        return {read_line_list(positive_path), read_line_list(negative_path)};
    }

    std::vector<std::string> const& positive() const { return positive_; }
    std::vector<std::string> const& negative() const { return negative_; }

    std::optional<std::size_t> positive_position(std::string const& k) const { return find(pos_index_, k); }
    std::optional<std::size_t> negative_position(std::string const& k) const { return find(neg_index_, k); }

private:
    static void check_pool(std::vector<std::string> const& pool, char const* name) {
        if (pool.empty()) throw ConfigError(std::string(name) + " keyword pool is empty");
        std::unordered_set<std::string> seen;
        for (auto const& k : pool) {
            bool blank = std::all_of(k.begin(), k.end(), [](unsigned char c) { return std::isspace(c); });
            if (blank) throw ConfigError(std::string(name) + " keyword pool has a blank entry");
            if (!seen.insert(k).second) throw ConfigError(std::string(name) + " keyword pool repeats '" + k + "'");
        }
    }
    static std::optional<std::size_t> find(std::unordered_map<std::string, std::size_t> const& m,
                                           std::string const& k) {
        auto it = m.find(k);
        if (it == m.end()) return std::nullopt;
        return it->second;
    }

    std::vector<std::string> positive_;
    std::vector<std::string> negative_;
    std::unordered_map<std::string, std::size_t> pos_index_;
    std::unordered_map<std::string, std::size_t> neg_index_;
};

/// Genes in single-point crossover order.
enum class Gene { Guidance = 0, Steps, PositiveKeywords, NegativeKeywords, Weight };
inline constexpr std::size_t kGeneCount = 5;
inline constexpr std::array<Gene, kGeneCount> kGeneOrder{Gene::Guidance, Gene::Steps, Gene::PositiveKeywords,
                                                        Gene::NegativeKeywords, Gene::Weight};

struct Individual {
    int guidance_tenths = 70;
    int inference_steps = 50;
    std::vector<std::string> positive_keywords;  // kept in pool order
    std::vector<std::string> negative_keywords;  // kept in pool order
    int weight = 0;

    double guidance_scale() const { return guidance_tenths / 10.0; }

    friend bool operator==(Individual const&, Individual const&) = default;
};

/// The model's out-of-the-box configuration: guidance 7.0, 50 steps, no keywords.
inline Individual default_individual() { return Individual{}; }

inline void copy_gene(Individual& dst, Individual const& src, Gene gene) {
    switch (gene) {
        case Gene::Guidance: dst.guidance_tenths = src.guidance_tenths; break;
        case Gene::Steps: dst.inference_steps = src.inference_steps; break;
        case Gene::PositiveKeywords: dst.positive_keywords = src.positive_keywords; break;
        case Gene::NegativeKeywords: dst.negative_keywords = src.negative_keywords; break;
        case Gene::Weight: dst.weight = src.weight; break;
    }
}

/// Restores positive/negative disjointness by dropping shared keywords from
/// the negative set.
inline void repair_disjoint(Individual& ind) {
    if (ind.positive_keywords.empty() || ind.negative_keywords.empty()) return;
    std::unordered_set<std::string> pos(ind.positive_keywords.begin(), ind.positive_keywords.end());
    std::erase_if(ind.negative_keywords, [&](std::string const& k) { return pos.count(k) != 0; });
}

/// Returns a description of the first violated invariant, if any. Pool
/// membership is only checked when pools are given.
inline std::optional<std::string> find_violation(Individual const& ind, SearchBounds const& b,
                                                 KeywordPools const* pools = nullptr) {
    auto on_grid = [](int v, int lo, int hi, int step) { return v >= lo && v <= hi && (v - lo) % step == 0; };
    if (!on_grid(ind.guidance_tenths, b.guidance_min_tenths, b.guidance_max_tenths, b.guidance_step_tenths))
        return "guidance off grid or out of range";
    if (!on_grid(ind.inference_steps, b.steps_min, b.steps_max, b.steps_step)) return "inference steps out of range";
    if (ind.weight < b.weight_min || ind.weight > b.weight_max) return "weight out of range";
    if (std::ssize(ind.positive_keywords) > b.pos_count_max) return "too many positive keywords";
    if (std::ssize(ind.negative_keywords) > b.neg_count_max) return "too many negative keywords";

    std::unordered_set<std::string> pos;
    for (auto const& k : ind.positive_keywords) {
        if (!pos.insert(k).second) return "repeated positive keyword '" + k + "'";
        if (pools && !pools->positive_position(k)) return "positive keyword '" + k + "' not in pool";
    }
    std::unordered_set<std::string> neg;
    for (auto const& k : ind.negative_keywords) {
        if (!neg.insert(k).second) return "repeated negative keyword '" + k + "'";
        if (pos.count(k)) return "keyword '" + k + "' in both sets";
        if (pools && !pools->negative_position(k)) return "negative keyword '" + k + "' not in pool";
    }
    return std::nullopt;
}

inline void check_valid(Individual const& ind, SearchBounds const& b, KeywordPools const* pools = nullptr) {
    if (auto v = find_violation(ind, b, pools)) throw std::invalid_argument("invalid individual: " + *v);
}

namespace detail {

/// Draws a count uniformly, then that many distinct entries; result in pool order.
inline std::vector<std::string> sample_keywords(Rng& rng, std::vector<std::string> const& pool, int max_count) {
    auto const cap = std::min<std::int64_t>(max_count, static_cast<std::int64_t>(pool.size()));
    auto const count = static_cast<std::size_t>(rng.uniform_int(0, cap));
    std::vector<std::size_t> idx(pool.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i < count; ++i) std::swap(idx[i], idx[i + rng.index(idx.size() - i)]);
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    std::vector<std::string> out;
    out.reserve(count);
    for (auto i : idx) out.push_back(pool[i]);
    return out;
}

inline int grid_draw(Rng& rng, int lo, int hi, int step) {
    return lo + step * static_cast<int>(rng.uniform_int(0, (hi - lo) / step));
}

}  // namespace detail

inline Individual new_random(Rng& rng, SearchBounds const& bounds, KeywordPools const& pools) {
    Individual ind;
    ind.guidance_tenths =
        detail::grid_draw(rng, bounds.guidance_min_tenths, bounds.guidance_max_tenths, bounds.guidance_step_tenths);
    ind.inference_steps = detail::grid_draw(rng, bounds.steps_min, bounds.steps_max, bounds.steps_step);
    ind.positive_keywords = detail::sample_keywords(rng, pools.positive(), bounds.pos_count_max);
    ind.negative_keywords = detail::sample_keywords(rng, pools.negative(), bounds.neg_count_max);
    ind.weight = static_cast<int>(rng.uniform_int(bounds.weight_min, bounds.weight_max));
    repair_disjoint(ind);
    return ind;
}

struct PromptPair {
    std::string positive_prompt;
    std::string negative_prompt;

    friend bool operator==(PromptPair const&, PromptPair const&) = default;
};

inline PromptPair render_prompts(Individual const& ind, std::string_view base_prompt) {
    if (base_prompt.empty()) throw std::invalid_argument("base prompt must not be empty");
    std::string const plus(static_cast<std::size_t>(std::max(ind.weight, 0)), '+');
    PromptPair out;
    out.positive_prompt.assign(base_prompt);
    for (auto const& k : ind.positive_keywords) {
        out.positive_prompt += ", ";
        out.positive_prompt += k;
        out.positive_prompt += plus;
    }
    for (auto const& k : ind.negative_keywords) {
        if (!out.negative_prompt.empty()) out.negative_prompt += ", ";
        out.negative_prompt += k;
        out.negative_prompt += plus;
    }
    return out;
}

/// Injective text key over genotypes; keyword sets compare order-insensitively.
inline std::string canonical_key(Individual const& ind) {
    auto encode_set = [](std::vector<std::string> words) {
        std::sort(words.begin(), words.end());
        std::string s;
        for (auto const& w : words) {
            s += std::to_string(w.size());
            s += ':';
            s += w;
        }
        return s;
    };
    std::string key = "g" + std::to_string(ind.guidance_tenths) + ";s" + std::to_string(ind.inference_steps) + ";w" +
                      std::to_string(ind.weight) + ";p" + std::to_string(ind.positive_keywords.size()) + "=" +
                      encode_set(ind.positive_keywords) + ";n" + std::to_string(ind.negative_keywords.size()) + "=" +
                      encode_set(ind.negative_keywords);
    return key;
}

}  // namespace fairtune

#endif
