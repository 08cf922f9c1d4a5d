#ifndef FAIRTUNE_OBJECTIVES_HPP
#define FAIRTUNE_OBJECTIVES_HPP

// Fitness of one configuration from its per-image evaluation records:
// mean detector-confidence quality, statistical-parity gender and ethnic
// bias, and median per-image energy/duration.

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fairtune {

enum class Gender { Male, Female, Unknown };
enum class Ethnicity { Arab, Asian, Black, White, Unknown };

inline constexpr std::array<Ethnicity, 4> kEthnicityClasses{Ethnicity::Arab, Ethnicity::Asian, Ethnicity::Black,
                                                           Ethnicity::White};

inline std::string_view to_string(Gender g) {
    switch (g) {
        case Gender::Male: return "male";
        case Gender::Female: return "female";
        case Gender::Unknown: break;
    }
    return "unknown";
}

inline std::string_view to_string(Ethnicity e) {
    switch (e) {
        case Ethnicity::Arab: return "arab";
        case Ethnicity::Asian: return "asian";
        case Ethnicity::Black: return "black";
        case Ethnicity::White: return "white";
        case Ethnicity::Unknown: break;
    }
    return "unknown";
}

inline std::optional<Gender> parse_gender(std::string_view s) {
    for (auto g : {Gender::Male, Gender::Female, Gender::Unknown})
        if (s == to_string(g)) return g;
    return std::nullopt;
}

inline std::optional<Ethnicity> parse_ethnicity(std::string_view s) {
    for (auto e : {Ethnicity::Arab, Ethnicity::Asian, Ethnicity::Black, Ethnicity::White, Ethnicity::Unknown})
        if (s == to_string(e)) return e;
    return std::nullopt;
}

struct ImageRecord {
    double quality = 0.0;  // [0,1]
    Gender gender = Gender::Unknown;
    Ethnicity ethnicity = Ethnicity::Unknown;
    double cpu_kwh = 0.0;
    double gpu_kwh = 0.0;
    double duration_s = 0.0;

    std::optional<std::string> violation() const {
        if (!(quality >= 0.0 && quality <= 1.0)) return "quality outside [0,1]";
        if (!(cpu_kwh >= 0.0) || !(gpu_kwh >= 0.0)) return "negative energy";
        if (!(duration_s >= 0.0)) return "negative duration";
        return std::nullopt;
    }

    friend bool operator==(ImageRecord const&, ImageRecord const&) = default;
};

struct EvaluationBatch {
    std::string individual_key;
    std::vector<ImageRecord> records;

    void validate() const {
        if (records.empty()) throw std::invalid_argument("evaluation batch has no records");
        for (auto const& r : records)
            if (auto v = r.violation()) throw std::invalid_argument("invalid image record: " + *v);
    }

    friend bool operator==(EvaluationBatch const&, EvaluationBatch const&) = default;
};

enum class Objective { ImageQuality, GenderBias, EthnicBias, CpuEnergy, GpuEnergy, Duration };
enum class Direction { Maximize, Minimize };

inline constexpr std::array<Objective, 6> kAllObjectives{Objective::ImageQuality, Objective::GenderBias,
                                                        Objective::EthnicBias,   Objective::CpuEnergy,
                                                        Objective::GpuEnergy,    Objective::Duration};

inline constexpr Direction direction_of(Objective o) {
    return o == Objective::ImageQuality ? Direction::Maximize : Direction::Minimize;
}

inline std::string_view to_string(Objective o) {
    switch (o) {
        case Objective::ImageQuality: return "ImageQuality";
        case Objective::GenderBias: return "GenderBias";
        case Objective::EthnicBias: return "EthnicBias";
        case Objective::CpuEnergy: return "CpuEnergy";
        case Objective::GpuEnergy: return "GpuEnergy";
        case Objective::Duration: return "Duration";
    }
    return "?";
}

inline std::optional<Objective> parse_objective(std::string_view s) {
    for (auto o : kAllObjectives)
        if (s == to_string(o)) return o;
    return std::nullopt;
}

/// Ordered, duplicate-free list of objectives; each carries its fixed direction.
class ObjectiveSpec {
public:
    ObjectiveSpec() : ObjectiveSpec(search_default()) {}
    ObjectiveSpec(std::initializer_list<Objective> objs) : ObjectiveSpec(std::vector<Objective>(objs)) {}
    explicit ObjectiveSpec(std::vector<Objective> objs) : objectives_(std::move(objs)) {
        if (objectives_.empty()) throw std::invalid_argument("objective spec is empty");
        for (std::size_t i = 0; i < objectives_.size(); ++i)
            for (std::size_t j = i + 1; j < objectives_.size(); ++j)
                if (objectives_[i] == objectives_[j])
                    throw std::invalid_argument("objective listed twice: " + std::string(to_string(objectives_[i])));
    }

    /// Quality, gender bias, ethnic bias, CPU energy.
    static ObjectiveSpec search_default() {
        return ObjectiveSpec(std::vector{Objective::ImageQuality, Objective::GenderBias, Objective::EthnicBias,
                                         Objective::CpuEnergy});
    }
    static ObjectiveSpec all_tracked() { return ObjectiveSpec(std::vector(kAllObjectives.begin(), kAllObjectives.end())); }

    std::size_t size() const { return objectives_.size(); }
    Objective operator[](std::size_t i) const { return objectives_[i]; }
    Direction direction(std::size_t i) const { return direction_of(objectives_[i]); }
    std::vector<Objective> const& objectives() const { return objectives_; }
    auto begin() const { return objectives_.begin(); }
    auto end() const { return objectives_.end(); }

    friend bool operator==(ObjectiveSpec const&, ObjectiveSpec const&) = default;

private:
    std::vector<Objective> objectives_;
};

/// Every tracked metric of one evaluated configuration.
struct Metrics {
    double image_quality = 0.0;
    double gender_bias = 0.0;
    double ethnic_bias = 0.0;
    double cpu_kwh = 0.0;
    double gpu_kwh = 0.0;
    double duration_s = 0.0;

    double get(Objective o) const {
        switch (o) {
            case Objective::ImageQuality: return image_quality;
            case Objective::GenderBias: return gender_bias;
            case Objective::EthnicBias: return ethnic_bias;
            case Objective::CpuEnergy: return cpu_kwh;
            case Objective::GpuEnergy: return gpu_kwh;
            case Objective::Duration: return duration_s;
        }
        return 0.0;
    }

    std::vector<double> project(ObjectiveSpec const& spec) const {
        std::vector<double> v;
        v.reserve(spec.size());
        for (auto o : spec) v.push_back(get(o));
        return v;
    }

    friend bool operator==(Metrics const&, Metrics const&) = default;
};

/// Active objective values (spec order) plus the full metric set, so GPU
/// energy and duration are recorded even when not searched.
struct FitnessVector {
    std::vector<double> values;
    Metrics metrics;

    friend bool operator==(FitnessVector const&, FitnessVector const&) = default;
};

/// Mean detector confidence of one image; 0 when nothing was detected.
inline double image_quality(std::span<double const> confidences) {
    if (confidences.empty()) return 0.0;
    double sum = 0.0;
    for (double c : confidences) {
        if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("detector confidence outside [0,1]");
        sum += c;
    }
    return sum / static_cast<double>(confidences.size());
}

inline double aggregate_quality(EvaluationBatch const& batch) {
    double sum = 0.0;
    for (auto const& r : batch.records) sum += r.quality;
    return sum / static_cast<double>(batch.records.size());
}

/// Highest minus lowest share over a fixed set of classes; 1 when every
/// count is zero. With two classes this is |P_a - P_b|.
inline double representation_spread(std::span<std::size_t const> counts) {
    std::size_t total = 0;
    for (auto c : counts) total += c;
    if (total == 0) return 1.0;
    auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    return static_cast<double>(*hi - *lo) / static_cast<double>(total);
}

/// |P_male - P_female| over labelled images; 1 when no image has a gender label.
inline double gender_bias(EvaluationBatch const& batch) {
    std::array<std::size_t, 2> counts{};
    for (auto const& r : batch.records) {
        if (r.gender == Gender::Male) ++counts[0];
        else if (r.gender == Gender::Female) ++counts[1];
    }
    return representation_spread(counts);
}

/// Spread between the most and least represented of the four ethnicity
/// classes; absent classes count as 0%. 1 when no image has a label.
inline double ethnic_bias(EvaluationBatch const& batch) {
    std::array<std::size_t, 4> counts{};
    for (auto const& r : batch.records)
        if (r.ethnicity != Ethnicity::Unknown) ++counts[static_cast<std::size_t>(r.ethnicity)];
    return representation_spread(counts);
}

/// Even length: midpoint of the two central order statistics.
inline double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median of empty sequence");
    auto const n = values.size();
    auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(values.begin(), mid, values.end());
    double const upper = *mid;
    if (n % 2 == 1) return upper;
    double const lower = *std::max_element(values.begin(), mid);
    return (lower + upper) / 2.0;
}

struct EnergyMedians {
    double cpu_kwh = 0.0;
    double gpu_kwh = 0.0;
    double duration_s = 0.0;
};

inline EnergyMedians energy_fitness(EvaluationBatch const& batch) {
    std::vector<double> cpu, gpu, dur;
    for (auto const& r : batch.records) {
        cpu.push_back(r.cpu_kwh);
        gpu.push_back(r.gpu_kwh);
        dur.push_back(r.duration_s);
    }
    return {median(std::move(cpu)), median(std::move(gpu)), median(std::move(dur))};
}

inline Metrics compute_metrics(EvaluationBatch const& batch) {
    batch.validate();
    auto const energy = energy_fitness(batch);
    return {aggregate_quality(batch), gender_bias(batch), ethnic_bias(batch),
            energy.cpu_kwh,           energy.gpu_kwh,     energy.duration_s};
}

inline FitnessVector fitness_vector(EvaluationBatch const& batch, ObjectiveSpec const& spec) {
    FitnessVector f;
    f.metrics = compute_metrics(batch);
    f.values = f.metrics.project(spec);
    return f;
}

}  // namespace fairtune

#endif
