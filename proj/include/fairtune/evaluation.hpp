#ifndef FAIRTUNE_EVALUATION_HPP
#define FAIRTUNE_EVALUATION_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

#include "fairtune/error.hpp"
#include "fairtune/genotype.hpp"
#include "fairtune/objectives.hpp"
#include "fairtune/protocol.hpp"
#include "fairtune/rng.hpp"

namespace fairtune {

/// Anything that turns an image-generation request into per-image records:
/// the synthetic landscape, or an external bridge process.
class Evaluator {
public:
    virtual ~Evaluator() = default;
    virtual EvaluationResponse evaluate(EvaluationRequest const& request) = 0;
    virtual std::string describe() const = 0;
};

/// The bridge answered with an error message instead of records.
struct EvaluationFailed : EvaluatorUnavailable {
    using EvaluatorUnavailable::EvaluatorUnavailable;
};

/// Image seed for one configuration within a run. Independent of the
/// generation so a surviving individual maps to the same evaluation.
inline std::uint64_t request_seed(std::uint64_t run_seed, std::string const& individual_key) {
    return hash_all(run_seed, individual_key) & kSeedMask;
}

inline EvaluationRequest make_request(Individual const& ind, std::string const& base_prompt, int images,
                                      std::uint64_t seed, std::int64_t request_id = 0) {
    auto prompts = render_prompts(ind, base_prompt);
    EvaluationRequest req;
    req.request_id = request_id;
    req.positive_prompt = std::move(prompts.positive_prompt);
    req.negative_prompt = std::move(prompts.negative_prompt);
    req.guidance_scale = ind.guidance_scale();
    req.inference_steps = ind.inference_steps;
    req.image_count = images;
    req.seed = seed & kSeedMask;
    return req;
}

/// Sends one request and checks the reply against it.
inline std::vector<ImageRecord> checked_evaluate(Evaluator& evaluator, EvaluationRequest const& req) {
    auto resp = evaluator.evaluate(req);
    if (resp.error) throw EvaluationFailed("evaluator error for request " + std::to_string(req.request_id) + ": " + *resp.error);
    if (resp.request_id != req.request_id)
        throw ProtocolError("response id " + std::to_string(resp.request_id) + " does not match request " +
                            std::to_string(req.request_id));
    if (std::ssize(resp.records) != req.image_count)
        throw ProtocolError("expected " + std::to_string(req.image_count) + " records, got " +
                            std::to_string(resp.records.size()));
    return std::move(resp.records);
}

inline EvaluationBatch evaluate(Evaluator& evaluator, Individual const& ind, std::string const& base_prompt, int images,
                                std::uint64_t seed) {
    EvaluationBatch batch;
    batch.individual_key = canonical_key(ind);
    batch.records = checked_evaluate(evaluator, make_request(ind, base_prompt, images, seed));
    batch.validate();
    return batch;
}

/// Genotype-keyed memo of evaluation batches. Thread-safe; failed
/// evaluations are never stored.
class EvaluationCache {
public:
    struct Key {
        std::string individual_key;
        std::string base_prompt;
        std::uint64_t seed = 0;
        auto operator<=>(Key const&) const = default;
    };

    std::optional<EvaluationBatch> find(Key const& key) const {
        std::lock_guard lock(mutex_);
        auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    }

    void insert(Key key, EvaluationBatch batch) {
        std::lock_guard lock(mutex_);
        entries_.insert_or_assign(std::move(key), std::move(batch));
    }

    std::size_t size() const {
        std::lock_guard lock(mutex_);
        return entries_.size();
    }

private:
    mutable std::mutex mutex_;
    std::map<Key, EvaluationBatch> entries_;
};

struct CachedResult {
    EvaluationBatch batch;
    bool was_cached = false;
};

/// Observer invoked after every fresh (non-cached) evaluation; used to
/// journal results for resumable campaigns.
using EvaluationListener = std::function<void(EvaluationCache::Key const&, EvaluationBatch const&)>;

inline CachedResult cache_get_or_evaluate(EvaluationCache& cache, Evaluator& evaluator, Individual const& ind,
                                          std::string const& base_prompt, int images, std::uint64_t seed,
                                          EvaluationListener const& listener = {}) {
    EvaluationCache::Key key{canonical_key(ind), base_prompt, seed};
    if (auto hit = cache.find(key)) return {std::move(*hit), true};
    auto batch = evaluate(evaluator, ind, base_prompt, images, seed);
    if (listener) listener(key, batch);
    cache.insert(key, batch);
    return {std::move(batch), false};
}

}  // namespace fairtune

#endif
