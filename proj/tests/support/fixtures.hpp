#pragma once

#include <random>
#include <vector>

#include "fairtune/objectives.hpp"

namespace fixtures {

using fairtune::Ethnicity;
using fairtune::EvaluationBatch;
using fairtune::Gender;
using fairtune::ImageRecord;

inline EvaluationBatch batch_with(std::vector<ImageRecord> records) { return {"k", std::move(records)}; }

inline EvaluationBatch genders(int male, int female, int unknown = 0) {
    std::vector<ImageRecord> r;
    for (int i = 0; i < male; ++i) r.push_back({0.5, Gender::Male, Ethnicity::White, 0, 0, 0});
    for (int i = 0; i < female; ++i) r.push_back({0.5, Gender::Female, Ethnicity::White, 0, 0, 0});
    for (int i = 0; i < unknown; ++i) r.push_back({0.5, Gender::Unknown, Ethnicity::White, 0, 0, 0});
    return batch_with(std::move(r));
}

/// counts in Arab, Asian, Black, White order, then Unknown.
inline EvaluationBatch ethnicities(std::vector<int> const& counts) {
    static constexpr Ethnicity order[]{Ethnicity::Arab, Ethnicity::Asian, Ethnicity::Black, Ethnicity::White,
                                       Ethnicity::Unknown};
    std::vector<ImageRecord> r;
    for (std::size_t c = 0; c < counts.size(); ++c)
        for (int i = 0; i < counts[c]; ++i) r.push_back({0.5, Gender::Male, order[c], 0, 0, 0});
    return batch_with(std::move(r));
}

inline std::vector<std::vector<double>> random_points(std::mt19937_64& gen, std::size_t n, std::size_t d,
                                                      bool coarse = false) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> c(0, 4);
    std::vector<std::vector<double>> pts(n, std::vector<double>(d));
    for (auto& p : pts)
        for (auto& x : p) x = coarse ? c(gen) : u(gen);
    return pts;
}

}  // namespace fixtures
