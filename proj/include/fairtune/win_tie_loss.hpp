#ifndef FAIRTUNE_WIN_TIE_LOSS_HPP
#define FAIRTUNE_WIN_TIE_LOSS_HPP

#include <stdexcept>
#include <string_view>
#include <vector>

#include "fairtune/dominance.hpp"

namespace fairtune {

enum class TieRule {
    StrictlyBetter,  // tie: strictly better in at least half the objectives
    NoWorse,         // tie: no worse in at least half the objectives
};

inline std::string_view to_string(TieRule r) { return r == TieRule::StrictlyBetter ? "strict" : "non_worse"; }

enum class Outcome { Win, Tie, Loss };

struct WinTieLoss {
    int wins = 0;
    int ties = 0;
    int losses = 0;

    int total() const { return wins + ties + losses; }
    friend bool operator==(WinTieLoss const&, WinTieLoss const&) = default;
};

/// Win: strictly better in every objective. Tie: not a win, but better
/// (per the rule) in at least ceil(k/2) objectives. Loss: anything else.
inline Outcome classify(std::span<double const> candidate, std::span<double const> baseline, ObjectiveSpec const& spec,
                        TieRule rule = TieRule::StrictlyBetter) {
    auto const c = orient(candidate, spec);
    auto const b = orient(baseline, spec);
    std::size_t const k = spec.size();
    std::size_t better = 0, no_worse = 0;
    for (std::size_t i = 0; i < k; ++i) {
        if (c[i] < b[i]) ++better;
        if (c[i] <= b[i]) ++no_worse;
    }
    if (better == k) return Outcome::Win;
    std::size_t const half = (k + 1) / 2;
    std::size_t const score = rule == TieRule::StrictlyBetter ? better : no_worse;
    return score >= half ? Outcome::Tie : Outcome::Loss;
}

/// One entry per prompt on each side, paired by position.
inline WinTieLoss win_tie_loss(std::vector<Point> const& candidate, std::vector<Point> const& baseline,
                               ObjectiveSpec const& spec, TieRule rule = TieRule::StrictlyBetter) {
    if (candidate.size() != baseline.size()) throw std::invalid_argument("win-tie-loss: prompt counts differ");
    WinTieLoss out;
    for (std::size_t i = 0; i < candidate.size(); ++i) {
        switch (classify(candidate[i], baseline[i], spec, rule)) {
            case Outcome::Win: ++out.wins; break;
            case Outcome::Tie: ++out.ties; break;
            case Outcome::Loss: ++out.losses; break;
        }
    }
    return out;
}

}  // namespace fairtune

#endif
