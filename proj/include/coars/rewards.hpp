#pragma once

#include <optional>

#include "coars/domain.hpp"

namespace coars {

struct RewardConfig {
    double alpha = 0.1;       // peer-similarity coefficient, in [0,1]
    double depth_base = 1.2;  // base of the exponential depth factor, > 1
};

// Per-turn reward decomposition for both agents. rl_eligible = false means
// the turn must not contribute to any objective (wrong item, positive
// reaction: possibly an unobserved positive, so not reliable supervision).
struct RewardBreakdown {
    int turn_index = 1;
    bool hit = false;
    double score = 0.0;
    double depth_factor = 1.0;
    double peer_similarity = 0.0;
    double rec_reward = 0.0;
    double user_reward = 0.0;
    bool rl_eligible = true;
};

// Stage multiplier D_t: grows as depth_base^(t-1) until the correct item has
// been identified (at or before this turn), then pinned to 1 so correct
// recommendations are not magnified by stage scaling.
double depth_factor(int turn_index, bool hit_already_found, const RewardConfig& cfg);

// (2*hit - 1) * (0.5 + 0.5*s) * D
double rec_reward(bool hit, double score, double depth);

// (2*hit - 1) * (2*s - 1) * (1 - alpha*q*(2*s - 1))
// Peer similarity modulates magnitude only: agreeing with similar peers is
// easy (damped), disagreeing with them is informative (amplified).
double user_reward(bool hit, double score, double peer_similarity, const RewardConfig& cfg);

// False iff the recommendation missed but the user still clicked/starred.
bool rl_eligible(bool hit, Action action);

// Composes the pieces above for one completed turn. found_at is the first
// turn index whose recommendation matched the ground truth, if any.
RewardBreakdown score_turn(const InteractionTurn& turn, const ItemId& ground_truth,
                           std::optional<int> found_at, double peer_similarity,
                           const RewardConfig& cfg);

}  // namespace coars
