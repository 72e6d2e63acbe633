#include "coars/rewards.hpp"

#include <cmath>

namespace coars {

double depth_factor(int turn_index, bool hit_already_found, const RewardConfig& cfg) {
    if (hit_already_found) return 1.0;
    return std::pow(cfg.depth_base, turn_index - 1);
}

double rec_reward(bool hit, double score, double depth) {
    return (2.0 * (hit ? 1.0 : 0.0) - 1.0) * (0.5 + 0.5 * score) * depth;
}

double user_reward(bool hit, double score, double peer_similarity, const RewardConfig& cfg) {
    double direction = 2.0 * (hit ? 1.0 : 0.0) - 1.0;
    double strength = 2.0 * score - 1.0;
    return direction * strength * (1.0 - cfg.alpha * peer_similarity * strength);
}

bool rl_eligible(bool hit, Action action) {
    return hit || !is_accept(action);
}

RewardBreakdown score_turn(const InteractionTurn& turn, const ItemId& ground_truth,
                           std::optional<int> found_at, double peer_similarity,
                           const RewardConfig& cfg) {
    RewardBreakdown b;
    b.turn_index = turn.turn_index;
    b.hit = turn.rec.item == ground_truth;
    b.score = turn.user.score;
    b.peer_similarity = peer_similarity;
    bool found = found_at.has_value() && *found_at <= turn.turn_index;
    b.depth_factor = depth_factor(turn.turn_index, found, cfg);
    b.rec_reward = rec_reward(b.hit, b.score, b.depth_factor);
    b.user_reward = user_reward(b.hit, b.score, peer_similarity, cfg);
    b.rl_eligible = rl_eligible(b.hit, turn.user.action);
    return b;
}

}  // namespace coars
