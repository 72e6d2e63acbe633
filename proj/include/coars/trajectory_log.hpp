#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "coars/policies.hpp"
#include "coars/reference.hpp"
#include "coars/rewards.hpp"

namespace coars {

// JSONL trajectory log. One line per turn with a fixed key order, so logs
// from the same inputs are byte-identical. Reward lines share the (user,
// turn) key pair and are recognizable by their rec_reward field.
nlohmann::ordered_json turn_json(const Trajectory& t, std::size_t turn_idx);
nlohmann::ordered_json reward_json(const UserId& user, const RewardBreakdown& b);
nlohmann::ordered_json reference_json(const DiagnosticReference& ref, Role role);

void append_trajectory(std::ostream& out, const Trajectory& t);
void append_rewards(std::ostream& out, const UserId& user,
                    const std::vector<RewardBreakdown>& rewards);

// Renders a JSONL log (turn and reward lines) as a readable transcript.
// Turns with a known ground truth get a per-turn diagnosis annotation.
std::string replay_render(std::istream& in);

}  // namespace coars
