#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "coars/policies.hpp"

namespace coars {

struct EpisodeConfig {
    int max_turns = 3;
    // Rejected recommendations leave the candidate pool for later turns.
    bool remove_recommended = true;
    std::uint64_t seed = 0;
};

// Supplies the peer opinion shown to the user simulator for a proposed item.
// May be empty (episodes then run without peer input).
using PeerSource =
    std::function<std::optional<PeerOpinion>(const UserId&, const ItemId&, std::mt19937_64&)>;

// Per-turn capture of what each policy saw and produced, for training.
// Message-level content lives in the trajectory's turns, index-aligned.
struct TurnTrace {
    Context rec_ctx;
    Context user_ctx;
    GenerationResult rec_gen;
    GenerationResult user_gen;
};

struct Episode {
    Trajectory trajectory;
    std::vector<TurnTrace> traces;
    // Earliest 1-based turn whose recommendation equals the ground truth.
    std::optional<int> found_at;
};

// Alternates recommender and user turns until the user clicks or max_turns
// is reached; on fallback the final item is the recommendation with the
// highest acceptance score (earliest turn wins ties). Throws
// ProtocolViolation when a policy breaks the message contract.
Episode run_episode(PolicyBackend& rec_policy, PolicyBackend& user_policy,
                    const UserHistory& history, const std::vector<ItemId>& candidates,
                    const std::optional<ItemId>& ground_truth, const EpisodeConfig& cfg,
                    const PeerSource& peers = {});

void update_memory(Memory& m, const RecMessage& rec, const UserMessage& user);

// Index of the turn providing the fallback selection.
std::size_t fallback_turn(const std::vector<InteractionTurn>& turns);

}  // namespace coars
