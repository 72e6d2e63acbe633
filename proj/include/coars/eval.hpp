#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "coars/orchestrator.hpp"
#include "coars/recsys.hpp"

namespace coars {

struct EvalCounts {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

// 2PR/(P+R); 0 whenever precision or recall is undefined or both are 0.
double micro_f1(const EvalCounts& c);

// Fraction of (final selection, ground truth) pairs that match.
double hit_at_1(const std::vector<std::pair<ItemId, ItemId>>& selections);

// One 1:3 user-simulation case: the ground truth (labelled accept) plus
// distractors (labelled reject), each judged independently with empty
// memory.
struct UserSimCase {
    UserHistory history;
    ItemId ground_truth;
    std::vector<ItemId> distractors;
};

// Top-n ranked items that are not the ground truth.
std::vector<ItemId> top_distractors(const UserHistory& history, const ItemId& ground_truth,
                                    const EmbeddingTable& emb, int n = 3);

EvalCounts run_user_sim_eval(PolicyBackend& user_policy, const std::vector<UserSimCase>& cases,
                             const PeerSource& peers, std::uint64_t seed);

}  // namespace coars
