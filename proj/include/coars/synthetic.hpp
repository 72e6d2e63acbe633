#pragma once

#include <cstdint>

#include "coars/recsys.hpp"

namespace coars {

// Block-structured interaction world for end-to-end checks. Users belong to
// one of `blocks` taste blocks; each block has `items_per_block` items and a
// designated anchor item that every member both revisits mid-history and
// interacts with last (so leave-last-out makes the anchor the ground truth).
struct SyntheticConfig {
    int users = 200;
    int blocks = 4;
    int items_per_block = 10;
    int min_history = 6;
    int max_history = 10;
    double anchor_weight = 3.0;      // sampling weight of the anchor vs. 1.0 per other item
    double cross_block_noise = 0.1;  // chance a draw comes from the full item universe
    std::uint64_t seed = 7;
};

InteractionLog synthetic_world(const SyntheticConfig& cfg);

// user_* index of the block anchor, for tests that need the expected GT.
ItemId synthetic_anchor(const SyntheticConfig& cfg, int user_index);

}  // namespace coars
