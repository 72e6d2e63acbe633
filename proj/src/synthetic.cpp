#include "coars/synthetic.hpp"

#include <cstdio>
#include <random>
#include <stdexcept>

#include "coars/rng.hpp"

namespace coars {

namespace {

std::string item_name(int idx) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "item_%02d", idx);
    return buf;
}

std::string user_name(int idx) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "user_%03d", idx);
    return buf;
}

double unit(std::mt19937_64& rng) { return canonical_unit(rng); }

}  // namespace

ItemId synthetic_anchor(const SyntheticConfig& cfg, int user_index) {
    int block = user_index % cfg.blocks;
    return item_name(block * cfg.items_per_block);
}

InteractionLog synthetic_world(const SyntheticConfig& cfg) {
    if (cfg.users <= 0 || cfg.blocks <= 0 || cfg.items_per_block <= 0 ||
        cfg.min_history < 3 || cfg.max_history < cfg.min_history)
        throw std::invalid_argument("bad synthetic world config");

    const int n_items = cfg.blocks * cfg.items_per_block;
    InteractionLog log;
    // intern items up front so ids are in numeric order
    for (int i = 0; i < n_items; ++i) log.items.intern(item_name(i));

    std::mt19937_64 rng(cfg.seed);
    for (int u = 0; u < cfg.users; ++u) {
        const int block = u % cfg.blocks;
        const int base = block * cfg.items_per_block;
        const int anchor = base;
        const int len = cfg.min_history +
                        static_cast<int>(unit(rng) * (cfg.max_history - cfg.min_history + 1));
        const std::string uname = user_name(u);

        const double block_total = cfg.anchor_weight + (cfg.items_per_block - 1);
        std::int64_t ts = static_cast<std::int64_t>(u) * 1000;
        for (int k = 0; k < len - 1; ++k) {
            int item;
            if (unit(rng) < cfg.cross_block_noise) {
                item = static_cast<int>(unit(rng) * n_items) % n_items;
            } else {
                double r = unit(rng) * block_total;
                item = r < cfg.anchor_weight
                           ? anchor
                           : base + 1 + static_cast<int>((r - cfg.anchor_weight)) %
                                            (cfg.items_per_block - 1);
            }
            // guarantee the anchor shows up in the observable history
            if (k == (len - 1) / 2) item = anchor;
            log.add(uname, item_name(item), ts++);
        }
        log.add(uname, item_name(anchor), ts);  // becomes the held-out ground truth
    }
    log.finalize();
    return log;
}

}  // namespace coars
