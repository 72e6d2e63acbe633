#include "coars/eval.hpp"

#include <stdexcept>

namespace coars {

double micro_f1(const EvalCounts& c) {
    if (c.tp + c.fp == 0 || c.tp + c.fn == 0) return 0.0;
    double p = static_cast<double>(c.tp) / (c.tp + c.fp);
    double r = static_cast<double>(c.tp) / (c.tp + c.fn);
    if (p + r == 0.0) return 0.0;
    return 2.0 * p * r / (p + r);
}

double hit_at_1(const std::vector<std::pair<ItemId, ItemId>>& selections) {
    if (selections.empty()) throw std::invalid_argument("no selections to score");
    std::size_t hits = 0;
    for (const auto& [chosen, gt] : selections)
        if (chosen == gt) ++hits;
    return static_cast<double>(hits) / selections.size();
}

std::vector<ItemId> top_distractors(const UserHistory& history, const ItemId& ground_truth,
                                    const EmbeddingTable& emb, int n) {
    std::vector<ItemId> out;
    for (const ItemId& item : rank_items(history, emb)) {
        if (item == ground_truth) continue;
        out.push_back(item);
        if (static_cast<int>(out.size()) == n) break;
    }
    if (static_cast<int>(out.size()) < n)
        throw DataError("not enough items to build " + std::to_string(n) + " distractors");
    return out;
}

EvalCounts run_user_sim_eval(PolicyBackend& user_policy, const std::vector<UserSimCase>& cases,
                             const PeerSource& peers, std::uint64_t seed) {
    EvalCounts counts;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const UserSimCase& c = cases[i];
        std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (i + 1)));
        auto judge = [&](const ItemId& item, bool should_accept) {
            Context ctx;
            ctx.role = Role::user;
            ctx.history = c.history;
            ctx.turn_index = 1;
            RecMessage rec;
            rec.item = item;
            ctx.rec = rec;
            if (peers) ctx.peer = peers(c.history.user, item, rng);
            bool accepted = is_accept(user_policy.generate(ctx, rng).user().action);
            if (should_accept)
                accepted ? ++counts.tp : ++counts.fn;
            else
                accepted ? ++counts.fp : ++counts.tn;
        };
        judge(c.ground_truth, true);
        for (const ItemId& d : c.distractors) judge(d, false);
    }
    return counts;
}

}  // namespace coars
