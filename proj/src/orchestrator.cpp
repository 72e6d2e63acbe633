#include "coars/orchestrator.hpp"

#include <algorithm>
#include <stdexcept>

namespace coars {

void update_memory(Memory& m, const RecMessage& rec, const UserMessage& user) {
    m.records.emplace_back(rec, user);
}

std::size_t fallback_turn(const std::vector<InteractionTurn>& turns) {
    if (turns.empty()) throw std::invalid_argument("cannot select from an empty episode");
    std::size_t best = 0;
    for (std::size_t i = 1; i < turns.size(); ++i)
        if (turns[i].user.score > turns[best].user.score) best = i;
    return best;
}

Episode run_episode(PolicyBackend& rec_policy, PolicyBackend& user_policy,
                    const UserHistory& history, const std::vector<ItemId>& candidates,
                    const std::optional<ItemId>& ground_truth, const EpisodeConfig& cfg,
                    const PeerSource& peers) {
    if (cfg.max_turns < 1) throw std::invalid_argument("max_turns must be >= 1");
    if (candidates.empty()) throw std::invalid_argument("episode needs a candidate set");

    Episode ep;
    ep.trajectory.user = history.user;
    ep.trajectory.ground_truth = ground_truth;
    std::mt19937_64 rng(cfg.seed);

    Memory memory;
    std::vector<ItemId> pool = candidates;
    bool clicked = false;

    for (int t = 1; t <= cfg.max_turns && !pool.empty(); ++t) {
        Context rec_ctx;
        rec_ctx.role = Role::rec;
        rec_ctx.history = history;
        rec_ctx.candidates = pool;
        rec_ctx.memory = memory;
        rec_ctx.turn_index = t;
        GenerationResult rec_gen = rec_policy.generate(rec_ctx, rng);
        const RecMessage& rec = rec_gen.rec();
        if (std::find(pool.begin(), pool.end(), rec.item) == pool.end())
            throw ProtocolViolation("recommended item '" + rec.item + "' not in candidate set", t);

        std::optional<PeerOpinion> peer;
        if (peers) peer = peers(history.user, rec.item, rng);

        Context user_ctx;
        user_ctx.role = Role::user;
        user_ctx.history = history;
        user_ctx.memory = memory;
        user_ctx.turn_index = t;
        user_ctx.rec = rec;
        user_ctx.peer = peer;
        GenerationResult user_gen = user_policy.generate(user_ctx, rng);
        const UserMessage& user = user_gen.user();
        auto problems = validate_user_message(user);
        if (!problems.empty()) throw ProtocolViolation("user message invalid: " + problems.front(), t);

        InteractionTurn turn;
        turn.turn_index = t;
        turn.history = history;
        turn.candidates = pool;
        turn.memory_before = memory;
        turn.rec = rec;
        turn.user = user;
        turn.peer = peer;
        ep.trajectory.turns.push_back(std::move(turn));
        ep.traces.push_back({std::move(rec_ctx), std::move(user_ctx), std::move(rec_gen),
                             std::move(user_gen)});
        const InteractionTurn& done = ep.trajectory.turns.back();

        if (ground_truth && !ep.found_at && done.rec.item == *ground_truth) ep.found_at = t;

        update_memory(memory, done.rec, done.user);

        if (done.user.action == Action::click) {
            ep.trajectory.final_item = done.rec.item;
            ep.trajectory.terminated_by = Termination::click;
            clicked = true;
            break;
        }
        if (cfg.remove_recommended)
            pool.erase(std::remove(pool.begin(), pool.end(), done.rec.item), pool.end());
    }

    if (!clicked) {
        ep.trajectory.terminated_by = Termination::max_turns_fallback;
        ep.trajectory.final_item = ep.trajectory.turns[fallback_turn(ep.trajectory.turns)].rec.item;
    }
    return ep;
}

}  // namespace coars
