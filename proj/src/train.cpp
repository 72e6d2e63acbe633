#include "coars/train.hpp"

#include <cmath>

#include "coars/distill.hpp"
#include "coars/parallel.hpp"
#include "coars/rng.hpp"

namespace coars {

PeerSource World::peer_source(int max_peers) const {
    return [this, max_peers](const UserId& user, const ItemId& item,
                             std::mt19937_64& rng) -> std::optional<PeerOpinion> {
        PeerOpinion op = sample_peer_opinion(user, item, emb, train_log, rng(), max_peers);
        if (op.peer.empty()) return std::nullopt;
        return op;
    };
}

World build_world(const InteractionLog& log, const WorldConfig& cfg) {
    ChronoSplit split = chronological_split(log);
    if (split.tests.empty()) throw DataError("no users with enough history");

    World w;
    w.train_log = split.train;
    w.emb = train_embeddings(split.train, cfg.mf_dim, cfg.mf_epochs, cfg.mf_lr, cfg.mf_seed);
    w.candidate_k = cfg.candidate_k;

    for (std::size_t i = 0; i < split.tests.size(); ++i) {
        World::Case c;
        c.history = split.tests[i].history;
        c.ground_truth = split.tests[i].ground_truth;
        c.candidates = build_candidates(c.history, c.ground_truth, w.emb, cfg.candidate_k);
        bool holdout = cfg.holdout_mod > 0 && i % cfg.holdout_mod == 0;
        (holdout ? w.holdout_cases : w.train_cases).push_back(std::move(c));
    }
    if (w.train_cases.empty() || w.holdout_cases.empty())
        throw DataError("train/holdout partition left one side empty");
    return w;
}

bool apply_ablation(TrainConfig& cfg, const std::string& drop) {
    if (drop == "user-training") cfg.train_user = false;
    else if (drop == "rec-training") cfg.train_rec = false;
    else if (drop == "ir-rec") cfg.ir_rec = false;
    else if (drop == "ir-user") cfg.ir_user = false;
    else if (drop == "sd-rec") cfg.sd_rec = false;
    else if (drop == "sd-user") cfg.sd_user = false;
    else return false;
    return true;
}

namespace {

ObjectiveConfig rec_objective(const TrainConfig& cfg) {
    ObjectiveConfig o;
    o.lambda_sd = cfg.sd_rec ? cfg.lambda_rec : 0.0;
    o.adv_clip = cfg.adv_clip;
    o.reward_scale = cfg.ir_rec ? 1.0 : 0.0;
    return o;
}

ObjectiveConfig user_objective(const TrainConfig& cfg) {
    ObjectiveConfig o;
    o.lambda_sd = cfg.sd_user ? cfg.lambda_user : 0.0;
    o.adv_clip = cfg.adv_clip;
    o.reward_scale = cfg.ir_user ? 1.0 : 0.0;
    return o;
}

}  // namespace

Collected collect_epoch(const World& world, ToyPolicy& rec, ToyPolicy& user,
                        ToyPolicy& rec_teacher, ToyPolicy& user_teacher, const TrainConfig& cfg,
                        int epoch) {
    const int n = static_cast<int>(world.train_cases.size());
    PeerSource peers = world.peer_source();
    std::vector<std::vector<TurnSample>> rec_slots(n), user_slots(n);
    std::vector<std::size_t> turn_counts(n, 0);

    parallel_for(n, cfg.threads, [&](int i) {
        const World::Case& c = world.train_cases[i];
        EpisodeConfig ecfg;
        ecfg.max_turns = cfg.max_turns;
        ecfg.seed = mix_seed(cfg.seed, mix_seed(static_cast<std::uint64_t>(epoch), i));
        Episode ep = run_episode(rec, user, c.history, c.candidates, c.ground_truth, ecfg, peers);
        turn_counts[i] = ep.trajectory.turns.size();

        std::mt19937_64 ref_rng(mix_seed(ecfg.seed, 0x5eedU));
        for (std::size_t t = 0; t < ep.trajectory.turns.size(); ++t) {
            const InteractionTurn& turn = ep.trajectory.turns[t];
            double q = turn.peer ? turn.peer->similarity : 0.0;
            RewardBreakdown rb =
                score_turn(turn, c.ground_truth, ep.found_at, q, cfg.rewards);
            DiagnosticReference ref =
                build_reference(turn, c.ground_truth, rec, user, ref_rng);

            TurnSample rs;
            rs.role = Role::rec;
            rs.episode = i;
            rs.ctx = ep.traces[t].rec_ctx;
            rs.tokens = ep.traces[t].rec_gen.tokens;
            rs.student_logps = ep.traces[t].rec_gen.logps;
            rs.reward = rb;
            rs.ref = ref;
            rs.teacher_logps =
                rec_teacher.logprob(assemble_teacher_context(rs.ctx, ref), rs.tokens);
            rec_slots[i].push_back(std::move(rs));

            TurnSample us;
            us.role = Role::user;
            us.episode = i;
            us.ctx = ep.traces[t].user_ctx;
            us.tokens = ep.traces[t].user_gen.tokens;
            us.student_logps = ep.traces[t].user_gen.logps;
            us.reward = rb;
            us.ref = ref;
            us.teacher_logps =
                user_teacher.logprob(assemble_teacher_context(us.ctx, ref), us.tokens);
            user_slots[i].push_back(std::move(us));
        }
    });

    Collected out;
    out.episodes = n;
    for (int i = 0; i < n; ++i) {
        out.turns += turn_counts[i];
        for (auto& s : rec_slots[i]) out.rec_samples.push_back(std::move(s));
        for (auto& s : user_slots[i]) out.user_samples.push_back(std::move(s));
    }
    return out;
}

EpochMetrics evaluate(const World& world, ToyPolicy& rec, ToyPolicy& user,
                      const TrainConfig& cfg, int epoch) {
    EpochMetrics m;
    m.epoch = epoch;
    PeerSource peers = world.peer_source();

    std::vector<std::pair<ItemId, ItemId>> selections(world.holdout_cases.size());
    parallel_for(static_cast<int>(world.holdout_cases.size()), cfg.threads, [&](int i) {
        const World::Case& c = world.holdout_cases[i];
        EpisodeConfig ecfg;
        ecfg.max_turns = cfg.max_turns;
        ecfg.seed = mix_seed(cfg.seed, mix_seed(0xe7a1ULL, i));
        Episode ep = run_episode(rec, user, c.history, c.candidates, c.ground_truth, ecfg, peers);
        selections[i] = {ep.trajectory.final_item, c.ground_truth};
    });
    m.hit1 = hit_at_1(selections);

    std::vector<UserSimCase> cases;
    cases.reserve(world.holdout_cases.size());
    for (const World::Case& c : world.holdout_cases) {
        UserSimCase uc;
        uc.history = c.history;
        uc.ground_truth = c.ground_truth;
        uc.distractors = top_distractors(c.history, c.ground_truth, world.emb, 3);
        cases.push_back(std::move(uc));
    }
    m.f1 = micro_f1(run_user_sim_eval(user, cases, peers, mix_seed(cfg.seed, 0xf1ULL)));
    return m;
}

TrainReport train_loop(const World& world, ToyPolicy& rec, ToyPolicy& user,
                       const TrainConfig& cfg) {
    TrainReport report;
    report.initial = evaluate(world, rec, user, cfg, 0);
    report.history.push_back(report.initial);

    ToyPolicy rec_teacher = rec;
    ToyPolicy user_teacher = user;
    const ObjectiveConfig rec_obj = rec_objective(cfg);
    const ObjectiveConfig user_obj = user_objective(cfg);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Collected c = collect_epoch(world, rec, user, rec_teacher, user_teacher, cfg, epoch);
        TrainingBatch rb = build_batch(Role::rec, std::move(c.rec_samples), c.episodes);
        TrainingBatch ub = build_batch(Role::user, std::move(c.user_samples), c.episodes);

        EpochMetrics em;
        em.epoch = epoch;
        em.j_rec = objective_value(rb, rec, rec_obj);
        em.j_user = objective_value(ub, user, user_obj);
        em.excluded_fraction =
            c.turns == 0 ? 0.0 : static_cast<double>(rb.excluded) / static_cast<double>(c.turns);

        // both gradients at the pre-update parameters, then one joint step
        std::vector<double> rec_grad, user_grad;
        if (cfg.train_rec)
            rec_grad = cfg.direct_sd && cfg.sd_rec
                           ? policy_gradient_direct(rb, rec, rec_teacher, rec_obj)
                           : policy_gradient(rb, rec, rec_obj);
        if (cfg.train_user)
            user_grad = cfg.direct_sd && cfg.sd_user
                            ? policy_gradient_direct(ub, user, user_teacher, user_obj)
                            : policy_gradient(ub, user, user_obj);
        if (cfg.train_rec)
            for (std::size_t k = 0; k < rec_grad.size(); ++k)
                rec.weights()[k] += cfg.step_size * rec_grad[k];
        if (cfg.train_user)
            for (std::size_t k = 0; k < user_grad.size(); ++k)
                user.weights()[k] += cfg.step_size * user_grad[k];

        if (cfg.teacher_mode == TeacherMode::ema) {
            update_teacher(rec_teacher, rec, cfg.ema_rho);
            update_teacher(user_teacher, user, cfg.ema_rho);
        }

        bool last = epoch == cfg.epochs;
        if (last || (cfg.eval_every > 0 && epoch % cfg.eval_every == 0)) {
            EpochMetrics holdout = evaluate(world, rec, user, cfg, epoch);
            em.hit1 = holdout.hit1;
            em.f1 = holdout.f1;
            if (last) report.final_metrics = em;
        }
        report.history.push_back(em);
    }
    if (cfg.epochs == 0) report.final_metrics = report.initial;
    return report;
}

nlohmann::ordered_json report_json(const TrainReport& r, const TrainConfig& cfg) {
    nlohmann::ordered_json j;
    j["config"] = {{"epochs", cfg.epochs},
                   {"step_size", cfg.step_size},
                   {"lambda_rec", cfg.lambda_rec},
                   {"lambda_user", cfg.lambda_user},
                   {"alpha", cfg.rewards.alpha},
                   {"depth_base", cfg.rewards.depth_base},
                   {"max_turns", cfg.max_turns},
                   {"teacher_mode", teacher_mode_name(cfg.teacher_mode)},
                   {"ema_rho", cfg.ema_rho},
                   {"direct_sd", cfg.direct_sd},
                   {"seed", cfg.seed},
                   {"threads", cfg.threads},
                   {"train_rec", cfg.train_rec},
                   {"train_user", cfg.train_user},
                   {"ir_rec", cfg.ir_rec},
                   {"ir_user", cfg.ir_user},
                   {"sd_rec", cfg.sd_rec},
                   {"sd_user", cfg.sd_user}};
    auto metrics = [](const EpochMetrics& m) {
        return nlohmann::ordered_json{{"epoch", m.epoch},
                                      {"hit1", m.hit1},
                                      {"f1", m.f1},
                                      {"j_rec", m.j_rec},
                                      {"j_user", m.j_user},
                                      {"excluded_fraction", m.excluded_fraction}};
    };
    j["initial"] = metrics(r.initial);
    j["final"] = metrics(r.final_metrics);
    nlohmann::ordered_json hist = nlohmann::ordered_json::array();
    for (const EpochMetrics& m : r.history) hist.push_back(metrics(m));
    j["history"] = hist;
    return j;
}

}  // namespace coars
