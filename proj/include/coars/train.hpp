#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "coars/eval.hpp"
#include "coars/objective.hpp"
#include "coars/orchestrator.hpp"
#include "coars/recsys.hpp"

namespace coars {

// Everything episodes need, derived once from an interaction log: the
// chronological split, base embeddings, per-case candidate sets, and the
// train/holdout partition (every holdout_mod-th user is held out).
struct World {
    InteractionLog train_log;
    EmbeddingTable emb;
    int candidate_k = 20;

    struct Case {
        UserHistory history;
        ItemId ground_truth;
        std::vector<ItemId> candidates;
    };
    std::vector<Case> train_cases;
    std::vector<Case> holdout_cases;

    PeerSource peer_source(int max_peers = 5) const;
};

struct WorldConfig {
    int mf_dim = 16;
    int mf_epochs = 30;
    double mf_lr = 0.05;
    std::uint64_t mf_seed = 1;
    int candidate_k = 20;
    int holdout_mod = 5;  // user index % holdout_mod == 0 -> holdout
};

World build_world(const InteractionLog& log, const WorldConfig& cfg);

struct TrainConfig {
    int epochs = 200;
    double step_size = 1.0;
    double lambda_rec = 0.1;
    double lambda_user = 0.1;
    double adv_clip = 1.0;
    RewardConfig rewards{};
    int max_turns = 3;
    TeacherMode teacher_mode = TeacherMode::fixed;
    double ema_rho = 0.05;
    bool direct_sd = false;
    std::uint64_t seed = 7;
    int threads = 1;
    int eval_every = 0;  // extra holdout evals; 0 = first and last only

    // ablation switches
    bool train_rec = true;
    bool train_user = true;
    bool ir_rec = true;
    bool ir_user = true;
    bool sd_rec = true;
    bool sd_user = true;
};

// Applies one --drop flag to the switches; false if the name is unknown.
bool apply_ablation(TrainConfig& cfg, const std::string& drop);

struct EpochMetrics {
    int epoch = 0;  // 0 = before any update
    double hit1 = 0.0;
    double f1 = 0.0;
    double j_rec = 0.0;
    double j_user = 0.0;
    double excluded_fraction = 0.0;
};

struct TrainReport {
    EpochMetrics initial;
    EpochMetrics final_metrics;
    std::vector<EpochMetrics> history;
};

nlohmann::ordered_json report_json(const TrainReport& r, const TrainConfig& cfg);

// Holdout metrics for the current policies (episode Hit@1 and 1:3
// user-simulation micro-F1).
EpochMetrics evaluate(const World& world, ToyPolicy& rec, ToyPolicy& user,
                      const TrainConfig& cfg, int epoch);

// Co-evolution loop: collect episodes on the training users, score rewards,
// build references, take one simultaneous gradient step per policy per
// epoch. Policies are modified in place.
TrainReport train_loop(const World& world, ToyPolicy& rec, ToyPolicy& user,
                       const TrainConfig& cfg);

// One epoch's collection, exposed for tests: episodes plus per-turn samples
// for both roles. Deterministic for a given seed and thread-count agnostic.
struct Collected {
    std::vector<TurnSample> rec_samples;
    std::vector<TurnSample> user_samples;
    int episodes = 0;
    std::size_t turns = 0;
};
Collected collect_epoch(const World& world, ToyPolicy& rec, ToyPolicy& user,
                        ToyPolicy& rec_teacher, ToyPolicy& user_teacher, const TrainConfig& cfg,
                        int epoch);

}  // namespace coars
