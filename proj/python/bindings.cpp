// Python bindings for the core operations: rewards, token credit, the toy
// vocabulary, and end-to-end episode/training runs on an interaction TSV.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "coars/distill.hpp"
#include "coars/objective.hpp"
#include "coars/orchestrator.hpp"
#include "coars/rewards.hpp"
#include "coars/rng.hpp"
#include "coars/synthetic.hpp"
#include "coars/token_codec.hpp"
#include "coars/toy_policy.hpp"
#include "coars/train.hpp"
#include "coars/trajectory_log.hpp"

namespace py = pybind11;
using namespace coars;

namespace {

Action action_arg(const std::string& name) {
    auto a = action_from_name(name);
    if (!a) throw std::invalid_argument("unknown action '" + name + "'");
    return *a;
}

TokenCodec codec_for(const World& w) {
    std::vector<ItemId> items;
    for (int i = 0; i < w.emb.items.size(); ++i) items.push_back(w.emb.items.name(i));
    return TokenCodec(std::move(items));
}

World world_from_tsv(const std::string& path, int candidate_k, int mf_dim, int mf_epochs) {
    WorldConfig wc;
    wc.candidate_k = candidate_k;
    wc.mf_dim = mf_dim;
    wc.mf_epochs = mf_epochs;
    return build_world(ingest(path), wc);
}

py::dict metrics_dict(const EpochMetrics& m) {
    py::dict d;
    d["epoch"] = m.epoch;
    d["hit1"] = m.hit1;
    d["f1"] = m.f1;
    d["j_rec"] = m.j_rec;
    d["j_user"] = m.j_user;
    d["excluded_fraction"] = m.excluded_fraction;
    return d;
}

}  // namespace

PYBIND11_MODULE(_coars, m) {
    m.doc() = "co-evolving recommender / user-simulator harness";

    m.def(
        "rec_reward", [](bool hit, double score, double depth) {
            return rec_reward(hit, score, depth);
        },
        py::arg("hit"), py::arg("score"), py::arg("depth") = 1.0);
    m.def(
        "user_reward",
        [](bool hit, double score, double peer_similarity, double alpha) {
            RewardConfig cfg;
            cfg.alpha = alpha;
            return user_reward(hit, score, peer_similarity, cfg);
        },
        py::arg("hit"), py::arg("score"), py::arg("peer_similarity") = 0.0,
        py::arg("alpha") = 0.1);
    m.def(
        "depth_factor",
        [](int turn, bool found, double base) {
            RewardConfig cfg;
            cfg.depth_base = base;
            return depth_factor(turn, found, cfg);
        },
        py::arg("turn"), py::arg("found") = false, py::arg("base") = 1.2);
    m.def(
        "rl_eligible",
        [](bool hit, const std::string& action) { return rl_eligible(hit, action_arg(action)); },
        py::arg("hit"), py::arg("action"));
    m.def(
        "score_to_action", [](double s) { return std::string(action_name(score_to_action(s))); },
        py::arg("score"));

    m.def("token_advantages", &token_advantages, py::arg("teacher_logps"),
          py::arg("student_logps"), py::arg("clip") = 1.0);
    m.def(
        "kl_divergence",
        [](const std::vector<double>& p, const std::vector<double>& q) {
            return kl_divergence(p, q);
        },
        py::arg("p"), py::arg("q"));

    py::class_<TokenCodec>(m, "TokenCodec")
        .def(py::init<std::vector<ItemId>>(), py::arg("items"))
        .def("vocab_size", &TokenCodec::vocab_size)
        .def("n_items", &TokenCodec::n_items)
        .def("token_text", &TokenCodec::token_text, py::arg("token"))
        .def("encode_rec",
             [](const TokenCodec& c, const ItemId& item) {
                 return c.encode_rec(RecMessage{item, ""});
             })
        .def("decode_rec",
             [](const TokenCodec& c, const std::vector<int>& tokens) {
                 return c.decode_rec(tokens).item;
             })
        .def(
            "encode_user",
            [](const TokenCodec& c, const std::string& action, double score) {
                UserMessage msg;
                msg.action = action_arg(action);
                msg.score = score;
                return c.encode_user(msg);
            },
            py::arg("action"), py::arg("score"))
        .def("decode_user",
             [](const TokenCodec& c, const std::vector<int>& tokens) {
                 UserMessage msg = c.decode_user(tokens);
                 return py::make_tuple(std::string(action_name(msg.action)), msg.score);
             })
        .def(
            "score_bucket",
            [](const TokenCodec& c, const std::string& action, double score) {
                return c.score_bucket(action_arg(action), score);
            },
            py::arg("action"), py::arg("score"))
        .def_static("bucket_midpoint", &TokenCodec::bucket_midpoint, py::arg("bucket"));

    m.def(
        "synth_world",
        [](const std::string& path, int users, int blocks, int items_per_block,
           std::uint64_t seed) {
            SyntheticConfig cfg;
            cfg.users = users;
            cfg.blocks = blocks;
            cfg.items_per_block = items_per_block;
            cfg.seed = seed;
            InteractionLog log = synthetic_world(cfg);
            write_interactions_tsv(log, path);
            py::dict d;
            d["users"] = log.users.size();
            d["items"] = log.items.size();
            d["events"] = log.events.size();
            return d;
        },
        py::arg("path"), py::arg("users") = 200, py::arg("blocks") = 4,
        py::arg("items_per_block") = 10, py::arg("seed") = 7);

    m.def(
        "run_toy_episodes",
        [](const std::string& data, int candidate_k, const std::string& split, int max_turns,
           std::uint64_t seed, int mf_dim, int mf_epochs) {
            World w = world_from_tsv(data, candidate_k, mf_dim, mf_epochs);
            ToyPolicy rec(Role::rec, codec_for(w), &w.emb);
            ToyPolicy user(Role::user, codec_for(w), &w.emb);
            PeerSource peers = w.peer_source();
            const auto& cases = split == "train" ? w.train_cases : w.holdout_cases;
            std::ostringstream out;
            int idx = 0;
            for (const World::Case& c : cases) {
                EpisodeConfig ecfg;
                ecfg.max_turns = max_turns;
                ecfg.seed = mix_seed(seed, ++idx);
                Episode ep = run_episode(rec, user, c.history, c.candidates, c.ground_truth,
                                         ecfg, peers);
                append_trajectory(out, ep.trajectory);
                std::vector<RewardBreakdown> rbs;
                for (const InteractionTurn& t : ep.trajectory.turns)
                    rbs.push_back(score_turn(t, c.ground_truth, ep.found_at,
                                             t.peer ? t.peer->similarity : 0.0, {}));
                append_rewards(out, c.history.user, rbs);
            }
            return out.str();
        },
        py::arg("data"), py::arg("candidate_k") = 10, py::arg("split") = "holdout",
        py::arg("max_turns") = 3, py::arg("seed") = 7, py::arg("mf_dim") = 16,
        py::arg("mf_epochs") = 30);

    m.def(
        "replay", [](const std::string& log) {
            std::istringstream in(log);
            return replay_render(in);
        },
        py::arg("log"), "Render a trajectory JSONL string as a readable transcript.");

    m.def(
        "train_toy",
        [](const std::string& data, int epochs, std::uint64_t seed, int threads,
           int candidate_k, double step_size, int mf_dim, int mf_epochs) {
            World w = world_from_tsv(data, candidate_k, mf_dim, mf_epochs);
            TrainConfig cfg;
            cfg.epochs = epochs;
            cfg.seed = seed;
            cfg.threads = threads;
            cfg.step_size = step_size;
            ToyPolicy rec(Role::rec, codec_for(w), &w.emb);
            ToyPolicy user(Role::user, codec_for(w), &w.emb);
            TrainReport rep = train_loop(w, rec, user, cfg);
            py::dict d;
            d["initial"] = metrics_dict(rep.initial);
            d["final"] = metrics_dict(rep.final_metrics);
            return d;
        },
        py::arg("data"), py::arg("epochs") = 50, py::arg("seed") = 7, py::arg("threads") = 1,
        py::arg("candidate_k") = 10, py::arg("step_size") = 1.0, py::arg("mf_dim") = 16,
        py::arg("mf_epochs") = 30);
}
