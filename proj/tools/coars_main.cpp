// coars: co-evolution harness for a recommender agent and a simulated user.
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "coars/config.hpp"
#include "coars/distill.hpp"
#include "coars/eval.hpp"
#include "coars/orchestrator.hpp"
#include "coars/prompt.hpp"
#include "coars/remote_policy.hpp"
#include "coars/rng.hpp"
#include "coars/synthetic.hpp"
#include "coars/toy_policy.hpp"
#include "coars/train.hpp"
#include "coars/trajectory_log.hpp"

namespace {

using namespace coars;

struct Common {
    std::string config_path;
    std::vector<std::string> overrides;

    RunConfig resolve() const {
        RunConfig cfg;
        if (!config_path.empty()) cfg = load_config(config_path);
        for (const std::string& kv : overrides) {
            auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
            apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
        }
        return cfg;
    }
};

void add_common(CLI::App* cmd, Common& common) {
    cmd->add_option("--config", common.config_path, "key=value config file");
    cmd->add_option("--set", common.overrides, "override a config key (key=value, repeatable)")
        ->take_all();
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw DataError("cannot write " + path);
    return file;
}

World load_world(const RunConfig& cfg, const std::string& data_path, const std::string& emb_path) {
    InteractionLog log = ingest(data_path);
    if (emb_path.empty()) return build_world(log, to_world_config(cfg));

    // reuse a saved embedding table instead of refitting
    ChronoSplit split = chronological_split(log);
    World w;
    w.train_log = split.train;
    w.emb = EmbeddingTable::load(emb_path);
    w.candidate_k = cfg.candidate_k;
    for (std::size_t i = 0; i < split.tests.size(); ++i) {
        World::Case c;
        c.history = split.tests[i].history;
        c.ground_truth = split.tests[i].ground_truth;
        c.candidates = build_candidates(c.history, c.ground_truth, w.emb, cfg.candidate_k);
        bool holdout = cfg.holdout_mod > 0 && i % cfg.holdout_mod == 0;
        (holdout ? w.holdout_cases : w.train_cases).push_back(std::move(c));
    }
    if (w.train_cases.empty() && w.holdout_cases.empty())
        throw DataError("no usable users in " + data_path);
    return w;
}

TokenCodec world_codec(const World& w) {
    std::vector<ItemId> items;
    for (int i = 0; i < w.emb.items.size(); ++i) items.push_back(w.emb.items.name(i));
    return TokenCodec(std::move(items));
}

struct Backends {
    std::unique_ptr<PolicyBackend> rec;
    std::unique_ptr<PolicyBackend> user;
};

Backends make_backends(const RunConfig& cfg, const World& world, const std::string& backend,
                       const std::string& rec_weights, const std::string& user_weights) {
    Backends b;
    if (backend == "toy") {
        b.rec = rec_weights.empty()
                    ? std::make_unique<ToyPolicy>(Role::rec, world_codec(world), &world.emb)
                    : std::make_unique<ToyPolicy>(load_toy_policy(rec_weights, &world.emb));
        b.user = user_weights.empty()
                     ? std::make_unique<ToyPolicy>(Role::user, world_codec(world), &world.emb)
                     : std::make_unique<ToyPolicy>(load_toy_policy(user_weights, &world.emb));
    } else if (backend == "remote") {
        auto rcfg = to_remote_config(cfg);
        auto rec = std::make_unique<RemotePolicy>(Role::rec, rcfg);
        auto user = std::make_unique<RemotePolicy>(Role::user, rcfg);
        rec->check_health();
        b.rec = std::move(rec);
        b.user = std::move(user);
    } else {
        throw std::invalid_argument("--backend must be 'toy' or 'remote'");
    }
    return b;
}

const std::vector<World::Case>& pick_split(const World& w, const std::string& split) {
    if (split == "holdout") return w.holdout_cases;
    if (split == "train") return w.train_cases;
    throw std::invalid_argument("--split must be 'holdout' or 'train'");
}

int run_cli(int argc, char** argv) {
    CLI::App app{"co-evolving recommender / user-simulator harness"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a block-structured synthetic world");
    Common synth_common;
    add_common(synth, synth_common);
    std::string synth_out;
    SyntheticConfig synth_cfg;
    synth->add_option("--out", synth_out, "output TSV path")->required();
    synth->add_option("--users", synth_cfg.users);
    synth->add_option("--blocks", synth_cfg.blocks);
    synth->add_option("--items-per-block", synth_cfg.items_per_block);
    synth->add_option("--world-seed", synth_cfg.seed);
    synth->callback([&] {
        InteractionLog log = synthetic_world(synth_cfg);
        write_interactions_tsv(log, synth_out);
        nlohmann::ordered_json j{{"users", log.users.size()},
                                 {"items", log.items.size()},
                                 {"events", log.events.size()},
                                 {"path", synth_out}};
        std::cout << j.dump() << "\n";
    });

    // ingest
    auto* ing = app.add_subcommand("ingest", "validate a user/item/timestamp TSV");
    std::string ing_data, ing_out;
    ing->add_option("--data", ing_data, "interactions TSV")->required();
    ing->add_option("--out", ing_out, "write the normalized events back out");
    ing->callback([&] {
        InteractionLog log = ingest(ing_data);
        if (!ing_out.empty()) write_interactions_tsv(log, ing_out);
        nlohmann::ordered_json j{{"users", log.users.size()},
                                 {"items", log.items.size()},
                                 {"events", log.events.size()},
                                 {"duplicates_dropped", log.duplicates_dropped}};
        std::cout << j.dump() << "\n";
    });

    // embed
    auto* emb_cmd = app.add_subcommand("embed", "fit base embeddings on the training split");
    Common emb_common;
    add_common(emb_cmd, emb_common);
    std::string emb_data, emb_out;
    emb_cmd->add_option("--data", emb_data, "interactions TSV")->required();
    emb_cmd->add_option("--out", emb_out, "embedding file to write")->required();
    emb_cmd->callback([&] {
        RunConfig cfg = emb_common.resolve();
        InteractionLog log = ingest(emb_data);
        ChronoSplit split = chronological_split(log);
        std::vector<double> losses;
        EmbeddingTable t = train_embeddings(split.train, cfg.mf_dim, cfg.mf_epochs, cfg.mf_lr,
                                            cfg.mf_seed, &losses);
        t.save(emb_out);
        nlohmann::ordered_json j{{"users", t.users.size()},
                                 {"items", t.items.size()},
                                 {"dim", t.dim},
                                 {"epochs", cfg.mf_epochs},
                                 {"final_loss", losses.empty() ? 0.0 : losses.back()}};
        std::cout << j.dump() << "\n";
    });

    // candidates
    auto* cand = app.add_subcommand("candidates", "build per-user candidate slates");
    Common cand_common;
    add_common(cand, cand_common);
    std::string cand_data, cand_emb, cand_user, cand_out;
    cand->add_option("--data", cand_data)->required();
    cand->add_option("--emb", cand_emb, "saved embedding file (default: refit)");
    cand->add_option("--user", cand_user, "only this user");
    cand->add_option("--out", cand_out, "output path (default stdout)");
    cand->callback([&] {
        RunConfig cfg = cand_common.resolve();
        World w = load_world(cfg, cand_data, cand_emb);
        std::ofstream file;
        std::ostream& out = open_out(file, cand_out);
        bool found = false;
        for (const auto* cases : {&w.train_cases, &w.holdout_cases})
            for (const World::Case& c : *cases) {
                if (!cand_user.empty() && c.history.user != cand_user) continue;
                found = true;
                nlohmann::ordered_json j{{"user", c.history.user},
                                         {"ground_truth", c.ground_truth},
                                         {"candidates", c.candidates}};
                out << j.dump() << "\n";
            }
        if (!cand_user.empty() && !found) throw DataError("user not found: " + cand_user);
    });

    // episode
    auto* epi = app.add_subcommand("episode", "run interaction episodes and log trajectories");
    Common epi_common;
    add_common(epi, epi_common);
    std::string epi_data, epi_emb, epi_user, epi_out, epi_backend = "toy", epi_split = "holdout";
    std::string epi_rec_w, epi_user_w;
    bool epi_rewards = false;
    epi->add_option("--data", epi_data)->required();
    epi->add_option("--emb", epi_emb);
    epi->add_option("--backend", epi_backend, "toy | remote");
    epi->add_option("--split", epi_split, "holdout | train");
    epi->add_option("--user", epi_user, "only this user");
    epi->add_option("--rec-weights", epi_rec_w);
    epi->add_option("--user-weights", epi_user_w);
    epi->add_option("--out", epi_out, "trajectory JSONL (default stdout)");
    epi->add_flag("--with-rewards", epi_rewards, "append reward lines per episode");
    epi->callback([&] {
        RunConfig cfg = epi_common.resolve();
        World w = load_world(cfg, epi_data, epi_emb);
        Backends b = make_backends(cfg, w, epi_backend, epi_rec_w, epi_user_w);
        PeerSource peers = w.peer_source();
        std::ofstream file;
        std::ostream& out = open_out(file, epi_out);
        bool found = false;
        int idx = 0;
        for (const World::Case& c : pick_split(w, epi_split)) {
            ++idx;
            if (!epi_user.empty() && c.history.user != epi_user) continue;
            found = true;
            EpisodeConfig ecfg;
            ecfg.max_turns = cfg.max_turns;
            ecfg.seed = mix_seed(cfg.seed, idx);
            Episode ep =
                run_episode(*b.rec, *b.user, c.history, c.candidates, c.ground_truth, ecfg, peers);
            append_trajectory(out, ep.trajectory);
            if (epi_rewards) {
                std::vector<RewardBreakdown> rbs;
                RewardConfig rwc = to_train_config(cfg).rewards;
                for (const InteractionTurn& turn : ep.trajectory.turns)
                    rbs.push_back(score_turn(turn, c.ground_truth, ep.found_at,
                                             turn.peer ? turn.peer->similarity : 0.0, rwc));
                append_rewards(out, c.history.user, rbs);
            }
        }
        if (!epi_user.empty() && !found) throw DataError("user not found: " + epi_user);
    });

    // score
    auto* sco = app.add_subcommand("score", "recompute rewards for a trajectory log");
    Common sco_common;
    add_common(sco, sco_common);
    std::string sco_log, sco_out;
    sco->add_option("--log", sco_log, "trajectory JSONL")->required();
    sco->add_option("--out", sco_out, "output JSONL (default stdout)");
    sco->callback([&] {
        RunConfig cfg = sco_common.resolve();
        RewardConfig rwc = to_train_config(cfg).rewards;
        std::ifstream in(sco_log);
        if (!in) throw DataError("cannot open " + sco_log);
        std::ofstream file;
        std::ostream& out = open_out(file, sco_out);

        std::vector<nlohmann::ordered_json> block;
        auto flush = [&] {
            if (block.empty()) return;
            std::optional<int> found_at;
            std::string gt;
            if (!block.front()["ground_truth"].is_null())
                gt = block.front()["ground_truth"].get<std::string>();
            for (const auto& j : block)
                if (!gt.empty() && !found_at && j["rec_item"].get<std::string>() == gt)
                    found_at = j["turn"].get<int>();
            for (const auto& j : block) {
                out << j.dump() << "\n";
            }
            for (const auto& j : block) {
                InteractionTurn turn;
                turn.turn_index = j["turn"].get<int>();
                turn.rec.item = j["rec_item"].get<std::string>();
                auto act = action_from_name(j["action"].get<std::string>());
                if (!act) throw DataError("bad action in log");
                turn.user.action = *act;
                turn.user.score = j["score"].get<double>();
                RewardBreakdown rb = score_turn(turn, gt, found_at,
                                                j["peer_similarity"].get<double>(), rwc);
                out << reward_json(j["user"].get<std::string>(), rb).dump() << "\n";
            }
            block.clear();
        };
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            auto j = nlohmann::ordered_json::parse(line, nullptr, false);
            if (j.is_discarded()) throw DataError("bad JSON at line " + std::to_string(lineno));
            if (j.contains("rec_reward")) continue;  // drop stale reward lines
            if (!block.empty() && (j["user"] != block.front()["user"] ||
                                   j["turn"].get<int>() <= block.back()["turn"].get<int>()))
                flush();
            block.push_back(std::move(j));
        }
        flush();
    });

    // train-toy
    auto* tr = app.add_subcommand("train-toy", "co-train the toy policies");
    Common tr_common;
    add_common(tr, tr_common);
    std::string tr_data, tr_emb, tr_report, tr_save_rec, tr_save_user, tr_drop;
    tr->add_option("--data", tr_data)->required();
    tr->add_option("--emb", tr_emb);
    tr->add_option("--report", tr_report, "training report JSON path");
    tr->add_option("--save-rec", tr_save_rec, "write trained recommender weights");
    tr->add_option("--save-user", tr_save_user, "write trained user weights");
    tr->add_option("--drop", tr_drop,
                   "ablation: user-training|rec-training|ir-rec|ir-user|sd-rec|sd-user");
    tr->callback([&] {
        RunConfig cfg = tr_common.resolve();
        TrainConfig tcfg = to_train_config(cfg);
        if (!tr_drop.empty() && !apply_ablation(tcfg, tr_drop))
            throw std::invalid_argument("unknown --drop '" + tr_drop + "'");
        World w = load_world(cfg, tr_data, tr_emb);
        ToyPolicy rec(Role::rec, world_codec(w), &w.emb);
        ToyPolicy user(Role::user, world_codec(w), &w.emb);
        TrainReport rep = train_loop(w, rec, user, tcfg);
        nlohmann::ordered_json j = report_json(rep, tcfg);
        if (!tr_report.empty()) {
            std::ofstream f(tr_report);
            if (!f) throw DataError("cannot write " + tr_report);
            f << j.dump(2) << "\n";
        }
        if (!tr_save_rec.empty()) save_toy_policy(rec, tr_save_rec);
        if (!tr_save_user.empty()) save_toy_policy(user, tr_save_user);
        nlohmann::ordered_json brief{{"initial", j["initial"]}, {"final", j["final"]}};
        std::cout << brief.dump() << "\n";
    });

    // ablate
    auto* abl = app.add_subcommand("ablate", "train with one component removed");
    Common abl_common;
    add_common(abl, abl_common);
    std::string abl_data, abl_emb, abl_report, abl_drop;
    abl->add_option("--data", abl_data)->required();
    abl->add_option("--emb", abl_emb);
    abl->add_option("--report", abl_report);
    abl->add_option("--drop", abl_drop,
                    "user-training|rec-training|ir-rec|ir-user|sd-rec|sd-user")
        ->required();
    abl->callback([&] {
        RunConfig cfg = abl_common.resolve();
        TrainConfig tcfg = to_train_config(cfg);
        if (!apply_ablation(tcfg, abl_drop))
            throw std::invalid_argument("unknown --drop '" + abl_drop + "'");
        World w = load_world(cfg, abl_data, abl_emb);
        ToyPolicy rec(Role::rec, world_codec(w), &w.emb);
        ToyPolicy user(Role::user, world_codec(w), &w.emb);
        TrainReport rep = train_loop(w, rec, user, tcfg);
        nlohmann::ordered_json j = report_json(rep, tcfg);
        j["drop"] = abl_drop;
        if (!abl_report.empty()) {
            std::ofstream f(abl_report);
            if (!f) throw DataError("cannot write " + abl_report);
            f << j.dump(2) << "\n";
        }
        nlohmann::ordered_json brief{{"drop", abl_drop}, {"final", j["final"]}};
        std::cout << brief.dump() << "\n";
    });

    // eval-rec
    auto* evr = app.add_subcommand("eval-rec", "holdout Hit@1 for the episode loop");
    Common evr_common;
    add_common(evr, evr_common);
    std::string evr_data, evr_emb, evr_backend = "toy", evr_rec_w, evr_user_w;
    evr->add_option("--data", evr_data)->required();
    evr->add_option("--emb", evr_emb);
    evr->add_option("--backend", evr_backend, "toy | remote");
    evr->add_option("--rec-weights", evr_rec_w);
    evr->add_option("--user-weights", evr_user_w);
    evr->callback([&] {
        RunConfig cfg = evr_common.resolve();
        World w = load_world(cfg, evr_data, evr_emb);
        Backends b = make_backends(cfg, w, evr_backend, evr_rec_w, evr_user_w);
        PeerSource peers = w.peer_source();
        std::vector<std::pair<ItemId, ItemId>> sel;
        int idx = 0;
        for (const World::Case& c : w.holdout_cases) {
            EpisodeConfig ecfg;
            ecfg.max_turns = cfg.max_turns;
            ecfg.seed = mix_seed(cfg.seed, mix_seed(0xe7a1ULL, idx++));
            Episode ep =
                run_episode(*b.rec, *b.user, c.history, c.candidates, c.ground_truth, ecfg, peers);
            sel.emplace_back(ep.trajectory.final_item, c.ground_truth);
        }
        nlohmann::ordered_json j{{"hit1", hit_at_1(sel)}, {"episodes", sel.size()}};
        std::cout << j.dump() << "\n";
    });

    // eval-user
    auto* evu = app.add_subcommand("eval-user", "holdout 1:3 user-simulation micro-F1");
    Common evu_common;
    add_common(evu, evu_common);
    std::string evu_data, evu_emb, evu_backend = "toy", evu_user_w;
    evu->add_option("--data", evu_data)->required();
    evu->add_option("--emb", evu_emb);
    evu->add_option("--backend", evu_backend, "toy | remote");
    evu->add_option("--user-weights", evu_user_w);
    evu->callback([&] {
        RunConfig cfg = evu_common.resolve();
        World w = load_world(cfg, evu_data, evu_emb);
        Backends b = make_backends(cfg, w, evu_backend, "", evu_user_w);
        std::vector<UserSimCase> cases;
        for (const World::Case& c : w.holdout_cases) {
            UserSimCase uc;
            uc.history = c.history;
            uc.ground_truth = c.ground_truth;
            uc.distractors = top_distractors(c.history, c.ground_truth, w.emb, 3);
            cases.push_back(std::move(uc));
        }
        EvalCounts counts =
            run_user_sim_eval(*b.user, cases, w.peer_source(), mix_seed(cfg.seed, 0xf1ULL));
        nlohmann::ordered_json j{{"f1", micro_f1(counts)},
                                 {"tp", counts.tp},
                                 {"fp", counts.fp},
                                 {"fn", counts.fn},
                                 {"tn", counts.tn}};
        std::cout << j.dump() << "\n";
    });

    // replay
    auto* rep = app.add_subcommand("replay", "render a trajectory log as text");
    std::string rep_log;
    rep->add_option("--log", rep_log, "trajectory JSONL")->required();
    rep->callback([&] {
        std::ifstream in(rep_log);
        if (!in) throw DataError("cannot open " + rep_log);
        std::cout << replay_render(in);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // normalize CLI11's varied exit codes onto the documented contract
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const coars::TransportError& e) {
        std::cerr << "transport error: " << e.what() << "\n";
        return 3;
    } catch (const coars::BackendError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return 3;
    } catch (const coars::ProtocolViolation& e) {
        std::cerr << "protocol violation (turn " << e.turn << "): " << e.what() << "\n";
        return 3;
    } catch (const coars::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
