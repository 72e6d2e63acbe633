#include "doctest.h"

#include <sstream>
#include <vector>

#include "coars/orchestrator.hpp"
#include "coars/trajectory_log.hpp"
#include "support/fixtures.hpp"

using namespace coars;

namespace {

Trajectory sample_trajectory() {
    auto rec = fixtures::rec_in_order();
    auto user = fixtures::user_wants("b");
    EpisodeConfig cfg;
    cfg.max_turns = 3;
    return run_episode(rec, user, fixtures::history("ua", {"a"}), {"a", "b", "c"}, ItemId("b"),
                       cfg)
        .trajectory;
}

std::vector<std::string> keys_of(const nlohmann::ordered_json& j) {
    std::vector<std::string> out;
    for (auto it = j.begin(); it != j.end(); ++it) out.push_back(it.key());
    return out;
}

}  // namespace

TEST_CASE("turn lines carry a fixed key order") {
    Trajectory t = sample_trajectory();
    auto j = turn_json(t, 0);
    CHECK(keys_of(j) == std::vector<std::string>{
                            "user", "turn", "candidates", "rec_item", "rec_rationale", "action",
                            "score", "user_rationale", "peer_similarity", "terminated_by",
                            "final_item", "ground_truth"});
    CHECK(j["user"] == "ua");
    CHECK(j["turn"] == 1);
    CHECK(j["rec_item"] == "a");
    CHECK(j["final_item"] == "b");
    CHECK(j["ground_truth"] == "b");
    Trajectory bare = t;
    bare.ground_truth.reset();
    CHECK(turn_json(bare, 0)["ground_truth"].is_null());
}

TEST_CASE("reward lines carry a fixed key order") {
    RewardBreakdown b;
    b.turn_index = 2;
    b.hit = true;
    b.score = 0.9;
    b.depth_factor = 1.0;
    b.rec_reward = 0.95;
    b.user_reward = 0.8;
    auto j = reward_json("ua", b);
    CHECK(keys_of(j) == std::vector<std::string>{"user", "turn", "hit", "score", "depth_factor",
                                                 "peer_similarity", "rec_reward", "user_reward",
                                                 "rl_eligible"});
    CHECK(j["turn"] == 2);
    CHECK(j["rl_eligible"] == true);
}

TEST_CASE("reference lines expose the seven fields in order") {
    DiagnosticReference ref;
    ref.original_rec = {"a", "guess"};
    ref.original_user = fixtures::reply(Action::click, 0.91, "sure");
    ref.corrected_rec = {"b", "target"};
    ref.corrected_user = fixtures::reply(Action::skip, 0.45, "pass");
    ref.diagnosis = {"wrong", "wrong", "rec_wrong_user_accepted"};
    ref.explanation = "would reinforce a wrong suggestion";
    auto j = reference_json(ref, Role::user);
    CHECK(keys_of(j) == std::vector<std::string>{
                            "original_interaction", "original_reasoning", "observed_feedback",
                            "interaction_diagnosis", "reference_reasoning", "reference_response",
                            "reference_explanation"});
    CHECK(j["observed_feedback"] == "click 0.91");
    CHECK(j["reference_response"] == "Decision: skip, Strength: 0.45 (pass)");
    CHECK(reference_json(ref, Role::rec)["reference_response"] == "Item: b (target)");
}

TEST_CASE("append produces one JSON object per line") {
    Trajectory t = sample_trajectory();
    std::ostringstream out;
    append_trajectory(out, t);
    std::istringstream in(out.str());
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line)) {
        ++lines;
        auto j = nlohmann::json::parse(line);  // throws on malformed output
        CHECK(j["user"] == "ua");
    }
    CHECK(lines == t.turns.size());
}

TEST_CASE("logging the same trajectory twice is byte-identical") {
    Trajectory t = sample_trajectory();
    std::ostringstream a, b;
    append_trajectory(a, t);
    append_trajectory(b, t);
    CHECK(a.str() == b.str());
    CHECK_FALSE(a.str().empty());
}

TEST_CASE("replay renders episodes, turns, and reward annotations") {
    Trajectory t = sample_trajectory();
    std::ostringstream log;
    append_trajectory(log, t);
    RewardBreakdown rb;
    rb.turn_index = 1;
    rb.rec_reward = -0.7;
    rb.user_reward = 0.2;
    rb.rl_eligible = false;
    append_rewards(log, "ua", {rb});

    std::istringstream in(log.str());
    std::string text = replay_render(in);
    CHECK(text.find("episode user=ua gt=b final=b (click)") != std::string::npos);
    CHECK(text.find("turn 1: rec a") != std::string::npos);
    CHECK(text.find("turn 2: rec b") != std::string::npos);
    CHECK(text.find("diagnosis: rec_agent=wrong, user_agent=correct, "
                    "outcome=rec_wrong_user_rejected") != std::string::npos);
    CHECK(text.find("outcome=rec_correct_user_accepted") != std::string::npos);
    CHECK(text.find("rewards: rec=-0.7") != std::string::npos);
    CHECK(text.find("(excluded from training)") != std::string::npos);

    // without a ground truth there is nothing to judge against
    Trajectory bare = t;
    bare.ground_truth.reset();
    std::ostringstream bare_log;
    append_trajectory(bare_log, bare);
    std::istringstream bare_in(bare_log.str());
    CHECK(replay_render(bare_in).find("diagnosis:") == std::string::npos);
    // two logged episodes produce two headers
    std::istringstream twice(log.str() + log.str());
    std::string both = replay_render(twice);
    std::size_t first = both.find("episode user=ua");
    std::size_t second = both.find("episode user=ua", first + 1);
    CHECK(second != std::string::npos);
}

TEST_CASE("replay reports the offending line on bad JSON") {
    std::ostringstream log;
    append_trajectory(log, sample_trajectory());  // two well-formed lines
    std::istringstream in(log.str() + "not json\n");
    CHECK_THROWS_WITH_AS(replay_render(in), doctest::Contains("line 3"), DataError);
}
