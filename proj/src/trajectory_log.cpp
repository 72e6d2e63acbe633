#include "coars/trajectory_log.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "coars/distill.hpp"
#include "coars/prompt.hpp"

namespace coars {

nlohmann::ordered_json turn_json(const Trajectory& t, std::size_t turn_idx) {
    const InteractionTurn& turn = t.turns.at(turn_idx);
    nlohmann::ordered_json j;
    j["user"] = t.user;
    j["turn"] = turn.turn_index;
    j["candidates"] = turn.candidates;
    j["rec_item"] = turn.rec.item;
    j["rec_rationale"] = turn.rec.rationale;
    j["action"] = action_name(turn.user.action);
    j["score"] = turn.user.score;
    j["user_rationale"] = turn.user.rationale;
    j["peer_similarity"] = turn.peer ? turn.peer->similarity : 0.0;
    j["terminated_by"] = termination_name(t.terminated_by);
    j["final_item"] = t.final_item;
    if (t.ground_truth)
        j["ground_truth"] = *t.ground_truth;
    else
        j["ground_truth"] = nullptr;
    return j;
}

nlohmann::ordered_json reward_json(const UserId& user, const RewardBreakdown& b) {
    nlohmann::ordered_json j;
    j["user"] = user;
    j["turn"] = b.turn_index;
    j["hit"] = b.hit;
    j["score"] = b.score;
    j["depth_factor"] = b.depth_factor;
    j["peer_similarity"] = b.peer_similarity;
    j["rec_reward"] = b.rec_reward;
    j["user_reward"] = b.user_reward;
    j["rl_eligible"] = b.rl_eligible;
    return j;
}

nlohmann::ordered_json reference_json(const DiagnosticReference& ref, Role role) {
    nlohmann::ordered_json j;
    j["original_interaction"] =
        render_message(ref.original_rec) + " -> " + render_message(ref.original_user);
    j["original_reasoning"] =
        role == Role::rec ? ref.original_rec.rationale : ref.original_user.rationale;
    j["observed_feedback"] = std::string(action_name(ref.original_user.action)) + " " +
                             format_score(ref.original_user.score);
    j["interaction_diagnosis"] = render_diagnosis(ref.diagnosis);
    j["reference_reasoning"] =
        role == Role::rec ? ref.corrected_rec.rationale : ref.corrected_user.rationale;
    j["reference_response"] = role == Role::rec ? render_message(ref.corrected_rec)
                                                : render_message(ref.corrected_user);
    j["reference_explanation"] = ref.explanation;
    return j;
}

void append_trajectory(std::ostream& out, const Trajectory& t) {
    for (std::size_t i = 0; i < t.turns.size(); ++i) out << turn_json(t, i).dump() << '\n';
}

void append_rewards(std::ostream& out, const UserId& user,
                    const std::vector<RewardBreakdown>& rewards) {
    for (const RewardBreakdown& b : rewards) out << reward_json(user, b).dump() << '\n';
}

std::string replay_render(std::istream& in) {
    std::ostringstream out;
    std::string line;
    std::string current_user;
    int last_turn = 0;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("log line " + std::to_string(lineno) + ": " + e.what());
        }
        if (j.contains("rec_reward")) {
            out << "  turn " << j["turn"].get<int>() << " rewards: rec=" << j["rec_reward"].dump()
                << " user=" << j["user_reward"].dump() << " depth=" << j["depth_factor"].dump()
                << (j["rl_eligible"].get<bool>() ? "" : " (excluded from training)") << "\n";
            continue;
        }
        std::string user = j["user"].get<std::string>();
        int turn = j["turn"].get<int>();
        if (user != current_user || turn <= last_turn) {
            out << "episode user=" << user;
            if (!j["ground_truth"].is_null())
                out << " gt=" << j["ground_truth"].get<std::string>();
            out << " final=" << j["final_item"].get<std::string>() << " ("
                << j["terminated_by"].get<std::string>() << ")\n";
            current_user = user;
        }
        last_turn = turn;
        out << "  turn " << turn << ": rec " << j["rec_item"].get<std::string>();
        std::string rr = j["rec_rationale"].get<std::string>();
        if (!rr.empty()) out << " \"" << rr << "\"";
        out << " -> " << j["action"].get<std::string>() << " " << format_score(j["score"].get<double>());
        std::string ur = j["user_rationale"].get<std::string>();
        if (!ur.empty()) out << " \"" << ur << "\"";
        double q = j["peer_similarity"].get<double>();
        if (q != 0.0) out << " [peer q=" << format_score(q) << "]";
        out << "\n";
        if (!j["ground_truth"].is_null()) {
            std::string action = j["action"].get<std::string>();
            auto act = action_from_name(action);
            if (!act)
                throw DataError("log line " + std::to_string(lineno) + ": unknown action " +
                                action);
            InteractionTurn t;
            t.turn_index = turn;
            t.rec.item = j["rec_item"].get<std::string>();
            t.user.action = *act;
            t.user.score = j["score"].get<double>();
            out << "    diagnosis: "
                << render_diagnosis(diagnose(t, j["ground_truth"].get<std::string>())) << "\n";
        }
    }
    return out.str();
}

}  // namespace coars
