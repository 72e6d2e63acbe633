#include "coars/distill.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coars {

Diagnosis diagnose(const InteractionTurn& turn, const ItemId& ground_truth) {
    const bool hit = turn.rec.item == ground_truth;
    const bool accepted = is_accept(turn.user.action);
    Diagnosis d;
    d.rec_agent = hit ? "correct" : "wrong";
    d.user_agent = (accepted == hit) ? "correct" : "wrong";
    d.outcome = std::string("rec_") + (hit ? "correct" : "wrong") + "_user_" +
                (accepted ? "accepted" : "rejected");
    return d;
}

std::string explain(const Diagnosis& d) {
    if (d.rec_agent == "correct" && d.user_agent == "correct")
        return "the recommendation matched the target and the user responded accordingly; "
               "keep this behaviour";
    if (d.rec_agent == "correct")
        return "the recommendation matched the target but the user rejected it; the reference "
               "reply accepts the matching item";
    if (d.user_agent == "correct")
        return "the recommendation missed the target and the user rightly turned it down; the "
               "reference recommends the target instead";
    return "the recommendation missed the target yet the user accepted it, which would reinforce "
           "a wrong suggestion; the reference recommends the target and turns the original "
           "item down";
}

DiagnosticReference build_reference(const InteractionTurn& turn, const ItemId& ground_truth,
                                    PolicyBackend& rec_policy, PolicyBackend& user_policy,
                                    std::mt19937_64& rng) {
    DiagnosticReference ref;
    ref.original_rec = turn.rec;
    ref.original_user = turn.user;
    ref.diagnosis = diagnose(turn, ground_truth);
    ref.explanation = explain(ref.diagnosis);

    Context rec_ctx;
    rec_ctx.role = Role::rec;
    rec_ctx.history = turn.history;
    rec_ctx.candidates = {ground_truth};
    rec_ctx.memory = turn.memory_before;
    rec_ctx.turn_index = turn.turn_index;
    ref.corrected_rec = rec_policy.generate(rec_ctx, rng).rec();
    if (ref.corrected_rec.item != ground_truth)
        throw ProtocolViolation("corrected recommendation ignored the narrowed candidate set",
                                turn.turn_index);

    const bool hit = turn.rec.item == ground_truth;
    Context user_ctx;
    user_ctx.role = Role::user;
    user_ctx.history = turn.history;
    user_ctx.memory = turn.memory_before;
    user_ctx.turn_index = turn.turn_index;
    user_ctx.rec = turn.rec;
    user_ctx.peer = turn.peer;
    user_ctx.allowed_actions = hit ? std::vector<Action>{Action::click, Action::star}
                                   : std::vector<Action>{Action::skip, Action::dislike};
    ref.corrected_user = user_policy.generate(user_ctx, rng).user();
    if (is_accept(ref.corrected_user.action) != hit)
        throw ProtocolViolation("corrected user reply is on the wrong accept/reject side",
                                turn.turn_index);
    return ref;
}

Context assemble_teacher_context(const Context& student_ctx, const DiagnosticReference& ref) {
    Context ctx = student_ctx;
    ctx.reference = ref;
    return ctx;
}

std::vector<double> token_advantages(const std::vector<double>& teacher_logps,
                                     const std::vector<double>& student_logps, double clip) {
    if (teacher_logps.size() != student_logps.size())
        throw std::invalid_argument("teacher/student token counts differ");
    std::vector<double> out(teacher_logps.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        double d = teacher_logps[i] - student_logps[i];
        if (std::isnan(d)) d = 0.0;
        out[i] = std::clamp(d, -clip, clip);
    }
    return out;
}

}  // namespace coars
