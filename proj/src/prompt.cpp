#include "coars/prompt.hpp"

#include <sstream>

namespace coars {

std::string render_message(const RecMessage& m) {
    std::string s = "Item: " + m.item;
    if (!m.rationale.empty()) s += " (" + m.rationale + ")";
    return s;
}

std::string render_message(const UserMessage& m) {
    std::string s = "Decision: " + std::string(action_name(m.action)) +
                    ", Strength: " + format_score(m.score);
    if (!m.rationale.empty()) s += " (" + m.rationale + ")";
    return s;
}

std::string render_diagnosis(const Diagnosis& d) {
    return "rec_agent=" + d.rec_agent + ", user_agent=" + d.user_agent + ", outcome=" + d.outcome;
}

namespace {

void render_common(std::ostringstream& out, const Context& ctx) {
    out << "User: " << ctx.history.user << "\n";
    out << "History:";
    if (ctx.history.events.empty()) out << " (none)";
    for (std::size_t i = 0; i < ctx.history.events.size(); ++i)
        out << (i ? ", " : " ") << ctx.history.events[i].first;
    out << "\n";
}

void render_memory(std::ostringstream& out, const Memory& m) {
    if (m.empty()) {
        out << "Memory: (empty)\n";
        return;
    }
    out << "Memory:\n";
    for (std::size_t i = 0; i < m.records.size(); ++i)
        out << "  turn " << i + 1 << ": " << render_message(m.records[i].first) << " -> "
            << render_message(m.records[i].second) << "\n";
}

}  // namespace

std::string render_reference_block(const DiagnosticReference& ref, Role role) {
    std::ostringstream out;
    out << "Reference:\n";
    out << "Original interaction: " << render_message(ref.original_rec) << " -> "
        << render_message(ref.original_user) << "\n";
    const std::string& reasoning =
        role == Role::rec ? ref.original_rec.rationale : ref.original_user.rationale;
    out << "Original reasoning: " << (reasoning.empty() ? "(none)" : reasoning) << "\n";
    out << "Observed feedback: " << action_name(ref.original_user.action) << " "
        << format_score(ref.original_user.score) << "\n";
    out << "Interaction diagnosis: " << render_diagnosis(ref.diagnosis) << "\n";
    const std::string& corrected_reasoning =
        role == Role::rec ? ref.corrected_rec.rationale : ref.corrected_user.rationale;
    out << "Reference reasoning: " << (corrected_reasoning.empty() ? "(none)" : corrected_reasoning)
        << "\n";
    out << "Reference response: "
        << (role == Role::rec ? render_message(ref.corrected_rec)
                              : render_message(ref.corrected_user))
        << "\n";
    out << "Reference explanation: " << ref.explanation << "\n";
    out << "Instruction: use the reference trajectory as additional context.\n";
    out << "Instruction: after the reference block, continue with the same task and output "
           "format as the original prompt.\n";
    return out.str();
}

std::string render_prompt(const Context& ctx) {
    std::ostringstream out;
    if (ctx.role == Role::rec) {
        out << "Task: recommend one item from the candidate list for the user.\n";
        render_common(out, ctx);
        out << "Candidates:";
        for (std::size_t i = 0; i < ctx.candidates.size(); ++i)
            out << (i ? ", " : " ") << ctx.candidates[i];
        out << "\n";
        render_memory(out, ctx.memory);
        out << "Output format:\n"
               "Reason: <short justification>\n"
               "Item: <one candidate id>\n";
    } else {
        out << "Task: judge the recommended item as this user would.\n";
        render_common(out, ctx);
        if (ctx.rec) out << "Recommended: " << render_message(*ctx.rec) << "\n";
        if (ctx.peer)
            out << "Peer: " << ctx.peer->text << " (similarity " << format_score(ctx.peer->similarity)
                << ")\n";
        render_memory(out, ctx.memory);
        out << "Output format:\n"
               "Reason: <short justification>\n"
               "Decision: <click|star|skip|dislike>\n"
               "Strength: <number in [0,1]>\n";
    }
    if (ctx.reference) out << render_reference_block(*ctx.reference, ctx.role);
    return out.str();
}

}  // namespace coars
