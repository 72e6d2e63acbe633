#include "coars/domain.hpp"

#include <cmath>
#include <sstream>

namespace coars {

const char* action_name(Action a) {
    switch (a) {
        case Action::click: return "click";
        case Action::star: return "star";
        case Action::skip: return "skip";
        case Action::dislike: return "dislike";
    }
    return "?";
}

std::optional<Action> action_from_name(const std::string& name) {
    if (name == "click") return Action::click;
    if (name == "star") return Action::star;
    if (name == "skip") return Action::skip;
    if (name == "dislike") return Action::dislike;
    return std::nullopt;
}

Action score_to_action(double s) {
    if (!(s >= 0.0 && s <= 1.0))
        throw std::domain_error("acceptance score outside [0,1]: " + std::to_string(s));
    if (s <= 0.3) return Action::dislike;
    if (s <= 0.5) return Action::skip;
    if (s <= 0.8) return Action::star;
    return Action::click;
}

std::pair<double, double> action_interval(Action a) {
    switch (a) {
        case Action::dislike: return {0.0, 0.3};
        case Action::skip: return {0.3, 0.5};
        case Action::star: return {0.5, 0.8};
        case Action::click: return {0.8, 1.0};
    }
    return {0.0, 0.0};
}

std::vector<std::string> validate_user_message(const UserMessage& m) {
    std::vector<std::string> violations;
    if (!(m.score >= 0.0 && m.score <= 1.0) || !std::isfinite(m.score)) {
        violations.push_back("score " + std::to_string(m.score) + " outside [0,1]");
        return violations;
    }
    auto [lo, hi] = action_interval(m.action);
    bool inside = m.action == Action::dislike ? (m.score >= lo && m.score <= hi)
                                              : (m.score > lo && m.score <= hi);
    if (!inside) {
        std::ostringstream os;
        os << "score " << m.score << " outside " << action_name(m.action) << " interval "
           << (m.action == Action::dislike ? '[' : '(') << lo << "," << hi << "]";
        violations.push_back(os.str());
    }
    return violations;
}

const char* termination_name(Termination t) {
    return t == Termination::click ? "click" : "max_turns_fallback";
}

}  // namespace coars
