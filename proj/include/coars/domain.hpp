#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace coars {

// Identifiers are opaque strings at the boundary; recsys interns them to
// dense integers for embedding lookups.
using UserId = std::string;
using ItemId = std::string;

// User feedback actions, ordered from strongest acceptance to strongest
// rejection. Each action owns a half-open slice of the score range:
//   click (0.8, 1.0], star (0.5, 0.8], skip (0.3, 0.5], dislike [0, 0.3].
enum class Action { click, star, skip, dislike };

const char* action_name(Action a);
std::optional<Action> action_from_name(const std::string& name);

// Partitions [0,1] into the four action intervals. s = 0.5 is a skip
// (reject side), s = 0.8 a star, s = 0.3 a dislike.
Action score_to_action(double s);  // throws std::domain_error outside [0,1]

// click/star count as accept, skip/dislike as reject.
inline bool is_accept(Action a) { return a == Action::click || a == Action::star; }

// Inclusive score bounds of an action's interval (lower is exclusive except
// for dislike).
std::pair<double, double> action_interval(Action a);

struct UserHistory {
    UserId user;
    // (item, timestamp seconds), sorted nondecreasing by timestamp
    std::vector<std::pair<ItemId, std::int64_t>> events;
};

struct RecMessage {
    ItemId item;
    std::string rationale;
};

struct UserMessage {
    Action action = Action::skip;
    double score = 0.4;
    std::string rationale;
};

// Violations are data, not exceptions: empty list means the message is valid.
std::vector<std::string> validate_user_message(const UserMessage& m);

struct PeerOpinion {
    UserId peer;
    ItemId item;
    std::string text;
    double similarity = 0.0;  // q_t input, in [-1, 1]
};

// Append-only record of completed (rec, user) exchanges within an episode.
struct Memory {
    std::vector<std::pair<RecMessage, UserMessage>> records;
    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
};

struct InteractionTurn {
    int turn_index = 1;  // 1-based
    UserHistory history;
    std::vector<ItemId> candidates;
    Memory memory_before;
    RecMessage rec;
    UserMessage user;
    std::optional<PeerOpinion> peer;
};

enum class Termination { click, max_turns_fallback };

const char* termination_name(Termination t);

struct Trajectory {
    UserId user;
    std::vector<InteractionTurn> turns;
    ItemId final_item;
    Termination terminated_by = Termination::max_turns_fallback;
    std::optional<ItemId> ground_truth;
};

// Error taxonomy. Usage errors are std::invalid_argument, score-range errors
// std::domain_error; the types below carry context for the CLI exit codes.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BackendError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TransportError : BackendError {
    TransportError(const std::string& what, int attempts)
        : BackendError(what), attempts(attempts) {}
    int attempts = 0;
};

// A policy emitted a message that breaks the protocol (e.g. recommended an
// item outside the turn's candidate set).
struct ProtocolViolation : std::runtime_error {
    ProtocolViolation(const std::string& what, int turn)
        : std::runtime_error(what), turn(turn) {}
    int turn = 0;
};

}  // namespace coars
