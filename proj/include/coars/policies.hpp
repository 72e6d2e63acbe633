#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "coars/domain.hpp"
#include "coars/reference.hpp"

namespace coars {

enum class Role { rec, user };

const char* role_name(Role r);

// Everything a policy sees when producing one message. The recommender reads
// history/candidates/memory; the simulated user additionally reads the
// incoming recommendation and the peer opinion. `reference` switches a
// backend into teacher conditioning; `allowed_actions` restricts the user
// head (used when generating corrected replies).
struct Context {
    Role role = Role::rec;
    UserHistory history;
    std::vector<ItemId> candidates;
    Memory memory;
    int turn_index = 1;

    std::optional<RecMessage> rec;
    std::optional<PeerOpinion> peer;

    std::optional<DiagnosticReference> reference;
    std::optional<std::vector<Action>> allowed_actions;
};

struct TokenSeq {
    std::vector<int> ids;            // toy vocab ids; empty for backends without one
    std::vector<std::string> text;   // one entry per emitted token
    std::size_t size() const { return text.size(); }
};

struct GenerationResult {
    TokenSeq tokens;
    std::vector<double> logps;  // per-token log-prob under the generating policy
    std::variant<RecMessage, UserMessage> decoded;

    const RecMessage& rec() const { return std::get<RecMessage>(decoded); }
    const UserMessage& user() const { return std::get<UserMessage>(decoded); }
};

class PolicyBackend {
public:
    virtual ~PolicyBackend() = default;
    virtual GenerationResult generate(const Context& ctx, std::mt19937_64& rng) = 0;
    // Per-token log-probs of an externally produced sequence under this
    // policy and context.
    virtual std::vector<double> logprob(const Context& ctx, const TokenSeq& tokens) = 0;
};

// Deterministic function-backed policies: a point mass on the scripted
// output. logprob() is 0 per token on the scripted sequence and -inf
// elsewhere. Used for protocol tests and fixed opposite-side agents.
class ScriptedRecPolicy : public PolicyBackend {
public:
    using Fn = std::function<RecMessage(const Context&)>;
    explicit ScriptedRecPolicy(Fn fn) : fn_(std::move(fn)) {}
    GenerationResult generate(const Context& ctx, std::mt19937_64& rng) override;
    std::vector<double> logprob(const Context& ctx, const TokenSeq& tokens) override;

private:
    Fn fn_;
};

class ScriptedUserPolicy : public PolicyBackend {
public:
    using Fn = std::function<UserMessage(const Context&)>;
    explicit ScriptedUserPolicy(Fn fn) : fn_(std::move(fn)) {}
    GenerationResult generate(const Context& ctx, std::mt19937_64& rng) override;
    std::vector<double> logprob(const Context& ctx, const TokenSeq& tokens) override;

private:
    Fn fn_;
};

// Token renderings shared by scripted and remote backends.
TokenSeq tokenize_rec(const RecMessage& m);
TokenSeq tokenize_user(const UserMessage& m);
std::string format_score(double s);

}  // namespace coars
