#include "coars/policies.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace coars {

const char* role_name(Role r) { return r == Role::rec ? "rec" : "user"; }

std::string format_score(double s) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.2f", s);
    return buf;
}

TokenSeq tokenize_rec(const RecMessage& m) {
    TokenSeq t;
    t.text = {m.item};
    return t;
}

TokenSeq tokenize_user(const UserMessage& m) {
    TokenSeq t;
    t.text = {action_name(m.action), format_score(m.score)};
    return t;
}

namespace {

std::vector<double> point_mass_logps(const TokenSeq& expected, const TokenSeq& got) {
    std::vector<double> out(got.size(), -std::numeric_limits<double>::infinity());
    if (expected.text == got.text) std::fill(out.begin(), out.end(), 0.0);
    return out;
}

}  // namespace

GenerationResult ScriptedRecPolicy::generate(const Context& ctx, std::mt19937_64&) {
    if (ctx.role != Role::rec) throw std::invalid_argument("rec policy got a non-rec context");
    RecMessage m = fn_(ctx);
    GenerationResult r;
    r.tokens = tokenize_rec(m);
    r.logps.assign(r.tokens.size(), 0.0);
    r.decoded = std::move(m);
    return r;
}

std::vector<double> ScriptedRecPolicy::logprob(const Context& ctx, const TokenSeq& tokens) {
    return point_mass_logps(tokenize_rec(fn_(ctx)), tokens);
}

GenerationResult ScriptedUserPolicy::generate(const Context& ctx, std::mt19937_64&) {
    if (ctx.role != Role::user) throw std::invalid_argument("user policy got a non-user context");
    UserMessage m = fn_(ctx);
    auto problems = validate_user_message(m);
    if (!problems.empty()) throw std::invalid_argument("scripted user message: " + problems.front());
    GenerationResult r;
    r.tokens = tokenize_user(m);
    r.logps.assign(r.tokens.size(), 0.0);
    r.decoded = std::move(m);
    return r;
}

std::vector<double> ScriptedUserPolicy::logprob(const Context& ctx, const TokenSeq& tokens) {
    return point_mass_logps(tokenize_user(fn_(ctx)), tokens);
}

}  // namespace coars
