#pragma once

#include <string>

#include "coars/policies.hpp"

namespace coars {

// Client for policy servers speaking the coars/1 protocol:
//   GET  /v1/health            -> {"protocol": "coars/1"}
//   POST /v1/generate          {role, prompt, max_tokens, temperature, seed}
//                              -> {tokens: [string], token_logprobs: [number], text}
//   POST /v1/score             {role, prompt, tokens} -> {token_logprobs}
struct RemoteConfig {
    std::string host = "127.0.0.1";
    int port = 8000;
    int max_tokens = 64;
    double temperature = 0.7;
    int retries = 3;
    int timeout_ms = 5000;
};

class RemotePolicy : public PolicyBackend {
public:
    RemotePolicy(Role role, RemoteConfig cfg);
    ~RemotePolicy() override;

    // Throws TransportError if unreachable, BackendError on a wrong protocol.
    void check_health();

    GenerationResult generate(const Context& ctx, std::mt19937_64& rng) override;
    std::vector<double> logprob(const Context& ctx, const TokenSeq& tokens) override;

private:
    struct Impl;
    Role role_;
    RemoteConfig cfg_;
    std::unique_ptr<Impl> impl_;
};

// Completion-text parsing for the two output formats. Throw BackendError
// when the required lines are missing or malformed.
RecMessage parse_rec_output(const std::string& text);
UserMessage parse_user_output(const std::string& text);

}  // namespace coars
