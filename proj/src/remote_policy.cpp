#include "coars/remote_policy.hpp"

#include <chrono>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "coars/prompt.hpp"

namespace coars {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Value of the first "Label: ..." line, if present.
std::optional<std::string> labelled_line(const std::string& text, const std::string& label) {
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string line = trim(text.substr(pos, eol - pos));
        if (line.rfind(label, 0) == 0) return trim(line.substr(label.size()));
        pos = eol + 1;
    }
    return std::nullopt;
}

}  // namespace

RecMessage parse_rec_output(const std::string& text) {
    auto item = labelled_line(text, "Item:");
    if (!item || item->empty()) throw BackendError("completion lacks an 'Item:' line");
    RecMessage m;
    m.item = *item;
    if (auto reason = labelled_line(text, "Reason:")) m.rationale = *reason;
    return m;
}

UserMessage parse_user_output(const std::string& text) {
    auto decision = labelled_line(text, "Decision:");
    auto strength = labelled_line(text, "Strength:");
    if (!decision) throw BackendError("completion lacks a 'Decision:' line");
    if (!strength) throw BackendError("completion lacks a 'Strength:' line");
    auto action = action_from_name(*decision);
    if (!action) throw BackendError("unknown decision '" + *decision + "'");
    UserMessage m;
    m.action = *action;
    try {
        std::size_t used = 0;
        m.score = std::stod(*strength, &used);
        if (used != strength->size()) throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
        throw BackendError("bad strength '" + *strength + "'");
    }
    if (auto reason = labelled_line(text, "Reason:")) m.rationale = *reason;
    auto problems = validate_user_message(m);
    if (!problems.empty()) throw BackendError("remote user message: " + problems.front());
    return m;
}

struct RemotePolicy::Impl {
    httplib::Client client;
    explicit Impl(const RemoteConfig& cfg) : client(cfg.host, cfg.port) {
        client.set_connection_timeout(0, cfg.timeout_ms * 1000);
        client.set_read_timeout(cfg.timeout_ms / 1000, (cfg.timeout_ms % 1000) * 1000);
    }
};

RemotePolicy::RemotePolicy(Role role, RemoteConfig cfg)
    : role_(role), cfg_(std::move(cfg)), impl_(std::make_unique<Impl>(cfg_)) {}

RemotePolicy::~RemotePolicy() = default;

void RemotePolicy::check_health() {
    auto res = impl_->client.Get("/v1/health");
    if (!res) throw TransportError("health check failed: " + cfg_.host + ":" +
                                       std::to_string(cfg_.port),
                                   1);
    if (res->status != 200) throw BackendError("health returned HTTP " + std::to_string(res->status));
    auto j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded() || j.value("protocol", "") != "coars/1")
        throw BackendError("server does not speak coars/1");
}

namespace {

nlohmann::json post_json(httplib::Client& client, const std::string& path,
                         const nlohmann::json& body, int retries) {
    std::string payload = body.dump();
    int attempts = 0;
    for (;;) {
        ++attempts;
        auto res = client.Post(path, payload, "application/json");
        if (res && res->status == 200) {
            auto j = nlohmann::json::parse(res->body, nullptr, false);
            if (j.is_discarded()) throw BackendError("malformed JSON from " + path);
            return j;
        }
        if (res && res->status >= 400 && res->status < 500)
            throw BackendError(path + " returned HTTP " + std::to_string(res->status) + ": " +
                               res->body);
        if (attempts > retries)
            throw TransportError(path + " unreachable after " + std::to_string(attempts) +
                                     " attempts",
                                 attempts);
        std::this_thread::sleep_for(std::chrono::milliseconds(50 * attempts));
    }
}

}  // namespace

GenerationResult RemotePolicy::generate(const Context& ctx, std::mt19937_64& rng) {
    if (ctx.role != role_) throw std::invalid_argument("context role does not match policy role");
    nlohmann::json req{{"role", role_name(role_)},
                       {"prompt", render_prompt(ctx)},
                       {"max_tokens", cfg_.max_tokens},
                       {"temperature", cfg_.temperature},
                       {"seed", rng()}};
    nlohmann::json res = post_json(impl_->client, "/v1/generate", req, cfg_.retries);
    if (!res.contains("tokens") || !res.contains("token_logprobs") || !res.contains("text"))
        throw BackendError("generate response missing tokens/token_logprobs/text");

    GenerationResult out;
    out.tokens.text = res["tokens"].get<std::vector<std::string>>();
    out.logps = res["token_logprobs"].get<std::vector<double>>();
    if (out.tokens.text.size() != out.logps.size())
        throw BackendError("tokens and token_logprobs lengths differ");
    const std::string text = res["text"].get<std::string>();
    if (role_ == Role::rec)
        out.decoded = parse_rec_output(text);
    else
        out.decoded = parse_user_output(text);
    return out;
}

std::vector<double> RemotePolicy::logprob(const Context& ctx, const TokenSeq& tokens) {
    nlohmann::json req{{"role", role_name(role_)},
                       {"prompt", render_prompt(ctx)},
                       {"tokens", tokens.text}};
    nlohmann::json res = post_json(impl_->client, "/v1/score", req, cfg_.retries);
    if (!res.contains("token_logprobs")) throw BackendError("score response missing token_logprobs");
    auto out = res["token_logprobs"].get<std::vector<double>>();
    if (out.size() != tokens.text.size())
        throw BackendError("score returned " + std::to_string(out.size()) + " logprobs for " +
                           std::to_string(tokens.text.size()) + " tokens");
    return out;
}

}  // namespace coars
