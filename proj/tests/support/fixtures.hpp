#pragma once
// Shared test scaffolding: tiny catalogs, scripted policies, temp files.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "coars/policies.hpp"
#include "coars/recsys.hpp"
#include "coars/token_codec.hpp"

namespace fixtures {

inline std::vector<coars::ItemId> abc() { return {"a", "b", "c"}; }

inline coars::TokenCodec tiny_codec() { return coars::TokenCodec(abc()); }

inline coars::UserHistory history(const std::string& user,
                                  const std::vector<coars::ItemId>& items) {
    coars::UserHistory h;
    h.user = user;
    std::int64_t ts = 100;
    for (const auto& it : items) h.events.emplace_back(it, ts += 10);
    return h;
}

inline coars::ScriptedRecPolicy rec_always(const coars::ItemId& item) {
    return coars::ScriptedRecPolicy([item](const coars::Context&) {
        coars::RecMessage m;
        m.item = item;
        m.rationale = "scripted";
        return m;
    });
}

// Recommends candidates in order, one per turn (turn 1 -> candidates[0], ...).
inline coars::ScriptedRecPolicy rec_in_order() {
    return coars::ScriptedRecPolicy([](const coars::Context& ctx) {
        coars::RecMessage m;
        m.item = ctx.candidates.front();
        m.rationale = "first remaining";
        return m;
    });
}

inline coars::UserMessage reply(coars::Action a, double s, const std::string& why = "scripted") {
    coars::UserMessage m;
    m.action = a;
    m.score = s;
    m.rationale = why;
    return m;
}

inline coars::ScriptedUserPolicy user_always(coars::Action a, double s) {
    return coars::ScriptedUserPolicy(
        [a, s](const coars::Context&) { return reply(a, s); });
}

// Accepts iff the recommended item equals `target`.
inline coars::ScriptedUserPolicy user_wants(const coars::ItemId& target) {
    return coars::ScriptedUserPolicy([target](const coars::Context& ctx) {
        return ctx.rec && ctx.rec->item == target ? reply(coars::Action::click, 0.9)
                                                  : reply(coars::Action::skip, 0.4);
    });
}

// Unique file path under the system temp dir; removed on destruction.
class TempFile {
public:
    explicit TempFile(const std::string& stem) {
        static std::mt19937_64 rng{std::random_device{}()};
        path_ = (std::filesystem::temp_directory_path() /
                 (stem + "." + std::to_string(rng()) + ".tmp"))
                    .string();
    }
    ~TempFile() {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }
    const std::string& path() const { return path_; }
    void write(const std::string& content) const {
        std::ofstream f(path_);
        f << content;
    }
    std::string read() const {
        std::ifstream f(path_);
        return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
    }

private:
    std::string path_;
};

// Small deterministic interaction log: 6 users over 6 items, enough for a
// chronological split and a low-dim factorization.
inline coars::InteractionLog small_log() {
    coars::InteractionLog log;
    const char* rows[][2] = {
        {"u1", "i1"}, {"u1", "i2"}, {"u1", "i3"}, {"u1", "i1"},
        {"u2", "i1"}, {"u2", "i3"}, {"u2", "i2"},
        {"u3", "i4"}, {"u3", "i5"}, {"u3", "i6"}, {"u3", "i4"},
        {"u4", "i5"}, {"u4", "i6"}, {"u4", "i5"},
        {"u5", "i2"}, {"u5", "i1"}, {"u5", "i3"},
        {"u6", "i6"}, {"u6", "i4"}, {"u6", "i6"},
    };
    std::int64_t ts = 0;
    std::string last_user;
    for (auto& r : rows) {
        if (r[0] != last_user) {
            ts = 1000;
            last_user = r[0];
        }
        log.add(r[0], r[1], ts += 10);
    }
    log.finalize();
    return log;
}

}  // namespace fixtures
