#include "coars/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <variant>
#include <vector>

namespace coars {

namespace {

using Field = std::variant<int RunConfig::*, double RunConfig::*, bool RunConfig::*,
                           std::uint64_t RunConfig::*, std::string RunConfig::*>;

struct Entry {
    const char* key;
    Field field;
};

const std::vector<Entry>& table() {
    static const std::vector<Entry> t = {
        {"mf_dim", &RunConfig::mf_dim},
        {"mf_epochs", &RunConfig::mf_epochs},
        {"mf_lr", &RunConfig::mf_lr},
        {"mf_seed", &RunConfig::mf_seed},
        {"candidate_k", &RunConfig::candidate_k},
        {"holdout_mod", &RunConfig::holdout_mod},
        {"max_turns", &RunConfig::max_turns},
        {"alpha", &RunConfig::alpha},
        {"depth_base", &RunConfig::depth_base},
        {"lambda_rec", &RunConfig::lambda_rec},
        {"lambda_user", &RunConfig::lambda_user},
        {"adv_clip", &RunConfig::adv_clip},
        {"epochs", &RunConfig::epochs},
        {"step_size", &RunConfig::step_size},
        {"seed", &RunConfig::seed},
        {"threads", &RunConfig::threads},
        {"teacher_mode", &RunConfig::teacher_mode},
        {"ema_rho", &RunConfig::ema_rho},
        {"direct_sd", &RunConfig::direct_sd},
        {"eval_every", &RunConfig::eval_every},
        {"remote_host", &RunConfig::remote_host},
        {"remote_port", &RunConfig::remote_port},
        {"temperature", &RunConfig::temperature},
        {"max_tokens", &RunConfig::max_tokens},
        {"retries", &RunConfig::retries},
        {"timeout_ms", &RunConfig::timeout_ms},
    };
    return t;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Setter {
    RunConfig& cfg;
    const std::string& value;
    const std::string& key;

    [[noreturn]] void bad() const {
        throw std::invalid_argument("bad value '" + value + "' for key '" + key + "'");
    }
    void operator()(int RunConfig::* m) const {
        int v = 0;
        auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
        if (ec != std::errc{} || p != value.data() + value.size()) bad();
        cfg.*m = v;
    }
    void operator()(std::uint64_t RunConfig::* m) const {
        std::uint64_t v = 0;
        auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
        if (ec != std::errc{} || p != value.data() + value.size()) bad();
        cfg.*m = v;
    }
    void operator()(double RunConfig::* m) const {
        try {
            std::size_t used = 0;
            double v = std::stod(value, &used);
            if (used != value.size()) bad();
            cfg.*m = v;
        } catch (const std::invalid_argument&) {
            bad();
        } catch (const std::out_of_range&) {
            bad();
        }
    }
    void operator()(bool RunConfig::* m) const {
        if (value == "true" || value == "1")
            cfg.*m = true;
        else if (value == "false" || value == "0")
            cfg.*m = false;
        else
            bad();
    }
    void operator()(std::string RunConfig::* m) const { cfg.*m = value; }
};

struct Getter {
    const RunConfig& cfg;
    std::string operator()(int RunConfig::* m) const { return std::to_string(cfg.*m); }
    std::string operator()(std::uint64_t RunConfig::* m) const { return std::to_string(cfg.*m); }
    std::string operator()(double RunConfig::* m) const { return format_double(cfg.*m); }
    std::string operator()(bool RunConfig::* m) const { return cfg.*m ? "true" : "false"; }
    std::string operator()(std::string RunConfig::* m) const { return cfg.*m; }
};

}  // namespace

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
    for (const Entry& e : table()) {
        if (key == e.key) {
            std::visit(Setter{cfg, value, key}, e.field);
            return;
        }
    }
    throw std::invalid_argument("unknown config key '" + key + "'");
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path);
    RunConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw DataError("config line " + std::to_string(lineno) + ": expected key=value");
        try {
            apply_override(cfg, line.substr(0, eq), line.substr(eq + 1));
        } catch (const std::invalid_argument& e) {
            throw DataError("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

std::string dump_config(const RunConfig& cfg) {
    std::ostringstream out;
    for (const Entry& e : table()) out << e.key << '=' << std::visit(Getter{cfg}, e.field) << '\n';
    return out.str();
}

WorldConfig to_world_config(const RunConfig& cfg) {
    WorldConfig w;
    w.mf_dim = cfg.mf_dim;
    w.mf_epochs = cfg.mf_epochs;
    w.mf_lr = cfg.mf_lr;
    w.mf_seed = cfg.mf_seed;
    w.candidate_k = cfg.candidate_k;
    w.holdout_mod = cfg.holdout_mod;
    return w;
}

TrainConfig to_train_config(const RunConfig& cfg) {
    TrainConfig t;
    t.epochs = cfg.epochs;
    t.step_size = cfg.step_size;
    t.lambda_rec = cfg.lambda_rec;
    t.lambda_user = cfg.lambda_user;
    t.adv_clip = cfg.adv_clip;
    t.rewards.alpha = cfg.alpha;
    t.rewards.depth_base = cfg.depth_base;
    t.max_turns = cfg.max_turns;
    auto mode = teacher_mode_from_name(cfg.teacher_mode);
    if (!mode) throw std::invalid_argument("teacher_mode must be 'fixed' or 'ema'");
    t.teacher_mode = *mode;
    t.ema_rho = cfg.ema_rho;
    t.direct_sd = cfg.direct_sd;
    t.seed = cfg.seed;
    t.threads = cfg.threads;
    t.eval_every = cfg.eval_every;
    return t;
}

RemoteConfig to_remote_config(const RunConfig& cfg) {
    RemoteConfig r;
    r.host = cfg.remote_host;
    r.port = cfg.remote_port;
    r.max_tokens = cfg.max_tokens;
    r.temperature = cfg.temperature;
    r.retries = cfg.retries;
    r.timeout_ms = cfg.timeout_ms;
    return r;
}

}  // namespace coars
