#pragma once

#include <cstdint>
#include <string>

#include "coars/remote_policy.hpp"
#include "coars/train.hpp"

namespace coars {

// Flat key=value run configuration. Every tunable has a key; files and
// --set overrides go through the same table, and unknown keys are errors.
struct RunConfig {
    // world
    int mf_dim = 16;
    int mf_epochs = 30;
    double mf_lr = 0.05;
    std::uint64_t mf_seed = 1;
    int candidate_k = 20;
    int holdout_mod = 5;
    // episodes
    int max_turns = 3;
    // rewards
    double alpha = 0.1;
    double depth_base = 1.2;
    // objectives / training
    double lambda_rec = 0.1;
    double lambda_user = 0.1;
    double adv_clip = 1.0;
    int epochs = 200;
    double step_size = 1.0;
    std::uint64_t seed = 7;
    int threads = 1;
    std::string teacher_mode = "fixed";
    double ema_rho = 0.05;
    bool direct_sd = false;
    int eval_every = 0;
    // remote backends
    std::string remote_host = "127.0.0.1";
    int remote_port = 8000;
    double temperature = 0.7;
    int max_tokens = 64;
    int retries = 3;
    int timeout_ms = 5000;
};

// Throws std::invalid_argument for unknown keys or unparsable values.
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

// key=value lines, '#' comments. Throws DataError with the line number.
RunConfig load_config(const std::string& path);

// Every key in table order; load(dump(cfg)) == cfg byte for byte.
std::string dump_config(const RunConfig& cfg);

WorldConfig to_world_config(const RunConfig& cfg);
TrainConfig to_train_config(const RunConfig& cfg);  // validates teacher_mode
RemoteConfig to_remote_config(const RunConfig& cfg);

}  // namespace coars
