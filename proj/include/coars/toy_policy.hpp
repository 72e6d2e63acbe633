#pragma once

#include <span>

#include "coars/policies.hpp"
#include "coars/recsys.hpp"
#include "coars/token_codec.hpp"

namespace coars {

struct ToyPolicyConfig {
    // Initial weight on the follow-the-reference feature, so an untrained
    // policy already concentrates on the corrected tokens when conditioned on
    // a reference (this is what makes its teacher mode informative).
    double ref_follow_init = 3.0;
    double recency_decay = 0.8;
    // Uniform mixture floor on every step: p = (1-explore)*softmax + explore/K.
    // Keeps both sides exploring after the softmax saturates, so the user
    // simulator never stops seeing wrong recommendations. Gradients are exact
    // for the mixture.
    double explore = 0.05;
};

// Linear-softmax policy over the discrete codec vocabulary. Each step scores
// every token v in the step's mask as z_v = sum_f phi_f(ctx, v) * W[f][v] and
// samples from the renormalized softmax. The recommender emits [item] masked
// to the candidate set; the user simulator emits [action, bucket], the bucket
// masked to the chosen action's range. All gradients are exact.
class ToyPolicy : public PolicyBackend {
public:
    static constexpr int kFeatures = 9;  // bias, ref_present, ref_target, mem_fill,
                                         // last_score, last_accept, recency, affinity, q

    ToyPolicy(Role role, TokenCodec codec, const EmbeddingTable* emb, ToyPolicyConfig cfg = {});

    GenerationResult generate(const Context& ctx, std::mt19937_64& rng) override;
    std::vector<double> logprob(const Context& ctx, const TokenSeq& tokens) override;

    Role role() const { return role_; }
    const TokenCodec& codec() const { return codec_; }
    int vocab() const { return codec_.vocab_size(); }
    std::vector<double>& weights() { return w_; }            // kFeatures * vocab, row-major
    const std::vector<double>& weights() const { return w_; }

    // Accumulates coef[n] * d(log pi(tokens[n] | ctx, prefix))/dW into grad
    // for every step n. grad has the same layout and length as weights().
    void accumulate_logprob_grad(const Context& ctx, const TokenSeq& tokens,
                                 std::span<const double> step_coefs,
                                 std::vector<double>& grad) const;

    struct StepDist {
        std::vector<int> support;   // token ids in mask order
        std::vector<double> probs;  // renormalized over the support
    };

    // Per-step masked distributions along the given token sequence (the
    // sequence only steers step masks, e.g. which bucket range applies).
    std::vector<StepDist> step_distributions(const Context& ctx, const TokenSeq& tokens) const;

    // Accumulates coef * d(sum_steps sum_v T(v) log S(v))/dW into grad, where
    // T is the matching teacher step distribution. Supports must agree.
    void accumulate_cross_entropy_grad(const Context& ctx, const TokenSeq& tokens,
                                       const std::vector<StepDist>& teacher, double coef,
                                       std::vector<double>& grad) const;

    // Softmax over the entire vocabulary with no mask, for sanity checks on a
    // fresh policy (uniform 1/vocab everywhere when weights are zero).
    std::vector<double> full_step_distribution(const Context& ctx, int step,
                                               std::span<const int> prefix) const;

    const ToyPolicyConfig& config() const { return cfg_; }

private:
    struct Step {
        std::vector<int> support;
    };
    std::vector<Step> plan_steps(const Context& ctx, std::span<const int> chosen) const;
    void features(const Context& ctx, int step_index, int token, double* out) const;
    // softmax_q: pure softmax; mixed: exploration mixture actually sampled
    void step_probs(const Context& ctx, int step_index, const std::vector<int>& support,
                    std::vector<double>& softmax_q, std::vector<double>& mixed) const;
    std::vector<double> masked_probs(const Context& ctx, int step_index,
                                     const std::vector<int>& support) const;

    Role role_;
    TokenCodec codec_;
    const EmbeddingTable* emb_;
    ToyPolicyConfig cfg_;
    std::vector<double> w_;
};

// Plain-text weight files so trained policies can move between subcommands.
void save_toy_policy(const ToyPolicy& p, const std::string& path);
ToyPolicy load_toy_policy(const std::string& path, const EmbeddingTable* emb);

}  // namespace coars
