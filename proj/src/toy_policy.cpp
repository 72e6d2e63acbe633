#include "coars/toy_policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "coars/rng.hpp"

namespace coars {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double cosine(std::span<const double> a, std::span<const double> b) {
    double na = std::sqrt(dot(a, a)), nb = std::sqrt(dot(b, b));
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(a, b) / (na * nb);
}

}  // namespace

ToyPolicy::ToyPolicy(Role role, TokenCodec codec, const EmbeddingTable* emb, ToyPolicyConfig cfg)
    : role_(role), codec_(std::move(codec)), emb_(emb), cfg_(cfg) {
    w_.assign(static_cast<std::size_t>(kFeatures) * codec_.vocab_size(), 0.0);
    for (int v = 0; v < codec_.vocab_size(); ++v)
        w_[2 * static_cast<std::size_t>(codec_.vocab_size()) + v] = cfg_.ref_follow_init;
}

void ToyPolicy::features(const Context& ctx, int step_index, int token, double* out) const {
    std::fill(out, out + kFeatures, 0.0);
    out[0] = 1.0;
    out[1] = ctx.reference ? 1.0 : 0.0;

    if (ctx.reference) {
        int target = -1;
        const DiagnosticReference& ref = *ctx.reference;
        try {
            if (role_ == Role::rec) {
                target = codec_.item_token(ref.corrected_rec.item);
            } else if (step_index == 0) {
                target = codec_.action_token(ref.corrected_user.action);
            } else {
                target = codec_.bucket_token(
                    codec_.score_bucket(ref.corrected_user.action, ref.corrected_user.score));
            }
        } catch (const std::out_of_range&) {
            target = -1;  // reference talks about an item outside this vocabulary
        }
        if (token == target) out[2] = 1.0;
    }

    out[3] = static_cast<double>(ctx.memory.size()) / 4.0;
    if (!ctx.memory.empty()) {
        const UserMessage& last = ctx.memory.records.back().second;
        out[4] = last.score;
        out[5] = is_accept(last.action) ? 1.0 : 0.0;
    }

    const ItemId* item = nullptr;
    if (codec_.is_item(token)) {
        item = &codec_.item_of(token);
    } else if (ctx.rec) {
        item = &ctx.rec->item;
    }
    if (item) {
        double decay = 1.0, rec_sum = 0.0;
        for (auto it = ctx.history.events.rbegin(); it != ctx.history.events.rend(); ++it) {
            if (it->first == *item) rec_sum += decay;
            decay *= cfg_.recency_decay;
        }
        out[6] = rec_sum;
        if (emb_ && emb_->dim > 0) {
            if (auto ii = emb_->item_index(*item)) {
                std::span<const double> uv;
                if (auto ui = emb_->user_index(ctx.history.user))
                    uv = emb_->user_vec(*ui);
                else
                    uv = {emb_->mean_user.data(), emb_->mean_user.size()};
                out[7] = cosine(uv, emb_->item_vec(*ii));
            }
        }
    }

    if (ctx.peer) out[8] = ctx.peer->similarity;
}

std::vector<ToyPolicy::Step> ToyPolicy::plan_steps(const Context& ctx,
                                                   std::span<const int> chosen) const {
    std::vector<Step> steps;
    if (role_ == Role::rec) {
        if (ctx.candidates.empty()) throw std::invalid_argument("rec step with no candidates");
        Step s;
        for (const ItemId& c : ctx.candidates) s.support.push_back(codec_.item_token(c));
        steps.push_back(std::move(s));
        return steps;
    }

    Step actions;
    if (ctx.allowed_actions) {
        if (ctx.allowed_actions->empty())
            throw std::invalid_argument("allowed_actions must not be empty");
        for (Action a : *ctx.allowed_actions) actions.support.push_back(codec_.action_token(a));
    } else {
        for (int a = 0; a < 4; ++a)
            actions.support.push_back(codec_.action_token(static_cast<Action>(a)));
    }
    steps.push_back(std::move(actions));

    if (!chosen.empty()) {
        if (!codec_.is_action(chosen[0]))
            throw std::invalid_argument("user step 0 token is not an action");
        auto [lo, hi] = TokenCodec::action_buckets(codec_.action_of(chosen[0]));
        Step buckets;
        for (int b = lo; b <= hi; ++b) buckets.support.push_back(codec_.bucket_token(b));
        steps.push_back(std::move(buckets));
    }
    return steps;
}

void ToyPolicy::step_probs(const Context& ctx, int step_index, const std::vector<int>& support,
                           std::vector<double>& softmax_q, std::vector<double>& mixed) const {
    const int V = codec_.vocab_size();
    softmax_q.resize(support.size());
    double feats[kFeatures];
    for (std::size_t i = 0; i < support.size(); ++i) {
        features(ctx, step_index, support[i], feats);
        double acc = 0.0;
        for (int f = 0; f < kFeatures; ++f)
            acc += feats[f] * w_[static_cast<std::size_t>(f) * V + support[i]];
        softmax_q[i] = acc;
    }
    double zmax = *std::max_element(softmax_q.begin(), softmax_q.end());
    double sum = 0.0;
    for (double& x : softmax_q) {
        x = std::exp(x - zmax);
        sum += x;
    }
    for (double& x : softmax_q) x /= sum;

    mixed = softmax_q;
    const double e = cfg_.explore;
    if (e > 0.0) {
        const double floor = e / static_cast<double>(support.size());
        for (double& x : mixed) x = (1.0 - e) * x + floor;
    }
}

std::vector<double> ToyPolicy::masked_probs(const Context& ctx, int step_index,
                                            const std::vector<int>& support) const {
    std::vector<double> q, p;
    step_probs(ctx, step_index, support, q, p);
    return p;
}

GenerationResult ToyPolicy::generate(const Context& ctx, std::mt19937_64& rng) {
    if (ctx.role != role_) throw std::invalid_argument("context role does not match policy role");
    GenerationResult out;
    std::vector<int> chosen;
    int n_steps = role_ == Role::rec ? 1 : 2;
    for (int s = 0; s < n_steps; ++s) {
        auto steps = plan_steps(ctx, chosen);
        const Step& step = steps.at(s);
        auto probs = masked_probs(ctx, s, step.support);
        double r = canonical_unit(rng), cum = 0.0;
        std::size_t pick = probs.size() - 1;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            cum += probs[i];
            if (r < cum) {
                pick = i;
                break;
            }
        }
        chosen.push_back(step.support[pick]);
        out.logps.push_back(std::log(probs[pick]));
    }
    out.tokens.ids = chosen;
    for (int t : chosen) out.tokens.text.push_back(codec_.token_text(t));
    if (role_ == Role::rec)
        out.decoded = codec_.decode_rec(chosen);
    else
        out.decoded = codec_.decode_user(chosen);
    return out;
}

std::vector<double> ToyPolicy::logprob(const Context& ctx, const TokenSeq& tokens) {
    std::vector<int> ids = tokens.ids;
    if (ids.empty())
        for (const std::string& t : tokens.text) ids.push_back(codec_.token_from_text(t));
    auto steps = plan_steps(ctx, ids);
    if (ids.size() != steps.size())
        throw std::invalid_argument("token count does not match the role's step count");
    std::vector<double> out(ids.size());
    for (std::size_t s = 0; s < steps.size(); ++s) {
        auto probs = masked_probs(ctx, static_cast<int>(s), steps[s].support);
        auto it = std::find(steps[s].support.begin(), steps[s].support.end(), ids[s]);
        if (it == steps[s].support.end()) {
            out[s] = -std::numeric_limits<double>::infinity();
        } else {
            out[s] = std::log(probs[it - steps[s].support.begin()]);
        }
    }
    return out;
}

std::vector<ToyPolicy::StepDist> ToyPolicy::step_distributions(const Context& ctx,
                                                               const TokenSeq& tokens) const {
    std::vector<int> ids = tokens.ids;
    if (ids.empty())
        for (const std::string& t : tokens.text) ids.push_back(codec_.token_from_text(t));
    auto steps = plan_steps(ctx, ids);
    std::vector<StepDist> out;
    for (std::size_t s = 0; s < steps.size(); ++s)
        out.push_back({steps[s].support, masked_probs(ctx, static_cast<int>(s), steps[s].support)});
    return out;
}

void ToyPolicy::accumulate_logprob_grad(const Context& ctx, const TokenSeq& tokens,
                                        std::span<const double> step_coefs,
                                        std::vector<double>& grad) const {
    const int V = codec_.vocab_size();
    if (grad.size() != w_.size()) throw std::invalid_argument("gradient buffer has wrong size");
    std::vector<int> ids = tokens.ids;
    if (ids.empty())
        for (const std::string& t : tokens.text) ids.push_back(codec_.token_from_text(t));
    auto steps = plan_steps(ctx, ids);
    if (step_coefs.size() != steps.size())
        throw std::invalid_argument("one coefficient per step required");
    double feats[kFeatures];
    std::vector<double> q, p;
    for (std::size_t s = 0; s < steps.size(); ++s) {
        step_probs(ctx, static_cast<int>(s), steps[s].support, q, p);
        auto it = std::find(steps[s].support.begin(), steps[s].support.end(), ids[s]);
        if (it == steps[s].support.end())
            throw std::invalid_argument("token outside the step mask has no gradient");
        std::size_t c = static_cast<std::size_t>(it - steps[s].support.begin());
        // d log p_mix(c) / d z_v = (1-e) q_c (delta_vc - q_v) / p_mix(c)
        double rho = (1.0 - cfg_.explore) * q[c] / p[c];
        for (std::size_t i = 0; i < steps[s].support.size(); ++i) {
            int v = steps[s].support[i];
            double d = rho * ((c == i ? 1.0 : 0.0) - q[i]);
            features(ctx, static_cast<int>(s), v, feats);
            for (int f = 0; f < kFeatures; ++f)
                grad[static_cast<std::size_t>(f) * V + v] += step_coefs[s] * feats[f] * d;
        }
    }
}

void ToyPolicy::accumulate_cross_entropy_grad(const Context& ctx, const TokenSeq& tokens,
                                              const std::vector<StepDist>& teacher, double coef,
                                              std::vector<double>& grad) const {
    const int V = codec_.vocab_size();
    if (grad.size() != w_.size()) throw std::invalid_argument("gradient buffer has wrong size");
    std::vector<int> ids = tokens.ids;
    if (ids.empty())
        for (const std::string& t : tokens.text) ids.push_back(codec_.token_from_text(t));
    auto steps = plan_steps(ctx, ids);
    if (steps.size() != teacher.size())
        throw std::invalid_argument("teacher/student step count mismatch");
    double feats[kFeatures];
    std::vector<double> q, p;
    for (std::size_t s = 0; s < steps.size(); ++s) {
        if (steps[s].support != teacher[s].support)
            throw std::invalid_argument("teacher/student supports differ at step " +
                                        std::to_string(s));
        step_probs(ctx, static_cast<int>(s), steps[s].support, q, p);
        // d sum_v' T(v') log p_mix(v') / d z_v, with rho_v = (1-e) q_v / p_mix(v):
        //   T(v) rho_v - q_v * sum_v' T(v') rho_v'
        double tr = 0.0;
        const auto& T = teacher[s].probs;
        for (std::size_t i = 0; i < q.size(); ++i)
            tr += T[i] * (1.0 - cfg_.explore) * q[i] / p[i];
        for (std::size_t i = 0; i < steps[s].support.size(); ++i) {
            int v = steps[s].support[i];
            double rho = (1.0 - cfg_.explore) * q[i] / p[i];
            double d = T[i] * rho - q[i] * tr;
            features(ctx, static_cast<int>(s), v, feats);
            for (int f = 0; f < kFeatures; ++f)
                grad[static_cast<std::size_t>(f) * V + v] += coef * feats[f] * d;
        }
    }
}

std::vector<double> ToyPolicy::full_step_distribution(const Context& ctx, int step,
                                                      std::span<const int> prefix) const {
    const int V = codec_.vocab_size();
    std::vector<int> all(V);
    for (int v = 0; v < V; ++v) all[v] = v;
    (void)prefix;  // masks do not apply here; the step index still selects features
    return masked_probs(ctx, step, all);
}

void save_toy_policy(const ToyPolicy& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "toy-policy " << role_name(p.role()) << "\n";
    out << "recency_decay " << p.config().recency_decay << "\n";
    out << "explore " << p.config().explore << "\n";
    out << "items " << p.codec().n_items() << "\n";
    for (int i = 0; i < p.codec().n_items(); ++i) out << p.codec().item_of(i) << "\n";
    out << "weights " << p.weights().size() << "\n";
    char buf[32];
    for (double w : p.weights()) {
        std::snprintf(buf, sizeof buf, "%.17g", w);
        out << buf << "\n";
    }
}

ToyPolicy load_toy_policy(const std::string& path, const EmbeddingTable* emb) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open policy file: " + path);
    std::string magic, role_str;
    if (!(in >> magic >> role_str) || magic != "toy-policy")
        throw DataError("not a toy-policy file: " + path);
    Role role;
    if (role_str == "rec")
        role = Role::rec;
    else if (role_str == "user")
        role = Role::user;
    else
        throw DataError("bad role in " + path);

    std::string key;
    ToyPolicyConfig cfg;
    if (!(in >> key >> cfg.recency_decay) || key != "recency_decay")
        throw DataError("missing recency_decay in " + path);
    if (!(in >> key >> cfg.explore) || key != "explore")
        throw DataError("missing explore in " + path);
    int n_items = 0;
    if (!(in >> key >> n_items) || key != "items" || n_items <= 0)
        throw DataError("missing item list in " + path);
    std::vector<ItemId> items(n_items);
    for (ItemId& it : items)
        if (!(in >> it)) throw DataError("truncated item list in " + path);

    std::size_t n_weights = 0;
    if (!(in >> key >> n_weights) || key != "weights")
        throw DataError("missing weights in " + path);
    ToyPolicy p(role, TokenCodec(std::move(items)), emb, cfg);
    if (n_weights != p.weights().size())
        throw DataError("weight count does not match vocabulary in " + path);
    for (double& w : p.weights())
        if (!(in >> w)) throw DataError("truncated weights in " + path);
    return p;
}

}  // namespace coars
