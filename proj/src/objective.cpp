#include "coars/objective.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "coars/distill.hpp"

namespace coars {

TrainingBatch build_batch(Role role, std::vector<TurnSample> samples, int episodes) {
    TrainingBatch b;
    b.role = role;
    b.episodes = episodes;
    for (TurnSample& s : samples) {
        if (s.role != role) continue;
        if (!s.reward.rl_eligible) {
            ++b.excluded;
            continue;
        }
        b.samples.push_back(std::move(s));
    }
    return b;
}

std::vector<double> turn_token_weights(const TurnSample& s, const ObjectiveConfig& cfg) {
    if (!s.reward.rl_eligible)
        throw std::invalid_argument("turn is excluded from training; no weights");
    if (s.teacher_logps.size() != s.student_logps.size() ||
        s.student_logps.size() != s.tokens.size())
        throw std::invalid_argument("per-token vectors out of step with the token sequence");
    const double r = cfg.reward_scale *
                     (s.role == Role::rec ? s.reward.rec_reward : s.reward.user_reward);
    auto adv = token_advantages(s.teacher_logps, s.student_logps, cfg.adv_clip);
    std::vector<double> w(adv.size());
    const double inv_len = 1.0 / static_cast<double>(adv.size());
    for (std::size_t n = 0; n < adv.size(); ++n)
        w[n] = (r + cfg.lambda_sd * adv[n]) * inv_len;
    return w;
}

double objective_value(const TrainingBatch& b, ToyPolicy& policy, const ObjectiveConfig& cfg) {
    if (b.episodes <= 0) throw std::invalid_argument("batch has no episodes");
    double acc = 0.0;
    for (const TurnSample& s : b.samples) {
        if (s.role != policy.role())
            throw std::invalid_argument("sample role does not match the policy");
        auto w = turn_token_weights(s, cfg);
        auto logps = policy.logprob(s.ctx, s.tokens);
        for (std::size_t n = 0; n < w.size(); ++n) acc += w[n] * logps[n];
    }
    return acc / b.episodes;
}

std::vector<double> policy_gradient(const TrainingBatch& b, const ToyPolicy& policy,
                                    const ObjectiveConfig& cfg) {
    if (b.episodes <= 0) throw std::invalid_argument("batch has no episodes");
    std::vector<double> grad(policy.weights().size(), 0.0);
    for (const TurnSample& s : b.samples) {
        if (s.role != policy.role())
            throw std::invalid_argument("sample role does not match the policy");
        auto w = turn_token_weights(s, cfg);
        policy.accumulate_logprob_grad(s.ctx, s.tokens, w, grad);
    }
    for (double& g : grad) g /= b.episodes;
    return grad;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("distribution sizes differ");
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
        acc += p[i] * std::log(p[i] / q[i]);
    }
    return acc < 0.0 && acc > -1e-12 ? 0.0 : acc;  // absorb accumulation rounding
}

namespace {

Context teacher_context_of(const TurnSample& s) {
    if (!s.ref) throw std::invalid_argument("sample carries no reference for the teacher");
    return assemble_teacher_context(s.ctx, *s.ref);
}

}  // namespace

double direct_sd_loss(const TrainingBatch& b, const ToyPolicy& student, const ToyPolicy& teacher) {
    if (b.episodes <= 0) throw std::invalid_argument("batch has no episodes");
    double acc = 0.0;
    for (const TurnSample& s : b.samples) {
        if (!s.reward.rl_eligible) throw std::invalid_argument("excluded turn in batch");
        auto t_dists = teacher.step_distributions(teacher_context_of(s), s.tokens);
        auto s_dists = student.step_distributions(s.ctx, s.tokens);
        double turn = 0.0;
        for (std::size_t k = 0; k < t_dists.size(); ++k)
            turn += kl_divergence(t_dists[k].probs, s_dists[k].probs);
        acc += turn / static_cast<double>(t_dists.size());
    }
    return acc / b.episodes;
}

std::vector<double> policy_gradient_direct(const TrainingBatch& b, const ToyPolicy& student,
                                           const ToyPolicy& teacher, const ObjectiveConfig& cfg) {
    if (b.episodes <= 0) throw std::invalid_argument("batch has no episodes");
    std::vector<double> grad(student.weights().size(), 0.0);
    ObjectiveConfig reward_only = cfg;
    reward_only.lambda_sd = 0.0;
    for (const TurnSample& s : b.samples) {
        auto w = turn_token_weights(s, reward_only);
        student.accumulate_logprob_grad(s.ctx, s.tokens, w, grad);
        auto t_dists = teacher.step_distributions(teacher_context_of(s), s.tokens);
        // descending on KL(T||S) equals ascending on sum_v T log S
        student.accumulate_cross_entropy_grad(s.ctx, s.tokens, t_dists,
                                              cfg.lambda_sd / static_cast<double>(s.tokens.size()),
                                              grad);
    }
    for (double& g : grad) g /= b.episodes;
    return grad;
}

std::optional<TeacherMode> teacher_mode_from_name(const std::string& name) {
    if (name == "fixed") return TeacherMode::fixed;
    if (name == "ema") return TeacherMode::ema;
    return std::nullopt;
}

const char* teacher_mode_name(TeacherMode m) {
    return m == TeacherMode::fixed ? "fixed" : "ema";
}

void update_teacher(ToyPolicy& teacher, const ToyPolicy& student, double rho) {
    if (teacher.weights().size() != student.weights().size())
        throw std::invalid_argument("teacher/student parameter shapes differ");
    if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("rho must be in [0,1]");
    auto& tw = teacher.weights();
    const auto& sw = student.weights();
    for (std::size_t i = 0; i < tw.size(); ++i) tw[i] = (1.0 - rho) * tw[i] + rho * sw[i];
}

}  // namespace coars
