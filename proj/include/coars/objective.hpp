#pragma once

#include <optional>
#include <span>
#include <vector>

#include "coars/reference.hpp"
#include "coars/rewards.hpp"
#include "coars/toy_policy.hpp"

namespace coars {

struct ObjectiveConfig {
    double lambda_sd = 0.1;     // weight of the token-credit term
    double adv_clip = 1.0;
    double reward_scale = 1.0;  // 0 removes the interaction-reward term (ablations)
};

// One policy generation at one turn, with everything frozen at collection
// time. student_logps/teacher_logps are per token on the sampled sequence;
// the teacher scored the same tokens under the reference-augmented context.
struct TurnSample {
    Role role = Role::rec;
    int episode = 0;
    Context ctx;
    TokenSeq tokens;
    std::vector<double> student_logps;
    std::vector<double> teacher_logps;
    RewardBreakdown reward;
    std::optional<DiagnosticReference> ref;  // for rebuilding the teacher context
};

struct TrainingBatch {
    Role role = Role::rec;
    std::vector<TurnSample> samples;  // training-eligible turns only
    int episodes = 0;                 // episodes collected, the outer divisor
    std::size_t excluded = 0;         // turns dropped by the eligibility rule
};

// Keeps eligible samples of the given role; counts the dropped ones.
TrainingBatch build_batch(Role role, std::vector<TurnSample> samples, int episodes);

// Frozen per-token weights (R + lambda * A_n) / |y| for one turn. A_n is the
// clipped teacher/student log-prob gap; R picks rec_reward or user_reward by
// role. Throws if the sample is not training-eligible.
std::vector<double> turn_token_weights(const TurnSample& s, const ObjectiveConfig& cfg);

// J = (1/episodes) * sum over turns of sum_n weight_n * log pi(y_n | ctx),
// evaluated under the policy's current parameters with the weights frozen.
double objective_value(const TrainingBatch& b, ToyPolicy& policy, const ObjectiveConfig& cfg);

// Exact dJ/dW, same layout as ToyPolicy::weights().
std::vector<double> policy_gradient(const TrainingBatch& b, const ToyPolicy& policy,
                                    const ObjectiveConfig& cfg);

// KL(p || q) over aligned supports; 0*log0 = 0, p>0 with q=0 gives +inf.
double kl_divergence(std::span<const double> p, std::span<const double> q);

// Variant: instead of per-token credit, match the teacher's full step
// distributions. Loss = (1/episodes) * sum over turns of the step-mean
// KL(teacher || student); the combined ascent direction is the reward-only
// policy gradient minus lambda times the loss gradient.
double direct_sd_loss(const TrainingBatch& b, const ToyPolicy& student, const ToyPolicy& teacher);
std::vector<double> policy_gradient_direct(const TrainingBatch& b, const ToyPolicy& student,
                                           const ToyPolicy& teacher, const ObjectiveConfig& cfg);

enum class TeacherMode { fixed, ema };
std::optional<TeacherMode> teacher_mode_from_name(const std::string& name);
const char* teacher_mode_name(TeacherMode m);

// teacher <- (1 - rho) * teacher + rho * student, elementwise on weights.
void update_teacher(ToyPolicy& teacher, const ToyPolicy& student, double rho);

}  // namespace coars
