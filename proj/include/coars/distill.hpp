#pragma once

#include <random>
#include <vector>

#include "coars/policies.hpp"
#include "coars/reference.hpp"

namespace coars {

// Post-hoc turn labels against the ground truth. The user simulator is
// correct when its accept/reject direction matches whether the item was the
// ground truth.
Diagnosis diagnose(const InteractionTurn& turn, const ItemId& ground_truth);

// Builds the corrected trajectory for a turn: the recommender re-runs with
// the candidate set narrowed to the ground truth, the user simulator re-runs
// against the original recommendation with its actions restricted to the
// correct accept/reject side. Policies are consulted so corrections stay
// on-policy in style.
DiagnosticReference build_reference(const InteractionTurn& turn, const ItemId& ground_truth,
                                    PolicyBackend& rec_policy, PolicyBackend& user_policy,
                                    std::mt19937_64& rng);

// The teacher sees exactly the student's context plus the reference.
Context assemble_teacher_context(const Context& student_ctx, const DiagnosticReference& ref);

// Per-token credit: clip(teacher_logp - student_logp, -clip, +clip).
std::vector<double> token_advantages(const std::vector<double>& teacher_logps,
                                     const std::vector<double>& student_logps, double clip = 1.0);

std::string explain(const Diagnosis& d);

}  // namespace coars
