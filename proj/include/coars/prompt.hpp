#pragma once

#include <string>

#include "coars/policies.hpp"
#include "coars/reference.hpp"

namespace coars {

// Text renderings used for remote backends and the replay view. A teacher
// prompt is the student prompt with the reference block appended, so the
// student text is always a prefix of the teacher text for the same context.
std::string render_prompt(const Context& ctx);
std::string render_reference_block(const DiagnosticReference& ref, Role role);

std::string render_message(const RecMessage& m);
std::string render_message(const UserMessage& m);
std::string render_diagnosis(const Diagnosis& d);

}  // namespace coars
