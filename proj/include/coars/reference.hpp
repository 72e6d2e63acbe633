#pragma once

#include <string>

#include "coars/domain.hpp"

namespace coars {

// Post-hoc judgement of one interaction turn against the ground truth.
// rec_agent / user_agent are "correct" or "wrong"; outcome is the combined
// label, e.g. "rec_wrong_user_accepted".
struct Diagnosis {
    std::string rec_agent;
    std::string user_agent;
    std::string outcome;
};

// Everything the teacher needs to show a better trajectory for a turn: what
// actually happened, what should have happened, and why.
struct DiagnosticReference {
    RecMessage original_rec;
    UserMessage original_user;
    RecMessage corrected_rec;
    UserMessage corrected_user;
    Diagnosis diagnosis;
    std::string explanation;
};

}  // namespace coars
