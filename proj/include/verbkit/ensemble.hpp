#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "verbkit/scoring.hpp"

namespace verbkit::ensemble {

// One per-template model's output for a single example. All members must
// share the same label set and order.
struct MemberOutput {
    int template_id = 0;
    scoring::ClassScores scores;
};

enum class Strategy { vote, proba, logit };

Strategy strategy_from_string(std::string_view name);
std::string_view to_string(Strategy s);

// Majority vote over member argmaxes; ties resolved by the tied label with
// the highest mean probability across members, then by lowest label index.
int aggregate_vote(std::span<const MemberOutput> members);

// Argmax of the mean of member probabilities.
int aggregate_proba(std::span<const MemberOutput> members);

// Argmax of the element-wise mean of raw class logits.
int aggregate_logit(std::span<const MemberOutput> members);

int aggregate(Strategy s, std::span<const MemberOutput> members);

}  // namespace verbkit::ensemble
