#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace verbkit {

// Index into a backend vocabulary.
using TokenId = std::int32_t;

// Unnormalized logits over the full vocabulary at the MASK position.
struct VocabLogits {
    std::vector<double> values;
};

// Final-layer hidden vector at the MASK position.
struct MaskHiddenState {
    std::vector<double> values;
};

// Tokenized input containing exactly one MASK slot, at ids[mask_pos].
struct MaskedSequence {
    std::vector<TokenId> ids;
    std::size_t mask_pos = 0;
};

}  // namespace verbkit
