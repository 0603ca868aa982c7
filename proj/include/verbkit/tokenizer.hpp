#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "verbkit/types.hpp"

namespace verbkit {

// Tokenization surface shared by all backends. Label words follow the
// leading-space convention: they are encoded as they would appear
// mid-sentence.
class Tokenizer {
public:
    virtual ~Tokenizer() = default;

    // Encode a text chunk. at_sequence_start controls whether the first word
    // uses its sentence-initial (bare) form.
    virtual std::vector<TokenId> encode(std::string_view text, bool at_sequence_start) const = 0;

    // Encode a single label word mid-sentence (leading space applied).
    virtual std::vector<TokenId> encode_word(std::string_view word) const = 0;

    virtual TokenId mask_id() const = 0;
    virtual std::optional<TokenId> bos_id() const { return std::nullopt; }
    virtual std::optional<TokenId> eos_id() const { return std::nullopt; }
    virtual std::vector<TokenId> special_ids() const = 0;
    virtual std::size_t vocab_size() const = 0;
    virtual std::string token_text(TokenId id) const = 0;
};

}  // namespace verbkit
