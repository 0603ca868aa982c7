#include "verbkit/lm_backend.hpp"

#include <algorithm>

#include "verbkit/bow_backend.hpp"
#include "verbkit/errors.hpp"
#include "verbkit/http_backend.hpp"

namespace verbkit {

void LmBackend::validate_sequence(const MaskedSequence& seq) const {
    const TokenId mask = tokenizer().mask_id();
    std::size_t masks = static_cast<std::size_t>(
        std::count(seq.ids.begin(), seq.ids.end(), mask));
    if (masks != 1)
        throw StructuralError("sequence must contain exactly one MASK, has " +
                              std::to_string(masks));
    if (seq.mask_pos >= seq.ids.size() || seq.ids[seq.mask_pos] != mask)
        throw StructuralError("mask_pos does not point at the MASK token");
    if (seq.ids.size() > max_length())
        throw StructuralError("sequence length " + std::to_string(seq.ids.size()) +
                              " exceeds backend max length " + std::to_string(max_length()));
}

std::vector<TokenId> LmBackend::tokenize_label_word(std::string_view word) const {
    if (word.empty()) throw ArgumentError("label word must be non-empty");
    return tokenizer().encode_word(word);
}

std::unique_ptr<LmBackend> make_backend(const std::string& checkpoint) {
    if (checkpoint.rfind("http://", 0) == 0 || checkpoint.rfind("https://", 0) == 0)
        return std::make_unique<HttpLmBackend>(checkpoint);
    if (checkpoint.rfind("bow:", 0) == 0)
        return std::make_unique<BowBackend>(BowBackend::load(checkpoint.substr(4)));
    if (checkpoint.size() > 6 && checkpoint.ends_with(".bowlm"))
        return std::make_unique<BowBackend>(BowBackend::load(checkpoint));
    throw ArgumentError(
        "unknown checkpoint '" + checkpoint +
        "'; use bow:<path> / <path>.bowlm for a local model, or an http(s) URL of an "
        "inference server (see tools/serve_hf_backend.py for hosting e.g. roberta-large)");
}

}  // namespace verbkit
