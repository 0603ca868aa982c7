#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "verbkit/embedding_store.hpp"
#include "verbkit/optim.hpp"
#include "verbkit/scoring.hpp"
#include "verbkit/tokenizer.hpp"
#include "verbkit/types.hpp"

namespace verbkit {

struct TrainItem {
    MaskedSequence seq;
    int gold = 0;
};

// Abstraction over a masked language model. A backend instance is
// single-writer: train_step mutates shared state and must be externally
// serialized; evaluation calls on a frozen backend may run concurrently.
class LmBackend {
public:
    virtual ~LmBackend() = default;

    virtual const Tokenizer& tokenizer() const = 0;
    virtual std::size_t vocab_size() const = 0;
    virtual std::size_t hidden_size() const = 0;
    virtual std::size_t max_length() const = 0;

    // Whether frozen-backend evaluation calls may be issued concurrently.
    virtual bool supports_concurrent_eval() const { return true; }

    virtual VocabLogits mask_logits(const MaskedSequence& seq) const = 0;
    virtual MaskHiddenState mask_hidden_state(const MaskedSequence& seq) const = 0;
    virtual EmbeddingStore embedding_matrix() const = 0;

    // Leading-space convention; empty word is an ArgumentError.
    std::vector<TokenId> tokenize_label_word(std::string_view word) const;

    // One optimizer step over the batch; gradients flow through the scorer
    // into model parameters and any trainable scorer weights. Returns the
    // batch mean loss. Throws TrainingError on non-finite loss or if the
    // backend cannot train.
    virtual double train_step(std::span<const TrainItem> batch, scoring::ClassScorer& scorer,
                              optim::AdamW& opt) = 0;

    // Snapshot of trainable parameters, for checkpoint keeping.
    virtual std::vector<double> state() const = 0;
    virtual void set_state(std::span<const double> state) = 0;

protected:
    // Throws StructuralError unless the sequence has exactly one MASK at
    // mask_pos and fits within max_length.
    void validate_sequence(const MaskedSequence& seq) const;
};

// Checkpoint strings:
//   "bow:<path>"  — serialized bag-of-words mini LM
//   "http://..."  — remote inference server (evaluation only)
std::unique_ptr<LmBackend> make_backend(const std::string& checkpoint);

}  // namespace verbkit
