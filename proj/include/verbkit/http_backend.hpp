#pragma once

#include <memory>
#include <string>

#include "verbkit/errors.hpp"
#include "verbkit/lm_backend.hpp"

namespace verbkit {

// Evaluation-only backend talking to a masked-LM inference server over a
// small JSON protocol (see tools/serve_hf_backend.py for a reference server
// that hosts HuggingFace checkpoints such as roberta-large).
//
// Endpoints:
//   GET  /info         -> vocab_size, hidden_size, max_length, mask/bos/eos ids, special_ids
//   GET  /vocab        -> token surface strings, leading-space convention
//   GET  /embeddings   -> input-embedding matrix, word2vec text format
//   POST /encode       {text, at_start}    -> {ids}
//   POST /encode_word  {word}              -> {ids}
//   POST /mask_logits  {ids, mask_pos}     -> {values}
//   POST /mask_hidden  {ids, mask_pos}     -> {values}
class HttpLmBackend final : public LmBackend {
public:
    explicit HttpLmBackend(const std::string& base_url);
    ~HttpLmBackend() override;

    // One shared connection; keep evaluation serial.
    bool supports_concurrent_eval() const override { return false; }

    const Tokenizer& tokenizer() const override;
    std::size_t vocab_size() const override;
    std::size_t hidden_size() const override;
    std::size_t max_length() const override;

    VocabLogits mask_logits(const MaskedSequence& seq) const override;
    MaskHiddenState mask_hidden_state(const MaskedSequence& seq) const override;
    EmbeddingStore embedding_matrix() const override;

    double train_step(std::span<const TrainItem>, scoring::ClassScorer&,
                      optim::AdamW&) override {
        throw TrainingError("remote backend is evaluation-only; train with a local checkpoint");
    }

    std::vector<double> state() const override { return {}; }
    void set_state(std::span<const double> state) override {
        if (!state.empty()) throw TrainingError("remote backend holds no local state");
    }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace verbkit
