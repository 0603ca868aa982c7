#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "verbkit/lm_backend.hpp"

namespace verbkit {

// Word-level tokenizer with RoBERTa-style surface forms: tokens mid-sentence
// carry a leading space (" sports"), the sequence-initial token is bare.
class WordTokenizer final : public Tokenizer {
public:
    // word_forms: surface forms including their leading space where
    // applicable. Specials <s>, </s>, <mask>, <unk> are prepended.
    explicit WordTokenizer(std::vector<std::string> word_forms);

    std::vector<TokenId> encode(std::string_view text, bool at_sequence_start) const override;
    std::vector<TokenId> encode_word(std::string_view word) const override;
    TokenId mask_id() const override { return kMask; }
    std::optional<TokenId> bos_id() const override { return kBos; }
    std::optional<TokenId> eos_id() const override { return kEos; }
    std::vector<TokenId> special_ids() const override { return {kBos, kEos, kMask, kUnk}; }
    std::size_t vocab_size() const override { return vocab_.size(); }
    std::string token_text(TokenId id) const override;

    static constexpr TokenId kBos = 0, kEos = 1, kMask = 2, kUnk = 3;
    static constexpr std::size_t kNumSpecials = 4;

    const std::vector<std::string>& vocab() const { return vocab_; }

private:
    TokenId lookup(const std::string& surface) const;

    std::vector<std::string> vocab_;
    StringIndexMap index_;
};

// A small trainable masked LM over a word-level vocabulary:
//   m  = mean of input embeddings of content tokens
//   h  = tanh(A m + a)                      (the MASK hidden state)
//   M  = E h + b                            (tied output embeddings)
// Deterministic given (vocab, dim, seed); gradients are exact.
class BowBackend final : public LmBackend {
public:
    BowBackend(std::vector<std::string> word_forms, std::size_t dim, std::uint64_t seed,
               std::size_t max_length = 256);

    // Builds the vocabulary from raw texts plus extra surface forms (label
    // words, template literals), keeping both sentence-initial and
    // mid-sentence forms that occur.
    static BowBackend from_corpus(std::span<const std::string> texts,
                                  std::span<const std::string> extra_words, std::size_t dim,
                                  std::uint64_t seed);

    const Tokenizer& tokenizer() const override { return tok_; }
    std::size_t vocab_size() const override { return tok_.vocab_size(); }
    std::size_t hidden_size() const override { return dim_; }
    std::size_t max_length() const override { return max_length_; }

    VocabLogits mask_logits(const MaskedSequence& seq) const override;
    MaskHiddenState mask_hidden_state(const MaskedSequence& seq) const override;
    EmbeddingStore embedding_matrix() const override;

    double train_step(std::span<const TrainItem> batch, scoring::ClassScorer& scorer,
                      optim::AdamW& opt) override;

    std::vector<double> state() const override { return params_; }
    void set_state(std::span<const double> state) override;
    std::size_t param_count() const { return params_.size(); }

    void set_trainable(bool trainable) { trainable_ = trainable; }
    bool trainable() const { return trainable_; }

    std::span<const double> embedding_row(TokenId id) const;

    void save(const std::string& path) const;
    static BowBackend load(const std::string& path);

private:
    struct Forward {
        std::vector<double> mean;    // m
        std::vector<double> hidden;  // h
        std::vector<TokenId> content;
    };
    Forward forward_hidden(const MaskedSequence& seq) const;

    // Parameter layout inside params_: E (V*d), A (d*d), a (d), b (V).
    std::size_t off_E() const { return 0; }
    std::size_t off_A() const { return vocab_size() * dim_; }
    std::size_t off_a() const { return off_A() + dim_ * dim_; }
    std::size_t off_b() const { return off_a() + dim_; }

    WordTokenizer tok_;
    std::size_t dim_;
    std::size_t max_length_;
    std::uint64_t seed_;
    bool trainable_ = true;
    std::vector<double> params_;
    std::vector<double> grads_;
};

}  // namespace verbkit
