#pragma once

#include <span>
#include <utility>
#include <vector>

#include "verbkit/types.hpp"

namespace verbkit::scoring {

// Per-label logits; probabilities derived on demand.
struct ClassScores {
    std::vector<double> logits;

    std::vector<double> proba() const;  // stable softmax
    int argmax() const;
};

// Multi-token label words contribute the mean of their tokens' logits.
struct TokenizedVerbalizer {
    // labels[y] -> word list -> token ids of that word
    std::vector<std::vector<std::vector<TokenId>>> labels;
};

struct WeightedWord {
    std::vector<TokenId> tokens;
    double weight = 1.0;
};

struct TokenizedWeightedVerbalizer {
    std::vector<std::vector<WeightedWord>> labels;
};

ClassScores class_logits_mean(const VocabLogits& vl, const TokenizedVerbalizer& v);
ClassScores class_logits_weighted(const VocabLogits& vl, const TokenizedWeightedVerbalizer& wv);
// logit(y) = dot(h, prototype[y])
ClassScores class_logits_soft(const MaskHiddenState& h,
                              const std::vector<std::vector<double>>& prototypes);

std::vector<double> predict_proba(const ClassScores& cs);
// -log softmax(logits)[gold], fused for stability.
double cross_entropy(const ClassScores& cs, int gold);
// dL/dlogits for the fused cross entropy: softmax - onehot(gold).
std::vector<double> cross_entropy_grad(const ClassScores& cs, int gold);

// Gradient of one example flowing back from class logits into backend outputs.
struct ScoreBackward {
    std::vector<std::pair<TokenId, double>> d_logits;  // sparse dL/d vocab logits
    std::vector<double> d_hidden;                      // dL/d mask hidden state (may be empty)
};

// Differentiable map from MASK-position outputs to class logits. Scorers may
// own trainable parameters (MaVEN weights q, soft prototypes); backward
// accumulates their gradients.
class ClassScorer {
public:
    virtual ~ClassScorer() = default;
    virtual bool needs_logits() const = 0;
    virtual bool needs_hidden() const = 0;
    virtual std::size_t num_labels() const = 0;
    virtual ClassScores score(const VocabLogits* vl, const MaskHiddenState* h) const = 0;
    virtual ScoreBackward backward(const VocabLogits* vl, const MaskHiddenState* h,
                                   std::span<const double> d_class) = 0;

    virtual std::span<double> params() { return {}; }
    virtual std::span<double> param_grads() { return {}; }
    virtual void zero_param_grads() {}
};

class MeanLogitScorer final : public ClassScorer {
public:
    explicit MeanLogitScorer(TokenizedVerbalizer v) : verb_(std::move(v)) {}
    bool needs_logits() const override { return true; }
    bool needs_hidden() const override { return false; }
    std::size_t num_labels() const override { return verb_.labels.size(); }
    ClassScores score(const VocabLogits* vl, const MaskHiddenState*) const override;
    ScoreBackward backward(const VocabLogits* vl, const MaskHiddenState*,
                           std::span<const double> d_class) override;

private:
    TokenizedVerbalizer verb_;
};

class WeightedScorer final : public ClassScorer {
public:
    explicit WeightedScorer(TokenizedWeightedVerbalizer wv);
    bool needs_logits() const override { return true; }
    bool needs_hidden() const override { return false; }
    std::size_t num_labels() const override { return words_.size(); }
    ClassScores score(const VocabLogits* vl, const MaskHiddenState*) const override;
    ScoreBackward backward(const VocabLogits* vl, const MaskHiddenState*,
                           std::span<const double> d_class) override;

    std::span<double> params() override { return weights_; }
    std::span<double> param_grads() override { return grads_; }
    void zero_param_grads() override;

    // Current (possibly trained) weights in verbalizer layout.
    TokenizedWeightedVerbalizer snapshot() const;
    const std::vector<std::vector<std::vector<TokenId>>>& word_tokens() const { return words_; }
    std::span<const double> weights() const { return weights_; }

private:
    std::vector<std::vector<std::vector<TokenId>>> words_;  // labels[y][i] -> token ids
    std::vector<std::size_t> offsets_;                      // flat index of labels[y][0]
    std::vector<double> weights_;                           // flat q
    std::vector<double> grads_;
};

class SoftScorer final : public ClassScorer {
public:
    SoftScorer(std::vector<std::vector<double>> prototypes);
    bool needs_logits() const override { return false; }
    bool needs_hidden() const override { return true; }
    std::size_t num_labels() const override { return num_labels_; }
    ClassScores score(const VocabLogits*, const MaskHiddenState* h) const override;
    ScoreBackward backward(const VocabLogits*, const MaskHiddenState* h,
                           std::span<const double> d_class) override;

    std::span<double> params() override { return flat_; }
    std::span<double> param_grads() override { return grads_; }
    void zero_param_grads() override;

    std::vector<std::vector<double>> prototypes() const;

private:
    std::size_t num_labels_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> flat_;  // num_labels_ * dim_
    std::vector<double> grads_;
};

}  // namespace verbkit::scoring
