#include "verbkit/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "verbkit/errors.hpp"

namespace verbkit::scoring {

namespace {

// Token-mean logit of one (possibly multi-token) label word.
double word_logit(const VocabLogits& vl, const std::vector<TokenId>& tokens) {
    if (tokens.empty()) throw ArgumentError("label word tokenized to an empty id list");
    double s = 0.0;
    for (TokenId t : tokens) {
        if (t < 0 || static_cast<std::size_t>(t) >= vl.values.size())
            throw ArgumentError("label word token id out of vocabulary range");
        s += vl.values[static_cast<std::size_t>(t)];
    }
    return s / static_cast<double>(tokens.size());
}

void check_finite(const std::vector<double>& v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x)) throw NumericError(std::string("non-finite ") + what);
}

}  // namespace

std::vector<double> ClassScores::proba() const { return predict_proba(*this); }

int ClassScores::argmax() const {
    if (logits.empty()) throw ArgumentError("empty class scores");
    return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

ClassScores class_logits_mean(const VocabLogits& vl, const TokenizedVerbalizer& v) {
    ClassScores cs;
    cs.logits.reserve(v.labels.size());
    for (const auto& words : v.labels) {
        if (words.empty()) throw ArgumentError("verbalizer label has no words");
        double s = 0.0;
        for (const auto& w : words) s += word_logit(vl, w);
        cs.logits.push_back(s / static_cast<double>(words.size()));
    }
    return cs;
}

ClassScores class_logits_weighted(const VocabLogits& vl, const TokenizedWeightedVerbalizer& wv) {
    ClassScores cs;
    cs.logits.reserve(wv.labels.size());
    for (const auto& words : wv.labels) {
        if (words.empty()) throw ArgumentError("verbalizer label has no words");
        double num = 0.0, den = 0.0;
        for (const auto& w : words) {
            num += w.weight * word_logit(vl, w.tokens);
            den += w.weight;
        }
        if (den == 0.0) throw NumericError("label weight sum is zero, refusing to divide");
        cs.logits.push_back(num / den);
    }
    return cs;
}

ClassScores class_logits_soft(const MaskHiddenState& h,
                              const std::vector<std::vector<double>>& prototypes) {
    ClassScores cs;
    cs.logits.reserve(prototypes.size());
    for (const auto& p : prototypes) {
        if (p.size() != h.values.size())
            throw ArgumentError("prototype dimension does not match hidden dimension");
        cs.logits.push_back(
            std::inner_product(p.begin(), p.end(), h.values.begin(), 0.0));
    }
    return cs;
}

std::vector<double> predict_proba(const ClassScores& cs) {
    check_finite(cs.logits, "class logit");
    if (cs.logits.empty()) throw ArgumentError("empty class scores");
    double mx = *std::max_element(cs.logits.begin(), cs.logits.end());
    std::vector<double> p(cs.logits.size());
    double z = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = std::exp(cs.logits[i] - mx);
        z += p[i];
    }
    for (double& x : p) x /= z;
    return p;
}

double cross_entropy(const ClassScores& cs, int gold) {
    check_finite(cs.logits, "class logit");
    if (gold < 0 || static_cast<std::size_t>(gold) >= cs.logits.size())
        throw ArgumentError("gold label index out of range");
    double mx = *std::max_element(cs.logits.begin(), cs.logits.end());
    double z = 0.0;
    for (double x : cs.logits) z += std::exp(x - mx);
    return std::log(z) - (cs.logits[static_cast<std::size_t>(gold)] - mx);
}

std::vector<double> cross_entropy_grad(const ClassScores& cs, int gold) {
    auto g = predict_proba(cs);
    if (gold < 0 || static_cast<std::size_t>(gold) >= g.size())
        throw ArgumentError("gold label index out of range");
    g[static_cast<std::size_t>(gold)] -= 1.0;
    return g;
}

// MeanLogitScorer

ClassScores MeanLogitScorer::score(const VocabLogits* vl, const MaskHiddenState*) const {
    if (!vl) throw ArgumentError("mean scorer requires vocabulary logits");
    return class_logits_mean(*vl, verb_);
}

ScoreBackward MeanLogitScorer::backward(const VocabLogits* vl, const MaskHiddenState*,
                                        std::span<const double> d_class) {
    if (!vl) throw ArgumentError("mean scorer requires vocabulary logits");
    ScoreBackward bw;
    for (std::size_t y = 0; y < verb_.labels.size(); ++y) {
        const auto& words = verb_.labels[y];
        double scale = d_class[y] / static_cast<double>(words.size());
        for (const auto& w : words) {
            double per_token = scale / static_cast<double>(w.size());
            for (TokenId t : w) bw.d_logits.emplace_back(t, per_token);
        }
    }
    return bw;
}

// WeightedScorer

WeightedScorer::WeightedScorer(TokenizedWeightedVerbalizer wv) {
    words_.resize(wv.labels.size());
    offsets_.resize(wv.labels.size());
    std::size_t flat = 0;
    for (std::size_t y = 0; y < wv.labels.size(); ++y) {
        offsets_[y] = flat;
        for (auto& w : wv.labels[y]) {
            words_[y].push_back(std::move(w.tokens));
            weights_.push_back(w.weight);
            ++flat;
        }
    }
    grads_.assign(weights_.size(), 0.0);
}

ClassScores WeightedScorer::score(const VocabLogits* vl, const MaskHiddenState*) const {
    if (!vl) throw ArgumentError("weighted scorer requires vocabulary logits");
    ClassScores cs;
    cs.logits.reserve(words_.size());
    for (std::size_t y = 0; y < words_.size(); ++y) {
        if (words_[y].empty()) throw ArgumentError("verbalizer label has no words");
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < words_[y].size(); ++i) {
            double q = weights_[offsets_[y] + i];
            num += q * word_logit(*vl, words_[y][i]);
            den += q;
        }
        if (den == 0.0) throw NumericError("label weight sum is zero, refusing to divide");
        cs.logits.push_back(num / den);
    }
    return cs;
}

ScoreBackward WeightedScorer::backward(const VocabLogits* vl, const MaskHiddenState*,
                                       std::span<const double> d_class) {
    if (!vl) throw ArgumentError("weighted scorer requires vocabulary logits");
    ScoreBackward bw;
    for (std::size_t y = 0; y < words_.size(); ++y) {
        double den = 0.0;
        for (std::size_t i = 0; i < words_[y].size(); ++i) den += weights_[offsets_[y] + i];
        if (den == 0.0) throw NumericError("label weight sum is zero, refusing to divide");
        double num = 0.0;
        std::vector<double> m(words_[y].size());
        for (std::size_t i = 0; i < words_[y].size(); ++i) {
            m[i] = word_logit(*vl, words_[y][i]);
            num += weights_[offsets_[y] + i] * m[i];
        }
        double logit = num / den;
        double dy = d_class[y];
        for (std::size_t i = 0; i < words_[y].size(); ++i) {
            double q = weights_[offsets_[y] + i];
            // d logit / d m_i = q / den ; d logit / d q_i = (m_i - logit) / den
            grads_[offsets_[y] + i] += dy * (m[i] - logit) / den;
            double dm = dy * q / den;
            double per_token = dm / static_cast<double>(words_[y][i].size());
            for (TokenId t : words_[y][i]) bw.d_logits.emplace_back(t, per_token);
        }
    }
    return bw;
}

void WeightedScorer::zero_param_grads() { std::fill(grads_.begin(), grads_.end(), 0.0); }

TokenizedWeightedVerbalizer WeightedScorer::snapshot() const {
    TokenizedWeightedVerbalizer wv;
    wv.labels.resize(words_.size());
    for (std::size_t y = 0; y < words_.size(); ++y)
        for (std::size_t i = 0; i < words_[y].size(); ++i)
            wv.labels[y].push_back({words_[y][i], weights_[offsets_[y] + i]});
    return wv;
}

// SoftScorer

SoftScorer::SoftScorer(std::vector<std::vector<double>> prototypes) {
    num_labels_ = prototypes.size();
    if (num_labels_ == 0) throw ArgumentError("soft verbalizer must have at least one prototype");
    dim_ = prototypes.front().size();
    for (const auto& p : prototypes) {
        if (p.size() != dim_) throw ArgumentError("prototype dimensions differ across labels");
        flat_.insert(flat_.end(), p.begin(), p.end());
    }
    grads_.assign(flat_.size(), 0.0);
}

ClassScores SoftScorer::score(const VocabLogits*, const MaskHiddenState* h) const {
    if (!h) throw ArgumentError("soft scorer requires the mask hidden state");
    if (h->values.size() != dim_)
        throw ArgumentError("prototype dimension does not match hidden dimension");
    ClassScores cs;
    cs.logits.resize(num_labels_);
    for (std::size_t y = 0; y < num_labels_; ++y)
        cs.logits[y] = std::inner_product(h->values.begin(), h->values.end(),
                                          flat_.begin() + static_cast<std::ptrdiff_t>(y * dim_), 0.0);
    return cs;
}

ScoreBackward SoftScorer::backward(const VocabLogits*, const MaskHiddenState* h,
                                   std::span<const double> d_class) {
    if (!h) throw ArgumentError("soft scorer requires the mask hidden state");
    ScoreBackward bw;
    bw.d_hidden.assign(dim_, 0.0);
    for (std::size_t y = 0; y < num_labels_; ++y) {
        double dy = d_class[y];
        for (std::size_t j = 0; j < dim_; ++j) {
            bw.d_hidden[j] += dy * flat_[y * dim_ + j];
            grads_[y * dim_ + j] += dy * h->values[j];
        }
    }
    return bw;
}

void SoftScorer::zero_param_grads() { std::fill(grads_.begin(), grads_.end(), 0.0); }

std::vector<std::vector<double>> SoftScorer::prototypes() const {
    std::vector<std::vector<double>> out(num_labels_);
    for (std::size_t y = 0; y < num_labels_; ++y)
        out[y].assign(flat_.begin() + static_cast<std::ptrdiff_t>(y * dim_),
                      flat_.begin() + static_cast<std::ptrdiff_t>((y + 1) * dim_));
    return out;
}

}  // namespace verbkit::scoring
