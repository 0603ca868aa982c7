#pragma once

// Shared fixtures for the test suite: deterministic random embedding stores,
// a scriptable stub LM backend, and a synthetic 4-class news-style corpus.

#include <unistd.h>

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "verbkit/bow_backend.hpp"
#include "verbkit/dataset.hpp"
#include "verbkit/embedding_store.hpp"
#include "verbkit/errors.hpp"
#include "verbkit/lm_backend.hpp"

namespace testsup {

inline verbkit::EmbeddingStore random_store(std::size_t vocab, std::size_t dim,
                                            std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> dist(0.0f, 1.0f);
    std::vector<std::string> words(vocab);
    std::vector<float> matrix(vocab * dim);
    for (std::size_t i = 0; i < vocab; ++i) words[i] = "w" + std::to_string(i);
    for (auto& v : matrix) v = dist(rng);
    return verbkit::EmbeddingStore(std::move(words), std::move(matrix), dim);
}

inline verbkit::VocabLogits random_logits(std::size_t vocab, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 2.0);
    verbkit::VocabLogits vl;
    vl.values.resize(vocab);
    for (auto& v : vl.values) v = dist(rng);
    return vl;
}

// A backend whose MASK outputs are computed by arbitrary callables, over a
// word-level vocabulary. Evaluation only.
class StubLm final : public verbkit::LmBackend {
public:
    using LogitFn = std::function<std::vector<double>(const verbkit::MaskedSequence&)>;
    using HiddenFn = std::function<std::vector<double>(const verbkit::MaskedSequence&)>;

    StubLm(std::vector<std::string> word_forms, std::size_t hidden, std::size_t max_len = 128)
        : tok_(std::move(word_forms)), hidden_(hidden), max_length_(max_len) {}

    LogitFn logit_fn;
    HiddenFn hidden_fn;

    const verbkit::Tokenizer& tokenizer() const override { return tok_; }
    std::size_t vocab_size() const override { return tok_.vocab_size(); }
    std::size_t hidden_size() const override { return hidden_; }
    std::size_t max_length() const override { return max_length_; }

    verbkit::VocabLogits mask_logits(const verbkit::MaskedSequence& seq) const override {
        return {logit_fn(seq)};
    }
    verbkit::MaskHiddenState mask_hidden_state(const verbkit::MaskedSequence& seq) const override {
        return {hidden_fn(seq)};
    }
    verbkit::EmbeddingStore embedding_matrix() const override {
        auto store = random_store(vocab_size(), hidden_, 1234);
        std::vector<std::string> vocab = tok_.vocab();
        std::vector<float> matrix(vocab.size() * hidden_);
        for (std::size_t i = 0; i < vocab.size(); ++i)
            for (std::size_t d = 0; d < hidden_; ++d)
                matrix[i * hidden_ + d] = store.vector_at(i)[d];
        return verbkit::EmbeddingStore(std::move(vocab), std::move(matrix), hidden_);
    }
    double train_step(std::span<const verbkit::TrainItem>, verbkit::scoring::ClassScorer&,
                      verbkit::optim::AdamW&) override {
        throw verbkit::TrainingError("stub backend cannot train");
    }
    std::vector<double> state() const override { return {}; }
    void set_state(std::span<const double>) override {}

    const verbkit::WordTokenizer& word_tok() const { return tok_; }

private:
    verbkit::WordTokenizer tok_;
    std::size_t hidden_;
    std::size_t max_length_;
};

// Synthetic 4-class corpus whose texts reuse the AG news label vocabulary so
// the built-in AG verbalizer and templates apply directly.
struct SyntheticNews {
    std::vector<std::string> texts;
    std::vector<int> labels;  // 0..3
};

inline SyntheticNews synthetic_news(std::size_t per_class, std::uint64_t seed) {
    static const std::vector<std::vector<std::string>> kTopics = {
        {"world", "politics", "government", "election", "nation"},
        {"sports", "game", "team", "match", "season"},
        {"business", "market", "profit", "company", "trade"},
        {"science", "technology", "research", "software", "space"},
    };
    static const std::vector<std::string> kFiller = {"the",  "a",    "today", "new",
                                                     "after", "with", "over",  "report"};
    std::mt19937_64 rng(seed);
    SyntheticNews out;
    for (std::size_t c = 0; c < kTopics.size(); ++c) {
        for (std::size_t i = 0; i < per_class; ++i) {
            std::string text;
            int words = 6 + static_cast<int>(rng() % 5);
            for (int w = 0; w < words; ++w) {
                if (!text.empty()) text += ' ';
                // topical words dominate so the classes stay separable
                if (rng() % 3 != 0)
                    text += kTopics[c][rng() % kTopics[c].size()];
                else
                    text += kFiller[rng() % kFiller.size()];
            }
            out.texts.push_back(text);
            out.labels.push_back(static_cast<int>(c));
        }
    }
    return out;
}

inline verbkit::data::Dataset synthetic_news_dataset(std::size_t per_class, std::uint64_t seed) {
    verbkit::data::Dataset ds;
    ds.id = "ag";
    ds.field_names = {"x"};
    ds.label_names = {"World", "Sports", "Business", "Sci/Tech"};
    auto corpus = synthetic_news(per_class, seed);
    for (std::size_t i = 0; i < corpus.texts.size(); ++i) {
        verbkit::templates::Example ex;
        ex.fields["x"] = corpus.texts[i];
        ex.fields["title"] = corpus.texts[i];
        ex.fields["description"] = corpus.texts[i];
        ex.label = corpus.labels[i];
        ds.examples.push_back(std::move(ex));
    }
    return ds;
}

// BowBackend trained vocabulary covering the synthetic corpus plus the AG
// manual label words.
inline verbkit::BowBackend synthetic_news_backend(const SyntheticNews& corpus, std::size_t dim,
                                                  std::uint64_t seed) {
    std::vector<std::string> extra = {"world",    "politics",  "sports",
                                      "business", "science",   "technology"};
    return verbkit::BowBackend::from_corpus(corpus.texts, extra, dim, seed);
}

// Unique temporary file path; removed on destruction.
class TempFile {
public:
    explicit TempFile(const std::string& suffix = ".tmp") {
        static std::atomic<int> counter{0};
        path_ = (std::filesystem::temp_directory_path() /
                 ("verbkit_test_" + std::to_string(::getpid()) + "_" +
                  std::to_string(counter++) + suffix))
                    .string();
    }
    ~TempFile() {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

}  // namespace testsup
