#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace verbkit {

struct Neighbor {
    std::string word;
    double similarity = 0.0;
};

enum class EmbeddingFormat {
    word2vec_text,  // "count dim" header, then "word v1..vd" lines
    glove_text,     // headerless "word v1..vd" lines
};

EmbeddingFormat embedding_format_from_string(std::string_view name);

// Heterogeneous string lookup support.
struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
};
using StringIndexMap = std::unordered_map<std::string, std::size_t, StringHash, std::equal_to<>>;

// Vocabulary-indexed embedding matrix with cosine similarity and exhaustive
// top-k search. Immutable after construction; concurrent queries are safe.
class EmbeddingStore {
public:
    EmbeddingStore(std::vector<std::string> vocab, std::vector<float> matrix, std::size_t dim);

    std::size_t size() const { return vocab_.size(); }
    std::size_t dim() const { return dim_; }
    const std::vector<std::string>& words() const { return vocab_; }
    const std::string& word_at(std::size_t i) const { return vocab_[i]; }

    bool contains(std::string_view word) const;
    std::optional<std::size_t> index_of(std::string_view word) const;
    std::span<const float> vector_at(std::size_t i) const;
    std::span<const float> vector_of(std::string_view word) const;  // throws LookupError

    // Two-form lookup: leading-space token form first, then the bare form.
    std::optional<std::string> resolve(std::string_view word) const;

    double cosine(std::string_view a, std::string_view b) const;
    double cosine_by_index(std::size_t i, std::size_t j) const;

    // The k most similar words to w0, excluding w0 itself, sorted by
    // descending similarity with ties broken by ascending vocabulary index.
    std::vector<Neighbor> top_k(std::string_view w0, std::size_t k) const;

    // Single-threaded reference implementation; must agree with top_k exactly.
    std::vector<Neighbor> top_k_serial(std::string_view w0, std::size_t k) const;

    // Raw similarity scan against every vocabulary entry (parallel kernel).
    std::vector<double> similarities_to(std::size_t i) const;
    std::vector<double> similarities_to_serial(std::size_t i) const;

    static EmbeddingStore load_text(const std::string& path, EmbeddingFormat format);
    static EmbeddingStore load_text_stream(std::istream& in, EmbeddingFormat format);
    void save_text(const std::string& path, EmbeddingFormat format) const;

private:
    std::vector<Neighbor> select_top_k(std::vector<double> sims, std::size_t self,
                                       std::size_t k) const;

    std::vector<std::string> vocab_;
    std::vector<float> matrix_;  // row-major, size() * dim_
    std::vector<double> norms_;
    std::size_t dim_;
    StringIndexMap index_;
};

}  // namespace verbkit
