#include "verbkit/embedding_store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "verbkit/errors.hpp"

namespace verbkit {

EmbeddingFormat embedding_format_from_string(std::string_view name) {
    if (name == "word2vec" || name == "word2vec_text") return EmbeddingFormat::word2vec_text;
    if (name == "glove" || name == "glove_text") return EmbeddingFormat::glove_text;
    throw ArgumentError("unknown embedding format: " + std::string(name));
}

EmbeddingStore::EmbeddingStore(std::vector<std::string> vocab, std::vector<float> matrix,
                               std::size_t dim)
    : vocab_(std::move(vocab)), matrix_(std::move(matrix)), dim_(dim) {
    if (dim_ == 0) throw ArgumentError("embedding dimension must be positive");
    if (matrix_.size() != vocab_.size() * dim_)
        throw ArgumentError("embedding matrix size does not match vocab * dim");
    index_.reserve(vocab_.size());
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
        auto [it, inserted] = index_.emplace(vocab_[i], i);
        if (!inserted) throw ArgumentError("duplicate word in embedding vocabulary: " + vocab_[i]);
    }
    norms_.resize(vocab_.size());
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < dim_; ++j) {
            float v = matrix_[i * dim_ + j];
            if (!std::isfinite(v))
                throw NumericError("non-finite embedding entry for word: " + vocab_[i]);
            s += static_cast<double>(v) * v;
        }
        norms_[i] = std::sqrt(s);
    }
}

bool EmbeddingStore::contains(std::string_view word) const {
    return index_.find(word) != index_.end();
}

std::optional<std::size_t> EmbeddingStore::index_of(std::string_view word) const {
    auto it = index_.find(word);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::span<const float> EmbeddingStore::vector_at(std::size_t i) const {
    return {matrix_.data() + i * dim_, dim_};
}

std::span<const float> EmbeddingStore::vector_of(std::string_view word) const {
    auto idx = index_of(word);
    if (!idx) throw LookupError("word not in embedding vocabulary: " + std::string(word));
    return vector_at(*idx);
}

std::optional<std::string> EmbeddingStore::resolve(std::string_view word) const {
    if (!word.empty() && word.front() != ' ') {
        std::string spaced = " " + std::string(word);
        if (contains(spaced)) return spaced;
    }
    if (contains(word)) return std::string(word);
    return std::nullopt;
}

double EmbeddingStore::cosine_by_index(std::size_t i, std::size_t j) const {
    if (norms_[i] == 0.0 || norms_[j] == 0.0)
        throw NumericError("cosine similarity undefined for zero-norm vector");
    const float* a = matrix_.data() + i * dim_;
    const float* b = matrix_.data() + j * dim_;
    double dot = 0.0;
    for (std::size_t t = 0; t < dim_; ++t) dot += static_cast<double>(a[t]) * b[t];
    return dot / (norms_[i] * norms_[j]);
}

double EmbeddingStore::cosine(std::string_view a, std::string_view b) const {
    auto ia = index_of(a);
    if (!ia) throw LookupError("word not in embedding vocabulary: " + std::string(a));
    auto ib = index_of(b);
    if (!ib) throw LookupError("word not in embedding vocabulary: " + std::string(b));
    return cosine_by_index(*ia, *ib);
}

std::vector<double> EmbeddingStore::similarities_to(std::size_t i) const {
    if (norms_[i] == 0.0) throw NumericError("cosine similarity undefined for zero-norm vector");
    std::vector<double> sims(size());
    const float* q = matrix_.data() + i * dim_;
    const double qn = norms_[i];
    const auto n = static_cast<std::ptrdiff_t>(size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < n; ++r) {
        const float* row = matrix_.data() + static_cast<std::size_t>(r) * dim_;
        double dot = 0.0;
        for (std::size_t t = 0; t < dim_; ++t) dot += static_cast<double>(q[t]) * row[t];
        double nr = norms_[static_cast<std::size_t>(r)];
        sims[static_cast<std::size_t>(r)] = nr == 0.0 ? -2.0 : dot / (qn * nr);
    }
    return sims;
}

std::vector<double> EmbeddingStore::similarities_to_serial(std::size_t i) const {
    if (norms_[i] == 0.0) throw NumericError("cosine similarity undefined for zero-norm vector");
    std::vector<double> sims(size());
    const float* q = matrix_.data() + i * dim_;
    const double qn = norms_[i];
    for (std::size_t r = 0; r < size(); ++r) {
        const float* row = matrix_.data() + r * dim_;
        double dot = 0.0;
        for (std::size_t t = 0; t < dim_; ++t) dot += static_cast<double>(q[t]) * row[t];
        sims[r] = norms_[r] == 0.0 ? -2.0 : dot / (qn * norms_[r]);
    }
    return sims;
}

std::vector<Neighbor> EmbeddingStore::select_top_k(std::vector<double> sims, std::size_t self,
                                                   std::size_t k) const {
    sims[self] = -3.0;  // below any cosine; zero-norm rows sit at -2.0
    std::vector<std::size_t> order(size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto better = [&sims](std::size_t a, std::size_t b) {
        if (sims[a] != sims[b]) return sims[a] > sims[b];
        return a < b;
    };
    const std::size_t take = std::min(k, size() > 0 ? size() - 1 : 0);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take),
                      order.end(), better);
    std::vector<Neighbor> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i)
        out.push_back({vocab_[order[i]], sims[order[i]]});
    return out;
}

std::vector<Neighbor> EmbeddingStore::top_k(std::string_view w0, std::size_t k) const {
    auto idx = index_of(w0);
    if (!idx) throw LookupError("word not in embedding vocabulary: " + std::string(w0));
    if (k == 0) return {};
    return select_top_k(similarities_to(*idx), *idx, k);
}

std::vector<Neighbor> EmbeddingStore::top_k_serial(std::string_view w0, std::size_t k) const {
    auto idx = index_of(w0);
    if (!idx) throw LookupError("word not in embedding vocabulary: " + std::string(w0));
    if (k == 0) return {};
    return select_top_k(similarities_to_serial(*idx), *idx, k);
}

namespace {

// LM tokens with a leading space are stored on disk with the conventional
// "Ġ" (U+0120) marker, as in exported RoBERTa vocabularies.
const std::string kSpaceMarker = "\xC4\xA0";

std::string unescape_word(std::string word) {
    if (word.rfind(kSpaceMarker, 0) == 0) return " " + word.substr(kSpaceMarker.size());
    return word;
}

std::string escape_word(const std::string& word) {
    if (!word.empty() && word.front() == ' ') return kSpaceMarker + word.substr(1);
    return word;
}

// Lines are "word v1 ... vd". Words may not contain whitespace; values parsed
// as floats. Returns false on blank lines.
bool parse_embedding_line(const std::string& line, long lineno, std::size_t& dim,
                          std::vector<std::string>& vocab, std::vector<float>& matrix) {
    std::istringstream ss(line);
    std::string word;
    if (!(ss >> word)) return false;
    word = unescape_word(std::move(word));
    std::vector<float> row;
    double v;
    while (ss >> v) row.push_back(static_cast<float>(v));
    if (!ss.eof()) throw ParseError("malformed embedding value", lineno);
    if (row.empty()) throw ParseError("embedding line has no values", lineno);
    if (dim == 0) {
        dim = row.size();
    } else if (row.size() != dim) {
        throw ParseError("inconsistent embedding dimension: expected " + std::to_string(dim) +
                             ", got " + std::to_string(row.size()),
                         lineno);
    }
    vocab.push_back(std::move(word));
    matrix.insert(matrix.end(), row.begin(), row.end());
    return true;
}

}  // namespace

EmbeddingStore EmbeddingStore::load_text(const std::string& path, EmbeddingFormat format) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open embedding file: " + path);
    return load_text_stream(in, format);
}

EmbeddingStore EmbeddingStore::load_text_stream(std::istream& in, EmbeddingFormat format) {
    std::string line;
    long lineno = 0;
    std::size_t declared_count = 0, declared_dim = 0;
    if (format == EmbeddingFormat::word2vec_text) {
        if (!std::getline(in, line)) throw ParseError("empty word2vec file", 1);
        ++lineno;
        std::istringstream header(line);
        if (!(header >> declared_count >> declared_dim) || declared_dim == 0)
            throw ParseError("malformed word2vec header", lineno);
    }
    std::vector<std::string> vocab;
    std::vector<float> matrix;
    std::size_t dim = 0;
    while (std::getline(in, line)) {
        ++lineno;
        parse_embedding_line(line, lineno, dim, vocab, matrix);
    }
    if (vocab.empty()) throw ParseError("embedding file has no vectors");
    if (format == EmbeddingFormat::word2vec_text) {
        if (vocab.size() != declared_count)
            throw ParseError("word2vec header declares " + std::to_string(declared_count) +
                             " rows but file has " + std::to_string(vocab.size()));
        if (dim != declared_dim)
            throw ParseError("word2vec header declares dim " + std::to_string(declared_dim) +
                             " but rows have " + std::to_string(dim));
    }
    return EmbeddingStore(std::move(vocab), std::move(matrix), dim);
}

void EmbeddingStore::save_text(const std::string& path, EmbeddingFormat format) const {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open embedding file for writing: " + path);
    out.precision(9);
    if (format == EmbeddingFormat::word2vec_text) out << size() << " " << dim_ << "\n";
    for (std::size_t i = 0; i < size(); ++i) {
        std::string word = escape_word(vocab_[i]);
        if (word.find_first_of(" \t\n") != std::string::npos)
            throw ParseError("word contains whitespace, not representable in text format: '" +
                             vocab_[i] + "'");
        out << word;
        for (std::size_t j = 0; j < dim_; ++j) out << " " << matrix_[i * dim_ + j];
        out << "\n";
    }
}

}  // namespace verbkit
