#include "verbkit/bow_backend.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>

#include "verbkit/errors.hpp"

namespace verbkit {

namespace {

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '\'' || c == '-';
}

// Split text into (chunk, preceded_by_space) pairs. Chunks are either word
// runs or single punctuation characters.
std::vector<std::pair<std::string, bool>> split_chunks(std::string_view text) {
    std::vector<std::pair<std::string, bool>> out;
    bool pending_space = false;
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = true;
            ++i;
            continue;
        }
        if (is_word_char(c)) {
            std::size_t j = i;
            while (j < text.size() && is_word_char(text[j])) ++j;
            out.emplace_back(std::string(text.substr(i, j - i)), pending_space);
            i = j;
        } else {
            out.emplace_back(std::string(1, c), pending_space);
            ++i;
        }
        pending_space = false;
    }
    return out;
}

std::string surface_form(const std::string& chunk, bool spaced) {
    return spaced ? " " + chunk : chunk;
}

}  // namespace

// WordTokenizer

WordTokenizer::WordTokenizer(std::vector<std::string> word_forms) {
    vocab_ = {"<s>", "</s>", "<mask>", "<unk>"};
    for (auto& w : word_forms) vocab_.push_back(std::move(w));
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
        auto [it, inserted] = index_.emplace(vocab_[i], i);
        if (!inserted) throw ArgumentError("duplicate token in vocabulary: '" + vocab_[i] + "'");
    }
}

TokenId WordTokenizer::lookup(const std::string& surface) const {
    if (auto it = index_.find(surface); it != index_.end())
        return static_cast<TokenId>(it->second);
    // Other-form fallback before giving up.
    std::string alt = surface.front() == ' ' ? surface.substr(1) : " " + surface;
    if (auto it = index_.find(alt); it != index_.end()) return static_cast<TokenId>(it->second);
    return kUnk;
}

std::vector<TokenId> WordTokenizer::encode(std::string_view text, bool at_sequence_start) const {
    std::vector<TokenId> out;
    bool first = true;
    for (const auto& [chunk, preceded] : split_chunks(text)) {
        bool spaced = preceded || (first && !at_sequence_start);
        out.push_back(lookup(surface_form(chunk, spaced)));
        first = false;
    }
    return out;
}

std::vector<TokenId> WordTokenizer::encode_word(std::string_view word) const {
    std::vector<TokenId> out;
    for (const auto& [chunk, preceded] : split_chunks(word)) {
        (void)preceded;
        out.push_back(lookup(surface_form(chunk, true)));
    }
    if (out.empty()) throw ArgumentError("label word has no tokens: '" + std::string(word) + "'");
    return out;
}

std::string WordTokenizer::token_text(TokenId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab_.size())
        throw LookupError("token id out of range: " + std::to_string(id));
    return vocab_[static_cast<std::size_t>(id)];
}

// BowBackend

BowBackend::BowBackend(std::vector<std::string> word_forms, std::size_t dim, std::uint64_t seed,
                       std::size_t max_length)
    : tok_(std::move(word_forms)), dim_(dim), max_length_(max_length), seed_(seed) {
    if (dim_ == 0) throw ArgumentError("hidden dimension must be positive");
    const std::size_t v = vocab_size();
    params_.assign(v * dim_ + dim_ * dim_ + dim_ + v, 0.0);
    grads_.assign(params_.size(), 0.0);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> init(0.0, 0.1);
    for (std::size_t i = 0; i < v * dim_; ++i) params_[off_E() + i] = init(rng);
    for (std::size_t i = 0; i < dim_ * dim_; ++i) params_[off_A() + i] = init(rng);
}

BowBackend BowBackend::from_corpus(std::span<const std::string> texts,
                                   std::span<const std::string> extra_words, std::size_t dim,
                                   std::uint64_t seed) {
    std::set<std::string> forms;
    for (const auto& text : texts) {
        bool first = true;
        for (const auto& [chunk, preceded] : split_chunks(text)) {
            // keep the forms encode() would emit in either start context
            forms.insert(surface_form(chunk, preceded));
            if (first) forms.insert(surface_form(chunk, true));
            first = false;
        }
    }
    for (const auto& w : extra_words)
        for (const auto& [chunk, preceded] : split_chunks(w)) {
            (void)preceded;
            forms.insert(surface_form(chunk, true));
        }
    return BowBackend(std::vector<std::string>(forms.begin(), forms.end()), dim, seed);
}

BowBackend::Forward BowBackend::forward_hidden(const MaskedSequence& seq) const {
    Forward f;
    f.mean.assign(dim_, 0.0);
    for (TokenId t : seq.ids) {
        if (t == WordTokenizer::kBos || t == WordTokenizer::kEos || t == WordTokenizer::kMask)
            continue;
        f.content.push_back(t);
        const double* row = params_.data() + off_E() + static_cast<std::size_t>(t) * dim_;
        for (std::size_t j = 0; j < dim_; ++j) f.mean[j] += row[j];
    }
    if (!f.content.empty())
        for (double& x : f.mean) x /= static_cast<double>(f.content.size());
    f.hidden.assign(dim_, 0.0);
    const double* A = params_.data() + off_A();
    const double* a = params_.data() + off_a();
    for (std::size_t i = 0; i < dim_; ++i) {
        double z = a[i];
        for (std::size_t j = 0; j < dim_; ++j) z += A[i * dim_ + j] * f.mean[j];
        f.hidden[i] = std::tanh(z);
    }
    return f;
}

VocabLogits BowBackend::mask_logits(const MaskedSequence& seq) const {
    validate_sequence(seq);
    Forward f = forward_hidden(seq);
    VocabLogits vl;
    vl.values.resize(vocab_size());
    const double* b = params_.data() + off_b();
    for (std::size_t w = 0; w < vocab_size(); ++w) {
        const double* row = params_.data() + off_E() + w * dim_;
        double s = b[w];
        for (std::size_t j = 0; j < dim_; ++j) s += row[j] * f.hidden[j];
        vl.values[w] = s;
    }
    return vl;
}

MaskHiddenState BowBackend::mask_hidden_state(const MaskedSequence& seq) const {
    validate_sequence(seq);
    return {forward_hidden(seq).hidden};
}

EmbeddingStore BowBackend::embedding_matrix() const {
    std::vector<float> matrix(vocab_size() * dim_);
    for (std::size_t i = 0; i < vocab_size() * dim_; ++i)
        matrix[i] = static_cast<float>(params_[off_E() + i]);
    return EmbeddingStore(tok_.vocab(), std::move(matrix), dim_);
}

std::span<const double> BowBackend::embedding_row(TokenId id) const {
    return {params_.data() + off_E() + static_cast<std::size_t>(id) * dim_, dim_};
}

double BowBackend::train_step(std::span<const TrainItem> batch, scoring::ClassScorer& scorer,
                              optim::AdamW& opt) {
    if (batch.empty()) throw ArgumentError("empty training batch");
    std::fill(grads_.begin(), grads_.end(), 0.0);
    scorer.zero_param_grads();
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    double* gE = grads_.data() + off_E();
    double* gA = grads_.data() + off_A();
    double* ga = grads_.data() + off_a();
    double* gb = grads_.data() + off_b();
    const double* A = params_.data() + off_A();

    try {
        for (const TrainItem& item : batch) {
            validate_sequence(item.seq);
            Forward f = forward_hidden(item.seq);
            MaskHiddenState h{f.hidden};
            VocabLogits vl;
            if (scorer.needs_logits()) vl = mask_logits(item.seq);
            auto cs = scorer.score(scorer.needs_logits() ? &vl : nullptr,
                                   scorer.needs_hidden() ? &h : nullptr);
            loss += scoring::cross_entropy(cs, item.gold) * inv_n;
            auto d_class = scoring::cross_entropy_grad(cs, item.gold);
            for (double& g : d_class) g *= inv_n;
            auto bw = scorer.backward(scorer.needs_logits() ? &vl : nullptr,
                                      scorer.needs_hidden() ? &h : nullptr, d_class);

            std::vector<double> dh(dim_, 0.0);
            for (auto [t, g] : bw.d_logits) {
                const double* row = params_.data() + off_E() + static_cast<std::size_t>(t) * dim_;
                double* grow = gE + static_cast<std::size_t>(t) * dim_;
                for (std::size_t j = 0; j < dim_; ++j) {
                    dh[j] += g * row[j];
                    grow[j] += g * f.hidden[j];
                }
                gb[static_cast<std::size_t>(t)] += g;
            }
            if (!bw.d_hidden.empty())
                for (std::size_t j = 0; j < dim_; ++j) dh[j] += bw.d_hidden[j];

            std::vector<double> dz(dim_);
            for (std::size_t i = 0; i < dim_; ++i)
                dz[i] = dh[i] * (1.0 - f.hidden[i] * f.hidden[i]);
            for (std::size_t i = 0; i < dim_; ++i) {
                ga[i] += dz[i];
                for (std::size_t j = 0; j < dim_; ++j) gA[i * dim_ + j] += dz[i] * f.mean[j];
            }
            if (!f.content.empty()) {
                std::vector<double> dm(dim_, 0.0);
                for (std::size_t j = 0; j < dim_; ++j)
                    for (std::size_t i = 0; i < dim_; ++i) dm[j] += A[i * dim_ + j] * dz[i];
                double scale = 1.0 / static_cast<double>(f.content.size());
                for (TokenId t : f.content) {
                    double* grow = gE + static_cast<std::size_t>(t) * dim_;
                    for (std::size_t j = 0; j < dim_; ++j) grow[j] += dm[j] * scale;
                }
            }
        }
    } catch (const NumericError& e) {
        throw TrainingError(std::string("training aborted: ") + e.what());
    }

    if (!std::isfinite(loss)) throw TrainingError("non-finite training loss");
    if (trainable_) opt.update(params_, grads_);
    return loss;
}

void BowBackend::set_state(std::span<const double> state) {
    if (state.size() != params_.size())
        throw ArgumentError("backend state size mismatch");
    params_.assign(state.begin(), state.end());
}

void BowBackend::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open checkpoint for writing: " + path);
    out << "BOWLM1\n" << dim_ << " " << max_length_ << " " << seed_ << " "
        << (vocab_size() - WordTokenizer::kNumSpecials) << "\n";
    const auto& vocab = tok_.vocab();
    for (std::size_t i = WordTokenizer::kNumSpecials; i < vocab.size(); ++i) {
        out << vocab[i].size() << " " << vocab[i] << "\n";
    }
    out.write(reinterpret_cast<const char*>(params_.data()),
              static_cast<std::streamsize>(params_.size() * sizeof(double)));
}

BowBackend BowBackend::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open checkpoint: " + path);
    std::string magic;
    std::getline(in, magic);
    if (magic != "BOWLM1") throw ParseError("not a bow checkpoint: " + path);
    std::size_t dim, max_length, count;
    std::uint64_t seed;
    in >> dim >> max_length >> seed >> count;
    in.get();  // newline
    std::vector<std::string> words(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t len;
        in >> len;
        in.get();  // separator space
        words[i].resize(len);
        in.read(words[i].data(), static_cast<std::streamsize>(len));
        in.get();  // newline
    }
    BowBackend backend(std::move(words), dim, seed, max_length);
    in.read(reinterpret_cast<char*>(backend.params_.data()),
            static_cast<std::streamsize>(backend.params_.size() * sizeof(double)));
    if (!in) throw ParseError("truncated bow checkpoint: " + path);
    return backend;
}

}  // namespace verbkit
