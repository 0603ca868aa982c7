#include "verbkit/http_backend.hpp"

#include <sstream>

#include <httplib.h>
#include <json.hpp>

namespace verbkit {

using nlohmann::json;

namespace {

json get_json(httplib::Client& cli, const std::string& path) {
    auto res = cli.Get(path);
    if (!res || res->status != 200)
        throw LookupError("backend server request failed: GET " + path);
    return json::parse(res->body);
}

json post_json(httplib::Client& cli, const std::string& path, const json& body) {
    auto res = cli.Post(path, body.dump(), "application/json");
    if (!res || res->status != 200)
        throw LookupError("backend server request failed: POST " + path);
    return json::parse(res->body);
}

}  // namespace

class HttpTokenizer final : public Tokenizer {
public:
    HttpTokenizer(httplib::Client& cli, const json& info) : cli_(cli) {
        mask_ = info.at("mask_id").get<TokenId>();
        if (!info.at("bos_id").is_null()) bos_ = info.at("bos_id").get<TokenId>();
        if (!info.at("eos_id").is_null()) eos_ = info.at("eos_id").get<TokenId>();
        specials_ = info.at("special_ids").get<std::vector<TokenId>>();
        vocab_ = get_json(cli_, "/vocab").at("tokens").get<std::vector<std::string>>();
    }

    std::vector<TokenId> encode(std::string_view text, bool at_sequence_start) const override {
        return post_json(cli_, "/encode",
                         {{"text", std::string(text)}, {"at_start", at_sequence_start}})
            .at("ids")
            .get<std::vector<TokenId>>();
    }

    std::vector<TokenId> encode_word(std::string_view word) const override {
        return post_json(cli_, "/encode_word", {{"word", std::string(word)}})
            .at("ids")
            .get<std::vector<TokenId>>();
    }

    TokenId mask_id() const override { return mask_; }
    std::optional<TokenId> bos_id() const override { return bos_; }
    std::optional<TokenId> eos_id() const override { return eos_; }
    std::vector<TokenId> special_ids() const override { return specials_; }
    std::size_t vocab_size() const override { return vocab_.size(); }
    std::string token_text(TokenId id) const override {
        if (id < 0 || static_cast<std::size_t>(id) >= vocab_.size())
            throw LookupError("token id out of range: " + std::to_string(id));
        return vocab_[static_cast<std::size_t>(id)];
    }

private:
    httplib::Client& cli_;
    TokenId mask_ = 0;
    std::optional<TokenId> bos_, eos_;
    std::vector<TokenId> specials_;
    std::vector<std::string> vocab_;
};

struct HttpLmBackend::Impl {
    Impl(const std::string& url) : cli(url.c_str()) {
        cli.set_read_timeout(600, 0);
        auto info = get_json(cli, "/info");
        vocab_size = info.at("vocab_size").get<std::size_t>();
        hidden_size = info.at("hidden_size").get<std::size_t>();
        max_length = info.at("max_length").get<std::size_t>();
        tok = std::make_unique<HttpTokenizer>(cli, info);
    }

    mutable httplib::Client cli;
    std::size_t vocab_size = 0, hidden_size = 0, max_length = 0;
    std::unique_ptr<HttpTokenizer> tok;
};

HttpLmBackend::HttpLmBackend(const std::string& base_url)
    : impl_(std::make_unique<Impl>(base_url)) {}

HttpLmBackend::~HttpLmBackend() = default;

const Tokenizer& HttpLmBackend::tokenizer() const { return *impl_->tok; }
std::size_t HttpLmBackend::vocab_size() const { return impl_->vocab_size; }
std::size_t HttpLmBackend::hidden_size() const { return impl_->hidden_size; }
std::size_t HttpLmBackend::max_length() const { return impl_->max_length; }

VocabLogits HttpLmBackend::mask_logits(const MaskedSequence& seq) const {
    validate_sequence(seq);
    auto r = post_json(impl_->cli, "/mask_logits",
                       {{"ids", seq.ids}, {"mask_pos", seq.mask_pos}});
    return {r.at("values").get<std::vector<double>>()};
}

MaskHiddenState HttpLmBackend::mask_hidden_state(const MaskedSequence& seq) const {
    validate_sequence(seq);
    auto r = post_json(impl_->cli, "/mask_hidden",
                       {{"ids", seq.ids}, {"mask_pos", seq.mask_pos}});
    return {r.at("values").get<std::vector<double>>()};
}

EmbeddingStore HttpLmBackend::embedding_matrix() const {
    auto res = impl_->cli.Get("/embeddings");
    if (!res || res->status != 200)
        throw LookupError("backend server request failed: GET /embeddings");
    std::istringstream in(res->body);
    return EmbeddingStore::load_text_stream(in, EmbeddingFormat::word2vec_text);
}

}  // namespace verbkit
