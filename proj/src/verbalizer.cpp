#include "verbkit/verbalizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "verbkit/errors.hpp"

namespace verbkit::verbalizer {

void Verbalizer::validate() const {
    if (labels.size() != words.size())
        throw ArgumentError("verbalizer label and word-list counts differ");
    for (std::size_t y = 0; y < labels.size(); ++y) {
        if (words[y].empty())
            throw ArgumentError("label '" + labels[y] + "' has an empty word list");
        std::set<std::string> seen(words[y].begin(), words[y].end());
        if (seen.size() != words[y].size())
            throw ArgumentError("label '" + labels[y] + "' has duplicate words");
    }
}

Verbalizer verbalizer_from_table(std::vector<std::string> labels,
                                 std::vector<std::vector<std::string>> words) {
    Verbalizer v{std::move(labels), std::move(words)};
    v.validate();
    return v;
}

Verbalizer manual_verbalizer(const std::string& dataset_id) {
    if (dataset_id == "ag") {
        return verbalizer_from_table(
            {"World", "Sports", "Business", "Sci/Tech"},
            {{"world", "politics"}, {"sports"}, {"business"}, {"science", "technology"}});
    }
    if (dataset_id == "dbpedia") {
        return verbalizer_from_table(
            {"Company", "EducationalInstitution", "Artist", "Athlete", "OfficeHolder",
             "MeanOfTransportation", "Building", "NaturalPlace", "Village", "Animal", "Plant",
             "Album", "Film", "WrittenWork"},
            {{"company"},
             {"educational", "institution"},
             {"artist"},
             {"athlete", "sport"},
             {"office"},
             {"transportation"},
             {"building"},
             {"natural", "place"},
             {"village"},
             {"animal"},
             {"plant"},
             {"album"},
             {"film"},
             {"written", "work"}});
    }
    if (dataset_id == "yahoo") {
        return verbalizer_from_table(
            {"Society & Culture", "Science & Mathematics", "Health", "Education & Reference",
             "Computers & Internet", "Sports", "Business & Finance", "Entertainment & Music",
             "Family & Relationships", "Politics & Government"},
            {{"society", "culture"},
             {"science", "mathematics"},
             {"health"},
             {"education", "reference"},
             {"computers", "internet"},
             {"sports"},
             {"business", "finance"},
             {"entertainment", "music"},
             {"family", "relationships"},
             {"politics", "government"}});
    }
    throw ArgumentError("no built-in manual verbalizer for dataset '" + dataset_id + "'");
}

MavenResult enrich_maven(const Verbalizer& v, const EmbeddingStore& store, std::size_t k) {
    v.validate();
    MavenResult result;
    result.verbalizer.labels = v.labels;
    result.verbalizer.entries.resize(v.labels.size());
    for (std::size_t y = 0; y < v.labels.size(); ++y) {
        // word -> entry index, for intra-label duplicate merging
        std::map<std::string, std::size_t> placed;
        auto add = [&](const std::string& word, double weight, const std::string& core) {
            auto it = placed.find(word);
            if (it == placed.end()) {
                placed[word] = result.verbalizer.entries[y].size();
                result.verbalizer.entries[y].push_back({word, weight, core});
            } else if (weight > result.verbalizer.entries[y][it->second].weight) {
                result.verbalizer.entries[y][it->second] = {word, weight, core};
            }
        };
        for (const std::string& core : v.words[y]) {
            auto resolved = store.resolve(core);
            // Core words always enter with weight 1.0 (self-similarity).
            add(resolved.value_or(core), 1.0, core);
            if (!resolved) {
                result.missing_core_words.push_back(core);
                continue;
            }
            for (const Neighbor& nb : store.top_k(*resolved, k)) add(nb.word, nb.similarity, core);
        }
    }
    return result;
}

Verbalizer build_petal(std::span<const templates::Example> train, const templates::Template& t,
                       const LmBackend& lm, std::size_t k_auto) {
    if (k_auto == 0) throw ArgumentError("k_auto must be positive");
    std::size_t num_labels = 0;
    for (const auto& x : train) {
        if (!x.label) throw ArgumentError("PETAL requires labeled examples");
        num_labels = std::max(num_labels, static_cast<std::size_t>(*x.label) + 1);
    }
    std::vector<std::size_t> counts(num_labels, 0);
    const std::size_t vsize = lm.vocab_size();
    // Per-label and total sums of log-softmax scores; mean-negative follows
    // from (total - label sum).
    std::vector<std::vector<double>> label_sum(num_labels, std::vector<double>(vsize, 0.0));
    std::vector<double> total_sum(vsize, 0.0);

    for (const auto& x : train) {
        auto seq = templates::render(t, x, lm.tokenizer(), lm.max_length());
        auto vl = lm.mask_logits(seq);
        double mx = *std::max_element(vl.values.begin(), vl.values.end());
        double z = 0.0;
        for (double val : vl.values) z += std::exp(val - mx);
        double logz = std::log(z) + mx;
        auto y = static_cast<std::size_t>(*x.label);
        ++counts[y];
        for (std::size_t w = 0; w < vsize; ++w) {
            double ls = vl.values[w] - logz;
            label_sum[y][w] += ls;
            total_sum[w] += ls;
        }
    }
    std::size_t total = train.size();
    for (std::size_t y = 0; y < num_labels; ++y)
        if (counts[y] == 0)
            throw ArgumentError("PETAL: label " + std::to_string(y) + " has no positive examples");

    std::set<TokenId> excluded;
    for (TokenId s : lm.tokenizer().special_ids()) excluded.insert(s);

    Verbalizer out;
    out.labels.resize(num_labels);
    out.words.resize(num_labels);
    for (std::size_t y = 0; y < num_labels; ++y) {
        out.labels[y] = "label_" + std::to_string(y);
        std::vector<std::size_t> cand;
        cand.reserve(vsize);
        for (std::size_t w = 0; w < vsize; ++w)
            if (!excluded.contains(static_cast<TokenId>(w))) cand.push_back(w);
        std::vector<double> score(vsize);
        double n_pos = static_cast<double>(counts[y]);
        double n_neg = static_cast<double>(total - counts[y]);
        for (std::size_t w : cand) {
            double mean_pos = label_sum[y][w] / n_pos;
            double mean_neg = n_neg > 0.0 ? (total_sum[w] - label_sum[y][w]) / n_neg : 0.0;
            score[w] = mean_pos - mean_neg;
        }
        auto better = [&score](std::size_t a, std::size_t b) {
            if (score[a] != score[b]) return score[a] > score[b];
            return a < b;
        };
        std::size_t take = std::min(k_auto, cand.size());
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take),
                          cand.end(), better);
        for (std::size_t i = 0; i < take; ++i)
            out.words[y].push_back(lm.tokenizer().token_text(static_cast<TokenId>(cand[i])));
    }
    out.validate();
    return out;
}

SoftVerbalizer init_soft(const Verbalizer& v, const EmbeddingStore& store) {
    v.validate();
    SoftVerbalizer sv;
    sv.labels = v.labels;
    sv.prototypes.resize(v.labels.size());
    for (std::size_t y = 0; y < v.labels.size(); ++y) {
        std::vector<double> proto(store.dim(), 0.0);
        for (const std::string& word : v.words[y]) {
            auto resolved = store.resolve(word);
            if (!resolved)
                throw LookupError("soft verbalizer word not in embedding store: '" + word + "'");
            auto vec = store.vector_of(*resolved);
            for (std::size_t j = 0; j < vec.size(); ++j) proto[j] += vec[j];
        }
        for (double& x : proto) x /= static_cast<double>(v.words[y].size());
        sv.prototypes[y] = std::move(proto);
    }
    return sv;
}

scoring::TokenizedVerbalizer tokenize(const Verbalizer& v, const LmBackend& lm) {
    v.validate();
    scoring::TokenizedVerbalizer tv;
    tv.labels.resize(v.labels.size());
    for (std::size_t y = 0; y < v.labels.size(); ++y)
        for (const auto& w : v.words[y]) tv.labels[y].push_back(lm.tokenize_label_word(w));
    return tv;
}

scoring::TokenizedWeightedVerbalizer tokenize(const WeightedVerbalizer& wv, const LmBackend& lm) {
    scoring::TokenizedWeightedVerbalizer out;
    out.labels.resize(wv.labels.size());
    for (std::size_t y = 0; y < wv.labels.size(); ++y)
        for (const auto& e : wv.entries[y])
            out.labels[y].push_back({lm.tokenize_label_word(e.word), e.weight});
    return out;
}

void apply_weights(WeightedVerbalizer& wv, std::span<const double> flat_weights) {
    std::size_t i = 0;
    for (auto& label : wv.entries)
        for (auto& e : label) {
            if (i >= flat_weights.size()) throw ArgumentError("weight vector too short");
            e.weight = flat_weights[i++];
        }
    if (i != flat_weights.size()) throw ArgumentError("weight vector too long");
}

nlohmann::json to_json(const Verbalizer& v) {
    nlohmann::json entries = nlohmann::json::array();
    for (std::size_t y = 0; y < v.labels.size(); ++y)
        entries.push_back({{"label", v.labels[y]}, {"words", v.words[y]}});
    return {{"verbalizer", entries}};
}

nlohmann::json to_json(const WeightedVerbalizer& wv) {
    nlohmann::json entries = nlohmann::json::array();
    for (std::size_t y = 0; y < wv.labels.size(); ++y) {
        std::vector<std::string> words, cores;
        std::vector<double> weights;
        for (const auto& e : wv.entries[y]) {
            words.push_back(e.word);
            weights.push_back(e.weight);
            cores.push_back(e.core);
        }
        entries.push_back({{"label", wv.labels[y]},
                           {"words", words},
                           {"weights", weights},
                           {"cores", cores}});
    }
    return {{"verbalizer", entries}};
}

Verbalizer verbalizer_from_json(const nlohmann::json& j) {
    Verbalizer v;
    for (const auto& e : j.at("verbalizer")) {
        v.labels.push_back(e.at("label").get<std::string>());
        v.words.push_back(e.at("words").get<std::vector<std::string>>());
    }
    v.validate();
    return v;
}

WeightedVerbalizer weighted_from_json(const nlohmann::json& j) {
    WeightedVerbalizer wv;
    for (const auto& e : j.at("verbalizer")) {
        wv.labels.push_back(e.at("label").get<std::string>());
        auto words = e.at("words").get<std::vector<std::string>>();
        std::vector<double> weights(words.size(), 1.0);
        if (e.contains("weights")) weights = e.at("weights").get<std::vector<double>>();
        std::vector<std::string> cores = words;
        if (e.contains("cores")) cores = e.at("cores").get<std::vector<std::string>>();
        if (weights.size() != words.size() || cores.size() != words.size())
            throw ParseError("verbalizer entry arrays have inconsistent lengths for label '" +
                             wv.labels.back() + "'");
        std::vector<WeightedEntry> entries;
        for (std::size_t i = 0; i < words.size(); ++i)
            entries.push_back({words[i], weights[i], cores[i]});
        wv.entries.push_back(std::move(entries));
    }
    return wv;
}

void save_json(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open file for writing: " + path);
    out << j.dump(2) << "\n";
}

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    try {
        nlohmann::json j;
        in >> j;
        return j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("invalid JSON in " + path + ": " + e.what());
    }
}

}  // namespace verbkit::verbalizer
