#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "verbkit/embedding_store.hpp"
#include "verbkit/lm_backend.hpp"
#include "verbkit/scoring.hpp"
#include "verbkit/template_engine.hpp"

namespace verbkit::verbalizer {

// Map from each label to an ordered list of label words.
struct Verbalizer {
    std::vector<std::string> labels;
    std::vector<std::vector<std::string>> words;  // words[y], non-empty, distinct

    void validate() const;
};

// A label word together with its trainable weight q and the core word whose
// neighborhood introduced it.
struct WeightedEntry {
    std::string word;
    double weight = 1.0;
    std::string core;

    bool operator==(const WeightedEntry&) const = default;
};

struct WeightedVerbalizer {
    std::vector<std::string> labels;
    std::vector<std::vector<WeightedEntry>> entries;
};

struct SoftVerbalizer {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> prototypes;  // one per label, hidden size
};

// Built-in manual verbalizers for ag, dbpedia, yahoo.
Verbalizer manual_verbalizer(const std::string& dataset_id);
Verbalizer verbalizer_from_table(std::vector<std::string> labels,
                                 std::vector<std::vector<std::string>> words);

struct MavenResult {
    WeightedVerbalizer verbalizer;
    // Core words not resolvable in the store; their neighborhood degenerates
    // to the core word alone.
    std::vector<std::string> missing_core_words;
};

// v̂(y) = union of {w0} ∪ top-k(w0) over core words w0 of v(y). Weights start
// at s(w, w0) for neighbors and 1.0 for core words; an intra-label duplicate
// keeps the provenance with the higher similarity.
MavenResult enrich_maven(const Verbalizer& v, const EmbeddingStore& store, std::size_t k);

// PETAL label-word mining: per label, rank every candidate token by the mean
// positive log-softmax score minus the mean negative one; keep the top
// k_auto, ties broken by ascending vocabulary index.
Verbalizer build_petal(std::span<const templates::Example> train, const templates::Template& t,
                       const LmBackend& lm, std::size_t k_auto);

// Per-label prototype = mean of the store vectors of the manual words.
SoftVerbalizer init_soft(const Verbalizer& v, const EmbeddingStore& store);

// Tokenized views for scoring.
scoring::TokenizedVerbalizer tokenize(const Verbalizer& v, const LmBackend& lm);
scoring::TokenizedWeightedVerbalizer tokenize(const WeightedVerbalizer& wv, const LmBackend& lm);

// Write trained weights back into the verbalizer layout.
void apply_weights(WeightedVerbalizer& wv, std::span<const double> flat_weights);

nlohmann::json to_json(const Verbalizer& v);
nlohmann::json to_json(const WeightedVerbalizer& wv);
Verbalizer verbalizer_from_json(const nlohmann::json& j);
WeightedVerbalizer weighted_from_json(const nlohmann::json& j);
void save_json(const nlohmann::json& j, const std::string& path);
nlohmann::json load_json(const std::string& path);

}  // namespace verbkit::verbalizer
