#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "verbkit/dataset.hpp"
#include "verbkit/ensemble.hpp"
#include "verbkit/lm_backend.hpp"
#include "verbkit/verbalizer.hpp"

namespace verbkit::runner {

// Fine-tuning defaults: AdamW, lr 1e-5, 10 epochs, batch 4, weight decay
// 0.01, betas (0.9, 0.999), linear warmup over the first 10% of steps then
// linear decay to zero.
struct Hyper {
    double lr = 1e-5;
    int epochs = 10;
    int batch_size = 4;
    double weight_decay = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double warmup_frac = 0.1;
    int grad_accum = 1;
};

enum class VerbalizerKind { manual, soft, automatic, maven, auto_maven };
VerbalizerKind verbalizer_kind_from_string(std::string_view name);
std::string_view to_string(VerbalizerKind k);

struct EmbeddingSource {
    std::string path;    // empty = the LM's own embedding layer
    std::string format;  // "word2vec" | "glove" when path is set
};

struct ExperimentConfig {
    std::string dataset_id;     // ag | dbpedia | yahoo | custom
    std::string train_path;
    std::string test_path;
    std::string data_format;    // ag_csv | dbpedia_csv | yahoo_csv | jsonl
    std::string checkpoint;     // bow:<path>, <path>.bowlm, bow-auto, http(s)://...
    std::size_t bow_dim = 64;   // bow-auto only
    std::uint64_t bow_seed = 7;
    VerbalizerKind kind = VerbalizerKind::manual;
    std::string verbalizer_file;  // overrides the built-in manual table
    std::size_t k = 15;
    std::size_t k_auto = 1;
    EmbeddingSource embeddings;
    std::vector<int> template_ids;  // empty = all built-ins
    std::string template_file;
    std::size_t n = 0;
    std::vector<std::uint64_t> seeds = {0};
    ensemble::Strategy strategy = ensemble::Strategy::logit;
    Hyper training;
    std::size_t max_test = 0;  // 0 = full test set
    std::uint64_t subset_seed = 0;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::string& path);

struct EvalOutput {
    double accuracy = 0.0;
    std::vector<scoring::ClassScores> scores;  // per example
    std::vector<int> gold;
};

EvalOutput evaluate(const LmBackend& lm, const templates::Template& t,
                    const scoring::ClassScorer& scorer,
                    std::span<const templates::Example> test);

struct FineTuneResult {
    double best_valid_accuracy = 0.0;
    int best_epoch = -1;  // -1 for zero-shot (no training)
    std::vector<double> losses;  // one mean loss per epoch
};

// Trains backend + scorer parameters jointly; restores the epoch checkpoint
// with the highest validation accuracy (ties -> earliest epoch). An empty
// split is zero-shot: the state is returned untouched.
FineTuneResult fine_tune(LmBackend& lm, const templates::Template& t,
                         scoring::ClassScorer& scorer, const data::FewShotSplit& split,
                         const Hyper& hp);

struct MemberReport {
    int template_id = 0;
    bool failed = false;
    std::string failure;
    double accuracy = 0.0;
    double valid_accuracy = 0.0;
};

struct SeedReport {
    std::uint64_t seed = 0;
    std::vector<MemberReport> members;
    bool ensemble_valid = false;
    double ensemble_accuracy = 0.0;
};

struct RunReport {
    nlohmann::json config_echo;
    bool stratified_sampling = true;
    std::vector<SeedReport> seeds;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;  // population std over per-seed ensembles
    std::string timestamp;

    nlohmann::json to_json() const;
    static RunReport from_json(const nlohmann::json& j);
    // Recompute mean/std from the per-seed ensemble accuracies.
    static std::pair<double, double> recompute(const std::vector<SeedReport>& seeds);
};

RunReport run_benchmark(const ExperimentConfig& cfg);
void save_report(const RunReport& report, const std::string& path);

// One JSONL record per example: {"id", "gold", "logits"}.
void export_logits(const LmBackend& lm, const templates::Template& t,
                   const scoring::ClassScorer& scorer, std::span<const templates::Example> examples,
                   const std::string& path);

struct LogitRecords {
    std::vector<scoring::ClassScores> scores;
    std::vector<std::optional<int>> gold;
};
LogitRecords load_logits(const std::string& path);

// Shared plumbing, exposed for the CLI and tests.
std::unique_ptr<LmBackend> build_backend(const ExperimentConfig& cfg, const data::Dataset& train);
EmbeddingStore build_embedding_store(const ExperimentConfig& cfg, const LmBackend& lm);
verbalizer::Verbalizer base_verbalizer(const ExperimentConfig& cfg);
std::vector<templates::Template> select_templates(const ExperimentConfig& cfg);

}  // namespace verbkit::runner
