// verbkit — prompt-based few-shot text classification from the command line.

#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "verbkit/bow_backend.hpp"
#include "verbkit/errors.hpp"
#include "verbkit/runner.hpp"

namespace {

using namespace verbkit;

void print_report(const runner::RunReport& report) {
    for (const auto& s : report.seeds) {
        std::cout << "seed " << s.seed << ":";
        for (const auto& m : s.members) {
            std::cout << "  T" << m.template_id << "=";
            if (m.failed)
                std::cout << "FAILED";
            else
                std::cout << m.accuracy;
        }
        if (s.ensemble_valid) std::cout << "  ensemble=" << s.ensemble_accuracy;
        std::cout << "\n";
    }
    std::cout << "accuracy: " << report.mean_accuracy << " +- " << report.std_accuracy << "\n";
}

int cmd_run(const std::string& config_path, const std::string& out_path) {
    auto cfg = runner::load_config(config_path);
    auto report = runner::run_benchmark(cfg);
    print_report(report);
    if (!out_path.empty()) {
        runner::save_report(report, out_path);
        std::cout << "report written to " << out_path << "\n";
    }
    return 0;
}

int cmd_neighbors(const std::string& word, std::size_t k, const std::string& embeddings,
                  const std::string& format, const std::string& checkpoint) {
    std::optional<EmbeddingStore> store;
    if (embeddings == "lm") {
        if (checkpoint.empty())
            throw ArgumentError("--embeddings lm requires --checkpoint");
        store = make_backend(checkpoint)->embedding_matrix();
    } else {
        store = EmbeddingStore::load_text(embeddings, embedding_format_from_string(format));
    }
    auto resolved = store->resolve(word);
    if (!resolved) throw LookupError("word not found in embedding vocabulary: '" + word + "'");
    std::cout << "neighbors of '" << *resolved << "':\n";
    for (const auto& nb : store->top_k(*resolved, k))
        std::cout << "  " << nb.similarity << "  '" << nb.word << "'\n";
    return 0;
}

int cmd_export_logits(const std::string& config_path, int template_id,
                      const std::string& out_path) {
    auto cfg = runner::load_config(config_path);
    data::Dataset train;
    if (!cfg.train_path.empty()) train = data::load_dataset(cfg.train_path, cfg.data_format);
    data::Dataset test = data::load_dataset(cfg.test_path, cfg.data_format);
    auto backend = runner::build_backend(cfg, train);

    auto all = runner::select_templates(cfg);
    auto it = std::find_if(all.begin(), all.end(),
                           [&](const templates::Template& t) { return t.id == template_id; });
    if (it == all.end()) throw ArgumentError("unknown template id " + std::to_string(template_id));

    auto base = runner::base_verbalizer(cfg);
    std::unique_ptr<scoring::ClassScorer> scorer;
    if (cfg.kind == runner::VerbalizerKind::maven) {
        auto store = runner::build_embedding_store(cfg, *backend);
        scorer = std::make_unique<scoring::WeightedScorer>(
            verbalizer::tokenize(verbalizer::enrich_maven(base, store, cfg.k).verbalizer, *backend));
    } else {
        scorer = std::make_unique<scoring::MeanLogitScorer>(verbalizer::tokenize(base, *backend));
    }

    std::vector<templates::Example> examples =
        cfg.max_test > 0 ? data::sample_subset(test, cfg.max_test, cfg.subset_seed)
                         : test.examples;
    runner::export_logits(*backend, *it, *scorer, examples, out_path);
    std::cout << examples.size() << " records written to " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"prompt-based few-shot text classification toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_path;
    auto* run = app.add_subcommand("run", "run a benchmark described by a config file");
    run->add_option("--config", config_path, "config JSON file")->required();
    run->add_option("--out", out_path, "write the run report here");

    // zero-shot: a config-free convenience wrapper around run with n = 0
    std::string zs_dataset, zs_test, zs_train, zs_format, zs_checkpoint,
        zs_verbalizer = "manual", zs_ensemble = "logit";
    std::size_t zs_k = 15, zs_max_test = 0;
    auto* zs = app.add_subcommand("zero-shot", "zero-shot evaluation, no fine-tuning");
    zs->add_option("--dataset", zs_dataset, "ag | dbpedia | yahoo")->required();
    zs->add_option("--test", zs_test, "test split file")->required();
    zs->add_option("--train", zs_train, "train split file (needed for the bow-auto vocabulary)");
    zs->add_option("--format", zs_format, "data format (default <dataset>_csv)");
    zs->add_option("--checkpoint", zs_checkpoint, "backend checkpoint")->required();
    zs->add_option("--verbalizer", zs_verbalizer, "manual | soft | maven");
    zs->add_option("--k", zs_k, "MaVEN neighborhood size");
    zs->add_option("--ensemble", zs_ensemble, "vote | proba | logit");
    zs->add_option("--max-test", zs_max_test, "evaluate on a fixed random subset");

    std::string nb_word, nb_embeddings = "lm", nb_format = "glove", nb_checkpoint;
    std::size_t nb_k = 15;
    auto* nb = app.add_subcommand("neighbors", "nearest neighbors in an embedding space");
    nb->add_option("--word", nb_word)->required();
    nb->add_option("--k", nb_k);
    nb->add_option("--embeddings", nb_embeddings, "'lm' or a path to a text embedding file");
    nb->add_option("--format", nb_format, "word2vec | glove (for file embeddings)");
    nb->add_option("--checkpoint", nb_checkpoint, "backend for --embeddings lm");

    int el_template = 0;
    std::string el_config, el_out;
    auto* el = app.add_subcommand("export-logits", "write per-example class logits as JSONL");
    el->add_option("--config", el_config)->required();
    el->add_option("--template", el_template, "template id");
    el->add_option("--out", el_out)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, out_path);
        if (zs->parsed()) {
            nlohmann::json j{{"dataset", zs_dataset},   {"test_path", zs_test},
                             {"checkpoint", zs_checkpoint}, {"verbalizer", zs_verbalizer},
                             {"k", zs_k},               {"n", 0},
                             {"ensemble", zs_ensemble}, {"max_test", zs_max_test}};
            if (!zs_train.empty()) j["train_path"] = zs_train;
            if (!zs_format.empty()) j["format"] = zs_format;
            auto cfg = runner::config_from_json(j);
            print_report(runner::run_benchmark(cfg));
            return 0;
        }
        if (nb->parsed())
            return cmd_neighbors(nb_word, nb_k, nb_embeddings, nb_format, nb_checkpoint);
        if (el->parsed()) return cmd_export_logits(el_config, el_template, el_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
