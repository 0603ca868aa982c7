#include "verbkit/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "verbkit/bow_backend.hpp"
#include "verbkit/errors.hpp"

namespace verbkit::runner {

using nlohmann::json;

VerbalizerKind verbalizer_kind_from_string(std::string_view name) {
    if (name == "manual") return VerbalizerKind::manual;
    if (name == "soft") return VerbalizerKind::soft;
    if (name == "auto") return VerbalizerKind::automatic;
    if (name == "maven") return VerbalizerKind::maven;
    if (name == "auto+maven" || name == "auto_maven") return VerbalizerKind::auto_maven;
    throw ArgumentError("unknown verbalizer kind: " + std::string(name));
}

std::string_view to_string(VerbalizerKind k) {
    switch (k) {
        case VerbalizerKind::manual: return "manual";
        case VerbalizerKind::soft: return "soft";
        case VerbalizerKind::automatic: return "auto";
        case VerbalizerKind::maven: return "maven";
        case VerbalizerKind::auto_maven: return "auto+maven";
    }
    return "?";
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    cfg.dataset_id = j.value("dataset", "");
    cfg.train_path = j.value("train_path", "");
    cfg.test_path = j.value("test_path", "");
    cfg.data_format = j.value("format", cfg.dataset_id.empty() ? "jsonl" : cfg.dataset_id + "_csv");
    cfg.checkpoint = j.value("checkpoint", "bow-auto");
    cfg.bow_dim = j.value("bow_dim", cfg.bow_dim);
    cfg.bow_seed = j.value("bow_seed", cfg.bow_seed);
    cfg.kind = verbalizer_kind_from_string(j.value("verbalizer", "manual"));
    cfg.verbalizer_file = j.value("verbalizer_file", "");
    cfg.k = j.value("k", cfg.k);
    cfg.k_auto = j.value("k_auto", cfg.k_auto);
    if (j.contains("embeddings")) {
        const auto& e = j.at("embeddings");
        if (e.is_string()) {
            if (e.get<std::string>() != "lm")
                throw ArgumentError("embeddings must be \"lm\" or {path, format}");
        } else {
            cfg.embeddings.path = e.at("path").get<std::string>();
            cfg.embeddings.format = e.at("format").get<std::string>();
        }
    }
    if (j.contains("templates")) cfg.template_ids = j.at("templates").get<std::vector<int>>();
    cfg.template_file = j.value("template_file", "");
    cfg.n = j.value("n", std::size_t{0});
    if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (cfg.seeds.empty()) throw ArgumentError("seeds must be non-empty");
    cfg.strategy = ensemble::strategy_from_string(j.value("ensemble", "logit"));
    if (j.contains("training")) {
        const auto& t = j.at("training");
        cfg.training.lr = t.value("lr", cfg.training.lr);
        cfg.training.epochs = t.value("epochs", cfg.training.epochs);
        cfg.training.batch_size = t.value("batch_size", cfg.training.batch_size);
        cfg.training.weight_decay = t.value("weight_decay", cfg.training.weight_decay);
        cfg.training.beta1 = t.value("beta1", cfg.training.beta1);
        cfg.training.beta2 = t.value("beta2", cfg.training.beta2);
        cfg.training.warmup_frac = t.value("warmup_frac", cfg.training.warmup_frac);
        cfg.training.grad_accum = t.value("grad_accum", cfg.training.grad_accum);
    }
    cfg.max_test = j.value("max_test", std::size_t{0});
    cfg.subset_seed = j.value("subset_seed", std::uint64_t{0});
    return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
    json j{{"dataset", cfg.dataset_id},
           {"train_path", cfg.train_path},
           {"test_path", cfg.test_path},
           {"format", cfg.data_format},
           {"checkpoint", cfg.checkpoint},
           {"verbalizer", std::string(to_string(cfg.kind))},
           {"k", cfg.k},
           {"k_auto", cfg.k_auto},
           {"templates", cfg.template_ids},
           {"n", cfg.n},
           {"seeds", cfg.seeds},
           {"ensemble", std::string(ensemble::to_string(cfg.strategy))},
           {"training",
            {{"lr", cfg.training.lr},
             {"epochs", cfg.training.epochs},
             {"batch_size", cfg.training.batch_size},
             {"weight_decay", cfg.training.weight_decay},
             {"beta1", cfg.training.beta1},
             {"beta2", cfg.training.beta2},
             {"warmup_frac", cfg.training.warmup_frac},
             {"grad_accum", cfg.training.grad_accum}}},
           {"max_test", cfg.max_test},
           {"subset_seed", cfg.subset_seed}};
    if (!cfg.verbalizer_file.empty()) j["verbalizer_file"] = cfg.verbalizer_file;
    if (!cfg.template_file.empty()) j["template_file"] = cfg.template_file;
    if (!cfg.embeddings.path.empty())
        j["embeddings"] = {{"path", cfg.embeddings.path}, {"format", cfg.embeddings.format}};
    else
        j["embeddings"] = "lm";
    if (cfg.checkpoint == "bow-auto") {
        j["bow_dim"] = cfg.bow_dim;
        j["bow_seed"] = cfg.bow_seed;
    }
    return j;
}

ExperimentConfig load_config(const std::string& path) {
    return config_from_json(verbalizer::load_json(path));
}

EvalOutput evaluate(const LmBackend& lm, const templates::Template& t,
                    const scoring::ClassScorer& scorer,
                    std::span<const templates::Example> test) {
    if (test.empty()) throw ArgumentError("evaluation set must be non-empty");
    EvalOutput out;
    out.scores.resize(test.size());
    out.gold.resize(test.size());
    const auto n = static_cast<std::ptrdiff_t>(test.size());
    std::exception_ptr error;

#pragma omp parallel for schedule(dynamic, 8) if (lm.supports_concurrent_eval())
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        if (error) continue;
        try {
            const auto& x = test[static_cast<std::size_t>(i)];
            auto seq = templates::render(t, x, lm.tokenizer(), lm.max_length());
            VocabLogits vl;
            MaskHiddenState h;
            if (scorer.needs_logits()) vl = lm.mask_logits(seq);
            if (scorer.needs_hidden()) h = lm.mask_hidden_state(seq);
            out.scores[static_cast<std::size_t>(i)] =
                scorer.score(scorer.needs_logits() ? &vl : nullptr,
                             scorer.needs_hidden() ? &h : nullptr);
            out.gold[static_cast<std::size_t>(i)] = x.label.value_or(-1);
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);

    std::size_t correct = 0, labeled = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        if (out.gold[i] < 0) continue;
        ++labeled;
        if (out.scores[i].argmax() == out.gold[i]) ++correct;
    }
    out.accuracy = labeled > 0 ? static_cast<double>(correct) / static_cast<double>(labeled) : 0.0;
    return out;
}

namespace {

struct SplitMix64 {
    std::uint64_t state;
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

double valid_accuracy(const LmBackend& lm, const templates::Template& t,
                      const scoring::ClassScorer& scorer,
                      std::span<const templates::Example> valid) {
    if (valid.empty()) return 0.0;
    return evaluate(lm, t, scorer, valid).accuracy;
}

}  // namespace

FineTuneResult fine_tune(LmBackend& lm, const templates::Template& t,
                         scoring::ClassScorer& scorer, const data::FewShotSplit& split,
                         const Hyper& hp) {
    FineTuneResult result;
    if (split.train.empty()) return result;  // zero-shot: state untouched
    if (hp.epochs <= 0 || hp.batch_size <= 0 || hp.grad_accum <= 0)
        throw ArgumentError("invalid training hyperparameters");

    std::vector<TrainItem> items;
    items.reserve(split.train.size());
    for (const auto& x : split.train) {
        if (!x.label) throw ArgumentError("training example has no label");
        items.push_back({templates::render(t, x, lm.tokenizer(), lm.max_length()), *x.label});
    }

    const std::size_t batch = static_cast<std::size_t>(hp.batch_size) *
                              static_cast<std::size_t>(hp.grad_accum);
    const std::size_t steps_per_epoch = (items.size() + batch - 1) / batch;
    optim::AdamWConfig ocfg{hp.lr,        hp.beta1, hp.beta2, 1e-8, hp.weight_decay,
                            hp.warmup_frac, steps_per_epoch * static_cast<std::size_t>(hp.epochs)};
    optim::AdamW model_opt(ocfg, lm.state().size());
    optim::AdamW scorer_opt(ocfg, scorer.params().size());

    std::vector<double> best_state;
    std::vector<double> best_scorer;
    double best_acc = -1.0;
    SplitMix64 rng{split.seed * 0x632B'E593'04B4'49D1ULL + 0x9E37ULL};

    for (int epoch = 0; epoch < hp.epochs; ++epoch) {
        std::vector<std::size_t> order(items.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.next() % i]);

        double epoch_loss = 0.0;
        std::size_t steps = 0;
        for (std::size_t start = 0; start < items.size(); start += batch) {
            std::vector<TrainItem> chunk;
            for (std::size_t i = start; i < std::min(start + batch, items.size()); ++i)
                chunk.push_back(items[order[i]]);
            epoch_loss += lm.train_step(chunk, scorer, model_opt);
            if (!scorer.params().empty())
                scorer_opt.update(scorer.params(), scorer.param_grads());
            ++steps;
        }
        result.losses.push_back(epoch_loss / static_cast<double>(steps));

        double acc = valid_accuracy(lm, t, scorer, split.valid);
        if (acc > best_acc) {
            best_acc = acc;
            best_state = lm.state();
            best_scorer.assign(scorer.params().begin(), scorer.params().end());
            result.best_epoch = epoch;
        }
    }

    if (!best_state.empty() || !lm.state().empty()) lm.set_state(best_state);
    std::copy(best_scorer.begin(), best_scorer.end(), scorer.params().begin());
    result.best_valid_accuracy = best_acc;
    return result;
}

std::unique_ptr<LmBackend> build_backend(const ExperimentConfig& cfg,
                                         const data::Dataset& train) {
    if (cfg.checkpoint != "bow-auto") return make_backend(cfg.checkpoint);
    std::vector<std::string> texts;
    for (const auto& x : train.examples)
        for (const auto& [_, value] : x.fields) texts.push_back(value);
    std::vector<std::string> extra;
    for (const auto& t : select_templates(cfg))
        for (const auto& seg : t.segments)
            if (seg.kind == templates::Segment::Kind::Literal) texts.push_back(seg.text);
    if (cfg.kind != VerbalizerKind::automatic) {
        auto base = base_verbalizer(cfg);
        for (const auto& words : base.words)
            for (const auto& w : words) extra.push_back(w);
    }
    return std::make_unique<BowBackend>(
        BowBackend::from_corpus(texts, extra, cfg.bow_dim, cfg.bow_seed));
}

EmbeddingStore build_embedding_store(const ExperimentConfig& cfg, const LmBackend& lm) {
    if (cfg.embeddings.path.empty()) return lm.embedding_matrix();
    return EmbeddingStore::load_text(cfg.embeddings.path,
                                     embedding_format_from_string(cfg.embeddings.format));
}

verbalizer::Verbalizer base_verbalizer(const ExperimentConfig& cfg) {
    if (!cfg.verbalizer_file.empty())
        return verbalizer::verbalizer_from_json(verbalizer::load_json(cfg.verbalizer_file));
    return verbalizer::manual_verbalizer(cfg.dataset_id);
}

std::vector<templates::Template> select_templates(const ExperimentConfig& cfg) {
    std::vector<templates::Template> all = cfg.template_file.empty()
                                               ? templates::builtin_templates(cfg.dataset_id)
                                               : templates::load_templates_file(cfg.template_file);
    if (cfg.template_ids.empty()) return all;
    std::vector<templates::Template> out;
    for (int id : cfg.template_ids) {
        auto it = std::find_if(all.begin(), all.end(),
                               [id](const templates::Template& t) { return t.id == id; });
        if (it == all.end()) throw ArgumentError("unknown template id " + std::to_string(id));
        out.push_back(*it);
    }
    return out;
}

namespace {

std::string iso_timestamp() {
    auto now = std::chrono::system_clock::now();
    auto t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

std::unique_ptr<scoring::ClassScorer> make_scorer(const ExperimentConfig& cfg,
                                                  const LmBackend& lm,
                                                  const verbalizer::Verbalizer* base,
                                                  const EmbeddingStore* store,
                                                  const templates::Template& t,
                                                  const data::FewShotSplit& split) {
    switch (cfg.kind) {
        case VerbalizerKind::manual:
            return std::make_unique<scoring::MeanLogitScorer>(verbalizer::tokenize(*base, lm));
        case VerbalizerKind::soft:
            return std::make_unique<scoring::SoftScorer>(
                verbalizer::init_soft(*base, *store).prototypes);
        case VerbalizerKind::maven:
            return std::make_unique<scoring::WeightedScorer>(
                verbalizer::tokenize(verbalizer::enrich_maven(*base, *store, cfg.k).verbalizer, lm));
        case VerbalizerKind::automatic: {
            if (split.train.empty())
                throw ArgumentError("automatic verbalizer requires training data (n > 0)");
            auto mined = verbalizer::build_petal(split.train, t, lm, cfg.k_auto);
            return std::make_unique<scoring::MeanLogitScorer>(verbalizer::tokenize(mined, lm));
        }
        case VerbalizerKind::auto_maven: {
            if (split.train.empty())
                throw ArgumentError("auto+maven requires training data (n > 0)");
            auto mined = verbalizer::build_petal(split.train, t, lm, cfg.k_auto);
            return std::make_unique<scoring::WeightedScorer>(
                verbalizer::tokenize(verbalizer::enrich_maven(mined, *store, cfg.k).verbalizer, lm));
        }
    }
    throw ArgumentError("unknown verbalizer kind");
}

}  // namespace

RunReport run_benchmark(const ExperimentConfig& cfg) {
    data::Dataset train;
    const bool needs_train = cfg.n > 0 || cfg.checkpoint == "bow-auto";
    if (needs_train) {
        if (cfg.train_path.empty()) throw ArgumentError("config requires train_path");
        train = data::load_dataset(cfg.train_path, cfg.data_format);
        if (!cfg.dataset_id.empty()) train.id = cfg.dataset_id;
    }
    if (cfg.test_path.empty()) throw ArgumentError("config requires test_path");
    data::Dataset test_ds = data::load_dataset(cfg.test_path, cfg.data_format);

    auto templates_list = select_templates(cfg);
    auto backend = build_backend(cfg, train);

    std::optional<verbalizer::Verbalizer> base;
    if (cfg.kind != VerbalizerKind::automatic && cfg.kind != VerbalizerKind::auto_maven)
        base = base_verbalizer(cfg);
    std::optional<EmbeddingStore> store;
    if (cfg.kind == VerbalizerKind::soft || cfg.kind == VerbalizerKind::maven ||
        cfg.kind == VerbalizerKind::auto_maven)
        store = build_embedding_store(cfg, *backend);

    std::vector<templates::Example> test =
        cfg.max_test > 0 ? data::sample_subset(test_ds, cfg.max_test, cfg.subset_seed)
                         : test_ds.examples;

    RunReport report;
    report.config_echo = config_to_json(cfg);
    report.timestamp = iso_timestamp();
    const std::vector<double> init_state = backend->state();

    for (std::uint64_t seed : cfg.seeds) {
        SeedReport sr;
        sr.seed = seed;
        data::FewShotSplit split =
            cfg.n > 0 ? data::sample_fewshot(train, cfg.n, seed) : data::FewShotSplit{};

        std::vector<const EvalOutput*> member_outputs;
        std::vector<EvalOutput> outputs;
        outputs.reserve(templates_list.size());
        for (const auto& t : templates_list) {
            MemberReport mr;
            mr.template_id = t.id;
            try {
                if (!init_state.empty()) backend->set_state(init_state);
                auto scorer = make_scorer(cfg, *backend, base ? &*base : nullptr,
                                          store ? &*store : nullptr, t, split);
                auto ft = fine_tune(*backend, t, *scorer, split, cfg.training);
                mr.valid_accuracy = ft.best_valid_accuracy;
                outputs.push_back(evaluate(*backend, t, *scorer, test));
                mr.accuracy = outputs.back().accuracy;
            } catch (const TrainingError& e) {
                mr.failed = true;
                mr.failure = e.what();
                outputs.push_back({});
            }
            sr.members.push_back(mr);
        }

        std::vector<std::size_t> ok;
        for (std::size_t m = 0; m < sr.members.size(); ++m)
            if (!sr.members[m].failed) ok.push_back(m);
        if (!ok.empty()) {
            std::size_t correct = 0, labeled = 0;
            for (std::size_t i = 0; i < test.size(); ++i) {
                if (!test[i].label) continue;
                std::vector<ensemble::MemberOutput> members;
                for (std::size_t m : ok)
                    members.push_back({sr.members[m].template_id, outputs[m].scores[i]});
                ++labeled;
                if (ensemble::aggregate(cfg.strategy, members) == *test[i].label) ++correct;
            }
            sr.ensemble_valid = labeled > 0;
            sr.ensemble_accuracy =
                labeled > 0 ? static_cast<double>(correct) / static_cast<double>(labeled) : 0.0;
        }
        report.seeds.push_back(std::move(sr));
    }

    std::tie(report.mean_accuracy, report.std_accuracy) = RunReport::recompute(report.seeds);
    return report;
}

std::pair<double, double> RunReport::recompute(const std::vector<SeedReport>& seeds) {
    std::vector<double> accs;
    for (const auto& s : seeds)
        if (s.ensemble_valid) accs.push_back(s.ensemble_accuracy);
    if (accs.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (double a : accs) mean += a;
    mean /= static_cast<double>(accs.size());
    double var = 0.0;
    for (double a : accs) var += (a - mean) * (a - mean);
    var /= static_cast<double>(accs.size());
    return {mean, std::sqrt(var)};
}

json RunReport::to_json() const {
    json seeds_json = json::array();
    for (const auto& s : seeds) {
        json members = json::array();
        for (const auto& m : s.members) {
            json mj{{"template", m.template_id},
                    {"failed", m.failed},
                    {"accuracy", m.accuracy},
                    {"valid_accuracy", m.valid_accuracy}};
            if (m.failed) mj["failure"] = m.failure;
            members.push_back(mj);
        }
        seeds_json.push_back({{"seed", s.seed},
                              {"members", members},
                              {"ensemble_valid", s.ensemble_valid},
                              {"ensemble_accuracy", s.ensemble_accuracy}});
    }
    return {{"config", config_echo},
            {"stratified_sampling", stratified_sampling},
            {"seeds", seeds_json},
            {"mean_accuracy", mean_accuracy},
            {"std_accuracy", std_accuracy},
            {"timestamp", timestamp}};
}

RunReport RunReport::from_json(const json& j) {
    RunReport r;
    r.config_echo = j.at("config");
    r.stratified_sampling = j.at("stratified_sampling").get<bool>();
    for (const auto& s : j.at("seeds")) {
        SeedReport sr;
        sr.seed = s.at("seed").get<std::uint64_t>();
        for (const auto& m : s.at("members")) {
            MemberReport mr;
            mr.template_id = m.at("template").get<int>();
            mr.failed = m.at("failed").get<bool>();
            mr.accuracy = m.at("accuracy").get<double>();
            mr.valid_accuracy = m.at("valid_accuracy").get<double>();
            if (m.contains("failure")) mr.failure = m.at("failure").get<std::string>();
            sr.members.push_back(mr);
        }
        sr.ensemble_valid = s.at("ensemble_valid").get<bool>();
        sr.ensemble_accuracy = s.at("ensemble_accuracy").get<double>();
        r.seeds.push_back(std::move(sr));
    }
    r.mean_accuracy = j.at("mean_accuracy").get<double>();
    r.std_accuracy = j.at("std_accuracy").get<double>();
    r.timestamp = j.at("timestamp").get<std::string>();
    return r;
}

void save_report(const RunReport& report, const std::string& path) {
    verbalizer::save_json(report.to_json(), path);
}

void export_logits(const LmBackend& lm, const templates::Template& t,
                   const scoring::ClassScorer& scorer, std::span<const templates::Example> examples,
                   const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open logit export file for writing: " + path);
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const auto& x = examples[i];
        auto seq = templates::render(t, x, lm.tokenizer(), lm.max_length());
        VocabLogits vl;
        MaskHiddenState h;
        if (scorer.needs_logits()) vl = lm.mask_logits(seq);
        if (scorer.needs_hidden()) h = lm.mask_hidden_state(seq);
        auto cs = scorer.score(scorer.needs_logits() ? &vl : nullptr,
                               scorer.needs_hidden() ? &h : nullptr);
        json rec{{"id", i}, {"logits", cs.logits}};
        rec["gold"] = x.label ? json(*x.label) : json(nullptr);
        out << rec.dump() << "\n";
    }
}

LogitRecords load_logits(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open logit export file: " + path);
    LogitRecords records;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(std::string("invalid logit record: ") + e.what(), lineno);
        }
        records.scores.push_back({j.at("logits").get<std::vector<double>>()});
        if (j.at("gold").is_null())
            records.gold.push_back(std::nullopt);
        else
            records.gold.push_back(j.at("gold").get<int>());
    }
    return records;
}

}  // namespace verbkit::runner
