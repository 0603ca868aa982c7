#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "support.hpp"
#include "verbkit/bow_backend.hpp"
#include "verbkit/errors.hpp"
#include "verbkit/verbalizer.hpp"

using namespace verbkit;
using namespace verbkit::verbalizer;

TEST_CASE("built-in manual verbalizers") {
    auto ag = manual_verbalizer("ag");
    REQUIRE(ag.labels.size() == 4);
    CHECK(ag.labels == std::vector<std::string>{"World", "Sports", "Business", "Sci/Tech"});
    CHECK(ag.words[0] == std::vector<std::string>{"world", "politics"});
    CHECK(ag.words[1] == std::vector<std::string>{"sports"});
    CHECK(ag.words[2] == std::vector<std::string>{"business"});
    CHECK(ag.words[3] == std::vector<std::string>{"science", "technology"});

    auto db = manual_verbalizer("dbpedia");
    CHECK(db.labels.size() == 14);
    CHECK(db.words[5] == std::vector<std::string>{"transportation"});
    CHECK(db.words[13] == std::vector<std::string>{"written", "work"});

    auto yh = manual_verbalizer("yahoo");
    CHECK(yh.labels.size() == 10);
    CHECK(yh.words[4] == std::vector<std::string>{"computers", "internet"});

    CHECK_THROWS_AS(manual_verbalizer("imdb"), ArgumentError);
}

TEST_CASE("verbalizer validation") {
    CHECK_THROWS_AS(verbalizer_from_table({"a", "b"}, {{"x"}}), ArgumentError);
    CHECK_THROWS_AS(verbalizer_from_table({"a"}, {{}}), ArgumentError);
    CHECK_THROWS_AS(verbalizer_from_table({"a"}, {{"x", "x"}}), ArgumentError);
    CHECK_NOTHROW(verbalizer_from_table({"a"}, {{"x", "y"}}));
}

namespace {

// 2-d store with controlled geometry around two cores.
EmbeddingStore geometry_store() {
    std::vector<std::string> vocab = {" east", " near-east", " north", " shared", " west",
                                      "bare-core", " far"};
    std::vector<float> m = {
        1.0f,  0.0f,   // " east"
        10.0f, 1.0f,   // " near-east": cos ~ 0.995 with east
        0.0f,  1.0f,   // " north"
        1.0f,  1.0f,   // " shared": cos 0.707 with both cores
        -1.0f, 0.0f,   // " west"
        0.0f,  2.0f,   // "bare-core" (parallel to north)
        -1.0f, -1.0f,  // " far"
    };
    return EmbeddingStore(std::move(vocab), std::move(m), 2);
}

}  // namespace

TEST_CASE("enrich_maven expands cores with weighted neighbors") {
    auto store = geometry_store();
    auto v = verbalizer_from_table({"L0"}, {{"east"}});
    auto res = enrich_maven(v, store, 2);
    CHECK(res.missing_core_words.empty());
    REQUIRE(res.verbalizer.entries.size() == 1);
    const auto& e = res.verbalizer.entries[0];
    REQUIRE(e.size() == 3);  // core + 2 neighbors
    CHECK(e[0].word == " east");  // resolved to the spaced form
    CHECK(e[0].weight == 1.0);
    CHECK(e[0].core == "east");
    CHECK(e[1].word == " near-east");
    CHECK(e[1].weight == doctest::Approx(store.cosine(" east", " near-east")));
    CHECK(e[2].word == " shared");
    CHECK(e[2].weight == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("enrich_maven k=0 degenerates to the manual core words") {
    auto store = geometry_store();
    auto v = verbalizer_from_table({"L0", "L1"}, {{"east", "west"}, {"north"}});
    auto res = enrich_maven(v, store, 0);
    REQUIRE(res.verbalizer.entries.size() == 2);
    REQUIRE(res.verbalizer.entries[0].size() == 2);
    CHECK(res.verbalizer.entries[0][0].word == " east");
    CHECK(res.verbalizer.entries[0][1].word == " west");
    for (const auto& label : res.verbalizer.entries)
        for (const auto& entry : label) CHECK(entry.weight == 1.0);
}

TEST_CASE("enrich_maven merges intra-label duplicates keeping the higher weight") {
    auto store = geometry_store();
    // both cores pull in " shared" as a neighbor; "north" also reaches
    // "bare-core" (parallel => cosine 1.0 but it is a different word)
    auto v = verbalizer_from_table({"L0"}, {{"east", "north"}});
    auto res = enrich_maven(v, store, 3);
    const auto& e = res.verbalizer.entries[0];
    std::size_t shared_count = 0, shared_idx = 0;
    for (std::size_t i = 0; i < e.size(); ++i)
        if (e[i].word == " shared") {
            ++shared_count;
            shared_idx = i;
        }
    CHECK(shared_count == 1);
    // cos(shared, east) == cos(shared, north); merged entry keeps the first
    CHECK(e[shared_idx].weight == doctest::Approx(1.0 / std::sqrt(2.0)));

    // a core that also appears as another core's neighbor keeps weight 1.0
    auto v2 = verbalizer_from_table({"L0"}, {{"north", "bare-core"}});
    auto res2 = enrich_maven(v2, store, 6);
    for (const auto& entry : res2.verbalizer.entries[0])
        if (entry.word == "bare-core") CHECK(entry.weight == 1.0);
}

TEST_CASE("enrich_maven reports unresolvable cores and keeps them degenerate") {
    auto store = geometry_store();
    auto v = verbalizer_from_table({"L0"}, {{"east", "atlantis"}});
    auto res = enrich_maven(v, store, 2);
    CHECK(res.missing_core_words == std::vector<std::string>{"atlantis"});
    const auto& e = res.verbalizer.entries[0];
    auto it = std::find_if(e.begin(), e.end(),
                           [](const WeightedEntry& w) { return w.word == "atlantis"; });
    REQUIRE(it != e.end());
    CHECK(it->weight == 1.0);
    CHECK(it->core == "atlantis");
}

TEST_CASE("PETAL picks the planted separating token") {
    // vocabulary: per-class marker words plus candidate label tokens
    std::vector<std::string> forms = {" classA", " classB", " tokA", " tokB", " noise"};
    testsup::StubLm lm(forms, 4);
    const auto& tok = lm.word_tok();
    TokenId markerA = tok.encode("classA", false)[0];
    TokenId tokA = tok.encode("tokA", false)[0];
    TokenId tokB = tok.encode("tokB", false)[0];

    lm.logit_fn = [&](const MaskedSequence& seq) {
        bool is_a = std::find(seq.ids.begin(), seq.ids.end(), markerA) != seq.ids.end();
        std::vector<double> v(lm.vocab_size(), 0.0);
        v[static_cast<std::size_t>(is_a ? tokA : tokB)] = 5.0;
        return v;
    };

    templates::Template t{0, {templates::Segment::mask(), templates::Segment::field("x")}};
    std::vector<templates::Example> train;
    for (int i = 0; i < 4; ++i) {
        templates::Example a, b;
        a.fields["x"] = "classA";
        a.label = 0;
        b.fields["x"] = "classB";
        b.label = 1;
        train.push_back(a);
        train.push_back(b);
    }

    auto v = build_petal(train, t, lm, 1);
    REQUIRE(v.labels.size() == 2);
    CHECK(v.labels[0] == "label_0");
    CHECK(v.words[0] == std::vector<std::string>{" tokA"});
    CHECK(v.words[1] == std::vector<std::string>{" tokB"});

    SUBCASE("selection is invariant to a constant logit shift") {
        auto base = lm.logit_fn;
        lm.logit_fn = [base](const MaskedSequence& seq) {
            auto v = base(seq);
            for (double& x : v) x += 123.0;
            return v;
        };
        auto shifted = build_petal(train, t, lm, 1);
        CHECK(shifted.words == v.words);
    }

    SUBCASE("k_auto > 1 keeps ranked candidates, specials never selected") {
        auto wide = build_petal(train, t, lm, 3);
        CHECK(wide.words[0].size() == 3);
        CHECK(wide.words[0][0] == " tokA");
        for (const auto& words : wide.words)
            for (const auto& w : words) {
                CHECK(w != "<mask>");
                CHECK(w != "<s>");
                CHECK(w != "</s>");
                CHECK(w != "<unk>");
            }
    }
}

TEST_CASE("PETAL tie-break and input validation") {
    std::vector<std::string> forms = {" classA", " classB", " tokA", " tokB"};
    testsup::StubLm lm(forms, 4);
    lm.logit_fn = [&](const MaskedSequence&) {
        return std::vector<double>(lm.vocab_size(), 1.0);  // all tied
    };
    templates::Template t{0, {templates::Segment::mask(), templates::Segment::field("x")}};
    std::vector<templates::Example> train;
    templates::Example a, b;
    a.fields["x"] = "classA";
    a.label = 0;
    b.fields["x"] = "classB";
    b.label = 1;
    train = {a, b};

    // ties resolve to the lowest non-special vocabulary index
    auto v = build_petal(train, t, lm, 2);
    CHECK(v.words[0] == std::vector<std::string>{" classA", " classB"});

    CHECK_THROWS_AS(build_petal(train, t, lm, 0), ArgumentError);

    templates::Example unlabeled;
    unlabeled.fields["x"] = "classA";
    std::vector<templates::Example> bad = {unlabeled};
    CHECK_THROWS_AS(build_petal(bad, t, lm, 1), ArgumentError);

    // a label index with no examples
    templates::Example gap = a;
    gap.label = 2;
    std::vector<templates::Example> sparse = {a, gap};
    CHECK_THROWS_AS(build_petal(sparse, t, lm, 1), ArgumentError);
}

TEST_CASE("init_soft averages resolved core vectors") {
    auto store = geometry_store();
    auto v = verbalizer_from_table({"L0", "L1"}, {{"east", "north"}, {"west"}});
    auto sv = init_soft(v, store);
    REQUIRE(sv.prototypes.size() == 2);
    CHECK(sv.prototypes[0][0] == doctest::Approx(0.5));  // mean of (1,0) and (0,1)
    CHECK(sv.prototypes[0][1] == doctest::Approx(0.5));
    CHECK(sv.prototypes[1][0] == doctest::Approx(-1.0));

    auto bad = verbalizer_from_table({"L0"}, {{"atlantis"}});
    CHECK_THROWS_AS(init_soft(bad, store), LookupError);
}

TEST_CASE("tokenize maps words through the backend tokenizer") {
    BowBackend lm({" world", " politics", " sports"}, 4, 1);
    auto v = verbalizer_from_table({"World", "Sports"}, {{"world", "politics"}, {"sports"}});
    auto tv = tokenize(v, lm);
    REQUIRE(tv.labels.size() == 2);
    REQUIRE(tv.labels[0].size() == 2);
    CHECK(lm.tokenizer().token_text(tv.labels[0][0][0]) == " world");
    CHECK(lm.tokenizer().token_text(tv.labels[1][0][0]) == " sports");

    WeightedVerbalizer wv;
    wv.labels = {"World"};
    wv.entries = {{{"world", 0.9, "world"}, {"politics", 0.4, "world"}}};
    auto twv = tokenize(wv, lm);
    REQUIRE(twv.labels[0].size() == 2);
    CHECK(twv.labels[0][0].weight == 0.9);
    CHECK(twv.labels[0][1].weight == 0.4);
}

TEST_CASE("apply_weights writes a flat vector back, strict on length") {
    WeightedVerbalizer wv;
    wv.labels = {"a", "b"};
    wv.entries = {{{"x", 1.0, "x"}, {"y", 1.0, "x"}}, {{"z", 1.0, "z"}}};
    std::vector<double> w = {0.1, 0.2, 0.3};
    apply_weights(wv, w);
    CHECK(wv.entries[0][0].weight == 0.1);
    CHECK(wv.entries[0][1].weight == 0.2);
    CHECK(wv.entries[1][0].weight == 0.3);
    std::vector<double> too_short = {0.1};
    CHECK_THROWS_AS(apply_weights(wv, too_short), ArgumentError);
    std::vector<double> too_long = {0.1, 0.2, 0.3, 0.4};
    CHECK_THROWS_AS(apply_weights(wv, too_long), ArgumentError);
}

TEST_CASE("verbalizer JSON round-trip") {
    auto v = manual_verbalizer("ag");
    auto back = verbalizer_from_json(to_json(v));
    CHECK(back.labels == v.labels);
    CHECK(back.words == v.words);
}

TEST_CASE("weighted verbalizer JSON round-trip preserves weights and cores") {
    WeightedVerbalizer wv;
    wv.labels = {"World", "Sports"};
    wv.entries = {{{" world", 1.0, "world"}, {" globe", 0.81, "world"}},
                  {{" sports", 1.0, "sports"}}};
    auto back = weighted_from_json(to_json(wv));
    REQUIRE(back.labels == wv.labels);
    REQUIRE(back.entries.size() == 2);
    CHECK(back.entries[0][1].word == " globe");
    CHECK(back.entries[0][1].weight == 0.81);
    CHECK(back.entries[0][1].core == "world");
    CHECK(back.entries[0] == wv.entries[0]);
    CHECK(back.entries[1] == wv.entries[1]);
}

TEST_CASE("weighted_from_json defaults and validation") {
    nlohmann::json plain = {{"verbalizer", {{{"label", "A"}, {"words", {"x", "y"}}}}}};
    auto wv = weighted_from_json(plain);
    CHECK(wv.entries[0][0].weight == 1.0);
    CHECK(wv.entries[0][0].core == "x");

    nlohmann::json bad = {{"verbalizer",
                           {{{"label", "A"}, {"words", {"x", "y"}}, {"weights", {1.0}}}}}};
    CHECK_THROWS_AS(weighted_from_json(bad), ParseError);
}

TEST_CASE("verbalizer file save/load") {
    testsup::TempFile f(".json");
    save_json(to_json(manual_verbalizer("yahoo")), f.path());
    auto v = verbalizer_from_json(load_json(f.path()));
    CHECK(v.labels == manual_verbalizer("yahoo").labels);
    CHECK_THROWS_AS(load_json("/nonexistent.json"), ParseError);
}

TEST_CASE("shipped verbalizer files mirror the built-in tables") {
    const std::string dir = std::string(VERBKIT_SOURCE_DIR) + "/data/verbalizers/";
    for (const std::string ds : {"ag", "dbpedia", "yahoo"}) {
        CAPTURE(ds);
        auto file = verbalizer_from_json(load_json(dir + ds + ".json"));
        auto built = manual_verbalizer(ds);
        CHECK(file.labels == built.labels);
        CHECK(file.words == built.words);
    }
}

TEST_CASE("shipped example template file loads and renders") {
    const std::string path =
        std::string(VERBKIT_SOURCE_DIR) + "/data/templates/ag_example.json";
    auto ts = templates::load_templates_file(path);
    REQUIRE(ts.size() == 2);
    CHECK(ts[0].id == 0);
    CHECK(ts[1].referenced_fields() == std::vector<std::string>{"x"});
}
