#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "support.hpp"
#include "verbkit/embedding_store.hpp"
#include "verbkit/errors.hpp"

using namespace verbkit;

namespace {

EmbeddingStore tiny_store() {
    // 2-d vectors with known angles; "zero" has a zero norm.
    std::vector<std::string> vocab = {"east", "north", "northeast", " east", "zero", "west"};
    std::vector<float> m = {
        1.0f, 0.0f,   // east
        0.0f, 1.0f,   // north
        1.0f, 1.0f,   // northeast
        2.0f, 0.0f,   // " east" (parallel to east)
        0.0f, 0.0f,   // zero
        -1.0f, 0.0f,  // west
    };
    return EmbeddingStore(std::move(vocab), std::move(m), 2);
}

}  // namespace

TEST_CASE("construction validates shape and contents") {
    CHECK_THROWS_AS(EmbeddingStore({"a"}, {1.0f, 2.0f, 3.0f}, 2), ArgumentError);
    CHECK_THROWS_AS(EmbeddingStore({"a"}, {1.0f}, 0), ArgumentError);
    CHECK_THROWS_AS(EmbeddingStore({"a", "a"}, {1.0f, 2.0f}, 1), ArgumentError);
    std::vector<float> bad = {1.0f, std::numeric_limits<float>::infinity()};
    CHECK_THROWS_AS(EmbeddingStore({"a", "b"}, std::move(bad), 1), NumericError);
}

TEST_CASE("lookup and two-form resolve") {
    auto s = tiny_store();
    CHECK(s.size() == 6);
    CHECK(s.dim() == 2);
    CHECK(s.contains("east"));
    CHECK_FALSE(s.contains("south"));
    CHECK(s.index_of("north") == 1);

    // leading-space form preferred over the bare form
    CHECK(s.resolve("east") == " east");
    CHECK(s.resolve("north") == "north");
    CHECK(s.resolve(" east") == " east");
    CHECK_FALSE(s.resolve("south").has_value());

    CHECK_THROWS_AS(s.vector_of("south"), LookupError);
    CHECK(s.vector_of("north")[1] == 1.0f);
}

TEST_CASE("cosine similarity") {
    auto s = tiny_store();
    CHECK(s.cosine("east", "east") == doctest::Approx(1.0));
    CHECK(s.cosine("east", "north") == doctest::Approx(0.0));
    CHECK(s.cosine("east", "northeast") == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(s.cosine("east", " east") == doctest::Approx(1.0));
    CHECK(s.cosine("east", "west") == doctest::Approx(-1.0));
    CHECK_THROWS_AS(s.cosine("east", "zero"), NumericError);
    CHECK_THROWS_AS(s.cosine("east", "south"), LookupError);
}

TEST_CASE("top_k ordering, self exclusion, tie break") {
    auto s = tiny_store();
    auto nb = s.top_k("east", 3);
    REQUIRE(nb.size() == 3);
    CHECK(nb[0].word == " east");  // cosine 1.0
    CHECK(nb[0].similarity == doctest::Approx(1.0));
    CHECK(nb[1].word == "northeast");
    // "north" (idx 1) ties with nothing here; next is cosine 0
    CHECK(nb[2].word == "north");

    SUBCASE("k = 0 is empty") { CHECK(s.top_k("east", 0).empty()); }
    SUBCASE("k larger than vocab returns size-1 entries") {
        auto all = s.top_k("east", 100);
        CHECK(all.size() == s.size() - 1);
        // zero-norm row sorts below every real similarity
        CHECK(all.back().word == "zero");
        CHECK(all.back().similarity == -2.0);
    }
    SUBCASE("unknown query throws") { CHECK_THROWS_AS(s.top_k("south", 3), LookupError); }
}

TEST_CASE("equal similarities break ties by ascending vocabulary index") {
    std::vector<std::string> vocab = {"q", "b", "a", "c"};
    std::vector<float> m = {
        1.0f, 0.0f,  // q
        1.0f, 0.0f,  // b: identical direction
        1.0f, 0.0f,  // a: identical direction
        2.0f, 0.0f,  // c: identical direction
    };
    EmbeddingStore s(std::move(vocab), std::move(m), 2);
    auto nb = s.top_k("q", 3);
    REQUIRE(nb.size() == 3);
    CHECK(nb[0].word == "b");
    CHECK(nb[1].word == "a");
    CHECK(nb[2].word == "c");
}

TEST_CASE("parallel kernels agree exactly with the serial reference") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        auto s = testsup::random_store(500, 16, seed);
        for (std::size_t q : {0u, 17u, 499u}) {
            auto a = s.similarities_to(q);
            auto b = s.similarities_to_serial(q);
            REQUIRE(a.size() == b.size());
            for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
            auto ta = s.top_k(s.word_at(q), 10);
            auto tb = s.top_k_serial(s.word_at(q), 10);
            REQUIRE(ta.size() == tb.size());
            for (std::size_t i = 0; i < ta.size(); ++i) {
                CHECK(ta[i].word == tb[i].word);
                CHECK(ta[i].similarity == tb[i].similarity);
            }
        }
    }
}

TEST_CASE("word2vec text round-trip with leading-space escaping") {
    auto s = tiny_store();
    testsup::TempFile f(".vec");
    s.save_text(f.path(), EmbeddingFormat::word2vec_text);

    // on-disk form uses the U+0120 marker, never a raw leading space
    std::ifstream in(f.path());
    std::string header, line4;
    std::getline(in, header);
    CHECK(header == "6 2");
    for (int i = 0; i < 4; ++i) std::getline(in, line4);
    CHECK(line4.rfind("\xC4\xA0""east ", 0) == 0);

    auto r = EmbeddingStore::load_text(f.path(), EmbeddingFormat::word2vec_text);
    REQUIRE(r.size() == s.size());
    REQUIRE(r.dim() == s.dim());
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(r.word_at(i) == s.word_at(i));
        for (std::size_t j = 0; j < s.dim(); ++j) CHECK(r.vector_at(i)[j] == s.vector_at(i)[j]);
    }
}

TEST_CASE("glove text round-trip") {
    auto s = testsup::random_store(20, 4, 9);
    testsup::TempFile f(".txt");
    s.save_text(f.path(), EmbeddingFormat::glove_text);
    auto r = EmbeddingStore::load_text(f.path(), EmbeddingFormat::glove_text);
    REQUIRE(r.size() == 20);
    REQUIRE(r.dim() == 4);
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.dim(); ++j)
            CHECK(r.vector_at(i)[j] == doctest::Approx(s.vector_at(i)[j]).epsilon(1e-6));
}

TEST_CASE("text loader error reporting") {
    auto parse = [](const std::string& text, EmbeddingFormat fmt) {
        std::istringstream in(text);
        return EmbeddingStore::load_text_stream(in, fmt);
    };
    CHECK_THROWS_AS(parse("", EmbeddingFormat::word2vec_text), ParseError);
    CHECK_THROWS_AS(parse("oops\n", EmbeddingFormat::word2vec_text), ParseError);
    CHECK_THROWS_AS(parse("2 3\na 1 2 3\n", EmbeddingFormat::word2vec_text), ParseError);
    CHECK_THROWS_AS(parse("1 3\na 1 2\n", EmbeddingFormat::word2vec_text), ParseError);
    CHECK_THROWS_AS(parse("a 1 2\nb 1\n", EmbeddingFormat::glove_text), ParseError);
    CHECK_THROWS_AS(parse("a 1 2\nb 1 x\n", EmbeddingFormat::glove_text), ParseError);
    CHECK_THROWS_AS(parse("a\n", EmbeddingFormat::glove_text), ParseError);
    CHECK_THROWS_AS(parse("\n\n", EmbeddingFormat::glove_text), ParseError);

    // line numbers are carried on the exception
    try {
        parse("a 1 2\nb 1\n", EmbeddingFormat::glove_text);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("format names") {
    CHECK(embedding_format_from_string("word2vec") == EmbeddingFormat::word2vec_text);
    CHECK(embedding_format_from_string("glove") == EmbeddingFormat::glove_text);
    CHECK_THROWS_AS(embedding_format_from_string("fasttext"), ArgumentError);
}
