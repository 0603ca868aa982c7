// Compares the parallel nearest-neighbor kernels against their serial
// reference implementations, checking agreement and reporting timings.

#include <chrono>
#include <cstdint>
#include <iostream>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "verbkit/embedding_store.hpp"

using namespace verbkit;
using Clock = std::chrono::steady_clock;

namespace {

EmbeddingStore random_store(std::size_t vocab, std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> dist(0.0f, 1.0f);
    std::vector<std::string> words(vocab);
    std::vector<float> matrix(vocab * dim);
    for (std::size_t i = 0; i < vocab; ++i) words[i] = "w" + std::to_string(i);
    for (auto& v : matrix) v = dist(rng);
    return EmbeddingStore(std::move(words), std::move(matrix), dim);
}

template <class F>
double time_ms(F&& f, int reps) {
    auto t0 = Clock::now();
    for (int r = 0; r < reps; ++r) f();
    auto t1 = Clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"benchmark parallel vs serial neighbor search"};
    std::size_t vocab = 50000, dim = 256, k = 15, queries = 32;
    int reps = 3;
    std::uint64_t seed = 42;
    std::string path, format = "glove";
    app.add_option("--vocab", vocab, "synthetic vocabulary size");
    app.add_option("--dim", dim, "synthetic embedding dimension");
    app.add_option("--k", k, "neighbors per query");
    app.add_option("--queries", queries, "number of query words");
    app.add_option("--reps", reps, "timing repetitions");
    app.add_option("--seed", seed);
    app.add_option("--embeddings", path, "use a real embedding file instead of synthetic data");
    app.add_option("--format", format, "word2vec | glove");
    CLI11_PARSE(app, argc, argv);

    EmbeddingStore store =
        path.empty() ? random_store(vocab, dim, seed)
                     : EmbeddingStore::load_text(path, embedding_format_from_string(format));
    std::cout << "store: " << store.size() << " x " << store.dim() << "\n";

    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_int_distribution<std::size_t> pick(0, store.size() - 1);
    std::vector<std::string> words(queries);
    for (auto& w : words) w = store.word_at(pick(rng));

    std::size_t mismatches = 0;
    for (const auto& w : words) {
        auto a = store.top_k(w, k);
        auto b = store.top_k_serial(w, k);
        if (a.size() != b.size()) {
            ++mismatches;
            continue;
        }
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i].word != b[i].word || a[i].similarity != b[i].similarity) {
                ++mismatches;
                break;
            }
    }
    std::cout << "agreement: " << (queries - mismatches) << "/" << queries
              << " queries identical\n";

    double parallel_ms = time_ms(
        [&] {
            for (const auto& w : words) store.top_k(w, k);
        },
        reps);
    double serial_ms = time_ms(
        [&] {
            for (const auto& w : words) store.top_k_serial(w, k);
        },
        reps);

    std::cout << "parallel top_k: " << parallel_ms << " ms / " << queries << " queries\n";
    std::cout << "serial   top_k: " << serial_ms << " ms / " << queries << " queries\n";
    std::cout << "speedup: " << serial_ms / parallel_ms << "x\n";
    return mismatches == 0 ? 0 : 1;
}
