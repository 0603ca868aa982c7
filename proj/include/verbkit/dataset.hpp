#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "verbkit/template_engine.hpp"

namespace verbkit::data {

struct Dataset {
    std::string id;
    std::vector<std::string> field_names;
    std::vector<std::string> label_names;
    std::vector<templates::Example> examples;  // all labeled

    std::size_t num_labels() const { return label_names.size(); }
};

// Formats:
//   ag_csv      — "class","title","description"; 4 classes; x = title
//   dbpedia_csv — "class","title","content"; 14 classes; x1/x2 fields
//   yahoo_csv   — "class",title,content,answer; 10 classes;
//                 x = non-empty parts joined with ". "
//   jsonl       — one object per line: {"label": int|name, <field>: text, ...}
Dataset load_dataset(const std::string& path, const std::string& format);

// Labeled set D of size n, split into halves.
struct FewShotSplit {
    std::vector<templates::Example> train;  // |train| = ceil(n/2)
    std::vector<templates::Example> valid;
    std::uint64_t seed = 0;
    std::size_t n = 0;
};

// Class-stratified sample of size n (equal per-class counts, remainder to the
// lowest class indices), deterministic in seed, split into halves with
// per-class balance preserved as far as parity allows.
FewShotSplit sample_fewshot(const Dataset& ds, std::size_t n, std::uint64_t seed);

// Deterministic subset of size at most n (used for desk-scale evaluation).
std::vector<templates::Example> sample_subset(const Dataset& ds, std::size_t n,
                                              std::uint64_t seed);

}  // namespace verbkit::data
