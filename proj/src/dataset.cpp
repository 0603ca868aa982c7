#include "verbkit/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "verbkit/errors.hpp"

namespace verbkit::data {

namespace {

// RFC4180-style CSV with "" doubling; also tolerates backslash-escaped
// quotes, which appear in the common distributions of these datasets.
std::vector<std::string> parse_csv_line(const std::string& line, long lineno) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    std::size_t i = 0;
    while (i < line.size()) {
        char c = line[i];
        if (quoted) {
            if (c == '\\' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                i += 2;
            } else if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    i += 2;
                } else {
                    quoted = false;
                    ++i;
                }
            } else {
                cur += c;
                ++i;
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
            ++i;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
            ++i;
        } else {
            cur += c;
            ++i;
        }
    }
    if (quoted) throw ParseError("unterminated quoted field", lineno);
    fields.push_back(std::move(cur));
    return fields;
}

int parse_label(const std::string& s, std::size_t num_labels, long lineno) {
    int label;
    try {
        label = std::stoi(s);
    } catch (const std::exception&) {
        throw ParseError("label is not an integer: '" + s + "'", lineno);
    }
    if (label < 1 || static_cast<std::size_t>(label) > num_labels)
        throw ParseError("label " + std::to_string(label) + " outside 1.." +
                             std::to_string(num_labels),
                         lineno);
    return label - 1;
}

std::string join_sentences(std::initializer_list<std::string> parts) {
    std::string out;
    for (const auto& p : parts) {
        if (p.empty()) continue;
        if (!out.empty()) out += ". ";
        out += p;
    }
    return out;
}

Dataset load_csv(const std::string& path, const std::string& id,
                 std::vector<std::string> label_names, std::size_t columns) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open dataset file: " + path);
    Dataset ds;
    ds.id = id;
    ds.label_names = std::move(label_names);
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = parse_csv_line(line, lineno);
        if (fields.size() != columns)
            throw ParseError("expected " + std::to_string(columns) + " columns, got " +
                                 std::to_string(fields.size()),
                             lineno);
        templates::Example x;
        x.label = parse_label(fields[0], ds.label_names.size(), lineno);
        if (id == "ag") {
            x.fields["title"] = fields[1];
            x.fields["description"] = fields[2];
            x.fields["x"] = fields[1];
        } else if (id == "dbpedia") {
            x.fields["x1"] = fields[1];
            x.fields["x2"] = fields[2];
        } else {  // yahoo
            x.fields["title"] = fields[1];
            x.fields["content"] = fields[2];
            x.fields["answer"] = fields[3];
            x.fields["x"] = join_sentences({fields[1], fields[2], fields[3]});
        }
        ds.examples.push_back(std::move(x));
    }
    if (!ds.examples.empty())
        for (const auto& [name, _] : ds.examples.front().fields) ds.field_names.push_back(name);
    return ds;
}

Dataset load_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open dataset file: " + path);
    Dataset ds;
    ds.id = path;
    std::string line;
    long lineno = 0;
    std::map<std::string, int> label_index;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("invalid JSON record: ") + e.what(), lineno);
        }
        if (!j.contains("label")) throw ParseError("record has no label", lineno);
        templates::Example x;
        if (j.at("label").is_number_integer()) {
            x.label = j.at("label").get<int>();
        } else {
            auto name = j.at("label").get<std::string>();
            auto [it, inserted] = label_index.emplace(name, static_cast<int>(label_index.size()));
            x.label = it->second;
        }
        for (const auto& [key, val] : j.items()) {
            if (key == "label") continue;
            if (!val.is_string()) throw ParseError("field '" + key + "' is not a string", lineno);
            x.fields[key] = val.get<std::string>();
        }
        ds.examples.push_back(std::move(x));
    }
    int max_label = -1;
    for (const auto& x : ds.examples) max_label = std::max(max_label, *x.label);
    if (!label_index.empty()) {
        ds.label_names.resize(label_index.size());
        for (const auto& [name, idx] : label_index)
            ds.label_names[static_cast<std::size_t>(idx)] = name;
    } else {
        for (int i = 0; i <= max_label; ++i) ds.label_names.push_back("label_" + std::to_string(i));
    }
    for (const auto& x : ds.examples)
        if (*x.label < 0 || static_cast<std::size_t>(*x.label) >= ds.label_names.size())
            throw ParseError("label index out of range in " + path);
    if (!ds.examples.empty())
        for (const auto& [name, _] : ds.examples.front().fields) ds.field_names.push_back(name);
    return ds;
}

// splitmix64; stable across platforms, unlike distribution-based shuffles.
struct SplitMix64 {
    std::uint64_t state;
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    std::uint64_t below(std::uint64_t bound) { return next() % bound; }
};

template <typename T>
void deterministic_shuffle(std::vector<T>& v, SplitMix64& rng) {
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[rng.below(i)]);
}

}  // namespace

Dataset load_dataset(const std::string& path, const std::string& format) {
    if (format == "ag_csv")
        return load_csv(path, "ag", {"World", "Sports", "Business", "Sci/Tech"}, 3);
    if (format == "dbpedia_csv")
        return load_csv(path, "dbpedia",
                        {"Company", "EducationalInstitution", "Artist", "Athlete", "OfficeHolder",
                         "MeanOfTransportation", "Building", "NaturalPlace", "Village", "Animal",
                         "Plant", "Album", "Film", "WrittenWork"},
                        3);
    if (format == "yahoo_csv")
        return load_csv(path, "yahoo",
                        {"Society & Culture", "Science & Mathematics", "Health",
                         "Education & Reference", "Computers & Internet", "Sports",
                         "Business & Finance", "Entertainment & Music", "Family & Relationships",
                         "Politics & Government"},
                        4);
    if (format == "jsonl") return load_jsonl(path);
    throw ArgumentError("unknown dataset format: " + format);
}

FewShotSplit sample_fewshot(const Dataset& ds, std::size_t n, std::uint64_t seed) {
    FewShotSplit split;
    split.seed = seed;
    split.n = n;
    if (n == 0) return split;
    if (n > ds.examples.size())
        throw ArgumentError("requested sample of " + std::to_string(n) + " from a pool of " +
                            std::to_string(ds.examples.size()));

    const std::size_t classes = ds.num_labels();
    std::vector<std::vector<std::size_t>> per_class(classes);
    for (std::size_t i = 0; i < ds.examples.size(); ++i)
        per_class[static_cast<std::size_t>(*ds.examples[i].label)].push_back(i);

    std::vector<std::size_t> want(classes, n / classes);
    for (std::size_t c = 0; c < n % classes; ++c) ++want[c];

    SplitMix64 rng{seed ^ 0xA076'1D64'78BD'642FULL};
    const std::size_t train_target = (n + 1) / 2;
    std::size_t train_assigned = 0;

    // Per class: floor(want/2) to the train half; the extra slot of odd
    // classes goes to train until the ceil(n/2) target is met.
    std::vector<std::size_t> train_take(classes);
    for (std::size_t c = 0; c < classes; ++c) {
        train_take[c] = want[c] / 2;
        train_assigned += train_take[c];
    }
    for (std::size_t c = 0; c < classes && train_assigned < train_target; ++c) {
        if (want[c] % 2 == 1) {
            ++train_take[c];
            ++train_assigned;
        }
    }

    for (std::size_t c = 0; c < classes; ++c) {
        if (want[c] > per_class[c].size())
            throw ArgumentError("class '" + ds.label_names[c] + "' has only " +
                                std::to_string(per_class[c].size()) + " examples, need " +
                                std::to_string(want[c]));
        deterministic_shuffle(per_class[c], rng);
        for (std::size_t i = 0; i < want[c]; ++i) {
            const auto& x = ds.examples[per_class[c][i]];
            if (i < train_take[c])
                split.train.push_back(x);
            else
                split.valid.push_back(x);
        }
    }
    return split;
}

std::vector<templates::Example> sample_subset(const Dataset& ds, std::size_t n,
                                              std::uint64_t seed) {
    std::vector<std::size_t> order(ds.examples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    SplitMix64 rng{seed ^ 0x9E37'79B9'7F4A'7C15ULL};
    deterministic_shuffle(order, rng);
    std::vector<templates::Example> out;
    out.reserve(std::min(n, order.size()));
    for (std::size_t i = 0; i < order.size() && out.size() < n; ++i)
        out.push_back(ds.examples[order[i]]);
    return out;
}

}  // namespace verbkit::data
