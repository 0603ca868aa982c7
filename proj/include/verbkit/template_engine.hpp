#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "verbkit/tokenizer.hpp"
#include "verbkit/types.hpp"

namespace verbkit::templates {

struct Segment {
    enum class Kind { Literal, Field, Mask };
    Kind kind = Kind::Literal;
    std::string text;  // literal text or field name; empty for Mask

    static Segment literal(std::string t) { return {Kind::Literal, std::move(t)}; }
    static Segment field(std::string name) { return {Kind::Field, std::move(name)}; }
    static Segment mask() { return {Kind::Mask, {}}; }

    bool operator==(const Segment&) const = default;
};

// A text pattern with exactly one MASK slot and named input-field
// placeholders. Immutable after construction; freely shareable.
struct Template {
    int id = 0;
    std::vector<Segment> segments;

    // Throws ArgumentError unless there is exactly one Mask segment.
    void validate() const;
    std::vector<std::string> referenced_fields() const;

    bool operator==(const Template&) const = default;
};

struct Example {
    std::map<std::string, std::string> fields;
    std::optional<int> label;  // absent for unlabeled inference
};

// Render an example through a template into a masked token sequence.
// Over-length sequences are shortened by truncating field-derived tokens from
// the tail; scaffold tokens and the MASK are never dropped.
MaskedSequence render(const Template& t, const Example& x, const Tokenizer& tok,
                      std::size_t max_length = 0);

// The four templates T0..T3 per dataset (ag, dbpedia, yahoo), in order.
std::vector<Template> builtin_templates(const std::string& dataset_id);

Template template_from_json(const nlohmann::json& j);
nlohmann::json template_to_json(const Template& t);
std::vector<Template> load_templates_file(const std::string& path);

}  // namespace verbkit::templates
