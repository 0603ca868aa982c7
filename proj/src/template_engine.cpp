#include "verbkit/template_engine.hpp"

#include <fstream>

#include "verbkit/errors.hpp"

namespace verbkit::templates {

void Template::validate() const {
    std::size_t masks = 0;
    for (const auto& s : segments)
        if (s.kind == Segment::Kind::Mask) ++masks;
    if (masks != 1)
        throw ArgumentError("template " + std::to_string(id) + " must contain exactly one MASK, has " +
                            std::to_string(masks));
}

std::vector<std::string> Template::referenced_fields() const {
    std::vector<std::string> out;
    for (const auto& s : segments)
        if (s.kind == Segment::Kind::Field) out.push_back(s.text);
    return out;
}

MaskedSequence render(const Template& t, const Example& x, const Tokenizer& tok,
                      std::size_t max_length) {
    t.validate();

    struct Piece {
        std::vector<TokenId> ids;
        bool from_field = false;
        bool is_mask = false;
    };
    std::vector<Piece> pieces;
    bool at_start = true;
    for (const auto& seg : t.segments) {
        switch (seg.kind) {
            case Segment::Kind::Mask:
                pieces.push_back({{tok.mask_id()}, false, true});
                at_start = false;
                break;
            case Segment::Kind::Literal: {
                auto ids = tok.encode(seg.text, at_start);
                if (!ids.empty()) at_start = false;
                pieces.push_back({std::move(ids), false, false});
                break;
            }
            case Segment::Kind::Field: {
                auto it = x.fields.find(seg.text);
                if (it == x.fields.end())
                    throw ArgumentError("example is missing field '" + seg.text + "'");
                auto ids = tok.encode(it->second, at_start);
                if (!ids.empty()) at_start = false;
                pieces.push_back({std::move(ids), true, false});
                break;
            }
        }
    }

    std::size_t specials = (tok.bos_id() ? 1 : 0) + (tok.eos_id() ? 1 : 0);
    auto total = [&] {
        std::size_t n = specials;
        for (const auto& p : pieces) n += p.ids.size();
        return n;
    };

    if (max_length > 0 && total() > max_length) {
        // Drop field tokens from the tail, last field segment first.
        for (auto it = pieces.rbegin(); it != pieces.rend() && total() > max_length; ++it) {
            if (!it->from_field) continue;
            std::size_t excess = total() - max_length;
            std::size_t drop = std::min(excess, it->ids.size());
            it->ids.resize(it->ids.size() - drop);
        }
        if (total() > max_length)
            throw StructuralError("template scaffold alone exceeds backend max length");
    }

    MaskedSequence seq;
    if (auto b = tok.bos_id()) seq.ids.push_back(*b);
    for (const auto& p : pieces) {
        if (p.is_mask) seq.mask_pos = seq.ids.size();
        seq.ids.insert(seq.ids.end(), p.ids.begin(), p.ids.end());
    }
    if (auto e = tok.eos_id()) seq.ids.push_back(*e);
    return seq;
}

std::vector<Template> builtin_templates(const std::string& dataset_id) {
    using S = Segment;
    if (dataset_id == "ag") {
        return {
            {0, {S::mask(), S::literal(" news: "), S::field("x")}},
            {1, {S::field("x"), S::literal(" This topic is about "), S::mask(), S::literal(".")}},
            {2, {S::literal("[Category: "), S::mask(), S::literal("] "), S::field("x")}},
            {3, {S::literal("[Topic: "), S::mask(), S::literal("] "), S::field("x")}},
        };
    }
    if (dataset_id == "dbpedia") {
        auto head = [] {
            return std::vector<S>{S::field("x1"), S::literal(" "), S::field("x2"), S::literal(" ")};
        };
        auto with_tail = [&](int id, std::string mid) {
            std::vector<S> segs = head();
            segs.push_back(S::literal(std::move(mid)));
            segs.push_back(S::field("x1"));
            segs.push_back(S::literal(" is "));
            segs.push_back(S::mask());
            segs.push_back(S::literal("."));
            return Template{id, std::move(segs)};
        };
        return {
            with_tail(0, "In this sentence, "),
            with_tail(1, ""),
            with_tail(2, "The category of "),
            with_tail(3, "The type of "),
        };
    }
    if (dataset_id == "yahoo") {
        return {
            {0, {S::mask(), S::literal(" question: "), S::field("x"), S::literal(".")}},
            {1, {S::field("x"), S::literal(" This topic is about "), S::mask(), S::literal(".")}},
            {2, {S::literal("[Topic: "), S::mask(), S::literal("] "), S::field("x"), S::literal(".")}},
            {3, {S::literal("[Category: "), S::mask(), S::literal("] "), S::field("x"), S::literal(".")}},
        };
    }
    throw ArgumentError("no built-in templates for dataset '" + dataset_id + "'");
}

Template template_from_json(const nlohmann::json& j) {
    Template t;
    t.id = j.at("id").get<int>();
    for (const auto& s : j.at("segments")) {
        if (s.contains("lit"))
            t.segments.push_back(Segment::literal(s.at("lit").get<std::string>()));
        else if (s.contains("field"))
            t.segments.push_back(Segment::field(s.at("field").get<std::string>()));
        else if (s.contains("mask") && s.at("mask").get<bool>())
            t.segments.push_back(Segment::mask());
        else
            throw ParseError("template segment must be one of {lit, field, mask}: " + s.dump());
    }
    t.validate();
    return t;
}

nlohmann::json template_to_json(const Template& t) {
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& s : t.segments) {
        switch (s.kind) {
            case Segment::Kind::Literal: segs.push_back({{"lit", s.text}}); break;
            case Segment::Kind::Field: segs.push_back({{"field", s.text}}); break;
            case Segment::Kind::Mask: segs.push_back({{"mask", true}}); break;
        }
    }
    return {{"id", t.id}, {"segments", segs}};
}

std::vector<Template> load_templates_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open template file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("invalid JSON in template file " + path + ": " + e.what());
    }
    std::vector<Template> out;
    for (const auto& entry : j.at("templates")) out.push_back(template_from_json(entry));
    return out;
}

}  // namespace verbkit::templates
