#include "jpave/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

#include "jpave/errors.hpp"
#include "jpave/rng.hpp"

namespace jpave::data {

using nlohmann::json;

const std::vector<std::string>* ProductInstance::values_for(
    const std::string& attribute) const {
    for (const auto& av : gold)
        if (av.attribute == attribute) return &av.values;
    return nullptr;
}

std::size_t Schema::attribute_index(const std::string& name) const {
    for (std::size_t i = 0; i < attributes.size(); ++i)
        if (attributes[i] == name) return i;
    throw ContractError("schema: unknown attribute '" + name + "'");
}

bool Schema::has_attribute(const std::string& name) const {
    return std::find(attributes.begin(), attributes.end(), name) !=
           attributes.end();
}

void validate_instance(const ProductInstance& inst, const Schema& schema,
                       std::size_t l_max) {
    if (inst.tokens.empty() || inst.tokens.size() > l_max)
        throw UserError("instance '" + inst.id + "': token count " +
                        std::to_string(inst.tokens.size()) +
                        " outside [1, " + std::to_string(l_max) + "]");
    std::set<std::string> seen_attrs;
    for (const auto& av : inst.gold) {
        if (!schema.has_attribute(av.attribute))
            throw UserError("instance '" + inst.id + "': attribute '" +
                            av.attribute + "' not in schema");
        if (!seen_attrs.insert(av.attribute).second)
            throw UserError("instance '" + inst.id + "': duplicate attribute '" +
                            av.attribute + "'");
        if (av.values.empty())
            throw UserError("instance '" + inst.id + "': empty value list for '" +
                            av.attribute + "'");
        std::set<std::string> vs(av.values.begin(), av.values.end());
        if (vs.size() != av.values.size())
            throw UserError("instance '" + inst.id + "': duplicate values for '" +
                            av.attribute + "'");
    }
}

Dataset load_jsonl(const std::string& path, TokenizeMode mode) {
    std::ifstream in(path);
    if (!in) throw UserError("cannot open dataset file: " + path);
    Dataset ds;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw UserError(path + ":" + std::to_string(lineno) +
                            ": bad JSON: " + e.what());
        }
        ProductInstance inst;
        try {
            inst.id = j.at("id").get<std::string>();
            inst.tokens = tokenize(j.at("text").get<std::string>(), mode);
            for (const auto& lab : j.at("labels")) {
                AttrValues av;
                av.attribute = lab.at("attribute").get<std::string>();
                for (const auto& v : lab.at("values"))
                    av.values.push_back(v.get<std::string>());
                inst.gold.push_back(std::move(av));
            }
        } catch (const json::exception& e) {
            throw UserError(path + ":" + std::to_string(lineno) +
                            ": bad instance shape: " + e.what());
        }
        ds.instances.push_back(std::move(inst));
    }
    return ds;
}

void save_jsonl(const Dataset& dataset, const std::string& path,
                TokenizeMode mode) {
    std::ofstream out(path);
    if (!out) throw UserError("cannot write dataset file: " + path);
    for (const auto& inst : dataset.instances) {
        json labels = json::array();
        for (const auto& av : inst.gold)
            labels.push_back({{"attribute", av.attribute}, {"values", av.values}});
        json j = {{"id", inst.id},
                  {"text", join_tokens(inst.tokens, mode)},
                  {"labels", labels}};
        out << j.dump() << '\n';
    }
}

Schema schema_from_json(const json& j, const std::string& context) {
    Schema schema;
    try {
        for (const auto& a : j.at("attributes"))
            schema.attributes.push_back(a.get<std::string>());
        for (const auto& v : j.at("values"))
            schema.values.push_back({v.at("attribute").get<std::string>(),
                                     v.at("value").get<std::string>()});
    } catch (const json::exception& e) {
        throw UserError(context + ": bad schema shape: " + e.what());
    }
    std::set<std::string> names(schema.attributes.begin(), schema.attributes.end());
    if (names.size() != schema.attributes.size())
        throw UserError(context + ": duplicate attribute names");
    for (const auto& v : schema.values)
        if (!names.count(v.attribute))
            throw UserError(context + ": value '" + v.value +
                            "' owned by unknown attribute '" + v.attribute + "'");
    return schema;
}

json schema_to_json(const Schema& schema) {
    json values = json::array();
    for (const auto& v : schema.values)
        values.push_back({{"attribute", v.attribute}, {"value", v.value}});
    return {{"attributes", schema.attributes}, {"values", values}};
}

Schema load_schema(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UserError("cannot open schema file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw UserError(path + ": bad JSON: " + e.what());
    }
    return schema_from_json(j, path);
}

void save_schema(const Schema& schema, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw UserError("cannot write schema file: " + path);
    out << schema_to_json(schema).dump(2) << '\n';
}

namespace {

// Finds the first contiguous occurrence of `span` in `tokens` whose positions
// are all unclaimed, or npos.
std::size_t find_free_span(const std::vector<std::string>& tokens,
                           const std::vector<std::string>& span,
                           const std::vector<bool>& claimed) {
    if (span.empty() || span.size() > tokens.size()) return std::string::npos;
    for (std::size_t start = 0; start + span.size() <= tokens.size(); ++start) {
        bool ok = true;
        for (std::size_t k = 0; k < span.size() && ok; ++k)
            ok = !claimed[start + k] && tokens[start + k] == span[k];
        if (ok) return start;
    }
    return std::string::npos;
}

}  // namespace

ProductInstance permute_text(const ProductInstance& instance, std::uint64_t seed) {
    const auto& tokens = instance.tokens;
    std::vector<bool> claimed(tokens.size(), false);

    // Blocks move atomically; each gold value claims its first free span, in
    // gold order. Words inside a value keep their order.
    struct Block {
        std::size_t start;
        std::size_t len;
    };
    std::vector<Block> blocks;
    for (const auto& av : instance.gold) {
        for (const auto& value : av.values) {
            // Values were tokenized by whichever mode built the instance; a
            // value that is a contiguous token span always splits the same
            // way its instance text did, so match on whitespace pieces first
            // and fall back to the raw string as a single token.
            std::vector<std::string> span = tokenize(value, TokenizeMode::kWhitespace);
            std::size_t at = find_free_span(tokens, span, claimed);
            if (at == std::string::npos) {
                span = tokenize(value, TokenizeMode::kChar);
                at = find_free_span(tokens, span, claimed);
            }
            if (at == std::string::npos)
                throw UserError("permute_text: instance '" + instance.id +
                                "': value '" + value +
                                "' is not a contiguous token span");
            for (std::size_t k = 0; k < span.size(); ++k) claimed[at + k] = true;
            blocks.push_back({at, span.size()});
        }
    }
    for (std::size_t i = 0; i < tokens.size(); ++i)
        if (!claimed[i]) blocks.push_back({i, 1});

    // Deterministic order before shuffling: sort by start position.
    std::sort(blocks.begin(), blocks.end(),
              [](const Block& a, const Block& b) { return a.start < b.start; });
    Rng rng(seed);
    rng.shuffle(blocks);

    ProductInstance out;
    out.id = instance.id;
    out.gold = instance.gold;
    out.tokens.reserve(tokens.size());
    for (const auto& b : blocks)
        for (std::size_t k = 0; k < b.len; ++k) out.tokens.push_back(tokens[b.start + k]);
    return out;
}

ZeroShotSplit zero_shot_split(const Dataset& train, const Dataset& test) {
    std::set<std::string> train_values;
    for (const auto& inst : train.instances)
        for (const auto& av : inst.gold)
            train_values.insert(av.values.begin(), av.values.end());
    ZeroShotSplit split;
    for (const auto& inst : test.instances)
        for (const auto& av : inst.gold)
            for (const auto& v : av.values) {
                if (train_values.count(v))
                    split.seen.insert(v);
                else
                    split.unseen.insert(v);
            }
    return split;
}

}  // namespace jpave::data
