#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "jpave/vocab.hpp"

namespace jpave::data {

// Gold annotation for one attribute: an ordered, duplicate-free list of value
// strings. Order is preserved; it drives target-sequence composition.
struct AttrValues {
    std::string attribute;
    std::vector<std::string> values;

    bool operator==(const AttrValues&) const = default;
};

// One product text with its gold attribute->values mapping.
struct ProductInstance {
    std::string id;
    std::vector<std::string> tokens;
    std::vector<AttrValues> gold;  // file order preserved

    const std::vector<std::string>* values_for(const std::string& attribute) const;
    bool operator==(const ProductInstance&) const = default;
};

// A value entry with its owning attribute.
struct SchemaValue {
    std::string attribute;
    std::string value;

    bool operator==(const SchemaValue&) const = default;
};

// The label inventory: the attribute list and the closed-world value list
// available at training time.
struct Schema {
    std::vector<std::string> attributes;
    std::vector<SchemaValue> values;

    std::size_t attribute_index(const std::string& name) const;  // throws if absent
    bool has_attribute(const std::string& name) const;
    bool operator==(const Schema&) const = default;
};

struct Dataset {
    std::vector<ProductInstance> instances;

    bool operator==(const Dataset&) const = default;
};

// Validates instance invariants against the schema (attributes known, value
// lists non-empty and duplicate-free, 1 <= len(tokens) <= l_max).
void validate_instance(const ProductInstance& inst, const Schema& schema,
                       std::size_t l_max);

// JSONL persistence. One instance per line:
//   {"id": ..., "text": ..., "labels": [{"attribute": ..., "values": [...]}]}
Dataset load_jsonl(const std::string& path, TokenizeMode mode);
void save_jsonl(const Dataset& dataset, const std::string& path, TokenizeMode mode);

// Schema persistence: {"attributes": [...], "values": [{"attribute","value"}]}.
Schema load_schema(const std::string& path);
void save_schema(const Schema& schema, const std::string& path);

// Same schema shape as an embeddable JSON value (checkpoint headers reuse it).
nlohmann::json schema_to_json(const Schema& schema);
Schema schema_from_json(const nlohmann::json& j, const std::string& context);

// Shuffles token order while keeping each gold value's tokens contiguous and
// in order (values move as atomic blocks). Deterministic per seed.
ProductInstance permute_text(const ProductInstance& instance, std::uint64_t seed);

// Partitions the test split's gold value strings into those that occur in
// some train instance (seen) and those that never do (unseen).
struct ZeroShotSplit {
    std::set<std::string> seen;
    std::set<std::string> unseen;
};
ZeroShotSplit zero_shot_split(const Dataset& train, const Dataset& test);

}  // namespace jpave::data
