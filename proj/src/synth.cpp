#include "jpave/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include "jpave/errors.hpp"
#include "jpave/rng.hpp"

namespace jpave::data {
namespace {

constexpr std::size_t kNumFillers = 6;

std::string atom(std::size_t attr, std::size_t j, std::size_t m) {
    return "a" + std::to_string(attr) + "w" + std::to_string(j % m);
}

// Value j of attribute i is the atom pair (j, j+1 mod M). Neighbouring values
// share an atom, so holding out up to M-1 values per attribute still leaves
// every atom visible in training text.
std::string value_string(std::size_t attr, std::size_t j, std::size_t m) {
    return atom(attr, j, m) + " " + atom(attr, j + 1, m);
}

struct ValueRef {
    std::size_t attr = 0;
    std::size_t index = 0;
};

void check_config(const SynthConfig& c) {
    if (c.n_attributes < 1) throw UserError("synth: need at least one attribute");
    if (c.n_values_per_attribute < 2)
        throw UserError("synth: need at least two values per attribute");
    if (c.train_size < 1 || c.val_size < 1 || c.test_size < 1)
        throw UserError("synth: split sizes must be positive");
    if (c.l_max < 3) throw UserError("synth: l_max must be at least 3");
    if (c.heldout_fraction < 0.0 || c.heldout_fraction >= 1.0)
        throw UserError("synth: heldout_fraction must lie in [0, 1)");
}

}  // namespace

SynthCorpus synth_generate(const SynthConfig& config) {
    check_config(config);
    const std::size_t A = config.n_attributes;
    const std::size_t M = config.n_values_per_attribute;

    // Pick held-out value indices round-robin so no attribute loses more than
    // its share, and never its last value.
    std::vector<std::vector<bool>> held(A, std::vector<bool>(M, false));
    const auto target =
        static_cast<std::size_t>(config.heldout_fraction * static_cast<double>(A * M) + 0.5);
    if (target > A * (M - 1))
        throw UserError("synth: heldout_fraction leaves some attribute with no seen value");
    Rng holdout_rng(Rng::mix(config.seed, 0xA110));
    std::size_t held_count = 0;
    while (held_count < target) {
        for (std::size_t a = 0; a < A && held_count < target; ++a) {
            std::size_t held_here = 0;
            for (std::size_t j = 0; j < M; ++j) held_here += held[a][j] ? 1 : 0;
            if (held_here + 1 >= M) continue;
            std::size_t j = holdout_rng.below(M);
            while (held[a][j]) j = (j + 1) % M;
            held[a][j] = true;
            ++held_count;
        }
    }

    SynthCorpus corpus;
    for (std::size_t a = 0; a < A; ++a)
        corpus.schema.attributes.push_back("attr" + std::to_string(a));
    std::vector<ValueRef> seen_refs, unseen_refs;
    std::vector<std::vector<std::size_t>> seen_by_attr(A);
    for (std::size_t a = 0; a < A; ++a) {
        for (std::size_t j = 0; j < M; ++j) {
            if (held[a][j]) {
                unseen_refs.push_back({a, j});
            } else {
                seen_refs.push_back({a, j});
                seen_by_attr[a].push_back(j);
                corpus.schema.values.push_back(
                    {corpus.schema.attributes[a], value_string(a, j, M)});
            }
        }
    }

    // Mandatory-value cycle guarantees coverage: train/val walk the seen
    // inventory, test walks held-out values first so each one appears.
    std::vector<ValueRef> test_cycle = unseen_refs;
    test_cycle.insert(test_cycle.end(), seen_refs.begin(), seen_refs.end());

    auto build_split = [&](std::size_t count, const std::vector<ValueRef>& cycle,
                           const std::string& prefix, std::uint64_t salt) {
        Dataset ds;
        Rng rng(Rng::mix(config.seed, salt));
        for (std::size_t k = 0; k < count; ++k) {
            const ValueRef mandatory = cycle[k % cycle.size()];
            // chosen[a] holds value indices for attribute a, capped at two so
            // concatenated atom pairs cannot fake a third value's span.
            std::vector<std::vector<std::size_t>> chosen(A);
            chosen[mandatory.attr].push_back(mandatory.index);
            std::size_t used = 2;

            std::vector<std::size_t> attr_order(A);
            for (std::size_t a = 0; a < A; ++a) attr_order[a] = a;
            rng.shuffle(attr_order);
            for (std::size_t a : attr_order) {
                if (used + 2 > config.l_max) break;
                const auto& pool = seen_by_attr[a];
                if (pool.empty()) continue;
                const bool already = !chosen[a].empty();
                if (!already) {
                    if (rng.next_double() >= 0.6) continue;
                    chosen[a].push_back(pool[rng.below(pool.size())]);
                    used += 2;
                } else if (chosen[a].size() < 2 && pool.size() > 1 &&
                           rng.next_double() < 0.25) {
                    std::size_t j = pool[rng.below(pool.size())];
                    while (j == chosen[a][0]) j = pool[rng.below(pool.size())];
                    chosen[a].push_back(j);
                    used += 2;
                }
            }

            std::vector<std::vector<std::string>> blocks;
            for (std::size_t a = 0; a < A; ++a)
                for (std::size_t j : chosen[a])
                    blocks.push_back({atom(a, j, M), atom(a, j + 1, M)});
            std::size_t room = config.l_max - used;
            std::size_t n_fill = std::min<std::size_t>(room, 1 + rng.below(3));
            for (std::size_t f = 0; f < n_fill; ++f)
                blocks.push_back({"f" + std::to_string(rng.below(kNumFillers))});
            rng.shuffle(blocks);

            ProductInstance inst;
            char buf[16];
            std::snprintf(buf, sizeof(buf), "%04zu", k);
            inst.id = prefix + "-" + buf;
            for (const auto& block : blocks)
                inst.tokens.insert(inst.tokens.end(), block.begin(), block.end());
            for (std::size_t a = 0; a < A; ++a) {
                if (chosen[a].empty()) continue;
                AttrValues av;
                av.attribute = corpus.schema.attributes[a];
                std::sort(chosen[a].begin(), chosen[a].end());
                for (std::size_t j : chosen[a])
                    av.values.push_back(value_string(a, j, M));
                inst.gold.push_back(std::move(av));
            }
            validate_instance(inst, corpus.schema, config.l_max);
            ds.instances.push_back(std::move(inst));
        }
        return ds;
    };

    corpus.train = build_split(config.train_size, seen_refs, "train", 0xB001);
    corpus.val = build_split(config.val_size, seen_refs, "val", 0xB002);
    corpus.test = build_split(config.test_size, test_cycle, "test", 0xB003);
    return corpus;
}

void synth_write(const SynthCorpus& corpus, const std::string& dir,
                 TokenizeMode mode) {
    std::filesystem::create_directories(dir);
    save_schema(corpus.schema, dir + "/schema.json");
    save_jsonl(corpus.train, dir + "/train.jsonl", mode);
    save_jsonl(corpus.val, dir + "/val.jsonl", mode);
    save_jsonl(corpus.test, dir + "/test.jsonl", mode);
}

}  // namespace jpave::data
