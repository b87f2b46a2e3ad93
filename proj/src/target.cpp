#include "jpave/target.hpp"

#include <algorithm>
#include <unordered_set>

#include "jpave/errors.hpp"

namespace jpave::data {

TargetSequence compose_target(const std::vector<std::string>& values,
                              const Vocab& vocab, std::size_t t_max,
                              TokenizeMode mode, std::size_t attribute_index) {
    require(t_max >= 1, "compose_target: t_max must be at least 1");

    std::vector<std::size_t> ids;
    for (std::size_t v = 0; v < values.size(); ++v) {
        if (v > 0) ids.push_back(Vocab::kSep);
        const auto toks = tokenize(values[v], mode);
        require(!toks.empty(), "compose_target: value tokenizes to nothing");
        for (const auto& tok : toks) ids.push_back(vocab.encode(tok));
    }
    ids.push_back(Vocab::kEos);

    if (ids.size() > t_max) {
        ids.resize(t_max - 1 + 1);   // keep first t_max-1 tokens, reserve slot for [EOS]
        ids.pop_back();
        while (!ids.empty() && ids.back() == Vocab::kSep) ids.pop_back();
        ids.push_back(Vocab::kEos);
    }

    TargetSequence seq;
    seq.attribute_index = attribute_index;
    seq.token_ids = std::move(ids);
    return seq;
}

std::vector<std::string> parse_generated(const std::vector<std::size_t>& token_ids,
                                         const Vocab& vocab, TokenizeMode mode) {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    std::vector<std::string> segment;

    auto flush = [&] {
        if (segment.empty()) return;
        std::string value = join_tokens(segment, mode);
        segment.clear();
        if (seen.insert(value).second) out.push_back(std::move(value));
    };

    for (std::size_t id : token_ids) {
        if (id == Vocab::kEos) break;
        if (id == Vocab::kSep) {
            flush();
            continue;
        }
        segment.push_back(vocab.decode(id));
    }
    flush();
    return out;
}

}  // namespace jpave::data
