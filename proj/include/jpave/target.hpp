#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "jpave/vocab.hpp"

namespace jpave::data {

// Composed decoding target for one attribute: value tokens joined by [SEP]
// and terminated by exactly one [EOS].
struct TargetSequence {
    std::size_t attribute_index = 0;
    std::vector<std::size_t> token_ids;  // [EOS]-terminated

    bool operator==(const TargetSequence&) const = default;
};

// Builds "v1 [SEP] v2 ... [EOS]" ids, truncated from the right to t_max with
// the terminal [EOS] always kept (trailing [SEP]s are dropped when the cut
// lands on one). An empty value list composes to a single [EOS].
TargetSequence compose_target(const std::vector<std::string>& values,
                              const Vocab& vocab, std::size_t t_max,
                              TokenizeMode mode,
                              std::size_t attribute_index = 0);

// Splits on [SEP], stops at the first [EOS] (or the end), drops empty
// segments, and deduplicates preserving first occurrence.
std::vector<std::string> parse_generated(const std::vector<std::size_t>& token_ids,
                                         const Vocab& vocab, TokenizeMode mode);

}  // namespace jpave::data
