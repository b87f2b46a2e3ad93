#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "jpave/dataset.hpp"
#include "jpave/model.hpp"
#include "jpave/training.hpp"

namespace jpave::train {

// Everything needed to rebuild a trained model and rerun its evaluation:
// config, vocabulary, schema, named parameter tensors, RNG state, epoch.
struct Checkpoint {
    std::uint32_t version = 1;
    TrainConfig config;
    std::vector<std::string> vocab_tokens;
    data::Schema schema;
    std::vector<std::pair<std::string, numkit::Tensor>> tensors;
    std::string rng_state;
    std::size_t epoch = 0;
};

Checkpoint checkpoint_from_result(const TrainResult& result,
                                  const data::Schema& schema);

// File layout: magic "JPCK", u64 little-endian header length, JSON header
// (version/config/vocab/schema/tensor directory/rng state/epoch), then the
// tensor values as raw little-endian doubles in directory order. Raw bytes
// keep the save -> load -> forward path bit-identical.
void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

model::Model model_from_checkpoint(const Checkpoint& checkpoint);

}  // namespace jpave::train
