#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "jpave/dataset.hpp"

namespace jpave::data {

// Knobs for the synthetic corpus generator. Values are two-atom phrases with
// cyclically overlapping atoms, so every atom of a held-out value still occurs
// in some seen value and stays inside the training vocabulary.
struct SynthConfig {
    std::size_t n_attributes = 5;
    std::size_t n_values_per_attribute = 4;
    std::size_t train_size = 200;
    std::size_t val_size = 32;
    std::size_t test_size = 32;
    std::size_t l_max = 20;
    double heldout_fraction = 0.0;  // share of the value inventory kept out of train/val
    std::uint64_t seed = 1;
    TokenizeMode mode = TokenizeMode::kWhitespace;
};

struct SynthCorpus {
    Schema schema;  // seen values only; held-out values never enter the schema
    Dataset train;
    Dataset val;
    Dataset test;   // cycles held-out values first so each appears at least once
};

SynthCorpus synth_generate(const SynthConfig& config);

// Writes schema.json plus {train,val,test}.jsonl into dir (created if needed).
void synth_write(const SynthCorpus& corpus, const std::string& dir,
                 TokenizeMode mode);

}  // namespace jpave::data
