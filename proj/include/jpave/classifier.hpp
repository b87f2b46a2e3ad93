#pragma once

#include <vector>

#include "jpave/encoder.hpp"
#include "jpave/model.hpp"
#include "jpave/tape.hpp"

namespace jpave::model {

// Value attention over token representations. attn is N_value×L with each row
// a distribution over positions; pooled is the d_a product summary averaged
// over all value rows.
struct ValueAttention {
    numkit::Var attn;
    numkit::Var pooled;
};

// Raw-handle form so tests can feed a hand-built token matrix.
ValueAttention value_attention(numkit::Tape& tape, numkit::Var h_enc,
                               numkit::Var value_embedding);
ValueAttention value_attention(numkit::Tape& tape, const EncoderOutput& enc,
                               Model& model);

// Per-value sigmoid probabilities from the pooled summary.
numkit::Var classify_values(numkit::Tape& tape, numkit::Var pooled, Model& model);

// Summed binary cross entropy against the gold indicator vector.
numkit::Var value_bce_loss(numkit::Tape& tape, numkit::Var probs,
                           const std::vector<bool>& gold);

}  // namespace jpave::model
