#pragma once

#include <cstddef>
#include <vector>

#include "jpave/encoder.hpp"
#include "jpave/model.hpp"
#include "jpave/tape.hpp"

namespace jpave::model {

// Two-class softmax over [exists, absent] from an attribute's first-step
// attention context. Index 0 means the attribute is present in the product.
inline constexpr std::size_t kAttrExists = 0;
inline constexpr std::size_t kAttrAbsent = 1;

numkit::Var attribute_probs(numkit::Tape& tape, numkit::Var context,
                            numkit::Var predictor_w);

// Summed cross entropy of the gold class over all attributes.
numkit::Var attribute_loss(numkit::Tape& tape,
                           const std::vector<numkit::Var>& probs,
                           const std::vector<bool>& gold_exists);

// Decoder-free contexts for the classification variant: the attribute
// embedding itself queries the shared attention, c_i = softmax(H·E_attr[i])ᵀ·H.
std::vector<numkit::Var> cls_contexts(numkit::Tape& tape, const EncoderOutput& enc,
                                      Model& model);

}  // namespace jpave::model
