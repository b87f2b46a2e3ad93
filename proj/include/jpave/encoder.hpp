#pragma once

#include <cstddef>
#include <vector>

#include "jpave/model.hpp"
#include "jpave/tape.hpp"

namespace jpave::model {

// Tape handles for one encoded instance. h_enc is L×d_a (row t concatenates
// the two directional states at t); e_last concatenates the two final states
// and serves as the product representation.
struct EncoderOutput {
    numkit::Var h_enc;
    numkit::Var e_last;
    std::size_t length = 0;
    std::vector<std::size_t> token_ids;  // kept for the copy scatter target
};

EncoderOutput encode(numkit::Tape& tape, const std::vector<std::size_t>& token_ids,
                     Model& model);

}  // namespace jpave::model
