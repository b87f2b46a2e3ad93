#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "jpave/encoder.hpp"
#include "jpave/model.hpp"
#include "jpave/tape.hpp"
#include "jpave/target.hpp"

namespace jpave::model {

// Decoder behaviour switches. force_gate pins the copy gate to a constant
// (test hook for the gate-extreme checks); no_copy drops the copy path so the
// final distribution is the vocabulary softmax alone.
struct DecodeOptions {
    bool no_copy = false;
    std::optional<double> force_gate;
};

// Tape handles produced by one decoder step. copy_gate is invalid when the
// step ran with no_copy.
struct DecodeStep {
    numkit::Var hidden;           // d_a decoder state
    numkit::Var vocab_dist;       // |V| softmax over the vocabulary
    numkit::Var input_dist;       // L softmax over input positions
    numkit::Var copy_gate;        // {1} mixing weight in [0, 1]
    numkit::Var context;          // d_a attention-weighted encoder summary
    numkit::Var input_embedding;  // d_a embedding the step consumed
    numkit::Var final_dist;       // |V| mixed output distribution
};

struct DecodeTrace {
    std::size_t attribute_index = 0;
    std::vector<DecodeStep> steps;
    std::vector<std::size_t> emitted;  // greedy token ids, [EOS] included when reached
};

// Decoder parameters bound onto one tape, shared across that tape's steps.
struct DecoderVars {
    numkit::GruCellVars cell;
    numkit::Var copy_w;
    numkit::Var embedding;
    numkit::Var attr_embedding;
};

DecoderVars bind_decoder(numkit::Tape& tape, Model& model);

DecodeStep decode_step(numkit::Tape& tape, numkit::Var input_embedding,
                       numkit::Var h_prev, const EncoderOutput& enc,
                       const DecoderVars& dec, const DecodeOptions& options = {});

// Greedy decode for one attribute: step 1 consumes the attribute embedding
// with e_last as previous state; later steps consume the embedding of the
// token just emitted. Stops at [EOS] or after t_max steps.
DecodeTrace generate_sequence(numkit::Tape& tape, std::size_t attribute_index,
                              const EncoderOutput& enc, Model& model,
                              std::size_t t_max, const DecodeOptions& options = {});

struct TeacherForcedResult {
    numkit::Var loss;                         // {1} summed token NLL
    std::vector<numkit::Var> first_contexts;  // c_i1 per attribute, for the predictor
};

// Teacher-forced NLL over one target per attribute (absent attributes carry a
// bare-[EOS] target). Gold tokens feed the next step's input.
TeacherForcedResult teacher_forced_nll(numkit::Tape& tape,
                                       const std::vector<data::TargetSequence>& targets,
                                       const EncoderOutput& enc, Model& model,
                                       const DecodeOptions& options = {});

}  // namespace jpave::model
