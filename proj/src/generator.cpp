#include "jpave/generator.hpp"

#include "jpave/errors.hpp"
#include "jpave/vocab.hpp"

namespace jpave::model {

using numkit::Tape;
using numkit::Tensor;
using numkit::Var;

DecoderVars bind_decoder(Tape& tape, Model& model) {
    require(model.variant() == Variant::kGen, "bind_decoder: generation variant only");
    auto& params = model.params();
    DecoderVars dec;
    dec.cell = bind_gru(tape, params, "decoder");
    dec.copy_w = tape.param(params.at("copy_gate.W"));
    dec.embedding = tape.param(params.at("embedding"));
    dec.attr_embedding = tape.param(params.at("attr_embedding"));
    return dec;
}

DecodeStep decode_step(Tape& tape, Var input_embedding, Var h_prev,
                       const EncoderOutput& enc, const DecoderVars& dec,
                       const DecodeOptions& options) {
    DecodeStep step;
    step.input_embedding = input_embedding;
    step.hidden = numkit::gru_cell(tape, input_embedding, h_prev, dec.cell);
    step.vocab_dist = tape.softmax(tape.matvec(dec.embedding, step.hidden));
    step.input_dist = tape.softmax(tape.matvec(enc.h_enc, step.hidden));
    step.context = tape.vecmat(step.input_dist, enc.h_enc);

    if (options.no_copy) {
        step.final_dist = step.vocab_dist;
        return step;
    }
    if (options.force_gate.has_value()) {
        const double g = *options.force_gate;
        require(g >= 0.0 && g <= 1.0, "decode_step: forced gate outside [0, 1]");
        step.copy_gate = tape.constant(Tensor::scalar(g));
    } else {
        Var features = tape.concat({step.hidden, input_embedding, step.context});
        step.copy_gate = tape.sigmoid(tape.matvec(dec.copy_w, features));
    }
    Var copied = tape.scatter_add(
        tape.scale(step.input_dist, tape.one_minus(step.copy_gate)),
        enc.token_ids, tape.val(step.vocab_dist).size());
    step.final_dist = tape.add(tape.scale(step.vocab_dist, step.copy_gate), copied);
    return step;
}

namespace {

std::size_t argmax(const Tensor& t) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < t.size(); ++i)
        if (t[i] > t[best]) best = i;
    return best;
}

}  // namespace

DecodeTrace generate_sequence(Tape& tape, std::size_t attribute_index,
                              const EncoderOutput& enc, Model& model,
                              std::size_t t_max, const DecodeOptions& options) {
    require(attribute_index < model.dims().n_attributes,
            "generate_sequence: attribute index out of range");
    require(t_max >= 1, "generate_sequence: t_max must be at least 1");

    const DecoderVars dec = bind_decoder(tape, model);
    DecodeTrace trace;
    trace.attribute_index = attribute_index;

    Var input = tape.gather_row(dec.attr_embedding, attribute_index);
    Var hidden = enc.e_last;
    for (std::size_t t = 0; t < t_max; ++t) {
        DecodeStep step = decode_step(tape, input, hidden, enc, dec, options);
        const std::size_t token = argmax(tape.val(step.final_dist));
        hidden = step.hidden;
        trace.steps.push_back(step);
        trace.emitted.push_back(token);
        if (token == data::Vocab::kEos) break;
        input = tape.gather_row(dec.embedding, token);
    }
    return trace;
}

TeacherForcedResult teacher_forced_nll(Tape& tape,
                                       const std::vector<data::TargetSequence>& targets,
                                       const EncoderOutput& enc, Model& model,
                                       const DecodeOptions& options) {
    require(targets.size() == model.dims().n_attributes,
            "teacher_forced_nll: one target per attribute required");

    const DecoderVars dec = bind_decoder(tape, model);
    TeacherForcedResult result;
    result.first_contexts.resize(targets.size());

    Var total;
    for (const auto& target : targets) {
        require(target.attribute_index < targets.size(),
                "teacher_forced_nll: attribute index out of range");
        require(!result.first_contexts[target.attribute_index].valid(),
                "teacher_forced_nll: duplicate target for one attribute");
        require(!target.token_ids.empty(),
                "teacher_forced_nll: empty target sequence");
        Var input = tape.gather_row(dec.attr_embedding, target.attribute_index);
        Var hidden = enc.e_last;
        for (std::size_t j = 0; j < target.token_ids.size(); ++j) {
            DecodeStep step = decode_step(tape, input, hidden, enc, dec, options);
            if (j == 0) result.first_contexts[target.attribute_index] = step.context;
            Var term = tape.neg_log_pick(step.final_dist, target.token_ids[j]);
            total = total.valid() ? tape.add(total, term) : term;
            hidden = step.hidden;
            input = tape.gather_row(dec.embedding, target.token_ids[j]);
        }
    }
    result.loss = total;
    return result;
}

}  // namespace jpave::model
