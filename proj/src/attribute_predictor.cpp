#include "jpave/attribute_predictor.hpp"

#include "jpave/errors.hpp"

namespace jpave::model {

using numkit::Tape;
using numkit::Var;

Var attribute_probs(Tape& tape, Var context, Var predictor_w) {
    return tape.softmax(tape.matvec(predictor_w, context));
}

Var attribute_loss(Tape& tape, const std::vector<Var>& probs,
                   const std::vector<bool>& gold_exists) {
    require(probs.size() == gold_exists.size(),
            "attribute_loss: one gold label per attribute required");
    require(!probs.empty(), "attribute_loss: no attributes");
    Var total;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        Var term = tape.neg_log_pick(probs[i],
                                     gold_exists[i] ? kAttrExists : kAttrAbsent);
        total = total.valid() ? tape.add(total, term) : term;
    }
    return total;
}

std::vector<Var> cls_contexts(Tape& tape, const EncoderOutput& enc, Model& model) {
    auto& params = model.params();
    Var attr_embedding = tape.param(params.at("attr_embedding"));
    std::vector<Var> contexts(model.dims().n_attributes);
    for (std::size_t i = 0; i < contexts.size(); ++i) {
        Var query = tape.gather_row(attr_embedding, i);
        Var weights = tape.softmax(tape.matvec(enc.h_enc, query));
        contexts[i] = tape.vecmat(weights, enc.h_enc);
    }
    return contexts;
}

}  // namespace jpave::model
