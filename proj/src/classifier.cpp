#include "jpave/classifier.hpp"

#include "jpave/errors.hpp"

namespace jpave::model {

using numkit::Tape;
using numkit::Tensor;
using numkit::Var;

ValueAttention value_attention(Tape& tape, Var h_enc, Var value_embedding) {
    ValueAttention out;
    out.attn = tape.softmax_rows(tape.matmul_nt(value_embedding, h_enc));
    out.pooled = tape.mean_rows(tape.matmul(out.attn, h_enc));
    return out;
}

ValueAttention value_attention(Tape& tape, const EncoderOutput& enc, Model& model) {
    require(model.variant() == Variant::kCls,
            "value_attention: classification variant only");
    Var value_embedding = tape.param(model.params().at("value_embedding"));
    return value_attention(tape, enc.h_enc, value_embedding);
}

Var classify_values(Tape& tape, Var pooled, Model& model) {
    auto& params = model.params();
    Var w = tape.param(params.at("value_classifier.W"));
    Var b = tape.param(params.at("value_classifier.b"));
    return tape.sigmoid(tape.add(tape.matvec(w, pooled), b));
}

Var value_bce_loss(Tape& tape, Var probs, const std::vector<bool>& gold) {
    require(tape.val(probs).size() == gold.size(),
            "value_bce_loss: one gold bit per schema value required");
    Tensor indicator({gold.size()});
    for (std::size_t i = 0; i < gold.size(); ++i)
        indicator[i] = gold[i] ? 1.0 : 0.0;
    return tape.bce(probs, std::move(indicator));
}

}  // namespace jpave::model
