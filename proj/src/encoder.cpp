#include "jpave/encoder.hpp"

#include "jpave/errors.hpp"

namespace jpave::model {

using numkit::Tape;
using numkit::Tensor;
using numkit::Var;

EncoderOutput encode(Tape& tape, const std::vector<std::size_t>& token_ids,
                     Model& model) {
    const std::size_t length = token_ids.size();
    require(length >= 1, "encode: empty token sequence");
    for (std::size_t id : token_ids)
        require(id < model.dims().vocab_size, "encode: token id out of range");

    auto& params = model.params();
    Var embedding = tape.param(params.at("embedding"));
    std::vector<Var> inputs(length);
    for (std::size_t t = 0; t < length; ++t)
        inputs[t] = tape.gather_row(embedding, token_ids[t]);

    const auto fwd = bind_gru(tape, params, "encoder.fwd");
    const auto bwd = bind_gru(tape, params, "encoder.bwd");
    const Tensor zero({model.dims().hidden});

    std::vector<Var> fwd_states(length), bwd_states(length);
    Var h = tape.constant(zero);
    for (std::size_t t = 0; t < length; ++t) {
        h = numkit::gru_cell(tape, inputs[t], h, fwd);
        fwd_states[t] = h;
    }
    h = tape.constant(zero);
    for (std::size_t t = length; t-- > 0;) {
        h = numkit::gru_cell(tape, inputs[t], h, bwd);
        bwd_states[t] = h;
    }

    std::vector<Var> rows(length);
    for (std::size_t t = 0; t < length; ++t)
        rows[t] = tape.concat({fwd_states[t], bwd_states[t]});

    EncoderOutput out;
    out.h_enc = tape.stack_rows(rows);
    out.e_last = tape.concat({fwd_states[length - 1], bwd_states[0]});
    out.length = length;
    out.token_ids = token_ids;
    return out;
}

}  // namespace jpave::model
