#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "jpave/tensor.hpp"

namespace jpave::numkit {

// Handle to a value recorded on a Tape.
struct Var {
    std::size_t idx = std::numeric_limits<std::size_t>::max();
    bool valid() const { return idx != std::numeric_limits<std::size_t>::max(); }
};

// Floor applied inside the log of both cross-entropy ops; keeps losses finite
// when a probability collapses to zero.
inline constexpr double kLogFloor = 1e-12;

// Reverse-mode tape over the fixed op set the model needs. One Tape per
// forward pass; backward() accumulates into the bound Parameter gradients.
//
// All ops are deterministic: plain indexed loops, no reordered reductions.
class Tape {
public:
    // Leaves.
    Var constant(Tensor value);
    Var param(Parameter& p);  // references p.value, no copy

    const Tensor& val(Var v) const;
    std::size_t node_count() const { return nodes_.size(); }

    // Linear algebra.
    Var matmul(Var a, Var b);     // (m×k)·(k×n) -> m×n
    Var matmul_nt(Var a, Var b);  // (m×k)·(n×k)ᵀ -> m×n
    Var matvec(Var m, Var v);     // (r×c)·(c) -> r
    Var vecmat(Var v, Var m);     // (r)·(r×c) -> c

    // Elementwise.
    Var add(Var a, Var b);
    Var mul(Var a, Var b);
    Var one_minus(Var a);      // 1 - x
    Var scale(Var x, Var s);   // s is shape {1}
    Var sigmoid(Var a);
    Var tanh(Var a);

    // Shape plumbing.
    Var concat(const std::vector<Var>& parts);      // vectors -> vector
    Var gather_row(Var m, std::size_t row);         // matrix -> vector
    Var stack_rows(const std::vector<Var>& rows);   // L vectors -> L×d
    Var scatter_add(Var src, const std::vector<std::size_t>& ids,
                    std::size_t out_dim);           // vector -> vector
    Var mean_rows(Var m);                           // mean over axis 0
    Var sum(Var v);                                 // any shape -> {1}

    // Distributions and losses.
    Var softmax(Var v);           // vector, max-stabilized
    Var softmax_rows(Var m);      // per-row softmax
    Var neg_log_pick(Var probs, std::size_t target);  // -log(max(p[t], floor))
    Var bce(Var probs, Tensor targets);               // summed BCE, clamped

    // Seeds d(loss)=1 and sweeps the tape in reverse; loss must be shape {1}.
    void backward(Var loss);

private:
    enum class Op {
        kLeaf, kParam,
        kMatmul, kMatmulNt, kMatvec, kVecmat,
        kAdd, kMul, kOneMinus, kScale, kSigmoid, kTanh,
        kConcat, kGatherRow, kStackRows, kScatterAdd, kMeanRows, kSum,
        kSoftmax, kSoftmaxRows, kNegLogPick, kBce,
    };

    struct Node {
        Tensor value;                   // owned output (empty for kParam)
        const Tensor* external = nullptr;
        Parameter* parameter = nullptr;
        Op op = Op::kLeaf;
        std::size_t a = 0, b = 0;       // parent indices
        std::size_t aux = 0;            // row / target / out_dim
        std::vector<std::size_t> list;  // concat/stack parents, scatter ids
        Tensor saved;                   // bce targets
    };

    const Tensor& value_of(std::size_t idx) const {
        const Node& n = nodes_[idx];
        return n.external ? *n.external : n.value;
    }

    Var push(Node node) {
        nodes_.push_back(std::move(node));
        return Var{nodes_.size() - 1};
    }

    Tensor& grad_of(std::size_t idx);
    void step_backward(std::size_t idx);

    std::vector<Node> nodes_;
    std::vector<Tensor> grads_;
};

// GRU cell parameter handles: input/hidden maps and bias for the update gate,
// reset gate, and candidate state.
struct GruCellVars {
    Var w_update, u_update, b_update;
    Var w_reset, u_reset, b_reset;
    Var w_cand, u_cand, b_cand;
};

// Gated update: z=σ(Wz·x+Uz·h+bz), r=σ(Wr·x+Ur·h+br),
// cand=tanh(Wc·x+Uc·(r⊙h)+bc), h'=(1−z)⊙h+z⊙cand.
Var gru_cell(Tape& tape, Var input, Var hidden_prev, const GruCellVars& p);

// Plain softmax over a logits vector (max-stabilized).
std::vector<double> softmax(const std::vector<double>& logits);

}  // namespace jpave::numkit
