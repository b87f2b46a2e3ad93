#include "jpave/tape.hpp"

#include <algorithm>
#include <cmath>

namespace jpave::numkit {

namespace {

void require_vector(const Tensor& t, const char* who) {
    require(t.rank() == 1, std::string(who) + ": expected a vector");
}

void require_matrix(const Tensor& t, const char* who) {
    require(t.rank() == 2, std::string(who) + ": expected a matrix");
}

}  // namespace

Var Tape::constant(Tensor value) {
    Node n;
    n.op = Op::kLeaf;
    n.value = std::move(value);
    return push(std::move(n));
}

Var Tape::param(Parameter& p) {
    Node n;
    n.op = Op::kParam;
    n.external = &p.value;
    n.parameter = &p;
    return push(std::move(n));
}

const Tensor& Tape::val(Var v) const {
    require(v.valid() && v.idx < nodes_.size(), "tape: invalid var");
    return value_of(v.idx);
}

Var Tape::matmul(Var a, Var b) {
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    require_matrix(A, "matmul");
    require_matrix(B, "matmul");
    require(A.dim(1) == B.dim(0), "matmul: inner dimensions differ");
    Node n;
    n.op = Op::kMatmul;
    n.a = a.idx;
    n.b = b.idx;
    n.value = Tensor({A.dim(0), B.dim(1)});
    for (std::size_t i = 0; i < A.dim(0); ++i)
        for (std::size_t k = 0; k < A.dim(1); ++k) {
            const double aik = A.at(i, k);
            for (std::size_t j = 0; j < B.dim(1); ++j)
                n.value.at(i, j) += aik * B.at(k, j);
        }
    return push(std::move(n));
}

Var Tape::matmul_nt(Var a, Var b) {
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    require_matrix(A, "matmul_nt");
    require_matrix(B, "matmul_nt");
    require(A.dim(1) == B.dim(1), "matmul_nt: inner dimensions differ");
    Node n;
    n.op = Op::kMatmulNt;
    n.a = a.idx;
    n.b = b.idx;
    n.value = Tensor({A.dim(0), B.dim(0)});
    for (std::size_t i = 0; i < A.dim(0); ++i)
        for (std::size_t j = 0; j < B.dim(0); ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < A.dim(1); ++k) acc += A.at(i, k) * B.at(j, k);
            n.value.at(i, j) = acc;
        }
    return push(std::move(n));
}

Var Tape::matvec(Var m, Var v) {
    const Tensor& M = val(m);
    const Tensor& x = val(v);
    require_matrix(M, "matvec");
    require_vector(x, "matvec");
    require(M.dim(1) == x.dim(0), "matvec: dimensions differ");
    Node n;
    n.op = Op::kMatvec;
    n.a = m.idx;
    n.b = v.idx;
    n.value = Tensor({M.dim(0)});
    for (std::size_t i = 0; i < M.dim(0); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < M.dim(1); ++j) acc += M.at(i, j) * x[j];
        n.value[i] = acc;
    }
    return push(std::move(n));
}

Var Tape::vecmat(Var v, Var m) {
    const Tensor& x = val(v);
    const Tensor& M = val(m);
    require_vector(x, "vecmat");
    require_matrix(M, "vecmat");
    require(x.dim(0) == M.dim(0), "vecmat: dimensions differ");
    Node n;
    n.op = Op::kVecmat;
    n.a = v.idx;
    n.b = m.idx;
    n.value = Tensor({M.dim(1)});
    for (std::size_t i = 0; i < M.dim(0); ++i) {
        const double xi = x[i];
        for (std::size_t j = 0; j < M.dim(1); ++j) n.value[j] += xi * M.at(i, j);
    }
    return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    require(A.same_shape(B), "add: shapes differ");
    Node n;
    n.op = Op::kAdd;
    n.a = a.idx;
    n.b = b.idx;
    n.value = A;
    for (std::size_t i = 0; i < B.size(); ++i) n.value[i] += B[i];
    return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    require(A.same_shape(B), "mul: shapes differ");
    Node n;
    n.op = Op::kMul;
    n.a = a.idx;
    n.b = b.idx;
    n.value = A;
    for (std::size_t i = 0; i < B.size(); ++i) n.value[i] *= B[i];
    return push(std::move(n));
}

Var Tape::one_minus(Var a) {
    Node n;
    n.op = Op::kOneMinus;
    n.a = a.idx;
    n.value = val(a);
    for (double& v : n.value.data()) v = 1.0 - v;
    return push(std::move(n));
}

Var Tape::scale(Var x, Var s) {
    const Tensor& X = val(x);
    const Tensor& S = val(s);
    require(S.size() == 1, "scale: scalar must have one element");
    Node n;
    n.op = Op::kScale;
    n.a = x.idx;
    n.b = s.idx;
    n.value = X;
    for (double& v : n.value.data()) v *= S[0];
    return push(std::move(n));
}

Var Tape::sigmoid(Var a) {
    Node n;
    n.op = Op::kSigmoid;
    n.a = a.idx;
    n.value = val(a);
    for (double& v : n.value.data()) v = 1.0 / (1.0 + std::exp(-v));
    return push(std::move(n));
}

Var Tape::tanh(Var a) {
    Node n;
    n.op = Op::kTanh;
    n.a = a.idx;
    n.value = val(a);
    for (double& v : n.value.data()) v = std::tanh(v);
    return push(std::move(n));
}

Var Tape::concat(const std::vector<Var>& parts) {
    require(!parts.empty(), "concat: no inputs");
    std::size_t total = 0;
    for (Var p : parts) {
        require_vector(val(p), "concat");
        total += val(p).size();
    }
    Node n;
    n.op = Op::kConcat;
    n.value = Tensor({total});
    std::size_t off = 0;
    for (Var p : parts) {
        const Tensor& t = val(p);
        std::copy(t.data().begin(), t.data().end(), n.value.data().begin() + off);
        off += t.size();
        n.list.push_back(p.idx);
    }
    return push(std::move(n));
}

Var Tape::gather_row(Var m, std::size_t row) {
    const Tensor& M = val(m);
    require_matrix(M, "gather_row");
    require(row < M.dim(0), "gather_row: row out of range");
    Node n;
    n.op = Op::kGatherRow;
    n.a = m.idx;
    n.aux = row;
    n.value = Tensor({M.dim(1)});
    for (std::size_t j = 0; j < M.dim(1); ++j) n.value[j] = M.at(row, j);
    return push(std::move(n));
}

Var Tape::stack_rows(const std::vector<Var>& rows) {
    require(!rows.empty(), "stack_rows: no rows");
    const std::size_t cols = val(rows.front()).size();
    Node n;
    n.op = Op::kStackRows;
    n.value = Tensor({rows.size(), cols});
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const Tensor& t = val(rows[r]);
        require_vector(t, "stack_rows");
        require(t.size() == cols, "stack_rows: ragged rows");
        for (std::size_t j = 0; j < cols; ++j) n.value.at(r, j) = t[j];
        n.list.push_back(rows[r].idx);
    }
    return push(std::move(n));
}

Var Tape::scatter_add(Var src, const std::vector<std::size_t>& ids,
                      std::size_t out_dim) {
    const Tensor& S = val(src);
    require_vector(S, "scatter_add");
    require(S.size() == ids.size(), "scatter_add: ids length differs from source");
    Node n;
    n.op = Op::kScatterAdd;
    n.a = src.idx;
    n.aux = out_dim;
    n.list = ids;
    n.value = Tensor({out_dim});
    for (std::size_t i = 0; i < ids.size(); ++i) {
        require(ids[i] < out_dim, "scatter_add: index out of range");
        n.value[ids[i]] += S[i];
    }
    return push(std::move(n));
}

Var Tape::mean_rows(Var m) {
    const Tensor& M = val(m);
    require_matrix(M, "mean_rows");
    require(M.dim(0) > 0, "mean_rows: empty matrix");
    Node n;
    n.op = Op::kMeanRows;
    n.a = m.idx;
    n.value = Tensor({M.dim(1)});
    for (std::size_t i = 0; i < M.dim(0); ++i)
        for (std::size_t j = 0; j < M.dim(1); ++j) n.value[j] += M.at(i, j);
    const double inv = 1.0 / static_cast<double>(M.dim(0));
    for (double& v : n.value.data()) v *= inv;
    return push(std::move(n));
}

Var Tape::sum(Var v) {
    const Tensor& X = val(v);
    Node n;
    n.op = Op::kSum;
    n.a = v.idx;
    double acc = 0.0;
    for (double x : X.data()) acc += x;
    n.value = Tensor::scalar(acc);
    return push(std::move(n));
}

namespace {

// Shared by the tape op and the plain helper.
void softmax_in_place(const double* in, double* out, std::size_t n) {
    double mx = in[0];
    for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, in[i]);
    double denom = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::exp(in[i] - mx);
        denom += out[i];
    }
    for (std::size_t i = 0; i < n; ++i) out[i] /= denom;
}

}  // namespace

Var Tape::softmax(Var v) {
    const Tensor& X = val(v);
    require_vector(X, "softmax");
    require(X.size() >= 1, "softmax: empty input");
    require(X.all_finite(), "softmax: non-finite logits");
    Node n;
    n.op = Op::kSoftmax;
    n.a = v.idx;
    n.value = Tensor({X.size()});
    softmax_in_place(X.data().data(), n.value.data().data(), X.size());
    return push(std::move(n));
}

Var Tape::softmax_rows(Var m) {
    const Tensor& M = val(m);
    require_matrix(M, "softmax_rows");
    require(M.dim(1) >= 1, "softmax_rows: empty rows");
    require(M.all_finite(), "softmax_rows: non-finite logits");
    Node n;
    n.op = Op::kSoftmaxRows;
    n.a = m.idx;
    n.value = Tensor(M.shape());
    for (std::size_t r = 0; r < M.dim(0); ++r)
        softmax_in_place(&M.data()[r * M.dim(1)], &n.value.data()[r * M.dim(1)],
                         M.dim(1));
    return push(std::move(n));
}

Var Tape::neg_log_pick(Var probs, std::size_t target) {
    const Tensor& P = val(probs);
    require_vector(P, "neg_log_pick");
    require(target < P.size(), "neg_log_pick: target out of range");
    Node n;
    n.op = Op::kNegLogPick;
    n.a = probs.idx;
    n.aux = target;
    n.value = Tensor::scalar(-std::log(std::max(P[target], kLogFloor)));
    return push(std::move(n));
}

Var Tape::bce(Var probs, Tensor targets) {
    const Tensor& P = val(probs);
    require_vector(P, "bce");
    require(P.same_shape(targets), "bce: target shape differs");
    double loss = 0.0;
    for (std::size_t i = 0; i < P.size(); ++i) {
        const double t = targets[i];
        require(t == 0.0 || t == 1.0, "bce: targets must be 0/1");
        const double p = std::clamp(P[i], kLogFloor, 1.0 - kLogFloor);
        loss -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
    }
    Node n;
    n.op = Op::kBce;
    n.a = probs.idx;
    n.saved = std::move(targets);
    n.value = Tensor::scalar(loss);
    return push(std::move(n));
}

Tensor& Tape::grad_of(std::size_t idx) {
    Tensor& g = grads_[idx];
    if (g.empty()) g = Tensor(value_of(idx).shape());
    return g;
}

void Tape::backward(Var loss) {
    const Tensor& L = val(loss);
    require(L.size() == 1, "backward: loss must be scalar");
    grads_.assign(nodes_.size(), Tensor());
    grad_of(loss.idx)[0] = 1.0;
    for (std::size_t i = nodes_.size(); i-- > 0;) {
        if (grads_[i].empty()) continue;  // not on a path to the loss
        step_backward(i);
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        Parameter* p = nodes_[i].parameter;
        if (p == nullptr || grads_[i].empty()) continue;
        for (std::size_t k = 0; k < p->grad.size(); ++k) p->grad[k] += grads_[i][k];
    }
    // Keep grads_ alive until the next backward so callers may inspect them.
}

void Tape::step_backward(std::size_t idx) {
    const Node& n = nodes_[idx];
    const Tensor& g = grads_[idx];
    const Tensor& y = value_of(idx);
    switch (n.op) {
        case Op::kLeaf:
        case Op::kParam:
            break;
        case Op::kMatmul: {
            const Tensor& A = value_of(n.a);
            const Tensor& B = value_of(n.b);
            Tensor& da = grad_of(n.a);
            Tensor& db = grad_of(n.b);
            // dA += G·Bᵀ, dB += Aᵀ·G
            for (std::size_t i = 0; i < A.dim(0); ++i)
                for (std::size_t j = 0; j < B.dim(1); ++j) {
                    const double gij = g.at(i, j);
                    for (std::size_t k = 0; k < A.dim(1); ++k) {
                        da.at(i, k) += gij * B.at(k, j);
                        db.at(k, j) += A.at(i, k) * gij;
                    }
                }
            break;
        }
        case Op::kMatmulNt: {
            const Tensor& A = value_of(n.a);
            const Tensor& B = value_of(n.b);
            Tensor& da = grad_of(n.a);
            Tensor& db = grad_of(n.b);
            // Y = A·Bᵀ: dA += G·B, dB += Gᵀ·A
            for (std::size_t i = 0; i < A.dim(0); ++i)
                for (std::size_t j = 0; j < B.dim(0); ++j) {
                    const double gij = g.at(i, j);
                    for (std::size_t k = 0; k < A.dim(1); ++k) {
                        da.at(i, k) += gij * B.at(j, k);
                        db.at(j, k) += gij * A.at(i, k);
                    }
                }
            break;
        }
        case Op::kMatvec: {
            const Tensor& M = value_of(n.a);
            const Tensor& x = value_of(n.b);
            Tensor& dm = grad_of(n.a);
            Tensor& dx = grad_of(n.b);
            for (std::size_t i = 0; i < M.dim(0); ++i) {
                const double gi = g[i];
                for (std::size_t j = 0; j < M.dim(1); ++j) {
                    dm.at(i, j) += gi * x[j];
                    dx[j] += gi * M.at(i, j);
                }
            }
            break;
        }
        case Op::kVecmat: {
            const Tensor& x = value_of(n.a);
            const Tensor& M = value_of(n.b);
            Tensor& dx = grad_of(n.a);
            Tensor& dm = grad_of(n.b);
            for (std::size_t i = 0; i < M.dim(0); ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < M.dim(1); ++j) {
                    acc += g[j] * M.at(i, j);
                    dm.at(i, j) += x[i] * g[j];
                }
                dx[i] += acc;
            }
            break;
        }
        case Op::kAdd: {
            Tensor& da = grad_of(n.a);
            Tensor& db = grad_of(n.b);
            for (std::size_t i = 0; i < g.size(); ++i) {
                da[i] += g[i];
                db[i] += g[i];
            }
            break;
        }
        case Op::kMul: {
            const Tensor& A = value_of(n.a);
            const Tensor& B = value_of(n.b);
            Tensor& da = grad_of(n.a);
            Tensor& db = grad_of(n.b);
            for (std::size_t i = 0; i < g.size(); ++i) {
                da[i] += g[i] * B[i];
                db[i] += g[i] * A[i];
            }
            break;
        }
        case Op::kOneMinus: {
            Tensor& da = grad_of(n.a);
            for (std::size_t i = 0; i < g.size(); ++i) da[i] -= g[i];
            break;
        }
        case Op::kScale: {
            const Tensor& X = value_of(n.a);
            const double s = value_of(n.b)[0];
            Tensor& dx = grad_of(n.a);
            Tensor& ds = grad_of(n.b);
            double acc = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) {
                dx[i] += g[i] * s;
                acc += g[i] * X[i];
            }
            ds[0] += acc;
            break;
        }
        case Op::kSigmoid: {
            Tensor& da = grad_of(n.a);
            for (std::size_t i = 0; i < g.size(); ++i)
                da[i] += g[i] * y[i] * (1.0 - y[i]);
            break;
        }
        case Op::kTanh: {
            Tensor& da = grad_of(n.a);
            for (std::size_t i = 0; i < g.size(); ++i)
                da[i] += g[i] * (1.0 - y[i] * y[i]);
            break;
        }
        case Op::kConcat: {
            std::size_t off = 0;
            for (std::size_t p : n.list) {
                Tensor& dp = grad_of(p);
                for (std::size_t i = 0; i < dp.size(); ++i) dp[i] += g[off + i];
                off += dp.size();
            }
            break;
        }
        case Op::kGatherRow: {
            Tensor& dm = grad_of(n.a);
            const std::size_t cols = dm.dim(1);
            for (std::size_t j = 0; j < cols; ++j) dm.at(n.aux, j) += g[j];
            break;
        }
        case Op::kStackRows: {
            const std::size_t cols = y.dim(1);
            for (std::size_t r = 0; r < n.list.size(); ++r) {
                Tensor& dr = grad_of(n.list[r]);
                for (std::size_t j = 0; j < cols; ++j) dr[j] += g.at(r, j);
            }
            break;
        }
        case Op::kScatterAdd: {
            Tensor& ds = grad_of(n.a);
            for (std::size_t i = 0; i < n.list.size(); ++i) ds[i] += g[n.list[i]];
            break;
        }
        case Op::kMeanRows: {
            Tensor& dm = grad_of(n.a);
            const double inv = 1.0 / static_cast<double>(dm.dim(0));
            for (std::size_t i = 0; i < dm.dim(0); ++i)
                for (std::size_t j = 0; j < dm.dim(1); ++j) dm.at(i, j) += g[j] * inv;
            break;
        }
        case Op::kSum: {
            Tensor& da = grad_of(n.a);
            for (double& v : da.data()) v += g[0];
            break;
        }
        case Op::kSoftmax: {
            Tensor& da = grad_of(n.a);
            double dot = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * y[i];
            for (std::size_t i = 0; i < g.size(); ++i) da[i] += y[i] * (g[i] - dot);
            break;
        }
        case Op::kSoftmaxRows: {
            Tensor& da = grad_of(n.a);
            const std::size_t cols = y.dim(1);
            for (std::size_t r = 0; r < y.dim(0); ++r) {
                double dot = 0.0;
                for (std::size_t j = 0; j < cols; ++j) dot += g.at(r, j) * y.at(r, j);
                for (std::size_t j = 0; j < cols; ++j)
                    da.at(r, j) += y.at(r, j) * (g.at(r, j) - dot);
            }
            break;
        }
        case Op::kNegLogPick: {
            const Tensor& P = value_of(n.a);
            Tensor& dp = grad_of(n.a);
            // Zero slope inside the floor region, matching the forward clamp.
            if (P[n.aux] > kLogFloor) dp[n.aux] -= g[0] / P[n.aux];
            break;
        }
        case Op::kBce: {
            const Tensor& P = value_of(n.a);
            Tensor& dp = grad_of(n.a);
            for (std::size_t i = 0; i < P.size(); ++i) {
                if (P[i] <= kLogFloor || P[i] >= 1.0 - kLogFloor) continue;
                const double t = n.saved[i];
                dp[i] += g[0] * (P[i] - t) / (P[i] * (1.0 - P[i]));
            }
            break;
        }
    }
}

Var gru_cell(Tape& tape, Var input, Var hidden_prev, const GruCellVars& p) {
    const Tensor& x = tape.val(input);
    const Tensor& h = tape.val(hidden_prev);
    const Tensor& wu = tape.val(p.w_update);
    require(wu.rank() == 2 && wu.dim(1) == x.dim(0) && wu.dim(0) == h.dim(0),
            "gru_cell: parameter shapes inconsistent with input/hidden");
    Var update = tape.sigmoid(tape.add(
        tape.add(tape.matvec(p.w_update, input), tape.matvec(p.u_update, hidden_prev)),
        p.b_update));
    Var reset = tape.sigmoid(tape.add(
        tape.add(tape.matvec(p.w_reset, input), tape.matvec(p.u_reset, hidden_prev)),
        p.b_reset));
    Var cand = tape.tanh(tape.add(
        tape.add(tape.matvec(p.w_cand, input),
                 tape.matvec(p.u_cand, tape.mul(reset, hidden_prev))),
        p.b_cand));
    return tape.add(tape.mul(tape.one_minus(update), hidden_prev),
                    tape.mul(update, cand));
}

std::vector<double> softmax(const std::vector<double>& logits) {
    require(!logits.empty(), "softmax: empty input");
    for (double v : logits) require(std::isfinite(v), "softmax: non-finite logits");
    std::vector<double> out(logits.size());
    softmax_in_place(logits.data(), out.data(), logits.size());
    return out;
}

}  // namespace jpave::numkit
