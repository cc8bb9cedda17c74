#pragma once

#include "fsgad/graph.hpp"
#include "fsgad/matrix.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsgad::ad {

// Define-by-run reverse-mode differentiation over dense-matrix primitives.
// Values are computed eagerly at node construction (so shape errors surface
// immediately); gradient() replays the record backwards. One Tape per
// training step; parameters live outside the tape as plain Matrices.

class Tape;

struct Var {
    Tape* tape = nullptr;
    int id = -1;
};

enum class Op {
    kLeaf,
    kMatMul,
    kSpMM,       // constant sparse operator times expression
    kAdd,
    kAddRowVec,  // matrix + broadcast row vector
    kScale,      // constant scalar times expression
    kSigmoid,
    kRelu,
    kRowMean,    // column-wise mean over rows -> 1 x c
    kConcatCols,
    kSquare,
    kSum,        // sum of all entries -> 1 x 1
    kLog,
    kExp,
    kDot,        // sum of elementwise product -> 1 x 1
    kMaximum,    // elementwise max
};

class Tape {
public:
    struct Node {
        Op op = Op::kLeaf;
        Matrix value;
        Matrix grad;  // allocated lazily during backward
        bool requires_grad = false;
        int in0 = -1, in1 = -1;
        double scalar = 0.0;                  // kScale
        const SparseMatrix* sparse = nullptr; // kSpMM; not owned, caller keeps alive
    };

    /// Trainable leaf: gradients are accumulated for it.
    Var param(Matrix value) { return push_leaf(std::move(value), true); }

    /// Non-trainable leaf.
    Var constant(Matrix value) { return push_leaf(std::move(value), false); }

    Var constant_scalar(double v) { return constant(scalar_matrix(v)); }

    const Matrix& value(Var v) const { return node(v).value; }

    /// Gradient of the last backward() root w.r.t. v (zero matrix if the
    /// root does not depend on v).
    Matrix grad(Var v) const {
        const Node& nd = node(v);
        if (nd.grad.size() == 0) return Matrix::Zero(nd.value.rows(), nd.value.cols());
        return nd.grad;
    }

    /// Reverse pass from a scalar root.
    void backward(Var root) {
        const Node& r = node(root);
        if (r.value.rows() != 1 || r.value.cols() != 1)
            throw std::invalid_argument("backward: root must be scalar (1x1)");
        for (auto& nd : nodes_) nd.grad.resize(0, 0);
        nodes_[static_cast<std::size_t>(root.id)].grad = scalar_matrix(1.0);
        for (int i = root.id; i >= 0; --i) {
            Node& nd = nodes_[static_cast<std::size_t>(i)];
            if (!nd.requires_grad || nd.grad.size() == 0) continue;
            propagate(nd);
        }
    }

    std::size_t size() const { return nodes_.size(); }

    // ---- primitives -------------------------------------------------------

    Var matmul(Var a, Var b) {
        const Matrix& A = value(a);
        const Matrix& B = value(b);
        if (A.cols() != B.rows()) throw std::invalid_argument("matmul: inner dims differ");
        return push(Op::kMatMul, A * B, a, b);
    }

    Var spmm(const SparseMatrix& s, Var x) {
        return push_sparse(s, x);
    }

    Var add(Var a, Var b) {
        const Matrix& A = value(a);
        const Matrix& B = value(b);
        if (A.rows() != B.rows() || A.cols() != B.cols())
            throw std::invalid_argument("add: shape mismatch");
        return push(Op::kAdd, A + B, a, b);
    }

    Var add_rowvec(Var a, Var b) {
        const Matrix& A = value(a);
        const Matrix& B = value(b);
        if (B.rows() != 1 || A.cols() != B.cols())
            throw std::invalid_argument("add_rowvec: need 1 x cols(a) row vector");
        Matrix out = A;
        out.rowwise() += B.row(0);
        return push(Op::kAddRowVec, std::move(out), a, b);
    }

    Var scale(Var a, double c) {
        Var v = push(Op::kScale, value(a) * c, a);
        nodes_.back().scalar = c;
        return v;
    }

    Var sub(Var a, Var b) { return add(a, scale(b, -1.0)); }

    Var sigmoid(Var a) {
        Matrix out = value(a).unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
        return push(Op::kSigmoid, std::move(out), a);
    }

    Var relu(Var a) {
        return push(Op::kRelu, value(a).cwiseMax(0.0), a);
    }

    Var row_mean(Var a) {
        const Matrix& A = value(a);
        if (A.rows() == 0) throw std::invalid_argument("row_mean: empty matrix");
        Matrix out = A.colwise().mean();
        return push(Op::kRowMean, std::move(out), a);
    }

    Var concat_cols(Var a, Var b) {
        const Matrix& A = value(a);
        const Matrix& B = value(b);
        if (A.rows() != B.rows()) throw std::invalid_argument("concat_cols: row counts differ");
        Matrix out(A.rows(), A.cols() + B.cols());
        out.leftCols(A.cols()) = A;
        out.rightCols(B.cols()) = B;
        return push(Op::kConcatCols, std::move(out), a, b);
    }

    Var square(Var a) { return push(Op::kSquare, value(a).array().square().matrix(), a); }

    Var sum(Var a) { return push(Op::kSum, scalar_matrix(value(a).sum()), a); }

    Var log(Var a) { return push(Op::kLog, value(a).array().log().matrix(), a); }

    Var exp(Var a) { return push(Op::kExp, value(a).array().exp().matrix(), a); }

    Var dot(Var a, Var b) {
        const Matrix& A = value(a);
        const Matrix& B = value(b);
        if (A.rows() != B.rows() || A.cols() != B.cols())
            throw std::invalid_argument("dot: shape mismatch");
        return push(Op::kDot, scalar_matrix(A.cwiseProduct(B).sum()), a, b);
    }

    Var maximum(Var a, Var b) {
        const Matrix& A = value(a);
        const Matrix& B = value(b);
        if (A.rows() != B.rows() || A.cols() != B.cols())
            throw std::invalid_argument("maximum: shape mismatch");
        return push(Op::kMaximum, A.cwiseMax(B), a, b);
    }

    // log(exp(a) + exp(b)) for scalars/matrices, stabilized.
    Var log_sum_exp2(Var a, Var b) {
        Var m = maximum(a, b);
        Var ea = exp(sub(a, m));
        Var eb = exp(sub(b, m));
        return add(m, log(add(ea, eb)));
    }

private:
    std::vector<Node> nodes_;

    const Node& node(Var v) const {
        if (v.tape != this || v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size())
            throw std::invalid_argument("Var does not belong to this tape");
        return nodes_[static_cast<std::size_t>(v.id)];
    }

    Var push_leaf(Matrix value, bool requires_grad) {
        Node nd;
        nd.op = Op::kLeaf;
        nd.value = std::move(value);
        nd.requires_grad = requires_grad;
        nodes_.push_back(std::move(nd));
        return Var{this, static_cast<int>(nodes_.size()) - 1};
    }

    Var push(Op op, Matrix value, Var a, Var b = Var{}) {
        Node nd;
        nd.op = op;
        nd.value = std::move(value);
        nd.in0 = a.id;
        nd.requires_grad = node(a).requires_grad;
        if (b.tape != nullptr) {
            nd.in1 = b.id;
            nd.requires_grad = nd.requires_grad || node(b).requires_grad;
        }
        nodes_.push_back(std::move(nd));
        return Var{this, static_cast<int>(nodes_.size()) - 1};
    }

    Var push_sparse(const SparseMatrix& s, Var x) {
        Node nd;
        nd.op = Op::kSpMM;
        nd.value = s.apply(value(x));
        nd.in0 = x.id;
        nd.sparse = &s;
        nd.requires_grad = node(x).requires_grad;
        nodes_.push_back(std::move(nd));
        return Var{this, static_cast<int>(nodes_.size()) - 1};
    }

    bool needs(int id) const {
        return id >= 0 && nodes_[static_cast<std::size_t>(id)].requires_grad;
    }

    void accumulate(int id, const Matrix& g) {
        Node& nd = nodes_[static_cast<std::size_t>(id)];
        if (nd.grad.size() == 0)
            nd.grad = g;
        else
            nd.grad += g;
    }

    // Gradient expressions are only materialized for inputs that need them;
    // the skipped side is often the dominant GEMM (constant feature blocks).
    void propagate(Node& nd) {
        const Matrix& g = nd.grad;
        switch (nd.op) {
            case Op::kLeaf:
                break;
            case Op::kMatMul: {
                const Matrix& A = nodes_[static_cast<std::size_t>(nd.in0)].value;
                const Matrix& B = nodes_[static_cast<std::size_t>(nd.in1)].value;
                if (needs(nd.in0)) accumulate(nd.in0, g * B.transpose());
                if (needs(nd.in1)) accumulate(nd.in1, A.transpose() * g);
                break;
            }
            case Op::kSpMM:
                if (needs(nd.in0)) accumulate(nd.in0, nd.sparse->apply_transposed(g));
                break;
            case Op::kAdd:
                if (needs(nd.in0)) accumulate(nd.in0, g);
                if (needs(nd.in1)) accumulate(nd.in1, g);
                break;
            case Op::kAddRowVec:
                if (needs(nd.in0)) accumulate(nd.in0, g);
                if (needs(nd.in1)) accumulate(nd.in1, g.colwise().sum());
                break;
            case Op::kScale:
                if (needs(nd.in0)) accumulate(nd.in0, g * nd.scalar);
                break;
            case Op::kSigmoid: {
                const Matrix& y = nd.value;
                if (needs(nd.in0))
                    accumulate(nd.in0, (g.array() * y.array() * (1.0 - y.array())).matrix());
                break;
            }
            case Op::kRelu: {
                if (!needs(nd.in0)) break;
                const Matrix& x = nodes_[static_cast<std::size_t>(nd.in0)].value;
                accumulate(nd.in0, (g.array() * (x.array() > 0.0).cast<double>()).matrix());
                break;
            }
            case Op::kRowMean: {
                if (!needs(nd.in0)) break;
                const Matrix& x = nodes_[static_cast<std::size_t>(nd.in0)].value;
                double inv = 1.0 / static_cast<double>(x.rows());
                accumulate(nd.in0, (g.row(0) * inv).replicate(x.rows(), 1));
                break;
            }
            case Op::kConcatCols: {
                const Matrix& A = nodes_[static_cast<std::size_t>(nd.in0)].value;
                const Matrix& B = nodes_[static_cast<std::size_t>(nd.in1)].value;
                if (needs(nd.in0)) accumulate(nd.in0, g.leftCols(A.cols()));
                if (needs(nd.in1)) accumulate(nd.in1, g.rightCols(B.cols()));
                break;
            }
            case Op::kSquare: {
                if (!needs(nd.in0)) break;
                const Matrix& x = nodes_[static_cast<std::size_t>(nd.in0)].value;
                accumulate(nd.in0, (g.array() * 2.0 * x.array()).matrix());
                break;
            }
            case Op::kSum: {
                if (!needs(nd.in0)) break;
                const Matrix& x = nodes_[static_cast<std::size_t>(nd.in0)].value;
                accumulate(nd.in0, Matrix::Constant(x.rows(), x.cols(), g(0, 0)));
                break;
            }
            case Op::kLog: {
                if (!needs(nd.in0)) break;
                const Matrix& x = nodes_[static_cast<std::size_t>(nd.in0)].value;
                accumulate(nd.in0, (g.array() / x.array()).matrix());
                break;
            }
            case Op::kExp:
                if (needs(nd.in0)) accumulate(nd.in0, (g.array() * nd.value.array()).matrix());
                break;
            case Op::kDot: {
                const Matrix& A = nodes_[static_cast<std::size_t>(nd.in0)].value;
                const Matrix& B = nodes_[static_cast<std::size_t>(nd.in1)].value;
                if (needs(nd.in0)) accumulate(nd.in0, g(0, 0) * B);
                if (needs(nd.in1)) accumulate(nd.in1, g(0, 0) * A);
                break;
            }
            case Op::kMaximum: {
                // Ties route the gradient to the first argument.
                const Matrix& A = nodes_[static_cast<std::size_t>(nd.in0)].value;
                const Matrix& B = nodes_[static_cast<std::size_t>(nd.in1)].value;
                Matrix maskA = (A.array() >= B.array()).cast<double>().matrix();
                if (needs(nd.in0)) accumulate(nd.in0, (g.array() * maskA.array()).matrix());
                if (needs(nd.in1)) accumulate(nd.in1, (g.array() * (1.0 - maskA.array())).matrix());
                break;
            }
        }
    }
};

/// Forward value of an expression (computed eagerly at construction).
inline const Matrix& evaluate(Var v) { return v.tape->value(v); }

/// Reverse-mode gradients of a scalar expression w.r.t. the given leaves.
inline std::vector<Matrix> gradient(Var root, const std::vector<Var>& wrt) {
    root.tape->backward(root);
    std::vector<Matrix> out;
    out.reserve(wrt.size());
    for (Var v : wrt) out.push_back(root.tape->grad(v));
    return out;
}

// ---- optimizer -------------------------------------------------------------

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Standard Adam with bias correction; one slot pair per parameter.
struct AdamState {
    AdamConfig cfg;
    long step = 0;
    std::vector<Matrix> m;
    std::vector<Matrix> v;

    explicit AdamState(AdamConfig c = {}) : cfg(c) {}

    void init(const std::vector<Matrix*>& params) {
        m.clear();
        v.clear();
        for (const Matrix* p : params) {
            m.push_back(Matrix::Zero(p->rows(), p->cols()));
            v.push_back(Matrix::Zero(p->rows(), p->cols()));
        }
        step = 0;
    }
};

inline void adam_step(const std::vector<Matrix*>& params, const std::vector<Matrix>& grads,
                      AdamState& state) {
    if (params.size() != grads.size())
        throw std::invalid_argument("adam_step: params/grads size mismatch");
    if (state.m.size() != params.size()) state.init(params);
    state.step += 1;
    double bc1 = 1.0 - std::pow(state.cfg.beta1, static_cast<double>(state.step));
    double bc2 = 1.0 - std::pow(state.cfg.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Matrix& p = *params[i];
        const Matrix& g = grads[i];
        if (g.rows() != p.rows() || g.cols() != p.cols())
            throw std::invalid_argument("adam_step: gradient shape mismatch");
        state.m[i] = state.cfg.beta1 * state.m[i] + (1.0 - state.cfg.beta1) * g;
        state.v[i] = state.cfg.beta2 * state.v[i] + (1.0 - state.cfg.beta2) * g.cwiseProduct(g);
        Matrix mhat = state.m[i] / bc1;
        Matrix vhat = state.v[i] / bc2;
        p -= state.cfg.lr * (mhat.array() / (vhat.array().sqrt() + state.cfg.eps)).matrix();
    }
}

}  // namespace fsgad::ad
