#include "correct/autodiff/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace correct::ad {

namespace {

enum Broadcast : int { same = 0, row_bcast = 1, scalar_bcast = 2 };

int broadcast_mode(const Tensor& a, const Tensor& b, std::string_view op) {
    if (a.rows() == b.rows() && a.cols() == b.cols()) return same;
    if (b.rows() == 1 && b.cols() == a.cols()) return row_bcast;
    if (b.rows() == 1 && b.cols() == 1) return scalar_bcast;
    throw ShapeError(std::string(op) + ": shape mismatch, " + shape_string(a) + " vs " +
                     shape_string(b));
}

inline std::size_t bcast_index(int mode, std::size_t i, std::size_t cols) {
    switch (mode) {
        case row_bcast: return i % cols;
        case scalar_bcast: return 0;
        default: return i;
    }
}

}  // namespace

std::string_view op_name(OpKind kind) {
    switch (kind) {
        case OpKind::leaf: return "leaf";
        case OpKind::constant: return "constant";
        case OpKind::matmul: return "matmul";
        case OpKind::add: return "add";
        case OpKind::multiply: return "multiply";
        case OpKind::concat_rows: return "concat-rows";
        case OpKind::mean_rows: return "mean-rows";
        case OpKind::softmax_rows: return "softmax-rows";
        case OpKind::tanh: return "tanh";
        case OpKind::leaky_relu: return "leaky-relu";
        case OpKind::layer_norm: return "layer-norm";
        case OpKind::embedding_lookup: return "embedding-lookup";
        case OpKind::slice_rows: return "slice-rows";
        case OpKind::scalar_divide: return "scalar-divide";
        case OpKind::dot: return "dot";
        case OpKind::exp: return "exp";
        case OpKind::log: return "log";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// ParameterStore

Parameter& ParameterStore::add(const std::string& name, Tensor value) {
    auto [it, inserted] = params_.try_emplace(name);
    if (!inserted) throw std::invalid_argument("duplicate parameter name: " + name);
    it->second.name = name;
    it->second.value = std::move(value);
    it->second.zero_grad();
    return it->second;
}

Parameter& ParameterStore::get(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw std::out_of_range("unknown parameter: " + name);
    return it->second;
}

const Parameter& ParameterStore::get(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw std::out_of_range("unknown parameter: " + name);
    return it->second;
}

void ParameterStore::zero_grad() {
    for (auto& [_, p] : params_) p.zero_grad();
}

std::size_t ParameterStore::total_size() const {
    std::size_t n = 0;
    for (const auto& [_, p] : params_) n += p.value.size();
    return n;
}

Tensor uniform_tensor(std::size_t rows, std::size_t cols, Real bound, std::mt19937_64& rng) {
    std::uniform_real_distribution<Real> dist(-bound, bound);
    Tensor t(rows, cols);
    for (auto& v : t.data()) v = dist(rng);
    return t;
}

// ---------------------------------------------------------------------------
// Var

const Tensor& Var::value() const { return tape_->nodes_[id_].value; }
const Tensor& Var::grad() const { return tape_->nodes_[id_].grad; }

// ---------------------------------------------------------------------------
// Forward

Var Tape::push(Node node) {
    nodes_.push_back(std::move(node));
    return Var(this, nodes_.size() - 1);
}

void Tape::check_owned(Var v, std::string_view op) const {
    if (v.tape() != this || v.id() >= nodes_.size()) {
        throw std::invalid_argument(std::string(op) + ": operand does not belong to this tape");
    }
}

Var Tape::leaf(Tensor value, bool requires_grad) {
    Node n;
    n.kind = requires_grad ? OpKind::leaf : OpKind::constant;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    return push(std::move(n));
}

Var Tape::param(Parameter& p) {
    Node n;
    n.kind = OpKind::leaf;
    n.value = p.value;
    n.requires_grad = true;
    n.param = &p;
    return push(std::move(n));
}

Var Tape::matmul(Var a, Var b, bool transpose_a, bool transpose_b) {
    check_owned(a, "matmul");
    check_owned(b, "matmul");
    Node n;
    n.kind = OpKind::matmul;
    n.inputs = {a.id(), b.id()};
    n.flag_a = transpose_a;
    n.flag_b = transpose_b;
    gemm(val(a), transpose_a, val(b), transpose_b, n.value, false);
    n.requires_grad = needs(a) || needs(b);
    return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
    check_owned(a, "add");
    check_owned(b, "add");
    const Tensor& x = val(a);
    const Tensor& y = val(b);
    const int mode = broadcast_mode(x, y, "add");
    Node n;
    n.kind = OpKind::add;
    n.inputs = {a.id(), b.id()};
    n.value = x;
    for (std::size_t i = 0; i < x.size(); ++i) n.value[i] += y[bcast_index(mode, i, x.cols())];
    n.requires_grad = needs(a) || needs(b);
    return push(std::move(n));
}

Var Tape::multiply(Var a, Var b) {
    check_owned(a, "multiply");
    check_owned(b, "multiply");
    const Tensor& x = val(a);
    const Tensor& y = val(b);
    const int mode = broadcast_mode(x, y, "multiply");
    Node n;
    n.kind = OpKind::multiply;
    n.inputs = {a.id(), b.id()};
    n.value = x;
    for (std::size_t i = 0; i < x.size(); ++i) n.value[i] *= y[bcast_index(mode, i, x.cols())];
    n.requires_grad = needs(a) || needs(b);
    return push(std::move(n));
}

Var Tape::concat_rows(std::span<const Var> parts) {
    if (parts.empty()) throw ShapeError("concat-rows: no operands");
    const std::size_t cols = val(parts.front()).cols();
    std::size_t rows = 0;
    for (const Var& p : parts) {
        check_owned(p, "concat-rows");
        if (val(p).cols() != cols) {
            throw ShapeError("concat-rows: column mismatch, " + shape_string(val(parts.front())) +
                             " vs " + shape_string(val(p)));
        }
        rows += val(p).rows();
    }
    Node n;
    n.kind = OpKind::concat_rows;
    n.value = Tensor(rows, cols);
    std::size_t offset = 0;
    for (const Var& p : parts) {
        const Tensor& t = val(p);
        std::copy(t.data().begin(), t.data().end(), n.value.data().begin() + offset);
        offset += t.size();
        n.inputs.push_back(p.id());
        n.requires_grad = n.requires_grad || needs(p);
    }
    return push(std::move(n));
}

Var Tape::mean_rows(Var x) {
    check_owned(x, "mean-rows");
    const Tensor& t = val(x);
    if (t.rows() == 0) throw ShapeError("mean-rows: empty input " + shape_string(t));
    Node n;
    n.kind = OpKind::mean_rows;
    n.inputs = {x.id()};
    n.value = Tensor(1, t.cols());
    for (std::size_t r = 0; r < t.rows(); ++r)
        for (std::size_t c = 0; c < t.cols(); ++c) n.value[c] += t(r, c);
    for (auto& v : n.value.data()) v /= static_cast<Real>(t.rows());
    n.requires_grad = needs(x);
    return push(std::move(n));
}

Var Tape::softmax_rows(Var x) {
    check_owned(x, "softmax-rows");
    const Tensor& t = val(x);
    Node n;
    n.kind = OpKind::softmax_rows;
    n.inputs = {x.id()};
    n.value = t;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        auto row = n.value.row_span(r);
        const Real mx = *std::max_element(row.begin(), row.end());
        Real total = 0.0;
        for (auto& v : row) {
            v = std::exp(v - mx);
            total += v;
        }
        for (auto& v : row) v /= total;
    }
    n.requires_grad = needs(x);
    return push(std::move(n));
}

Var Tape::tanh(Var x) {
    check_owned(x, "tanh");
    Node n;
    n.kind = OpKind::tanh;
    n.inputs = {x.id()};
    n.value = val(x);
    for (auto& v : n.value.data()) v = std::tanh(v);
    n.requires_grad = needs(x);
    return push(std::move(n));
}

Var Tape::leaky_relu(Var x, Real negative_slope) {
    check_owned(x, "leaky-relu");
    Node n;
    n.kind = OpKind::leaky_relu;
    n.inputs = {x.id()};
    n.scalar = negative_slope;
    n.value = val(x);
    for (auto& v : n.value.data())
        if (v <= 0.0) v *= negative_slope;
    n.requires_grad = needs(x);
    return push(std::move(n));
}

Var Tape::layer_norm(Var x, Var gain, Var bias, Real eps) {
    check_owned(x, "layer-norm");
    check_owned(gain, "layer-norm");
    check_owned(bias, "layer-norm");
    const Tensor& t = val(x);
    const Tensor& g = val(gain);
    const Tensor& b = val(bias);
    if (g.rows() != 1 || g.cols() != t.cols() || b.rows() != 1 || b.cols() != t.cols()) {
        throw ShapeError("layer-norm: gain/bias " + shape_string(g) + "/" + shape_string(b) +
                         " do not match input " + shape_string(t));
    }
    const std::size_t rows = t.rows();
    const std::size_t cols = t.cols();
    Node n;
    n.kind = OpKind::layer_norm;
    n.inputs = {x.id(), gain.id(), bias.id()};
    n.scalar = eps;
    n.value = Tensor(rows, cols);
    // cache layout: normalized input (rows*cols) followed by per-row inverse std.
    n.cache.resize(rows * cols + rows);
    for (std::size_t r = 0; r < rows; ++r) {
        Real mean = 0.0;
        for (std::size_t c = 0; c < cols; ++c) mean += t(r, c);
        mean /= static_cast<Real>(cols);
        Real var = 0.0;
        for (std::size_t c = 0; c < cols; ++c) var += (t(r, c) - mean) * (t(r, c) - mean);
        var /= static_cast<Real>(cols);
        const Real rstd = 1.0 / std::sqrt(var + eps);
        n.cache[rows * cols + r] = rstd;
        for (std::size_t c = 0; c < cols; ++c) {
            const Real xhat = (t(r, c) - mean) * rstd;
            n.cache[r * cols + c] = xhat;
            n.value(r, c) = g[c] * xhat + b[c];
        }
    }
    n.requires_grad = needs(x) || needs(gain) || needs(bias);
    return push(std::move(n));
}

Var Tape::embedding_lookup(Var table, std::span<const std::size_t> ids) {
    check_owned(table, "embedding-lookup");
    const Tensor& t = val(table);
    Node n;
    n.kind = OpKind::embedding_lookup;
    n.inputs = {table.id()};
    n.indices.assign(ids.begin(), ids.end());
    n.value = Tensor(ids.size(), t.cols());
    for (std::size_t r = 0; r < ids.size(); ++r) {
        if (ids[r] >= t.rows()) {
            throw ShapeError("embedding-lookup: id " + std::to_string(ids[r]) +
                             " out of range for table " + shape_string(t));
        }
        auto src = t.row_span(ids[r]);
        std::copy(src.begin(), src.end(), n.value.row_span(r).begin());
    }
    n.requires_grad = needs(table);
    return push(std::move(n));
}

Var Tape::slice_rows(Var x, std::size_t start, std::size_t count) {
    check_owned(x, "slice-rows");
    const Tensor& t = val(x);
    if (start + count > t.rows()) {
        throw ShapeError("slice-rows: rows [" + std::to_string(start) + ", " +
                         std::to_string(start + count) + ") out of range for " + shape_string(t));
    }
    Node n;
    n.kind = OpKind::slice_rows;
    n.inputs = {x.id()};
    n.indices = {start};
    n.value = Tensor(count, t.cols());
    std::copy_n(t.data().begin() + start * t.cols(), count * t.cols(), n.value.data().begin());
    n.requires_grad = needs(x);
    return push(std::move(n));
}

Var Tape::scalar_divide(Var x, Real divisor) {
    check_owned(x, "scalar-divide");
    Node n;
    n.kind = OpKind::scalar_divide;
    n.inputs = {x.id()};
    n.scalar = divisor;
    n.value = val(x);
    for (auto& v : n.value.data()) v /= divisor;
    n.requires_grad = needs(x);
    return push(std::move(n));
}

Var Tape::dot(Var a, Var b) {
    check_owned(a, "dot");
    check_owned(b, "dot");
    const Tensor& x = val(a);
    const Tensor& y = val(b);
    if (x.rows() != y.rows() || x.cols() != y.cols()) {
        throw ShapeError("dot: shape mismatch, " + shape_string(x) + " vs " + shape_string(y));
    }
    Real acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
    Node n;
    n.kind = OpKind::dot;
    n.inputs = {a.id(), b.id()};
    n.value = Tensor::scalar(acc);
    n.requires_grad = needs(a) || needs(b);
    return push(std::move(n));
}

Var Tape::exp(Var x) {
    check_owned(x, "exp");
    Node n;
    n.kind = OpKind::exp;
    n.inputs = {x.id()};
    n.value = val(x);
    for (auto& v : n.value.data()) v = std::exp(v);
    n.requires_grad = needs(x);
    return push(std::move(n));
}

Var Tape::log(Var x) {
    check_owned(x, "log");
    Node n;
    n.kind = OpKind::log;
    n.inputs = {x.id()};
    n.value = val(x);
    for (auto& v : n.value.data()) v = std::log(v);
    n.requires_grad = needs(x);
    return push(std::move(n));
}

// ---------------------------------------------------------------------------
// Backward

Tensor& Tape::grad_of(std::size_t id) {
    Node& n = nodes_[id];
    if (n.grad.rows() != n.value.rows() || n.grad.cols() != n.value.cols()) {
        n.grad = Tensor(n.value.rows(), n.value.cols());
    }
    return n.grad;
}

void Tape::backward(Var loss) {
    check_owned(loss, "backward");
    if (val(loss).rows() != 1 || val(loss).cols() != 1) {
        throw ShapeError("backward: loss must be scalar, got " + shape_string(val(loss)));
    }
    if (nodes_.empty()) throw std::logic_error("backward: empty tape");
    for (auto& n : nodes_) n.grad = Tensor();
    grad_of(loss.id())[0] = 1.0;
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.requires_grad) continue;
        if (n.kind == OpKind::leaf) {
            Tensor& g = grad_of(i);
            if (n.param != nullptr) {
                Parameter& p = *n.param;
                if (p.grad.size() != g.size()) p.zero_grad();
                for (std::size_t k = 0; k < g.size(); ++k) p.grad[k] += g[k];
            }
            continue;
        }
        if (n.grad.empty()) continue;
        backward_node(i);
    }
}

void Tape::backward_node(std::size_t id) {
    // Copy what we need up front: grad_of() on inputs never reallocates nodes_, but
    // keeping references into a single node is clearer.
    const Node& n = nodes_[id];
    const Tensor& gy = n.grad;
    const auto in = n.inputs;

    switch (n.kind) {
        case OpKind::leaf:
        case OpKind::constant: break;

        case OpKind::matmul: {
            const Tensor& a = nodes_[in[0]].value;
            const Tensor& b = nodes_[in[1]].value;
            const bool ta = n.flag_a;
            const bool tb = n.flag_b;
            if (nodes_[in[0]].requires_grad) {
                Tensor& ga = grad_of(in[0]);
                if (!ta && !tb) gemm(gy, false, b, true, ga, true);
                else if (!ta && tb) gemm(gy, false, b, false, ga, true);
                else if (ta && !tb) gemm(b, false, gy, true, ga, true);
                else gemm(b, true, gy, true, ga, true);
            }
            if (nodes_[in[1]].requires_grad) {
                Tensor& gb = grad_of(in[1]);
                if (!ta && !tb) gemm(a, true, gy, false, gb, true);
                else if (!ta && tb) gemm(gy, true, a, false, gb, true);
                else if (ta && !tb) gemm(a, false, gy, false, gb, true);
                else gemm(gy, true, a, true, gb, true);
            }
            break;
        }

        case OpKind::add:
        case OpKind::multiply: {
            const Tensor& a = nodes_[in[0]].value;
            const Tensor& b = nodes_[in[1]].value;
            const int mode = broadcast_mode(a, b, op_name(n.kind));
            const bool mul = n.kind == OpKind::multiply;
            if (nodes_[in[0]].requires_grad) {
                Tensor& ga = grad_of(in[0]);
                for (std::size_t i = 0; i < gy.size(); ++i)
                    ga[i] += mul ? gy[i] * b[bcast_index(mode, i, a.cols())] : gy[i];
            }
            if (nodes_[in[1]].requires_grad) {
                Tensor& gb = grad_of(in[1]);
                for (std::size_t i = 0; i < gy.size(); ++i)
                    gb[bcast_index(mode, i, a.cols())] += mul ? gy[i] * a[i] : gy[i];
            }
            break;
        }

        case OpKind::concat_rows: {
            std::size_t offset = 0;
            for (std::size_t src : in) {
                const std::size_t len = nodes_[src].value.size();
                if (nodes_[src].requires_grad) {
                    Tensor& g = grad_of(src);
                    for (std::size_t k = 0; k < len; ++k) g[k] += gy[offset + k];
                }
                offset += len;
            }
            break;
        }

        case OpKind::mean_rows: {
            Tensor& gx = grad_of(in[0]);
            const Real inv = 1.0 / static_cast<Real>(gx.rows());
            for (std::size_t r = 0; r < gx.rows(); ++r)
                for (std::size_t c = 0; c < gx.cols(); ++c) gx(r, c) += gy[c] * inv;
            break;
        }

        case OpKind::softmax_rows: {
            Tensor& gx = grad_of(in[0]);
            const Tensor& y = n.value;
            for (std::size_t r = 0; r < y.rows(); ++r) {
                Real s = 0.0;
                for (std::size_t c = 0; c < y.cols(); ++c) s += gy(r, c) * y(r, c);
                for (std::size_t c = 0; c < y.cols(); ++c) gx(r, c) += y(r, c) * (gy(r, c) - s);
            }
            break;
        }

        case OpKind::tanh: {
            Tensor& gx = grad_of(in[0]);
            for (std::size_t i = 0; i < gy.size(); ++i)
                gx[i] += gy[i] * (1.0 - n.value[i] * n.value[i]);
            break;
        }

        case OpKind::leaky_relu: {
            Tensor& gx = grad_of(in[0]);
            const Tensor& x = nodes_[in[0]].value;
            for (std::size_t i = 0; i < gy.size(); ++i)
                gx[i] += x[i] > 0.0 ? gy[i] : gy[i] * n.scalar;
            break;
        }

        case OpKind::layer_norm: {
            const std::size_t rows = n.value.rows();
            const std::size_t cols = n.value.cols();
            const Tensor& g = nodes_[in[1]].value;
            const Real* xhat = n.cache.data();
            const Real* rstd = n.cache.data() + rows * cols;
            if (nodes_[in[1]].requires_grad) {
                Tensor& gg = grad_of(in[1]);
                for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t c = 0; c < cols; ++c) gg[c] += gy(r, c) * xhat[r * cols + c];
            }
            if (nodes_[in[2]].requires_grad) {
                Tensor& gb = grad_of(in[2]);
                for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t c = 0; c < cols; ++c) gb[c] += gy(r, c);
            }
            if (nodes_[in[0]].requires_grad) {
                Tensor& gx = grad_of(in[0]);
                const Real inv_n = 1.0 / static_cast<Real>(cols);
                for (std::size_t r = 0; r < rows; ++r) {
                    Real mean_d = 0.0;
                    Real mean_dx = 0.0;
                    for (std::size_t c = 0; c < cols; ++c) {
                        const Real d = gy(r, c) * g[c];
                        mean_d += d;
                        mean_dx += d * xhat[r * cols + c];
                    }
                    mean_d *= inv_n;
                    mean_dx *= inv_n;
                    for (std::size_t c = 0; c < cols; ++c) {
                        const Real d = gy(r, c) * g[c];
                        gx(r, c) += rstd[r] * (d - mean_d - xhat[r * cols + c] * mean_dx);
                    }
                }
            }
            break;
        }

        case OpKind::embedding_lookup: {
            Tensor& gt = grad_of(in[0]);
            for (std::size_t r = 0; r < n.indices.size(); ++r) {
                auto dst = gt.row_span(n.indices[r]);
                auto src = gy.row_span(r);
                for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
            }
            break;
        }

        case OpKind::slice_rows: {
            Tensor& gx = grad_of(in[0]);
            const std::size_t offset = n.indices[0] * gx.cols();
            for (std::size_t k = 0; k < gy.size(); ++k) gx[offset + k] += gy[k];
            break;
        }

        case OpKind::scalar_divide: {
            Tensor& gx = grad_of(in[0]);
            for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] / n.scalar;
            break;
        }

        case OpKind::dot: {
            const Real g = gy[0];
            const Tensor& a = nodes_[in[0]].value;
            const Tensor& b = nodes_[in[1]].value;
            if (nodes_[in[0]].requires_grad) {
                Tensor& ga = grad_of(in[0]);
                for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g * b[i];
            }
            if (nodes_[in[1]].requires_grad) {
                Tensor& gb = grad_of(in[1]);
                for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g * a[i];
            }
            break;
        }

        case OpKind::exp: {
            Tensor& gx = grad_of(in[0]);
            for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] * n.value[i];
            break;
        }

        case OpKind::log: {
            Tensor& gx = grad_of(in[0]);
            const Tensor& x = nodes_[in[0]].value;
            for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] / x[i];
            break;
        }
    }
}

}  // namespace correct::ad
