#pragma once

#include <cstddef>
#include <map>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "correct/autodiff/tensor.hpp"

namespace correct::ad {

enum class OpKind {
    leaf,
    constant,
    matmul,
    add,
    multiply,
    concat_rows,
    mean_rows,
    softmax_rows,
    tanh,
    leaky_relu,
    layer_norm,
    embedding_lookup,
    slice_rows,
    scalar_divide,
    dot,
    exp,
    log,
};

std::string_view op_name(OpKind kind);

/// A named trainable tensor together with its accumulated gradient.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;

    void zero_grad() { grad = Tensor(value.rows(), value.cols()); }
};

/// Owns all trainable parameters, iterated in name order.
class ParameterStore {
  public:
    Parameter& add(const std::string& name, Tensor value);
    Parameter& get(const std::string& name);
    const Parameter& get(const std::string& name) const;
    bool contains(const std::string& name) const { return params_.count(name) != 0; }

    void zero_grad();
    std::size_t total_size() const;

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }
    std::size_t size() const { return params_.size(); }

  private:
    std::map<std::string, Parameter> params_;
};

/// Uniform(-bound, bound) initialization.
Tensor uniform_tensor(std::size_t rows, std::size_t cols, Real bound, std::mt19937_64& rng);

class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
  public:
    Var() = default;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    const Tensor& value() const;
    const Tensor& grad() const;
    std::size_t rows() const { return value().rows(); }
    std::size_t cols() const { return value().cols(); }
    std::size_t id() const { return id_; }
    Tape* tape() const { return tape_; }
    bool valid() const { return tape_ != nullptr; }

  private:
    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

/// Ordered record of primitive operations. Nodes are appended in evaluation order so
/// the record is always topologically sorted.
class Tape {
  public:
    struct Node {
        OpKind kind = OpKind::constant;
        std::vector<std::size_t> inputs;
        Tensor value;
        Tensor grad;
        bool requires_grad = false;
        Parameter* param = nullptr;
        // Op attributes.
        bool flag_a = false;
        bool flag_b = false;
        Real scalar = 0.0;
        std::vector<std::size_t> indices;
        // Forward-pass intermediates reused by backward (layer-norm statistics).
        std::vector<Real> cache;
    };

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var leaf(Tensor value, bool requires_grad = true);
    Var constant(Tensor value) { return leaf(std::move(value), false); }
    /// Leaf bound to a parameter; backward() accumulates into the parameter's grad.
    Var param(Parameter& p);

    Var matmul(Var a, Var b, bool transpose_a = false, bool transpose_b = false);
    /// Elementwise sum; b may also be a 1 x cols row or a 1 x 1 scalar broadcast over a.
    Var add(Var a, Var b);
    /// Elementwise product with the same broadcasting rules as add.
    Var multiply(Var a, Var b);
    Var concat_rows(std::span<const Var> parts);
    Var mean_rows(Var x);
    Var softmax_rows(Var x);
    Var tanh(Var x);
    Var leaky_relu(Var x, Real negative_slope = 0.01);
    /// Row-wise normalization followed by gain * x_hat + bias (gain, bias are 1 x cols).
    Var layer_norm(Var x, Var gain, Var bias, Real eps = 1e-5);
    Var embedding_lookup(Var table, std::span<const std::size_t> ids);
    Var slice_rows(Var x, std::size_t start, std::size_t count);
    Var scalar_divide(Var x, Real divisor);
    /// Sum of elementwise products of two same-shape tensors, as a 1 x 1 tensor.
    Var dot(Var a, Var b);
    Var exp(Var x);
    Var log(Var x);

    /// Reverse sweep from a 1 x 1 loss. Parameter leaves receive accumulated gradients.
    void backward(Var loss);

    const Node& node(std::size_t id) const { return nodes_[id]; }
    std::size_t size() const { return nodes_.size(); }

  private:
    Var push(Node node);
    const Tensor& val(Var v) const { return nodes_[v.id()].value; }
    bool needs(Var v) const { return nodes_[v.id()].requires_grad; }
    void check_owned(Var v, std::string_view op) const;
    void backward_node(std::size_t id);
    Tensor& grad_of(std::size_t id);

    std::vector<Node> nodes_;

    friend class Var;
};

}  // namespace correct::ad
