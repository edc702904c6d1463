#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "renet/common.hpp"

namespace renet::num {

class Tape;

/// Dense real array participating in a recorded computation. Shapes are rank
/// 1 or 2; scalars use shape {1}. Data is immutable after creation except for
/// the gradient buffer and explicit in-place parameter updates by the
/// optimizer.
class Value {
public:
    Value() = default;

    static Value leaf(std::vector<int> shape, std::vector<double> data,
                      bool requires_grad = false);
    static Value scalar(double x, bool requires_grad = false);
    static Value zeros(std::vector<int> shape, bool requires_grad = false);

    bool defined() const { return p_ != nullptr; }
    const std::vector<int>& shape() const { return p_->shape; }
    int size() const { return static_cast<int>(p_->data.size()); }
    int rows() const { return p_->shape[0]; }
    int cols() const { return p_->shape.size() > 1 ? p_->shape[1] : 1; }
    bool is_scalar() const { return p_->data.size() == 1; }

    const std::vector<double>& data() const { return p_->data; }
    // Shallow-const handle semantics: in-place updates by the optimizer.
    std::vector<double>& mutable_data() const { return p_->data; }
    double item() const;

    bool requires_grad() const { return p_->requires_grad; }
    /// Gradient buffer; allocated zero-filled on first access.
    std::vector<double>& grad() const;
    bool has_grad() const { return !p_->grad.empty(); }
    void zero_grad() const;

    bool all_finite() const;

    bool same_node(const Value& other) const { return p_ == other.p_; }
    const void* node_id() const { return p_.get(); }

private:
    friend class Tape;
    struct Node {
        std::vector<int> shape;
        mutable std::vector<double> data;
        mutable std::vector<double> grad;
        bool requires_grad = false;
        const Tape* origin = nullptr;  // tape that produced this node, null for leaves
    };
    std::shared_ptr<Node> p_;
};

/// Ordered record of primitive operations. Execution order is a valid
/// topological order, so replaying the record backwards propagates gradients.
/// All primitives go through a tape; with recording off they compute forward
/// values only (used for inference).
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    void set_recording(bool on) { recording_ = on; }
    bool recording() const { return recording_; }
    std::size_t size() const { return ops_.size(); }
    void clear() { ops_.clear(); }

    // Elementwise; shapes must match exactly (no broadcasting).
    Value add(const Value& a, const Value& b);
    Value sub(const Value& a, const Value& b);
    Value mul(const Value& a, const Value& b);
    Value scale(const Value& a, double c);

    // matmul: (r,c)x(c) -> (r), or (r,c)x(c,k) -> (r,k).
    Value matmul(const Value& a, const Value& b);
    Value dot(const Value& a, const Value& b);

    /// Concatenation of 1-D values into one 1-D value.
    Value concat(std::span<const Value> parts);
    Value concat(std::initializer_list<Value> parts);
    /// Flat slice [offset, offset+len) of the underlying data, as a 1-D value.
    Value slice(const Value& a, int offset, int len);
    Value reshape(const Value& a, std::vector<int> shape);
    Value transpose(const Value& a);

    Value tanh(const Value& a);
    Value sigmoid(const Value& a);
    Value relu(const Value& a);

    /// Elementwise max over a non-empty set of same-shaped values. Gradient
    /// routes to the first input attaining the max.
    Value max_pool(std::span<const Value> parts);

    /// Log-sum-exp stabilized softmax of a 1-D value.
    Value softmax(const Value& logits);
    /// -log softmax(logits)[target], stabilized; scalar output.
    Value softmax_cross_entropy(const Value& logits, int target);

    /// Propagates gradients from a scalar loss through the recorded ops in
    /// reverse. Gradients of every node touched by this tape are reset first,
    /// so replaying on the same tape is idempotent.
    void backward(const Value& loss);

private:
    struct Op {
        std::vector<Value> inputs;
        Value output;
        std::function<void(const Op&)> backprop;
    };

    Value make_result(std::vector<int> shape, std::vector<double> data,
                      std::vector<Value> inputs,
                      std::function<void(const Op&)> backprop);

    std::vector<Op> ops_;
    bool recording_ = true;
};

}  // namespace renet::num
