#include "renet/value.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_set>

namespace renet {

const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::usage: return "E_USAGE";
        case ErrorCode::io: return "E_IO";
        case ErrorCode::parse: return "E_PARSE";
        case ErrorCode::config: return "E_CONFIG";
        case ErrorCode::shape: return "E_SHAPE";
        case ErrorCode::numeric: return "E_NUMERIC";
        case ErrorCode::domain: return "E_DOMAIN";
    }
    return "E_UNKNOWN";
}

std::string format_shape(const std::vector<int>& shape) {
    std::string out = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(shape[i]);
    }
    out += ")";
    return out;
}

}  // namespace renet

namespace renet::num {

namespace {

long long shape_numel(const std::vector<int>& shape) {
    long long n = 1;
    for (int d : shape) {
        if (d <= 0) throw ShapeError("shape dimensions must be positive, got " + format_shape(shape));
        n *= d;
    }
    return n;
}

void check_same_shape(const char* op, const Value& a, const Value& b) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + format_shape(a.shape()) +
                         " vs " + format_shape(b.shape()));
    }
}

}  // namespace

Value Value::leaf(std::vector<int> shape, std::vector<double> data, bool requires_grad) {
    long long n = shape_numel(shape);
    if (n != static_cast<long long>(data.size())) {
        throw ShapeError("leaf: data length " + std::to_string(data.size()) +
                         " does not match shape " + format_shape(shape));
    }
    Value v;
    v.p_ = std::make_shared<Node>();
    v.p_->shape = std::move(shape);
    v.p_->data = std::move(data);
    v.p_->requires_grad = requires_grad;
    return v;
}

Value Value::scalar(double x, bool requires_grad) {
    return leaf({1}, {x}, requires_grad);
}

Value Value::zeros(std::vector<int> shape, bool requires_grad) {
    long long n = shape_numel(shape);
    return leaf(std::move(shape), std::vector<double>(static_cast<std::size_t>(n), 0.0),
                requires_grad);
}

double Value::item() const {
    if (!is_scalar()) throw ShapeError("item: value has shape " + format_shape(shape()));
    return p_->data[0];
}

std::vector<double>& Value::grad() const {
    if (p_->grad.empty()) p_->grad.assign(p_->data.size(), 0.0);
    return p_->grad;
}

void Value::zero_grad() const {
    std::fill(p_->grad.begin(), p_->grad.end(), 0.0);
}

bool Value::all_finite() const {
    for (double x : p_->data) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

Value Tape::make_result(std::vector<int> shape, std::vector<double> data,
                        std::vector<Value> inputs,
                        std::function<void(const Op&)> backprop) {
    Value out;
    out.p_ = std::make_shared<Value::Node>();
    out.p_->shape = std::move(shape);
    out.p_->data = std::move(data);

    bool needs_grad = false;
    for (const Value& v : inputs) {
        if (v.requires_grad()) {
            needs_grad = true;
            break;
        }
    }
    if (recording_ && needs_grad) {
        out.p_->requires_grad = true;
        out.p_->origin = this;
        ops_.push_back(Op{std::move(inputs), out, std::move(backprop)});
    }
    return out;
}

Value Tape::add(const Value& a, const Value& b) {
    check_same_shape("add", a, b);
    std::vector<double> out(a.data().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
    return make_result(a.shape(), std::move(out), {a, b}, [](const Op& op) {
        const auto& g = op.output.grad();
        for (int k = 0; k < 2; ++k) {
            if (!op.inputs[k].requires_grad()) continue;
            auto& gi = op.inputs[k].grad();
            for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
        }
    });
}

Value Tape::sub(const Value& a, const Value& b) {
    check_same_shape("sub", a, b);
    std::vector<double> out(a.data().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
    return make_result(a.shape(), std::move(out), {a, b}, [](const Op& op) {
        const auto& g = op.output.grad();
        if (op.inputs[0].requires_grad()) {
            auto& ga = op.inputs[0].grad();
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        }
        if (op.inputs[1].requires_grad()) {
            auto& gb = op.inputs[1].grad();
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
        }
    });
}

Value Tape::mul(const Value& a, const Value& b) {
    check_same_shape("mul", a, b);
    std::vector<double> out(a.data().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
    return make_result(a.shape(), std::move(out), {a, b}, [](const Op& op) {
        const auto& g = op.output.grad();
        const auto& da = op.inputs[0].data();
        const auto& db = op.inputs[1].data();
        if (op.inputs[0].requires_grad()) {
            auto& ga = op.inputs[0].grad();
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * db[i];
        }
        if (op.inputs[1].requires_grad()) {
            auto& gb = op.inputs[1].grad();
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * da[i];
        }
    });
}

Value Tape::scale(const Value& a, double c) {
    std::vector<double> out(a.data().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * c;
    return make_result(a.shape(), std::move(out), {a}, [c](const Op& op) {
        const auto& g = op.output.grad();
        auto& ga = op.inputs[0].grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * c;
    });
}

Value Tape::matmul(const Value& a, const Value& b) {
    if (a.shape().size() != 2) {
        throw ShapeError("matmul: lhs must be a matrix, got " + format_shape(a.shape()));
    }
    int r = a.shape()[0];
    int c = a.shape()[1];
    bool vec_rhs = b.shape().size() == 1;
    int k = vec_rhs ? 1 : b.shape()[1];
    int brows = b.shape()[0];
    if (brows != c) {
        throw ShapeError("matmul: shape mismatch " + format_shape(a.shape()) + " vs " +
                         format_shape(b.shape()));
    }

    std::vector<double> out(static_cast<std::size_t>(r) * k, 0.0);
    const auto& da = a.data();
    const auto& db = b.data();
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < c; ++j) {
            double aij = da[static_cast<std::size_t>(i) * c + j];
            if (aij == 0.0) continue;
            for (int t = 0; t < k; ++t) {
                out[static_cast<std::size_t>(i) * k + t] += aij * db[static_cast<std::size_t>(j) * k + t];
            }
        }
    }

    std::vector<int> out_shape = vec_rhs ? std::vector<int>{r} : std::vector<int>{r, k};
    return make_result(std::move(out_shape), std::move(out), {a, b}, [r, c, k](const Op& op) {
        const auto& g = op.output.grad();
        const auto& da = op.inputs[0].data();
        const auto& db = op.inputs[1].data();
        if (op.inputs[0].requires_grad()) {
            auto& ga = op.inputs[0].grad();
            for (int i = 0; i < r; ++i) {
                for (int j = 0; j < c; ++j) {
                    double s = 0.0;
                    for (int t = 0; t < k; ++t) {
                        s += g[static_cast<std::size_t>(i) * k + t] * db[static_cast<std::size_t>(j) * k + t];
                    }
                    ga[static_cast<std::size_t>(i) * c + j] += s;
                }
            }
        }
        if (op.inputs[1].requires_grad()) {
            auto& gb = op.inputs[1].grad();
            for (int j = 0; j < c; ++j) {
                for (int t = 0; t < k; ++t) {
                    double s = 0.0;
                    for (int i = 0; i < r; ++i) {
                        s += da[static_cast<std::size_t>(i) * c + j] * g[static_cast<std::size_t>(i) * k + t];
                    }
                    gb[static_cast<std::size_t>(j) * k + t] += s;
                }
            }
        }
    });
}

Value Tape::dot(const Value& a, const Value& b) {
    if (a.shape().size() != 1 || b.shape().size() != 1 || a.size() != b.size()) {
        throw ShapeError("dot: shape mismatch " + format_shape(a.shape()) + " vs " +
                         format_shape(b.shape()));
    }
    double s = 0.0;
    for (int i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
    return make_result({1}, {s}, {a, b}, [](const Op& op) {
        double g = op.output.grad()[0];
        const auto& da = op.inputs[0].data();
        const auto& db = op.inputs[1].data();
        if (op.inputs[0].requires_grad()) {
            auto& ga = op.inputs[0].grad();
            for (std::size_t i = 0; i < da.size(); ++i) ga[i] += g * db[i];
        }
        if (op.inputs[1].requires_grad()) {
            auto& gb = op.inputs[1].grad();
            for (std::size_t i = 0; i < db.size(); ++i) gb[i] += g * da[i];
        }
    });
}

Value Tape::concat(std::span<const Value> parts) {
    if (parts.empty()) throw ShapeError("concat: empty input list");
    std::vector<double> out;
    std::vector<Value> inputs;
    inputs.reserve(parts.size());
    for (const Value& v : parts) {
        if (v.shape().size() != 1) {
            throw ShapeError("concat: inputs must be 1-D, got " + format_shape(v.shape()));
        }
        out.insert(out.end(), v.data().begin(), v.data().end());
        inputs.push_back(v);
    }
    int n = static_cast<int>(out.size());
    return make_result({n}, std::move(out), std::move(inputs), [](const Op& op) {
        const auto& g = op.output.grad();
        std::size_t off = 0;
        for (const Value& v : op.inputs) {
            if (v.requires_grad()) {
                auto& gi = v.grad();
                for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += g[off + i];
            }
            off += v.data().size();
        }
    });
}

Value Tape::concat(std::initializer_list<Value> parts) {
    return concat(std::span<const Value>(parts.begin(), parts.size()));
}

Value Tape::slice(const Value& a, int offset, int len) {
    if (offset < 0 || len <= 0 || offset + len > a.size()) {
        throw ShapeError("slice: range [" + std::to_string(offset) + "," +
                         std::to_string(offset + len) + ") out of bounds for " +
                         format_shape(a.shape()));
    }
    std::vector<double> out(a.data().begin() + offset, a.data().begin() + offset + len);
    return make_result({len}, std::move(out), {a}, [offset, len](const Op& op) {
        const auto& g = op.output.grad();
        auto& ga = op.inputs[0].grad();
        for (int i = 0; i < len; ++i) ga[static_cast<std::size_t>(offset) + i] += g[i];
    });
}

Value Tape::reshape(const Value& a, std::vector<int> shape) {
    if (shape_numel(shape) != a.size()) {
        throw ShapeError("reshape: cannot view " + format_shape(a.shape()) + " as " +
                         format_shape(shape));
    }
    std::vector<double> out = a.data();
    return make_result(std::move(shape), std::move(out), {a}, [](const Op& op) {
        const auto& g = op.output.grad();
        auto& ga = op.inputs[0].grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    });
}

Value Tape::transpose(const Value& a) {
    if (a.shape().size() != 2) {
        throw ShapeError("transpose: input must be a matrix, got " + format_shape(a.shape()));
    }
    int r = a.shape()[0];
    int c = a.shape()[1];
    std::vector<double> out(a.data().size());
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < c; ++j) {
            out[static_cast<std::size_t>(j) * r + i] = a.data()[static_cast<std::size_t>(i) * c + j];
        }
    }
    return make_result({c, r}, std::move(out), {a}, [r, c](const Op& op) {
        const auto& g = op.output.grad();
        auto& ga = op.inputs[0].grad();
        for (int i = 0; i < r; ++i) {
            for (int j = 0; j < c; ++j) {
                ga[static_cast<std::size_t>(i) * c + j] += g[static_cast<std::size_t>(j) * r + i];
            }
        }
    });
}

Value Tape::tanh(const Value& a) {
    std::vector<double> out(a.data().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(a.data()[i]);
    return make_result(a.shape(), std::move(out), {a}, [](const Op& op) {
        const auto& g = op.output.grad();
        const auto& y = op.output.data();
        auto& ga = op.inputs[0].grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
    });
}

Value Tape::sigmoid(const Value& a) {
    std::vector<double> out(a.data().size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        double x = a.data()[i];
        out[i] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                          : std::exp(x) / (1.0 + std::exp(x));
    }
    return make_result(a.shape(), std::move(out), {a}, [](const Op& op) {
        const auto& g = op.output.grad();
        const auto& y = op.output.data();
        auto& ga = op.inputs[0].grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
    });
}

Value Tape::relu(const Value& a) {
    std::vector<double> out(a.data().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] > 0.0 ? a.data()[i] : 0.0;
    return make_result(a.shape(), std::move(out), {a}, [](const Op& op) {
        const auto& g = op.output.grad();
        const auto& x = op.inputs[0].data();
        auto& ga = op.inputs[0].grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (x[i] > 0.0) ga[i] += g[i];
        }
    });
}

Value Tape::max_pool(std::span<const Value> parts) {
    if (parts.empty()) throw ShapeError("max_pool: empty input list");
    for (const Value& v : parts) check_same_shape("max_pool", parts[0], v);
    std::size_t n = parts[0].data().size();
    std::vector<double> out(parts[0].data());
    std::vector<int> argmax(n, 0);
    for (std::size_t p = 1; p < parts.size(); ++p) {
        const auto& d = parts[p].data();
        for (std::size_t i = 0; i < n; ++i) {
            if (d[i] > out[i]) {
                out[i] = d[i];
                argmax[i] = static_cast<int>(p);
            }
        }
    }
    std::vector<Value> inputs(parts.begin(), parts.end());
    return make_result(parts[0].shape(), std::move(out), std::move(inputs),
                       [argmax](const Op& op) {
                           const auto& g = op.output.grad();
                           for (std::size_t i = 0; i < g.size(); ++i) {
                               const Value& src = op.inputs[static_cast<std::size_t>(argmax[i])];
                               if (src.requires_grad()) src.grad()[i] += g[i];
                           }
                       });
}

Value Tape::softmax(const Value& logits) {
    if (logits.shape().size() != 1) {
        throw ShapeError("softmax: input must be 1-D, got " + format_shape(logits.shape()));
    }
    const auto& x = logits.data();
    double mx = *std::max_element(x.begin(), x.end());
    double z = 0.0;
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = std::exp(x[i] - mx);
        z += out[i];
    }
    for (double& v : out) v /= z;
    return make_result(logits.shape(), std::move(out), {logits}, [](const Op& op) {
        const auto& g = op.output.grad();
        const auto& y = op.output.data();
        auto& ga = op.inputs[0].grad();
        double dotgy = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) dotgy += g[i] * y[i];
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += (g[i] - dotgy) * y[i];
    });
}

Value Tape::softmax_cross_entropy(const Value& logits, int target) {
    if (logits.shape().size() != 1) {
        throw ShapeError("softmax_cross_entropy: input must be 1-D, got " +
                         format_shape(logits.shape()));
    }
    if (target < 0 || target >= logits.size()) {
        throw DomainError("softmax_cross_entropy: target " + std::to_string(target) +
                          " out of range for " + std::to_string(logits.size()) + " classes");
    }
    const auto& x = logits.data();
    double mx = *std::max_element(x.begin(), x.end());
    double z = 0.0;
    for (double v : x) z += std::exp(v - mx);
    double lse = mx + std::log(z);
    double loss = lse - x[static_cast<std::size_t>(target)];
    return make_result({1}, {loss}, {logits}, [target, mx, z](const Op& op) {
        double g = op.output.grad()[0];
        const auto& x = op.inputs[0].data();
        auto& ga = op.inputs[0].grad();
        for (std::size_t i = 0; i < x.size(); ++i) {
            double p = std::exp(x[i] - mx) / z;
            ga[i] += g * (p - (static_cast<int>(i) == target ? 1.0 : 0.0));
        }
    });
}

void Tape::backward(const Value& loss) {
    if (!loss.defined() || !loss.is_scalar()) {
        throw ShapeError("backward: loss must be a defined scalar value");
    }
    // Reset gradients of everything this tape touches so that replaying is
    // idempotent; untouched leaves keep their (zero-initialized) gradients.
    std::unordered_set<const void*> seen;
    for (const Op& op : ops_) {
        for (const Value& v : op.inputs) {
            if (v.requires_grad() && seen.insert(v.node_id()).second) v.grad().assign(v.size(), 0.0);
        }
        if (seen.insert(op.output.node_id()).second) op.output.grad().assign(op.output.size(), 0.0);
    }
    if (seen.insert(loss.node_id()).second) loss.grad().assign(1, 0.0);
    loss.grad()[0] = 1.0;
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
        it->backprop(*it);
    }
}

}  // namespace renet::num
