#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "renet/value.hpp"

namespace renet::num {

/// One named trainable array. Parameter registries are ordered; iteration
/// order is the registration order everywhere (determinism contract).
struct NamedParam {
    std::string name;
    Value value;
};

using ParamList = std::vector<NamedParam>;

struct AdamConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;  // L2 folded into the gradient before the update
    double clip_norm = 0.0;     // 0 disables gradient clipping
};

/// Adaptive-moment optimizer with bias correction. Weight decay is applied
/// as an additive wd*theta term folded into the gradient.
class Adam {
public:
    explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

    const AdamConfig& config() const { return cfg_; }
    long long step_count() const { return step_; }

    /// Applies one update to every parameter in the list, reading gradients
    /// from the values' grad buffers. Throws NumericError naming the
    /// parameter if a gradient is not finite.
    void step(const ParamList& params);

    void zero_grads(const ParamList& params) const;

private:
    struct Moments {
        std::vector<double> m, v;
    };
    AdamConfig cfg_;
    long long step_ = 0;
    std::unordered_map<std::string, Moments> moments_;
};

}  // namespace renet::num
