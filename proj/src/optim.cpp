#include "renet/optim.hpp"

#include <cmath>

namespace renet::num {

void Adam::step(const ParamList& params) {
    double clip_scale = 1.0;
    if (cfg_.clip_norm > 0.0) {
        double sq = 0.0;
        for (const auto& p : params) {
            if (!p.value.has_grad()) continue;
            for (double g : p.value.grad()) sq += g * g;
        }
        double norm = std::sqrt(sq);
        if (norm > cfg_.clip_norm) clip_scale = cfg_.clip_norm / norm;
    }

    ++step_;
    double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));

    for (const auto& p : params) {
        auto& theta = p.value.mutable_data();
        const auto& grad = p.value.grad();
        auto& mom = moments_[p.name];
        if (mom.m.empty()) {
            mom.m.assign(theta.size(), 0.0);
            mom.v.assign(theta.size(), 0.0);
        }
        for (std::size_t i = 0; i < theta.size(); ++i) {
            double g = grad[i];
            if (!std::isfinite(g)) {
                throw NumericError("optimizer: non-finite gradient in parameter '" + p.name +
                                   "' at index " + std::to_string(i));
            }
            g = g * clip_scale + cfg_.weight_decay * theta[i];
            mom.m[i] = cfg_.beta1 * mom.m[i] + (1.0 - cfg_.beta1) * g;
            mom.v[i] = cfg_.beta2 * mom.v[i] + (1.0 - cfg_.beta2) * g * g;
            double mhat = mom.m[i] / bc1;
            double vhat = mom.v[i] / bc2;
            theta[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

void Adam::zero_grads(const ParamList& params) const {
    for (const auto& p : params) p.value.zero_grad();
}

}  // namespace renet::num
