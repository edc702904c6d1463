#include "renet/gradcheck.hpp"

#include <cmath>

namespace renet::num {

GradCheckReport grad_check(const std::function<Value(Tape&)>& f, const ParamList& params,
                           double tol, double h) {
    Tape tape;
    Value loss = f(tape);
    if (!loss.all_finite()) {
        throw NumericError("grad_check: function value is not finite");
    }
    tape.backward(loss);

    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (const auto& p : params) analytic.push_back(p.value.grad());

    GradCheckReport report;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        auto& theta = params[pi].value.mutable_data();
        double worst = 0.0;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            double saved = theta[i];
            theta[i] = saved + h;
            Tape tp;
            tp.set_recording(false);
            double fp = f(tp).item();
            theta[i] = saved - h;
            Tape tm;
            tm.set_recording(false);
            double fm = f(tm).item();
            theta[i] = saved;
            if (!std::isfinite(fp) || !std::isfinite(fm)) {
                throw NumericError("grad_check: perturbed function value is not finite");
            }
            double numeric = (fp - fm) / (2.0 * h);
            double a = analytic[pi][i];
            double rel = std::abs(a - numeric) /
                         std::max({std::abs(a), std::abs(numeric), 1e-6});
            if (rel > worst) worst = rel;
        }
        report.per_param.push_back({params[pi].name, worst});
        if (worst > report.max_rel_error) report.max_rel_error = worst;
    }
    report.pass = report.max_rel_error < tol;
    return report;
}

}  // namespace renet::num
