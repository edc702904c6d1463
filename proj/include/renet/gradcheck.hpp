#pragma once

#include <functional>
#include <string>
#include <vector>

#include "renet/optim.hpp"
#include "renet/value.hpp"

namespace renet::num {

struct GradCheckReport {
    struct Entry {
        std::string name;
        double max_rel_error = 0.0;
    };
    std::vector<Entry> per_param;
    double max_rel_error = 0.0;
    bool pass = false;
};

/// Compares analytic gradients against central finite differences for a
/// deterministic scalar function of the given parameters. The function is
/// re-evaluated with perturbed parameter entries; it must not cache state
/// across calls.
GradCheckReport grad_check(const std::function<Value(Tape&)>& f, const ParamList& params,
                           double tol, double h = 1e-5);

}  // namespace renet::num
