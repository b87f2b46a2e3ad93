#pragma once

#include <functional>
#include <string>

#include "jpave/tensor.hpp"

namespace jpave::numkit {

// A loss under test: evaluates the scalar loss for the current registry
// values and accumulates analytic gradients into Parameter.grad.
using LossFn = std::function<double(ParamRegistry&)>;

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
};

// Central-difference check of every scalar component of every parameter.
// Relative error is |analytic - central| / max(1, |central|); returns the
// maximum over all components. eps must be in (0, 1e-3].
GradCheckReport grad_check(ParamRegistry& params, const LossFn& loss, double eps);

}  // namespace jpave::numkit
