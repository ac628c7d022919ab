#pragma once

#include <functional>
#include <span>

#include "glhnn/tensor.hpp"

namespace glhnn {

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t worst_param = 0;    // index into params
    std::size_t worst_element = 0;  // flat index inside that tensor
    double analytic = 0.0;
    double numeric = 0.0;
};

// Compares analytic gradients against central differences.
//
// `loss` is re-evaluated after each element of each tensor in `params` is
// nudged by +h and -h in place; the element is restored afterwards. The
// error per element is |a - n| / max(1, |a|, |n|) and the maximum is
// returned. `loss` must be deterministic (freeze dropout masks). Throws
// NumericError if the loss is non-finite and std::invalid_argument if h is
// outside [1e-6, 1e-4] or the gradient shapes do not mirror the params.
GradCheckResult grad_check(const std::function<double()>& loss, std::span<Tensor* const> params,
                           std::span<const Tensor> analytic, double h = 1e-5);

}  // namespace glhnn
