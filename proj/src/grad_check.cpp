#include "glhnn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "glhnn/error.hpp"

namespace glhnn {

namespace {

double finite_or_throw(double v) {
    if (!std::isfinite(v)) throw NumericError("grad_check: loss is not finite");
    return v;
}

}  // namespace

GradCheckResult grad_check(const std::function<double()>& loss, std::span<Tensor* const> params,
                           std::span<const Tensor> analytic, double h) {
    if (!(h >= 1e-6 && h <= 1e-4)) throw std::invalid_argument("grad_check: h must be in [1e-6, 1e-4]");
    if (params.size() != analytic.size()) {
        throw std::invalid_argument("grad_check: one analytic gradient per parameter tensor required");
    }
    GradCheckResult result;
    finite_or_throw(loss());
    for (std::size_t p = 0; p < params.size(); ++p) {
        Tensor& param = *params[p];
        if (!param.same_shape(analytic[p])) {
            throw ShapeError("grad_check: gradient " + shape_string(analytic[p].shape()) +
                             " does not mirror parameter " + shape_string(param.shape()));
        }
        for (std::size_t i = 0; i < param.size(); ++i) {
            const double saved = param[i];
            param[i] = saved + h;
            const double up = finite_or_throw(loss());
            param[i] = saved - h;
            const double down = finite_or_throw(loss());
            param[i] = saved;
            const double numeric = (up - down) / (2.0 * h);
            const double a = analytic[p][i];
            const double err =
                std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
            if (err > result.max_rel_error || (p == 0 && i == 0)) {
                result = {err, p, i, a, numeric};
            }
        }
    }
    return result;
}

}  // namespace glhnn
