#pragma once

#include "steglab/tensor.hpp"

namespace steglab {

struct GradCheckResult {
    double max_rel_error = 0.0;
    bool passed = false;
};

/// Compares the analytic gradient of a scalar-valued graph against central
/// finite differences, elementwise over the given input. `graph` must be a
/// pure function of its argument (double precision; step 1e-4).
///
/// The error is |analytic - fd| / max(|analytic|, |fd|, 1e-3); the floor turns
/// the ratio into an absolute bound once gradients fall under 1e-3, which is
/// where central differencing itself stops carrying 4 significant digits.
template <typename F>
GradCheckResult gradient_check(F&& graph, const TensorPtr<double>& input, double tolerance = 1e-4,
                               double step = 1e-4) {
    auto probe = clone_detached<double>(input, true);
    TensorPtr<double> out = graph(probe);
    detail::require(out->is_scalar(), "gradient_check: graph output must be scalar, got shape " +
                                          detail::shape_str(out->shape));
    backward(out);
    detail::require(probe->grad.size() == probe->data.size(),
                    "gradient_check: graph does not depend on the input");
    std::vector<double> analytic = probe->grad;

    auto eval = [&](const TensorPtr<double>& x) {
        NoGradGuard no_grad;
        TensorPtr<double> y = graph(x);
        return y->data[0];
    };

    GradCheckResult result;
    auto fd_point = clone_detached<double>(input, false);
    for (int64_t i = 0; i < input->numel(); ++i) {
        double saved = fd_point->data[i];
        fd_point->data[i] = saved + step;
        double up = eval(fd_point);
        fd_point->data[i] = saved - step;
        double down = eval(fd_point);
        fd_point->data[i] = saved;
        double fd = (up - down) / (2.0 * step);
        double denom = std::max({std::fabs(analytic[i]), std::fabs(fd), 1e-3});
        result.max_rel_error = std::max(result.max_rel_error, std::fabs(analytic[i] - fd) / denom);
    }
    result.passed = result.max_rel_error < tolerance;
    return result;
}

}  // namespace steglab
