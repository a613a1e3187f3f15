#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "techtexc/layers.hpp"

namespace techtexc {

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
};

/// Central finite differences against the analytic gradients already stored
/// in each parameter's grad slot:
///   numeric  = (loss(theta+eps) - loss(theta-eps)) / (2*eps)
///   rel err  = |a - n| / max(|a|, |n|, 1e-8)
/// `loss` must recompute the scalar objective from the current parameter
/// values (forward pass only) and be deterministic. Double precision keeps
/// the truncation/roundoff floor well below the 1e-4 acceptance bar.
template <typename LossFn>
GradCheckReport check_gradients(std::span<Param<double>* const> params, LossFn&& loss,
                                double eps = 1e-5) {
    GradCheckReport report;
    for (Param<double>* param : params) {
        auto theta = param->value.flat();
        auto analytic = param->grad.flat();
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double saved = theta[i];
            theta[i] = saved + eps;
            const double loss_plus = loss();
            theta[i] = saved - eps;
            const double loss_minus = loss();
            theta[i] = saved;

            const double numeric = (loss_plus - loss_minus) / (2.0 * eps);
            const double a = analytic[i];
            const double rel =
                std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_param = param->name;
                report.worst_index = i;
            }
        }
    }
    return report;
}

} // namespace techtexc
