#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "techtexc/layers.hpp"
#include "techtexc/tensor.hpp"

namespace techtexc {

/// Bias-corrected Adam over a fixed parameter list:
///   m <- b1*m + (1-b1)*g,  v <- b2*v + (1-b2)*g^2
///   theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)
/// First and second moments live per parameter; t counts completed steps.
/// A non-finite gradient aborts the step (std::runtime_error naming the
/// parameter) rather than clipping.
template <typename T>
class AdamState {
public:
    explicit AdamState(std::span<Param<T>* const> params, double lr = 0.001,
                       double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {
        slots_.reserve(params.size());
        for (const Param<T>* p : params) {
            slots_.push_back({Tensor<T>(p->value.shape()), Tensor<T>(p->value.shape())});
        }
    }

    void step(std::span<Param<T>* const> params) {
        if (params.size() != slots_.size()) {
            throw std::invalid_argument("adam: parameter list changed size");
        }
        ++t_;
        const double corr1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double corr2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (std::size_t p = 0; p < params.size(); ++p) {
            Param<T>& param = *params[p];
            if (!param.grad.all_finite()) {
                throw std::runtime_error("adam: non-finite gradient in parameter '" +
                                         param.name + "' at step " + std::to_string(t_));
            }
            auto theta = param.value.flat();
            auto grad = param.grad.flat();
            auto m = slots_[p].m.flat();
            auto v = slots_[p].v.flat();
            for (std::size_t i = 0; i < theta.size(); ++i) {
                const double g = static_cast<double>(grad[i]);
                const double mi = beta1_ * static_cast<double>(m[i]) + (1.0 - beta1_) * g;
                const double vi = beta2_ * static_cast<double>(v[i]) + (1.0 - beta2_) * g * g;
                m[i] = static_cast<T>(mi);
                v[i] = static_cast<T>(vi);
                const double m_hat = mi / corr1;
                const double v_hat = vi / corr2;
                theta[i] = static_cast<T>(static_cast<double>(theta[i]) -
                                          lr_ * m_hat / (std::sqrt(v_hat) + epsilon_));
            }
        }
    }

    std::int64_t timestep() const { return t_; }
    double learning_rate() const { return lr_; }

private:
    struct Slot {
        Tensor<T> m;
        Tensor<T> v;
    };
    std::vector<Slot> slots_;
    std::int64_t t_ = 0;
    double lr_;
    double beta1_;
    double beta2_;
    double epsilon_;
};

} // namespace techtexc
