#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "techtexc/rng.hpp"
#include "techtexc/tensor.hpp"

namespace techtexc {

/// A named parameter tensor paired with its same-shape gradient slot.
template <typename T>
struct Param {
    std::string name;
    Tensor<T> value;
    Tensor<T> grad;

    Param(std::string n, const std::vector<std::size_t>& shape)
        : name(std::move(n)), value(shape), grad(shape) {}

    void zero_grad() { grad.fill(T{}); }
};

template <typename T>
void fill_uniform(Tensor<T>& t, Rng& rng, double lo, double hi) {
    for (T& v : t.flat()) v = static_cast<T>(rng.uniform(lo, hi));
}

template <typename T>
void fill_glorot_uniform(Tensor<T>& t, Rng& rng, std::size_t fan_in, std::size_t fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    fill_uniform(t, rng, -limit, limit);
}

/// One stage of a model: maps an activation tensor to the next one and
/// routes gradients back, accumulating into its parameters' grad slots.
/// Backward passes are hand-written per layer; a layer caches whatever its
/// own backward needs during forward, so backward must follow the matching
/// forward.
template <typename T>
class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor<T> forward(const Tensor<T>& x, bool training, Rng* rng) = 0;
    virtual Tensor<T> backward(const Tensor<T>& grad_out) = 0;
    virtual void collect_params(std::vector<Param<T>*>& out) { (void)out; }
    virtual void initialize(Rng& rng) { (void)rng; }
};

/// Trainable lookup table: ids [L] -> rows [L, dim]. The padding row
/// (index 0) is an ordinary trained row; no masking downstream.
template <typename T>
class Embedding {
public:
    Embedding(std::size_t vocab_size, std::size_t dim)
        : table_("embedding.table", {vocab_size, dim}) {}

    Tensor<T> forward(std::span<const std::int32_t> ids) {
        const std::size_t dim = table_.value.dim(1);
        cached_ids_.assign(ids.begin(), ids.end());
        Tensor<T> out({ids.size(), dim});
        for (std::size_t t = 0; t < ids.size(); ++t) {
            const auto id = ids[t];
            if (id < 0 || static_cast<std::size_t>(id) >= table_.value.dim(0)) {
                throw std::out_of_range("embedding: id " + std::to_string(id) +
                                        " outside table of " +
                                        std::to_string(table_.value.dim(0)) + " rows");
            }
            auto src = table_.value.row(static_cast<std::size_t>(id));
            auto dst = out.row(t);
            std::copy(src.begin(), src.end(), dst.begin());
        }
        return out;
    }

    void backward(const Tensor<T>& grad_out) {
        for (std::size_t t = 0; t < cached_ids_.size(); ++t) {
            auto dst = table_.grad.row(static_cast<std::size_t>(cached_ids_[t]));
            auto src = grad_out.row(t);
            for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
        }
    }

    void initialize(Rng& rng) { fill_uniform(table_.value, rng, -0.05, 0.05); }

    Param<T>& table() { return table_; }
    std::size_t dim() const { return table_.value.dim(1); }

private:
    Param<T> table_;
    std::vector<std::int32_t> cached_ids_;
};

/// Valid (no-padding) 1-D convolution with relu:
/// out[t,f] = relu(b[f] + sum_{k,d} x[t+k,d] * W[k,d,f]); output length
/// L - kernel + 1.
template <typename T>
class Conv1DRelu : public Layer<T> {
public:
    Conv1DRelu(std::size_t in_dim, std::size_t filters, std::size_t kernel,
               std::string name = "conv")
        : weight_(name + ".weight", {kernel, in_dim, filters}),
          bias_(name + ".bias", {filters}) {}

    Tensor<T> forward(const Tensor<T>& x, bool, Rng*) override {
        const std::size_t kernel = weight_.value.dim(0);
        const std::size_t in_dim = weight_.value.dim(1);
        const std::size_t filters = weight_.value.dim(2);
        if (x.rank() != 2 || x.dim(1) != in_dim) {
            throw std::invalid_argument("conv1d: input shape mismatch");
        }
        if (x.dim(0) < kernel) {
            throw std::invalid_argument("conv1d: sequence shorter than kernel (" +
                                        std::to_string(x.dim(0)) + " < " +
                                        std::to_string(kernel) + ")");
        }
        input_ = x;
        const std::size_t out_len = x.dim(0) - kernel + 1;
        Tensor<T> out({out_len, filters});
        for (std::size_t t = 0; t < out_len; ++t) {
            auto acc = out.row(t);
            auto b = bias_.value.flat();
            std::copy(b.begin(), b.end(), acc.begin());
            for (std::size_t k = 0; k < kernel; ++k) {
                auto xr = x.row(t + k);
                const T* wk = weight_.value.data() + k * in_dim * filters;
                for (std::size_t d = 0; d < in_dim; ++d) {
                    const T xv = xr[d];
                    const T* wrow = wk + d * filters;
                    for (std::size_t f = 0; f < filters; ++f) acc[f] += xv * wrow[f];
                }
            }
            for (std::size_t f = 0; f < filters; ++f) acc[f] = std::max(acc[f], T{});
        }
        output_ = out;
        return out;
    }

    Tensor<T> backward(const Tensor<T>& grad_out) override {
        const std::size_t kernel = weight_.value.dim(0);
        const std::size_t in_dim = weight_.value.dim(1);
        const std::size_t filters = weight_.value.dim(2);
        const std::size_t out_len = grad_out.dim(0);

        // relu gate: d(pre-activation) = grad_out where the output was > 0
        Tensor<T> dz(grad_out.shape());
        for (std::size_t i = 0; i < dz.size(); ++i) {
            dz.flat()[i] = output_.flat()[i] > T{} ? grad_out.flat()[i] : T{};
        }

        Tensor<T> dx(input_.shape());
        auto db = bias_.grad.flat();
        for (std::size_t t = 0; t < out_len; ++t) {
            auto dzr = dz.row(t);
            for (std::size_t f = 0; f < filters; ++f) db[f] += dzr[f];
            for (std::size_t k = 0; k < kernel; ++k) {
                auto xr = input_.row(t + k);
                auto dxr = dx.row(t + k);
                const T* wk = weight_.value.data() + k * in_dim * filters;
                T* dwk = weight_.grad.data() + k * in_dim * filters;
                for (std::size_t d = 0; d < in_dim; ++d) {
                    const T xv = xr[d];
                    const T* wrow = wk + d * filters;
                    T* dwrow = dwk + d * filters;
                    T acc{};
                    for (std::size_t f = 0; f < filters; ++f) {
                        dwrow[f] += xv * dzr[f];
                        acc += wrow[f] * dzr[f];
                    }
                    dxr[d] += acc;
                }
            }
        }
        return dx;
    }

    void collect_params(std::vector<Param<T>*>& out) override {
        out.push_back(&weight_);
        out.push_back(&bias_);
    }

    void initialize(Rng& rng) override {
        const std::size_t kernel = weight_.value.dim(0);
        fill_glorot_uniform(weight_.value, rng, kernel * weight_.value.dim(1),
                            kernel * weight_.value.dim(2));
        bias_.value.fill(T{});
    }

    Param<T>& weight() { return weight_; }
    Param<T>& bias() { return bias_; }

private:
    Param<T> weight_; // [kernel, in_dim, filters]
    Param<T> bias_;   // [filters]
    Tensor<T> input_;
    Tensor<T> output_;
};

/// Non-overlapping max pooling over time (stride = pool size); a trailing
/// remainder shorter than the window is dropped. Gradient routes to the
/// first maximal position of each window.
template <typename T>
class MaxPool1D : public Layer<T> {
public:
    explicit MaxPool1D(std::size_t pool) : pool_(pool) {}

    Tensor<T> forward(const Tensor<T>& x, bool, Rng*) override {
        if (x.rank() != 2 || x.dim(0) < pool_) {
            throw std::invalid_argument("maxpool1d: sequence shorter than pool window");
        }
        in_shape_ = x.shape();
        const std::size_t out_len = x.dim(0) / pool_;
        const std::size_t features = x.dim(1);
        Tensor<T> out({out_len, features});
        argmax_.assign(out_len * features, 0);
        for (std::size_t t = 0; t < out_len; ++t) {
            for (std::size_t f = 0; f < features; ++f) {
                std::size_t best = t * pool_;
                T best_v = x(best, f);
                for (std::size_t o = 1; o < pool_; ++o) {
                    const T v = x(t * pool_ + o, f);
                    if (v > best_v) {
                        best_v = v;
                        best = t * pool_ + o;
                    }
                }
                out(t, f) = best_v;
                argmax_[t * features + f] = best;
            }
        }
        return out;
    }

    Tensor<T> backward(const Tensor<T>& grad_out) override {
        Tensor<T> dx(in_shape_);
        const std::size_t features = in_shape_[1];
        for (std::size_t t = 0; t < grad_out.dim(0); ++t) {
            for (std::size_t f = 0; f < features; ++f) {
                dx(argmax_[t * features + f], f) += grad_out(t, f);
            }
        }
        return dx;
    }

private:
    std::size_t pool_;
    std::vector<std::size_t> in_shape_;
    std::vector<std::size_t> argmax_;
};

/// Inverted dropout: training zeroes each element with probability `rate`
/// and scales survivors by 1/(1-rate); inference is the identity.
template <typename T>
class Dropout : public Layer<T> {
public:
    explicit Dropout(double rate) : rate_(rate) {
        if (rate < 0.0 || rate >= 1.0) {
            throw std::invalid_argument("dropout: rate must be in [0, 1)");
        }
    }

    Tensor<T> forward(const Tensor<T>& x, bool training, Rng* rng) override {
        if (!training || rate_ == 0.0) {
            mask_.clear();
            return x;
        }
        if (rng == nullptr) {
            throw std::invalid_argument("dropout: training mode requires an rng");
        }
        const T scale = static_cast<T>(1.0 / (1.0 - rate_));
        mask_.resize(x.size());
        Tensor<T> out(x.shape());
        for (std::size_t i = 0; i < x.size(); ++i) {
            mask_[i] = rng->uniform() < rate_ ? T{} : scale;
            out.flat()[i] = x.flat()[i] * mask_[i];
        }
        return out;
    }

    Tensor<T> backward(const Tensor<T>& grad_out) override {
        if (mask_.empty()) return grad_out;
        Tensor<T> dx(grad_out.shape());
        for (std::size_t i = 0; i < dx.size(); ++i) {
            dx.flat()[i] = grad_out.flat()[i] * mask_[i];
        }
        return dx;
    }

    double rate() const { return rate_; }

private:
    double rate_;
    std::vector<T> mask_; // empty = last forward was a pass-through
};

/// [L, F] -> [L*F] row-major.
template <typename T>
class Flatten : public Layer<T> {
public:
    Tensor<T> forward(const Tensor<T>& x, bool, Rng*) override {
        in_shape_ = x.shape();
        Tensor<T> out({x.size()});
        auto src = x.flat();
        std::copy(src.begin(), src.end(), out.flat().begin());
        return out;
    }

    Tensor<T> backward(const Tensor<T>& grad_out) override {
        Tensor<T> dx(in_shape_);
        auto src = grad_out.flat();
        std::copy(src.begin(), src.end(), dx.flat().begin());
        return dx;
    }

private:
    std::vector<std::size_t> in_shape_;
};

/// Affine map plus numerically stable softmax (max subtraction). Output is
/// a probability vector; rows sum to 1. Backward consumes the gradient at
/// the LOGITS (for cross-entropy that is probs - one_hot), the combined
/// softmax/loss form.
template <typename T>
class DenseSoftmax {
public:
    DenseSoftmax(std::size_t in_dim, std::size_t num_classes)
        : weight_("dense.weight", {in_dim, num_classes}),
          bias_("dense.bias", {num_classes}) {}

    Tensor<T> forward(const Tensor<T>& x) {
        const std::size_t in_dim = weight_.value.dim(0);
        const std::size_t classes = weight_.value.dim(1);
        if (x.rank() != 1 || x.dim(0) != in_dim) {
            throw std::invalid_argument("dense_softmax: input width mismatch");
        }
        input_ = x;
        std::vector<T> logits(classes);
        for (std::size_t c = 0; c < classes; ++c) logits[c] = bias_.value(c);
        for (std::size_t d = 0; d < in_dim; ++d) {
            const T xv = x(d);
            const T* wrow = weight_.value.data() + d * classes;
            for (std::size_t c = 0; c < classes; ++c) logits[c] += xv * wrow[c];
        }
        T max_logit = logits[0];
        for (T z : logits) {
            if (!std::isfinite(static_cast<double>(z))) {
                throw std::runtime_error("dense_softmax: non-finite logit");
            }
            max_logit = std::max(max_logit, z);
        }
        probs_ = Tensor<T>({classes});
        T sum{};
        for (std::size_t c = 0; c < classes; ++c) {
            probs_(c) = std::exp(logits[c] - max_logit);
            sum += probs_(c);
        }
        for (std::size_t c = 0; c < classes; ++c) probs_(c) /= sum;
        return probs_;
    }

    /// grad_logits is d(loss)/d(logits); accumulates dW, db, returns dx.
    Tensor<T> backward(const Tensor<T>& grad_logits) {
        const std::size_t in_dim = weight_.value.dim(0);
        const std::size_t classes = weight_.value.dim(1);
        Tensor<T> dx({in_dim});
        auto db = bias_.grad.flat();
        for (std::size_t c = 0; c < classes; ++c) db[c] += grad_logits(c);
        for (std::size_t d = 0; d < in_dim; ++d) {
            const T xv = input_(d);
            const T* wrow = weight_.value.data() + d * classes;
            T* dwrow = weight_.grad.data() + d * classes;
            T acc{};
            for (std::size_t c = 0; c < classes; ++c) {
                dwrow[c] += xv * grad_logits(c);
                acc += wrow[c] * grad_logits(c);
            }
            dx(d) = acc;
        }
        return dx;
    }

    void collect_params(std::vector<Param<T>*>& out) {
        out.push_back(&weight_);
        out.push_back(&bias_);
    }

    void initialize(Rng& rng) {
        fill_glorot_uniform(weight_.value, rng, weight_.value.dim(0), weight_.value.dim(1));
        bias_.value.fill(T{});
    }

    const Tensor<T>& probs() const { return probs_; }
    Param<T>& weight() { return weight_; }
    Param<T>& bias() { return bias_; }

private:
    Param<T> weight_; // [in_dim, classes]
    Param<T> bias_;   // [classes]
    Tensor<T> input_;
    Tensor<T> probs_;
};

/// -ln(probs[label]). Throws std::invalid_argument when label is out of
/// range.
template <typename T>
T cross_entropy(const Tensor<T>& probs, std::size_t label) {
    if (label >= probs.dim(0)) {
        throw std::invalid_argument("cross_entropy: label out of range");
    }
    return -std::log(probs(label));
}

/// Combined softmax/cross-entropy gradient at the logits: probs - one_hot.
template <typename T>
Tensor<T> cross_entropy_softmax_grad(const Tensor<T>& probs, std::size_t label) {
    if (label >= probs.dim(0)) {
        throw std::invalid_argument("cross_entropy: label out of range");
    }
    Tensor<T> grad(probs.shape());
    for (std::size_t c = 0; c < probs.dim(0); ++c) grad(c) = probs(c);
    grad(label) -= T{1};
    return grad;
}

} // namespace techtexc
