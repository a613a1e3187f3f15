#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "techtexc/layers.hpp"
#include "techtexc/tensor.hpp"

namespace techtexc {

template <typename T>
T sigmoid(T x) {
    return T{1} / (T{1} + std::exp(-x));
}

/// One step of the standard gated cell. Gate order in the fused kernels is
/// [input, forget, candidate, output]:
///   z = x_t * w_input + h_prev * w_recurrent + bias
///   i = sigmoid(z_i), f = sigmoid(z_f), g = tanh(z_g), o = sigmoid(z_o)
///   c_t = f (*) c_prev + i (*) g
///   h_t = o (*) tanh(c_t)
template <typename T>
void lstm_cell_step(std::span<const T> x_t, std::span<const T> h_prev,
                    std::span<const T> c_prev, const Tensor<T>& w_input,
                    const Tensor<T>& w_recurrent, const Tensor<T>& bias,
                    std::span<T> h_out, std::span<T> c_out) {
    const std::size_t units = h_prev.size();
    if (w_input.dim(0) != x_t.size() || w_input.dim(1) != 4 * units ||
        w_recurrent.dim(0) != units || w_recurrent.dim(1) != 4 * units ||
        bias.dim(0) != 4 * units || c_prev.size() != units ||
        h_out.size() != units || c_out.size() != units) {
        throw std::invalid_argument("lstm_cell_step: shape mismatch");
    }

    std::vector<T> z(bias.flat().begin(), bias.flat().end());
    for (std::size_t d = 0; d < x_t.size(); ++d) {
        const T xv = x_t[d];
        const T* wrow = w_input.data() + d * 4 * units;
        for (std::size_t j = 0; j < 4 * units; ++j) z[j] += xv * wrow[j];
    }
    for (std::size_t h = 0; h < units; ++h) {
        const T hv = h_prev[h];
        const T* wrow = w_recurrent.data() + h * 4 * units;
        for (std::size_t j = 0; j < 4 * units; ++j) z[j] += hv * wrow[j];
    }
    for (std::size_t u = 0; u < units; ++u) {
        const T i = sigmoid(z[u]);
        const T f = sigmoid(z[units + u]);
        const T g = std::tanh(z[2 * units + u]);
        const T o = sigmoid(z[3 * units + u]);
        c_out[u] = f * c_prev[u] + i * g;
        h_out[u] = o * std::tanh(c_out[u]);
    }
}

/// One scan direction of an LSTM over a sequence, with full
/// backpropagation through time. Initial hidden and cell states are zero.
/// Caller is responsible for feeding the input in scan order (the reversed
/// sequence for a backward direction).
template <typename T>
class LstmDirection {
public:
    LstmDirection(std::size_t in_dim, std::size_t units, std::string name)
        : units_(units),
          w_input_(name + ".w_input", {in_dim, 4 * units}),
          w_recurrent_(name + ".w_recurrent", {units, 4 * units}),
          bias_(name + ".bias", {4 * units}) {}

    /// x: [L, in_dim] in scan order. Returns hidden states [L, units].
    Tensor<T> forward(const Tensor<T>& x) {
        const std::size_t in_dim = w_input_.value.dim(0);
        if (x.rank() != 2 || x.dim(1) != in_dim || x.dim(0) == 0) {
            throw std::invalid_argument("lstm: input shape mismatch");
        }
        const std::size_t steps = x.dim(0);
        input_ = x;
        gates_ = Tensor<T>({steps, 4 * units_});
        cells_ = Tensor<T>({steps, units_});
        cell_tanh_ = Tensor<T>({steps, units_});
        hidden_ = Tensor<T>({steps, units_});

        std::vector<T> z(4 * units_);
        for (std::size_t t = 0; t < steps; ++t) {
            auto b = bias_.value.flat();
            std::copy(b.begin(), b.end(), z.begin());
            auto xr = x.row(t);
            for (std::size_t d = 0; d < in_dim; ++d) {
                const T xv = xr[d];
                const T* wrow = w_input_.value.data() + d * 4 * units_;
                for (std::size_t j = 0; j < 4 * units_; ++j) z[j] += xv * wrow[j];
            }
            if (t > 0) {
                auto hp = hidden_.row(t - 1);
                for (std::size_t h = 0; h < units_; ++h) {
                    const T hv = hp[h];
                    const T* wrow = w_recurrent_.value.data() + h * 4 * units_;
                    for (std::size_t j = 0; j < 4 * units_; ++j) z[j] += hv * wrow[j];
                }
            }
            auto g = gates_.row(t);
            for (std::size_t u = 0; u < units_; ++u) {
                g[u] = sigmoid(z[u]);
                g[units_ + u] = sigmoid(z[units_ + u]);
                g[2 * units_ + u] = std::tanh(z[2 * units_ + u]);
                g[3 * units_ + u] = sigmoid(z[3 * units_ + u]);
            }
            for (std::size_t u = 0; u < units_; ++u) {
                const T c_prev = t > 0 ? cells_(t - 1, u) : T{};
                const T c = g[units_ + u] * c_prev + g[u] * g[2 * units_ + u];
                cells_(t, u) = c;
                cell_tanh_(t, u) = std::tanh(c);
                hidden_(t, u) = g[3 * units_ + u] * cell_tanh_(t, u);
            }
        }
        return hidden_;
    }

    /// d_hidden: [L, units] gradient w.r.t. every hidden state in scan
    /// order (zero rows where the model consumed nothing). Returns dx in
    /// scan order and accumulates parameter gradients.
    Tensor<T> backward(const Tensor<T>& d_hidden) {
        const std::size_t steps = hidden_.dim(0);
        const std::size_t in_dim = w_input_.value.dim(0);
        Tensor<T> dx(input_.shape());
        std::vector<T> dh_next(units_, T{});
        std::vector<T> dc_next(units_, T{});
        std::vector<T> dz(4 * units_);

        for (std::size_t ti = steps; ti-- > 0;) {
            auto g = gates_.row(ti);
            for (std::size_t u = 0; u < units_; ++u) {
                const T i = g[u];
                const T f = g[units_ + u];
                const T gg = g[2 * units_ + u];
                const T o = g[3 * units_ + u];
                const T tc = cell_tanh_(ti, u);
                const T c_prev = ti > 0 ? cells_(ti - 1, u) : T{};

                const T dh = d_hidden(ti, u) + dh_next[u];
                const T d_o = dh * tc;
                const T dc = dh * o * (T{1} - tc * tc) + dc_next[u];
                const T d_i = dc * gg;
                const T d_f = dc * c_prev;
                const T d_g = dc * i;
                dc_next[u] = dc * f;

                dz[u] = d_i * i * (T{1} - i);
                dz[units_ + u] = d_f * f * (T{1} - f);
                dz[2 * units_ + u] = d_g * (T{1} - gg * gg);
                dz[3 * units_ + u] = d_o * o * (T{1} - o);
            }

            auto db = bias_.grad.flat();
            for (std::size_t j = 0; j < 4 * units_; ++j) db[j] += dz[j];

            auto xr = input_.row(ti);
            auto dxr = dx.row(ti);
            for (std::size_t d = 0; d < in_dim; ++d) {
                const T xv = xr[d];
                const T* wrow = w_input_.value.data() + d * 4 * units_;
                T* dwrow = w_input_.grad.data() + d * 4 * units_;
                T acc{};
                for (std::size_t j = 0; j < 4 * units_; ++j) {
                    dwrow[j] += xv * dz[j];
                    acc += wrow[j] * dz[j];
                }
                dxr[d] = acc;
            }

            if (ti > 0) {
                auto hp = hidden_.row(ti - 1);
                for (std::size_t h = 0; h < units_; ++h) {
                    const T hv = hp[h];
                    const T* wrow = w_recurrent_.value.data() + h * 4 * units_;
                    T* dwrow = w_recurrent_.grad.data() + h * 4 * units_;
                    T acc{};
                    for (std::size_t j = 0; j < 4 * units_; ++j) {
                        dwrow[j] += hv * dz[j];
                        acc += wrow[j] * dz[j];
                    }
                    dh_next[h] = acc;
                }
            }
        }
        return dx;
    }

    void collect_params(std::vector<Param<T>*>& out) {
        out.push_back(&w_input_);
        out.push_back(&w_recurrent_);
        out.push_back(&bias_);
    }

    void initialize(Rng& rng) {
        fill_glorot_uniform(w_input_.value, rng, w_input_.value.dim(0), 4 * units_);
        fill_glorot_uniform(w_recurrent_.value, rng, units_, 4 * units_);
        bias_.value.fill(T{});
        // forget-gate bias starts at 1 so early training does not flush the cell
        for (std::size_t u = 0; u < units_; ++u) bias_.value(units_ + u) = T{1};
    }

    Param<T>& w_input() { return w_input_; }
    Param<T>& w_recurrent() { return w_recurrent_; }
    Param<T>& bias() { return bias_; }
    std::size_t units() const { return units_; }

private:
    std::size_t units_;
    Param<T> w_input_;     // [in_dim, 4*units]
    Param<T> w_recurrent_; // [units, 4*units]
    Param<T> bias_;        // [4*units]

    Tensor<T> input_;
    Tensor<T> gates_;     // [L, 4*units] post-activation, order [i, f, g, o]
    Tensor<T> cells_;     // [L, units]
    Tensor<T> cell_tanh_; // [L, units]
    Tensor<T> hidden_;    // [L, units]
};

/// Bidirectional LSTM: one direction scans the input, the other scans the
/// reversed input; outputs are concatenated [h_fwd ; h_bwd]. With
/// return_sequences the output is [L, 2*units] with the backward half
/// re-aligned to input positions; otherwise it is the [2*units] concat of
/// the forward final state and the backward direction's output at t=0.
template <typename T>
class BiLstm : public Layer<T> {
public:
    BiLstm(std::size_t in_dim, std::size_t units, bool return_sequences,
           std::string name = "bilstm")
        : return_sequences_(return_sequences),
          fwd_(in_dim, units, name + ".fwd"),
          bwd_(in_dim, units, name + ".bwd") {}

    Tensor<T> forward(const Tensor<T>& x, bool, Rng*) override {
        const std::size_t steps = x.dim(0);
        const std::size_t units = fwd_.units();
        steps_ = steps;
        const Tensor<T> h_fwd = fwd_.forward(x);
        const Tensor<T> h_bwd = bwd_.forward(reverse_rows(x)); // scan order = reversed time

        if (return_sequences_) {
            Tensor<T> out({steps, 2 * units});
            for (std::size_t t = 0; t < steps; ++t) {
                auto dst = out.row(t);
                auto f = h_fwd.row(t);
                auto b = h_bwd.row(steps - 1 - t);
                for (std::size_t u = 0; u < units; ++u) dst[u] = f[u];
                for (std::size_t u = 0; u < units; ++u) dst[units + u] = b[u];
            }
            return out;
        }
        Tensor<T> out({2 * units});
        auto f = h_fwd.row(steps - 1);
        auto b = h_bwd.row(steps - 1); // backward scan's final state = output at t=0
        for (std::size_t u = 0; u < units; ++u) out(u) = f[u];
        for (std::size_t u = 0; u < units; ++u) out(units + u) = b[u];
        return out;
    }

    Tensor<T> backward(const Tensor<T>& grad_out) override {
        const std::size_t units = fwd_.units();
        Tensor<T> d_fwd({steps_, units});
        Tensor<T> d_bwd({steps_, units});
        if (return_sequences_) {
            for (std::size_t t = 0; t < steps_; ++t) {
                auto src = grad_out.row(t);
                for (std::size_t u = 0; u < units; ++u) d_fwd(t, u) = src[u];
                for (std::size_t u = 0; u < units; ++u) {
                    d_bwd(steps_ - 1 - t, u) = src[units + u];
                }
            }
        } else {
            for (std::size_t u = 0; u < units; ++u) d_fwd(steps_ - 1, u) = grad_out(u);
            for (std::size_t u = 0; u < units; ++u) d_bwd(steps_ - 1, u) = grad_out(units + u);
        }
        Tensor<T> dx = fwd_.backward(d_fwd);
        const Tensor<T> dx_bwd = reverse_rows(bwd_.backward(d_bwd));
        for (std::size_t i = 0; i < dx.size(); ++i) dx.flat()[i] += dx_bwd.flat()[i];
        return dx;
    }

    void collect_params(std::vector<Param<T>*>& out) override {
        fwd_.collect_params(out);
        bwd_.collect_params(out);
    }

    void initialize(Rng& rng) override {
        fwd_.initialize(rng);
        bwd_.initialize(rng);
    }

    LstmDirection<T>& forward_direction() { return fwd_; }
    LstmDirection<T>& backward_direction() { return bwd_; }

private:
    bool return_sequences_;
    std::size_t steps_ = 0;
    LstmDirection<T> fwd_;
    LstmDirection<T> bwd_;
};

} // namespace techtexc
