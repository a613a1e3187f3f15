#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "techtexc/layers.hpp"
#include "techtexc/lstm.hpp"
#include "techtexc/rng.hpp"

namespace techtexc {

enum class Architecture { kCnn, kBiLstm, kCnnBiLstm };

std::string to_string(Architecture arch);
Architecture architecture_from_string(std::string_view name);

/// Architecture choice plus every width knob; defaults are the tuned
/// values the classifiers train with.
struct ModelConfig {
    Architecture architecture = Architecture::kCnnBiLstm;
    std::size_t vocab_size = 0; // K + 2 (padding and OOV rows included)
    std::size_t embedding_dim = 100;
    std::size_t seq_len = 100;
    std::size_t filters = 128;
    std::size_t kernel = 5;
    std::size_t pool = 5;
    std::size_t lstm_units = 128;
    double dropout_rate = 0.2;
    std::size_t num_classes = 0;
};

/// Closed-form trainable parameter count for a config; models assert their
/// actual count against this.
std::size_t expected_parameter_count(const ModelConfig& cfg);

/// A classifier: embedding, a stack of layers, and the softmax head.
/// Forward maps token ids to class probabilities; backward(label) runs the
/// combined softmax/cross-entropy gradient back to every parameter.
/// Parameters are exclusively owned; concurrent inference is safe only on a
/// model no one is training.
template <typename T>
class Model {
public:
    Model(ModelConfig cfg, std::unique_ptr<Embedding<T>> embedding,
          std::vector<std::unique_ptr<Layer<T>>> stack,
          std::unique_ptr<DenseSoftmax<T>> head, std::uint64_t init_seed)
        : cfg_(cfg),
          embedding_(std::move(embedding)),
          stack_(std::move(stack)),
          head_(std::move(head)) {
        Rng rng(init_seed);
        embedding_->initialize(rng);
        for (auto& layer : stack_) layer->initialize(rng);
        head_->initialize(rng);
    }

    /// ids must have length cfg.seq_len. Returns class probabilities [C].
    Tensor<T> forward(std::span<const std::int32_t> ids, bool training, Rng* dropout_rng) {
        if (ids.size() != cfg_.seq_len) {
            throw std::invalid_argument("model: expected " + std::to_string(cfg_.seq_len) +
                                        " token ids, got " + std::to_string(ids.size()));
        }
        Tensor<T> x = embedding_->forward(ids);
        for (auto& layer : stack_) x = layer->forward(x, training, dropout_rng);
        return head_->forward(x);
    }

    /// Backward for the most recent forward; starts from probs - one_hot.
    void backward(std::size_t label) {
        Tensor<T> grad = cross_entropy_softmax_grad(head_->probs(), label);
        Tensor<T> dx = head_->backward(grad);
        for (std::size_t i = stack_.size(); i-- > 0;) {
            dx = stack_[i]->backward(dx);
        }
        embedding_->backward(dx);
    }

    std::vector<Param<T>*> parameters() {
        std::vector<Param<T>*> out;
        out.push_back(&embedding_->table());
        for (auto& layer : stack_) layer->collect_params(out);
        head_->collect_params(out);
        return out;
    }

    void zero_grads() {
        for (Param<T>* p : parameters()) p->zero_grad();
    }

    std::size_t parameter_count() {
        std::size_t n = 0;
        for (Param<T>* p : parameters()) n += p->value.size();
        return n;
    }

    const ModelConfig& config() const { return cfg_; }
    const Tensor<T>& probs() const { return head_->probs(); }

private:
    ModelConfig cfg_;
    std::unique_ptr<Embedding<T>> embedding_;
    std::vector<std::unique_ptr<Layer<T>>> stack_;
    std::unique_ptr<DenseSoftmax<T>> head_;
};

namespace detail {

inline void validate_common(const ModelConfig& cfg) {
    if (cfg.vocab_size < 2) throw std::invalid_argument("model: vocab_size must be >= 2");
    if (cfg.num_classes < 2) throw std::invalid_argument("model: need at least 2 classes");
    if (cfg.embedding_dim == 0 || cfg.seq_len == 0) {
        throw std::invalid_argument("model: zero embedding_dim or seq_len");
    }
}

/// Length after one valid conv (kernel) + max pool (pool). Throws when the
/// sequence is too short for the stage.
inline std::size_t conv_pool_out_len(std::size_t len, std::size_t kernel, std::size_t pool,
                                     const char* stage) {
    if (len < kernel) {
        throw std::invalid_argument(std::string("model: sequence too short for ") + stage +
                                    " convolution");
    }
    const std::size_t conv_len = len - kernel + 1;
    if (conv_len < pool) {
        throw std::invalid_argument(std::string("model: sequence too short for ") + stage +
                                    " pooling");
    }
    return conv_len / pool;
}

} // namespace detail

/// Embedding -> Conv1D+relu -> MaxPool -> Conv1D+relu -> MaxPool ->
/// Flatten -> softmax head. With the default widths the length chain is
/// 100 -> 96 -> 19 -> 15 -> 3, so the head sees 3*filters inputs.
template <typename T>
Model<T> build_cnn(const ModelConfig& cfg, std::uint64_t init_seed) {
    detail::validate_common(cfg);
    const std::size_t len1 = detail::conv_pool_out_len(cfg.seq_len, cfg.kernel, cfg.pool, "first");
    const std::size_t len2 = detail::conv_pool_out_len(len1, cfg.kernel, cfg.pool, "second");

    auto embedding = std::make_unique<Embedding<T>>(cfg.vocab_size, cfg.embedding_dim);
    std::vector<std::unique_ptr<Layer<T>>> stack;
    stack.push_back(std::make_unique<Conv1DRelu<T>>(cfg.embedding_dim, cfg.filters, cfg.kernel,
                                                    "conv1"));
    stack.push_back(std::make_unique<MaxPool1D<T>>(cfg.pool));
    stack.push_back(std::make_unique<Conv1DRelu<T>>(cfg.filters, cfg.filters, cfg.kernel,
                                                    "conv2"));
    stack.push_back(std::make_unique<MaxPool1D<T>>(cfg.pool));
    stack.push_back(std::make_unique<Flatten<T>>());
    auto head = std::make_unique<DenseSoftmax<T>>(len2 * cfg.filters, cfg.num_classes);
    return Model<T>(cfg, std::move(embedding), std::move(stack), std::move(head), init_seed);
}

/// Embedding -> BiLSTM (sequences) -> Dropout -> BiLSTM (final state) ->
/// Dropout -> softmax head; the head sees 2*units inputs.
template <typename T>
Model<T> build_bilstm(const ModelConfig& cfg, std::uint64_t init_seed) {
    detail::validate_common(cfg);
    auto embedding = std::make_unique<Embedding<T>>(cfg.vocab_size, cfg.embedding_dim);
    std::vector<std::unique_ptr<Layer<T>>> stack;
    stack.push_back(std::make_unique<BiLstm<T>>(cfg.embedding_dim, cfg.lstm_units, true,
                                                "bilstm1"));
    stack.push_back(std::make_unique<Dropout<T>>(cfg.dropout_rate));
    stack.push_back(std::make_unique<BiLstm<T>>(2 * cfg.lstm_units, cfg.lstm_units, false,
                                                "bilstm2"));
    stack.push_back(std::make_unique<Dropout<T>>(cfg.dropout_rate));
    auto head = std::make_unique<DenseSoftmax<T>>(2 * cfg.lstm_units, cfg.num_classes);
    return Model<T>(cfg, std::move(embedding), std::move(stack), std::move(head), init_seed);
}

/// One layer of each network combined sequentially: Embedding -> Conv1D ->
/// MaxPool -> BiLSTM (final state) -> Dropout -> softmax head. With the
/// default widths the BiLSTM consumes 19 timesteps of width `filters`.
template <typename T>
Model<T> build_cnn_bilstm(const ModelConfig& cfg, std::uint64_t init_seed) {
    detail::validate_common(cfg);
    detail::conv_pool_out_len(cfg.seq_len, cfg.kernel, cfg.pool, "hybrid");

    auto embedding = std::make_unique<Embedding<T>>(cfg.vocab_size, cfg.embedding_dim);
    std::vector<std::unique_ptr<Layer<T>>> stack;
    stack.push_back(std::make_unique<Conv1DRelu<T>>(cfg.embedding_dim, cfg.filters, cfg.kernel,
                                                    "conv1"));
    stack.push_back(std::make_unique<MaxPool1D<T>>(cfg.pool));
    stack.push_back(std::make_unique<BiLstm<T>>(cfg.filters, cfg.lstm_units, false, "bilstm"));
    stack.push_back(std::make_unique<Dropout<T>>(cfg.dropout_rate));
    auto head = std::make_unique<DenseSoftmax<T>>(2 * cfg.lstm_units, cfg.num_classes);
    return Model<T>(cfg, std::move(embedding), std::move(stack), std::move(head), init_seed);
}

template <typename T>
Model<T> build_model(const ModelConfig& cfg, std::uint64_t init_seed) {
    switch (cfg.architecture) {
        case Architecture::kCnn: return build_cnn<T>(cfg, init_seed);
        case Architecture::kBiLstm: return build_bilstm<T>(cfg, init_seed);
        case Architecture::kCnnBiLstm: return build_cnn_bilstm<T>(cfg, init_seed);
    }
    throw std::invalid_argument("model: unknown architecture");
}

inline std::string to_string(Architecture arch) {
    switch (arch) {
        case Architecture::kCnn: return "cnn";
        case Architecture::kBiLstm: return "bilstm";
        case Architecture::kCnnBiLstm: return "cnn-bilstm";
    }
    throw std::invalid_argument("unknown architecture");
}

inline Architecture architecture_from_string(std::string_view name) {
    if (name == "cnn") return Architecture::kCnn;
    if (name == "bilstm") return Architecture::kBiLstm;
    if (name == "cnn-bilstm" || name == "cnn_bilstm") return Architecture::kCnnBiLstm;
    throw std::invalid_argument("unknown architecture '" + std::string(name) +
                                "' (expected cnn, bilstm or cnn-bilstm)");
}

inline std::size_t expected_parameter_count(const ModelConfig& cfg) {
    const std::size_t embedding = cfg.vocab_size * cfg.embedding_dim;
    auto conv = [&](std::size_t in_dim) {
        return cfg.kernel * in_dim * cfg.filters + cfg.filters;
    };
    auto bilstm = [&](std::size_t in_dim) {
        const std::size_t gates = 4 * cfg.lstm_units;
        return 2 * (in_dim * gates + cfg.lstm_units * gates + gates);
    };
    auto dense = [&](std::size_t in_dim) {
        return in_dim * cfg.num_classes + cfg.num_classes;
    };

    switch (cfg.architecture) {
        case Architecture::kCnn: {
            const std::size_t len1 =
                detail::conv_pool_out_len(cfg.seq_len, cfg.kernel, cfg.pool, "first");
            const std::size_t len2 =
                detail::conv_pool_out_len(len1, cfg.kernel, cfg.pool, "second");
            return embedding + conv(cfg.embedding_dim) + conv(cfg.filters) +
                   dense(len2 * cfg.filters);
        }
        case Architecture::kBiLstm:
            return embedding + bilstm(cfg.embedding_dim) + bilstm(2 * cfg.lstm_units) +
                   dense(2 * cfg.lstm_units);
        case Architecture::kCnnBiLstm:
            return embedding + conv(cfg.embedding_dim) + bilstm(cfg.filters) +
                   dense(2 * cfg.lstm_units);
    }
    throw std::invalid_argument("unknown architecture");
}

} // namespace techtexc
