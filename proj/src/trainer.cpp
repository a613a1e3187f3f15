#include "techtexc/trainer.hpp"

#include <cmath>
#include <stdexcept>

#include "techtexc/adam.hpp"
#include "techtexc/corpus.hpp"
#include "techtexc/rng.hpp"

namespace techtexc {

namespace {

// Stream ids for deriving the run's generators from the one master seed.
constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kDropoutStream = 2;

std::size_t argmax(const Tensor<float>& probs) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < probs.dim(0); ++c) {
        if (probs(c) > probs(best)) best = c;
    }
    return best;
}

} // namespace

TrainHistory train(Model<float>& model, const Vocabulary& vocabulary,
                   std::span<const std::string> label_names,
                   std::span<const EncodedExample> train_set,
                   std::span<const EncodedExample> dev_set, const TrainConfig& cfg) {
    if (train_set.empty() || dev_set.empty()) {
        throw std::invalid_argument("train: empty training or dev set");
    }
    if (model.config().num_classes != label_names.size()) {
        throw std::invalid_argument("train: model classes do not match label names");
    }

    auto params = model.parameters();
    AdamState<float> adam(params, cfg.learning_rate);
    Rng shuffle_rng(derive_seed(cfg.seed, kShuffleStream));
    Rng dropout_rng(derive_seed(cfg.seed, kDropoutStream));

    TrainHistory history;
    double best = -1.0;

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        // fresh permutation per epoch, drawn from the run's generator
        const BatchPlan plan =
            make_batches(train_set.size(), cfg.batch_size, shuffle_rng.next_u64(), true);

        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t b = 0; b < plan.num_batches(); ++b) {
            const auto batch = plan.batch(b);
            model.zero_grads();
            for (const std::size_t idx : batch) {
                const EncodedExample& ex = train_set[idx];
                const Tensor<float> probs = model.forward(ex.ids, true, &dropout_rng);
                const double loss = cross_entropy(probs, static_cast<std::size_t>(ex.label));
                if (!std::isfinite(loss)) {
                    throw std::runtime_error("train: non-finite loss at epoch " +
                                             std::to_string(epoch) + ", batch " +
                                             std::to_string(b));
                }
                loss_sum += loss;
                if (argmax(probs) == static_cast<std::size_t>(ex.label)) ++correct;
                model.backward(static_cast<std::size_t>(ex.label));
            }
            // mean-loss gradient over the batch
            const float scale = 1.0f / static_cast<float>(batch.size());
            for (Param<float>* p : params) {
                for (float& g : p->grad.flat()) g *= scale;
            }
            adam.step(params);
        }

        const double train_loss = loss_sum / static_cast<double>(train_set.size());
        const double train_acc =
            static_cast<double>(correct) / static_cast<double>(train_set.size());

        std::size_t dev_correct = 0;
        for (const EncodedExample& ex : dev_set) {
            const Tensor<float> probs = model.forward(ex.ids, false, nullptr);
            if (argmax(probs) == static_cast<std::size_t>(ex.label)) ++dev_correct;
        }
        const double dev_acc =
            static_cast<double>(dev_correct) / static_cast<double>(dev_set.size());

        history.records.push_back({epoch, train_loss, train_acc, dev_acc});

        if (dev_acc > best) {
            best = dev_acc;
            history.best_epoch = epoch;
            if (!cfg.checkpoint_path.empty()) {
                save_checkpoint(cfg.checkpoint_path, model, vocabulary, label_names, dev_acc,
                                epoch);
            }
        }

        if (train_acc >= cfg.target_train_accuracy) {
            history.reached_target = true;
            break;
        }
    }

    history.best_dev_accuracy = best;
    return history;
}

EvalResult evaluate(Model<float>& model, std::span<const EncodedExample> data) {
    const std::size_t classes = model.config().num_classes;
    EvalResult result;
    std::vector<std::int32_t> y_true;
    result.predictions.reserve(data.size());
    y_true.reserve(data.size());
    for (const EncodedExample& ex : data) {
        if (ex.label < 0 || static_cast<std::size_t>(ex.label) >= classes) {
            throw std::invalid_argument("evaluate: label outside the model's class count");
        }
        const Tensor<float> probs = model.forward(ex.ids, false, nullptr);
        result.predictions.push_back(static_cast<std::int32_t>(argmax(probs)));
        y_true.push_back(ex.label);
    }
    result.metrics = compute_metrics(y_true, result.predictions, classes);
    return result;
}

std::vector<Prediction> predict(LoadedCheckpoint& checkpoint,
                                std::span<const std::string> raw_texts) {
    std::vector<Prediction> out;
    out.reserve(raw_texts.size());
    for (const std::string& text : raw_texts) {
        const auto tokens = tokenize(clean_text(text));
        const auto ids = encode_and_pad(tokens, checkpoint.vocabulary,
                                        checkpoint.config.seq_len);
        const Tensor<float> probs = checkpoint.model.forward(ids, false, nullptr);
        Prediction p;
        p.probabilities.assign(probs.flat().begin(), probs.flat().end());
        std::size_t best = 0;
        for (std::size_t c = 1; c < probs.dim(0); ++c) {
            if (probs(c) > probs(best)) best = c;
        }
        p.label = checkpoint.label_names.at(best);
        out.push_back(std::move(p));
    }
    return out;
}

} // namespace techtexc
