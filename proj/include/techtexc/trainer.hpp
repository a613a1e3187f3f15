#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "techtexc/checkpoint.hpp"
#include "techtexc/metrics.hpp"
#include "techtexc/model.hpp"
#include "techtexc/preprocess.hpp"

namespace techtexc {

struct TrainConfig {
    std::size_t batch_size = 128;
    double learning_rate = 0.001;
    std::size_t max_epochs = 100;
    double target_train_accuracy = 0.98;
    std::uint64_t seed = 0;
    std::filesystem::path checkpoint_path;
};

struct EpochRecord {
    std::size_t epoch; // 1-based
    double train_loss; // mean cross-entropy over the epoch's examples
    double train_accuracy; // running accuracy over the epoch's batches
    double dev_accuracy;
};

struct TrainHistory {
    std::vector<EpochRecord> records;
    double best_dev_accuracy = 0.0;
    std::size_t best_epoch = 0;
    bool reached_target = false;
};

/// Mini-batch training: shuffled batches, mean-gradient Adam steps, a dev
/// pass in inference mode after each epoch, and a checkpoint write whenever
/// dev accuracy strictly improves on the best seen. Stops when the running
/// training accuracy of an epoch reaches the target, or at max_epochs.
///
/// All randomness (shuffling, dropout) derives from cfg.seed; a fixed seed
/// replays the run exactly in this single-threaded implementation.
/// Throws std::runtime_error on a non-finite loss (reporting epoch and
/// batch) or an unwritable checkpoint path.
TrainHistory train(Model<float>& model, const Vocabulary& vocabulary,
                   std::span<const std::string> label_names,
                   std::span<const EncodedExample> train_set,
                   std::span<const EncodedExample> dev_set, const TrainConfig& cfg);

struct EvalResult {
    std::vector<std::int32_t> predictions; // argmax per example, input order
    Metrics metrics;
};

/// Inference-mode pass over `data` with metrics against the stored labels.
EvalResult evaluate(Model<float>& model, std::span<const EncodedExample> data);

struct Prediction {
    std::string label;
    std::vector<float> probabilities;
};

/// End-to-end prediction on raw text: cleaning, encoding with the
/// checkpoint's vocabulary, inference-mode forward, argmax label. The
/// short-text rule does not apply here; every input line gets an answer.
std::vector<Prediction> predict(LoadedCheckpoint& checkpoint,
                                std::span<const std::string> raw_texts);

} // namespace techtexc
