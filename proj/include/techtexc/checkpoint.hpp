#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "techtexc/model.hpp"
#include "techtexc/preprocess.hpp"

namespace techtexc {

/// On-disk layout: 8 magic bytes "TTXC0001", an 8-byte little-endian
/// manifest length, a UTF-8 JSON manifest (format version, model config,
/// label names, serialized vocabulary, per-parameter name/shape/offset
/// records and the best-validation metadata), then the raw little-endian
/// 32-bit float arrays, row-major, in manifest order. Offsets are relative
/// to the start of the data section.
inline constexpr std::string_view kCheckpointMagic = "TTXC0001";
inline constexpr int kCheckpointFormatVersion = 1;

struct LoadedCheckpoint {
    ModelConfig config;
    std::vector<std::string> label_names;
    Vocabulary vocabulary;
    Model<float> model;
    double best_dev_accuracy = 0.0;
    std::size_t best_epoch = 0;
};

void save_checkpoint(const std::filesystem::path& path, Model<float>& model,
                     const Vocabulary& vocabulary,
                     std::span<const std::string> label_names,
                     double best_dev_accuracy, std::size_t best_epoch);

/// Throws std::runtime_error with "bad checkpoint header" on a wrong magic,
/// and a version message on a format_version this build does not read.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

} // namespace techtexc
