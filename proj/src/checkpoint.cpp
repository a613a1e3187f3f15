#include "techtexc/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace techtexc {

namespace {

using nlohmann::json;

void append_u64_le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t read_u64_le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

void append_f32_le(std::string& out, float v) {
    const std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

float read_f32_le(const unsigned char* p) {
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return std::bit_cast<float>(bits);
}

json config_to_json(const ModelConfig& cfg) {
    return json{{"architecture", to_string(cfg.architecture)},
                {"vocab_size", cfg.vocab_size},
                {"embedding_dim", cfg.embedding_dim},
                {"seq_len", cfg.seq_len},
                {"filters", cfg.filters},
                {"kernel", cfg.kernel},
                {"pool", cfg.pool},
                {"lstm_units", cfg.lstm_units},
                {"dropout_rate", cfg.dropout_rate},
                {"num_classes", cfg.num_classes}};
}

ModelConfig config_from_json(const json& j) {
    ModelConfig cfg;
    cfg.architecture = architecture_from_string(j.at("architecture").get<std::string>());
    cfg.vocab_size = j.at("vocab_size").get<std::size_t>();
    cfg.embedding_dim = j.at("embedding_dim").get<std::size_t>();
    cfg.seq_len = j.at("seq_len").get<std::size_t>();
    cfg.filters = j.at("filters").get<std::size_t>();
    cfg.kernel = j.at("kernel").get<std::size_t>();
    cfg.pool = j.at("pool").get<std::size_t>();
    cfg.lstm_units = j.at("lstm_units").get<std::size_t>();
    cfg.dropout_rate = j.at("dropout_rate").get<double>();
    cfg.num_classes = j.at("num_classes").get<std::size_t>();
    return cfg;
}

} // namespace

void save_checkpoint(const std::filesystem::path& path, Model<float>& model,
                     const Vocabulary& vocabulary,
                     std::span<const std::string> label_names,
                     double best_dev_accuracy, std::size_t best_epoch) {
    auto params = model.parameters();

    json manifest;
    manifest["format_version"] = kCheckpointFormatVersion;
    manifest["model"] = config_to_json(model.config());
    manifest["label_names"] = std::vector<std::string>(label_names.begin(), label_names.end());
    {
        std::ostringstream vocab_text;
        vocabulary.save(vocab_text);
        manifest["vocabulary"] = vocab_text.str();
    }
    manifest["best_dev_accuracy"] = best_dev_accuracy;
    manifest["best_epoch"] = best_epoch;

    json records = json::array();
    std::uint64_t offset = 0;
    for (const Param<float>* p : params) {
        records.push_back(json{{"name", p->name}, {"shape", p->value.shape()},
                               {"offset", offset}});
        offset += 4 * p->value.size();
    }
    manifest["parameters"] = std::move(records);

    const std::string manifest_text = manifest.dump();
    std::string blob;
    blob.reserve(16 + manifest_text.size() + offset);
    blob.append(kCheckpointMagic);
    append_u64_le(blob, manifest_text.size());
    blob.append(manifest_text);
    for (const Param<float>* p : params) {
        for (float v : p->value.flat()) append_f32_le(blob, v);
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
    }
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) {
        throw std::runtime_error("error writing checkpoint: " + path.string());
    }
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open checkpoint: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string blob = buf.str();

    if (blob.size() < 16 || blob.compare(0, kCheckpointMagic.size(), kCheckpointMagic) != 0) {
        throw std::runtime_error("bad checkpoint header: " + path.string());
    }
    const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data());
    const std::uint64_t manifest_len = read_u64_le(bytes + 8);
    if (16 + manifest_len > blob.size()) {
        throw std::runtime_error("truncated checkpoint manifest: " + path.string());
    }

    json manifest;
    try {
        manifest = json::parse(blob.substr(16, manifest_len));
    } catch (const json::exception& e) {
        throw std::runtime_error("corrupt checkpoint manifest: " + std::string(e.what()));
    }

    const int version = manifest.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion) {
        throw std::runtime_error("unsupported checkpoint format version " +
                                 std::to_string(version));
    }

    const ModelConfig cfg = config_from_json(manifest.at("model"));
    std::vector<std::string> label_names =
        manifest.at("label_names").get<std::vector<std::string>>();

    std::istringstream vocab_text(manifest.at("vocabulary").get<std::string>());
    Vocabulary vocabulary = Vocabulary::load(vocab_text);

    Model<float> model = build_model<float>(cfg, 0);
    auto params = model.parameters();
    const auto& records = manifest.at("parameters");
    if (records.size() != params.size()) {
        throw std::runtime_error("checkpoint parameter list does not match architecture");
    }

    const std::size_t data_begin = 16 + manifest_len;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& rec = records[i];
        if (rec.at("name").get<std::string>() != params[i]->name ||
            rec.at("shape").get<std::vector<std::size_t>>() != params[i]->value.shape()) {
            throw std::runtime_error("checkpoint parameter '" +
                                     rec.at("name").get<std::string>() +
                                     "' does not match architecture");
        }
        const std::uint64_t offset = rec.at("offset").get<std::uint64_t>();
        const std::size_t count = params[i]->value.size();
        if (data_begin + offset + 4 * count > blob.size()) {
            throw std::runtime_error("truncated checkpoint data: " + path.string());
        }
        const unsigned char* src = bytes + data_begin + offset;
        auto dst = params[i]->value.flat();
        for (std::size_t k = 0; k < count; ++k) dst[k] = read_f32_le(src + 4 * k);
    }

    return LoadedCheckpoint{cfg, std::move(label_names), std::move(vocabulary),
                            std::move(model),
                            manifest.at("best_dev_accuracy").get<double>(),
                            manifest.at("best_epoch").get<std::size_t>()};
}

} // namespace techtexc
