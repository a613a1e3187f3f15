#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "techtexc/checkpoint.hpp"

using namespace techtexc;
namespace fs = std::filesystem;

namespace {

struct Fixture {
    ModelConfig cfg;
    Vocabulary vocab;
    std::vector<std::string> labels;
    Model<float> model;

    Fixture()
        : cfg(make_config()),
          vocab(Vocabulary::build({{"deep", "net", "deep"}, {"text", "net"}})),
          labels({"alpha", "beta", "gamma"}),
          model(build_model<float>(cfg, 77)) {}

    static ModelConfig make_config() {
        ModelConfig cfg;
        cfg.architecture = Architecture::kCnnBiLstm;
        cfg.vocab_size = 6; // K=4 plus pad and OOV
        cfg.embedding_dim = 5;
        cfg.seq_len = 10;
        cfg.filters = 3;
        cfg.lstm_units = 4;
        cfg.num_classes = 3;
        return cfg;
    }
};

} // namespace

TEST_CASE("checkpoint file starts with the magic bytes and round-trips exactly") {
    Fixture fx;
    const fs::path path = fs::temp_directory_path() / "techtexc_ckpt_roundtrip.bin";
    save_checkpoint(path, fx.model, fx.vocab, fx.labels, 0.75, 3);

    std::ifstream in(path, std::ios::binary);
    char magic[8];
    in.read(magic, 8);
    CHECK(std::string(magic, 8) == "TTXC0001");

    LoadedCheckpoint loaded = load_checkpoint(path);
    CHECK(loaded.best_dev_accuracy == 0.75);
    CHECK(loaded.best_epoch == 3);
    CHECK(loaded.label_names == fx.labels);
    CHECK(loaded.vocabulary == fx.vocab);
    CHECK(loaded.config.architecture == Architecture::kCnnBiLstm);
    CHECK(loaded.config.seq_len == 10);

    const auto original = fx.model.parameters();
    const auto restored = loaded.model.parameters();
    REQUIRE(original.size() == restored.size());
    for (std::size_t i = 0; i < original.size(); ++i) {
        CHECK(original[i]->name == restored[i]->name);
        REQUIRE(original[i]->value.shape() == restored[i]->value.shape());
        for (std::size_t k = 0; k < original[i]->value.size(); ++k) {
            CHECK(original[i]->value.flat()[k] == restored[i]->value.flat()[k]);
        }
    }
}

TEST_CASE("corrupt magic is rejected as a bad header") {
    Fixture fx;
    const fs::path path = fs::temp_directory_path() / "techtexc_ckpt_badmagic.bin";
    save_checkpoint(path, fx.model, fx.vocab, fx.labels, 0.5, 1);
    {
        std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(0);
        f.write("XXXX", 4);
    }
    CHECK_THROWS_WITH_AS((void)load_checkpoint(path), doctest::Contains("bad checkpoint header"),
                         std::runtime_error);
}

TEST_CASE("unsupported format version is rejected by name") {
    Fixture fx;
    const fs::path path = fs::temp_directory_path() / "techtexc_ckpt_badversion.bin";
    save_checkpoint(path, fx.model, fx.vocab, fx.labels, 0.5, 1);

    // bump the version integer inside the manifest text
    std::ifstream in(path, std::ios::binary);
    std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    const std::string needle = "\"format_version\":1";
    const std::size_t at = blob.find(needle);
    REQUIRE(at != std::string::npos);
    blob[at + needle.size() - 1] = '2';
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << blob;
    out.close();

    CHECK_THROWS_WITH_AS((void)load_checkpoint(path), doctest::Contains("format version"),
                         std::runtime_error);
}

TEST_CASE("truncated data section is rejected") {
    Fixture fx;
    const fs::path path = fs::temp_directory_path() / "techtexc_ckpt_trunc.bin";
    save_checkpoint(path, fx.model, fx.vocab, fx.labels, 0.5, 1);
    const auto size = fs::file_size(path);
    fs::resize_file(path, size - 64);
    CHECK_THROWS_WITH_AS((void)load_checkpoint(path), doctest::Contains("truncated"),
                         std::runtime_error);
}

TEST_CASE("missing checkpoint file is an error") {
    CHECK_THROWS_AS((void)load_checkpoint(fs::temp_directory_path() / "no_such_ckpt.bin"),
                    std::runtime_error);
}
