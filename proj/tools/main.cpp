#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "techtexc/checkpoint.hpp"
#include "techtexc/corpus.hpp"
#include "techtexc/metrics.hpp"
#include "techtexc/model.hpp"
#include "techtexc/preprocess.hpp"
#include "techtexc/rng.hpp"
#include "techtexc/trainer.hpp"

namespace fs = std::filesystem;
using namespace techtexc;

namespace {

constexpr std::uint64_t kInitStream = 0; // shuffle and dropout streams live in the trainer

struct TrainFlags {
    std::string train_file;
    std::string dev_file;
    std::string model = "cnn-bilstm";
    std::string out;
    std::string history;
    bool has_header = false;
    std::size_t epochs = 100;
    std::size_t batch_size = 128;
    double lr = 0.001;
    std::size_t embedding_dim = 100;
    std::size_t seq_len = 100;
    std::uint64_t seed = 0;
};

struct EvaluateFlags {
    std::string checkpoint;
    std::string data;
    std::string pred_out;
    bool has_header = false;
};

struct PredictFlags {
    std::string checkpoint;
    std::string input;
    std::string output;
};

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open input file: " + path.string());
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

void write_history(const fs::path& path, const TrainHistory& history) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open history file for writing: " + path.string());
    }
    char buf[160];
    for (const EpochRecord& r : history.records) {
        std::snprintf(buf, sizeof(buf),
                      "epoch=%zu train_loss=%.6f train_acc=%.6f dev_acc=%.6f\n", r.epoch,
                      r.train_loss, r.train_accuracy, r.dev_accuracy);
        out << buf;
    }
}

int cmd_train(const TrainFlags& flags) {
    const LabeledCorpus train_corpus = load_dataset(flags.train_file, flags.has_header);
    if (train_corpus.size() == 0) {
        throw std::runtime_error("training file has no examples");
    }
    const LabeledCorpus dev_corpus =
        load_dataset(flags.dev_file, flags.has_header, train_corpus.label_names);

    const auto train_tokens = prepare_examples(train_corpus, /*drop_short=*/true);
    const auto dev_tokens = prepare_examples(dev_corpus, /*drop_short=*/false);
    if (train_tokens.empty()) {
        throw std::runtime_error("every training example fell to the short-text rule");
    }
    const Vocabulary vocab = Vocabulary::build(token_lists(train_tokens));
    const auto train_set = encode_examples(train_tokens, vocab, flags.seq_len);
    const auto dev_set = encode_examples(dev_tokens, vocab, flags.seq_len);

    ModelConfig mc;
    mc.architecture = architecture_from_string(flags.model);
    mc.vocab_size = vocab.table_size();
    mc.embedding_dim = flags.embedding_dim;
    mc.seq_len = flags.seq_len;
    mc.num_classes = train_corpus.num_classes();
    Model<float> model = build_model<float>(mc, derive_seed(flags.seed, kInitStream));

    TrainConfig tc;
    tc.batch_size = flags.batch_size;
    tc.learning_rate = flags.lr;
    tc.max_epochs = flags.epochs;
    tc.seed = flags.seed;
    tc.checkpoint_path = flags.out;

    std::cerr << "training " << flags.model << " on " << train_set.size() << " examples ("
              << train_corpus.num_classes() << " classes, K=" << vocab.distinct_words()
              << ")\n";
    const TrainHistory history =
        train(model, vocab, train_corpus.label_names, train_set, dev_set, tc);
    for (const EpochRecord& r : history.records) {
        std::cerr << "epoch " << r.epoch << ": train_loss=" << r.train_loss
                  << " train_acc=" << r.train_accuracy << " dev_acc=" << r.dev_accuracy
                  << "\n";
    }

    const fs::path history_path =
        flags.history.empty() ? fs::path(flags.out + ".history") : fs::path(flags.history);
    write_history(history_path, history);

    // report the model the run actually persisted: the best-dev checkpoint
    LoadedCheckpoint best = load_checkpoint(flags.out);
    const EvalResult result = evaluate(best.model, dev_set);
    std::cout << format_report(result.metrics, best.label_names);
    return 0;
}

int cmd_evaluate(const EvaluateFlags& flags) {
    LoadedCheckpoint ckpt = load_checkpoint(flags.checkpoint);
    const LabeledCorpus corpus = load_dataset(flags.data, flags.has_header, ckpt.label_names);
    const auto tokens = prepare_examples(corpus, /*drop_short=*/false);
    const auto data = encode_examples(tokens, ckpt.vocabulary, ckpt.config.seq_len);
    if (data.empty()) {
        throw std::runtime_error("evaluation file has no examples");
    }

    const EvalResult result = evaluate(ckpt.model, data);
    std::cout << format_report(result.metrics, ckpt.label_names);

    if (!flags.pred_out.empty()) {
        std::ofstream out(flags.pred_out, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot open predictions file for writing: " +
                                     flags.pred_out);
        }
        for (const std::int32_t p : result.predictions) {
            out << ckpt.label_names.at(static_cast<std::size_t>(p)) << "\n";
        }
    }
    return 0;
}

int cmd_predict(const PredictFlags& flags) {
    LoadedCheckpoint ckpt = load_checkpoint(flags.checkpoint);
    const std::vector<std::string> lines = read_lines(flags.input);

    std::ofstream file_out;
    if (!flags.output.empty()) {
        file_out.open(flags.output, std::ios::binary | std::ios::trunc);
        if (!file_out) {
            throw std::runtime_error("cannot open output file for writing: " + flags.output);
        }
    }
    std::ostream& out = flags.output.empty() ? std::cout : file_out;

    if (lines.empty()) {
        std::cerr << "warning: input file is empty, nothing to predict\n";
        return 0;
    }

    const auto predictions = predict(ckpt, lines);
    char buf[32];
    for (const Prediction& p : predictions) {
        out << p.label << '\t';
        for (std::size_t c = 0; c < p.probabilities.size(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.6f", p.probabilities[c]);
            if (c > 0) out << ',';
            out << buf;
        }
        out << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"technical text classifier: train, evaluate and predict"};
    app.require_subcommand(1);

    TrainFlags train_flags;
    CLI::App* train_cmd = app.add_subcommand("train", "train a model and write a checkpoint");
    train_cmd->add_option("--train-file", train_flags.train_file, "training TSV (text<TAB>label)")
        ->required();
    train_cmd->add_option("--dev-file", train_flags.dev_file, "validation TSV")->required();
    train_cmd->add_option("--model", train_flags.model, "cnn, bilstm or cnn-bilstm")
        ->required()
        ->check(CLI::IsMember({"cnn", "bilstm", "cnn-bilstm"}));
    train_cmd->add_option("--out", train_flags.out, "checkpoint output path")->required();
    train_cmd->add_option("--history", train_flags.history,
                          "history file path (default: <out>.history)");
    train_cmd->add_flag("--has-header", train_flags.has_header, "skip the first line");
    train_cmd->add_option("--epochs", train_flags.epochs, "epoch cap");
    train_cmd->add_option("--batch-size", train_flags.batch_size, "mini-batch size");
    train_cmd->add_option("--lr", train_flags.lr, "learning rate");
    train_cmd->add_option("--embedding-dim", train_flags.embedding_dim, "embedding width");
    train_cmd->add_option("--seq-len", train_flags.seq_len, "padded sequence length");
    train_cmd->add_option("--seed", train_flags.seed, "master seed (default 0, never wall-clock)");

    EvaluateFlags eval_flags;
    CLI::App* eval_cmd = app.add_subcommand("evaluate", "score a checkpoint on labeled data");
    eval_cmd->add_option("--checkpoint", eval_flags.checkpoint, "checkpoint path")->required();
    eval_cmd->add_option("--data", eval_flags.data, "labeled TSV to score")->required();
    eval_cmd->add_option("--pred-out", eval_flags.pred_out,
                         "write one predicted label per line");
    eval_cmd->add_flag("--has-header", eval_flags.has_header, "skip the first line");

    PredictFlags pred_flags;
    CLI::App* pred_cmd = app.add_subcommand("predict", "label raw texts, one per line");
    pred_cmd->add_option("--checkpoint", pred_flags.checkpoint, "checkpoint path")->required();
    pred_cmd->add_option("--input", pred_flags.input, "file with one raw text per line")
        ->required();
    pred_cmd->add_option("--output", pred_flags.output, "predictions path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (train_cmd->parsed()) return cmd_train(train_flags);
        if (eval_cmd->parsed()) return cmd_evaluate(eval_flags);
        if (pred_cmd->parsed()) return cmd_predict(pred_flags);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
