#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "techtexc/checkpoint.hpp"
#include "techtexc/corpus.hpp"
#include "techtexc/metrics.hpp"
#include "techtexc/model.hpp"
#include "techtexc/preprocess.hpp"
#include "techtexc/rng.hpp"
#include "techtexc/trainer.hpp"

namespace py = pybind11;
using namespace techtexc;

namespace {

// mirrors the CLI train pipeline: load, clean, build vocabulary on the
// training split, encode, train, checkpoint on best dev accuracy
TrainHistory train_files(const std::string& train_file, const std::string& dev_file,
                         const std::string& model, const std::string& out,
                         std::size_t epochs, std::size_t batch_size, double lr,
                         std::size_t embedding_dim, std::size_t seq_len, std::uint64_t seed,
                         bool has_header) {
    const LabeledCorpus train_corpus = load_dataset(train_file, has_header);
    if (train_corpus.size() == 0) {
        throw std::runtime_error("training file has no examples");
    }
    const LabeledCorpus dev_corpus = load_dataset(dev_file, has_header,
                                                  train_corpus.label_names);

    const auto train_tokens = prepare_examples(train_corpus, true);
    const auto dev_tokens = prepare_examples(dev_corpus, false);
    if (train_tokens.empty()) {
        throw std::runtime_error("every training example fell to the short-text rule");
    }
    const Vocabulary vocab = Vocabulary::build(token_lists(train_tokens));
    const auto train_set = encode_examples(train_tokens, vocab, seq_len);
    const auto dev_set = encode_examples(dev_tokens, vocab, seq_len);

    ModelConfig mc;
    mc.architecture = architecture_from_string(model);
    mc.vocab_size = vocab.table_size();
    mc.embedding_dim = embedding_dim;
    mc.seq_len = seq_len;
    mc.num_classes = train_corpus.num_classes();
    Model<float> net = build_model<float>(mc, derive_seed(seed, 0));

    TrainConfig tc;
    tc.batch_size = batch_size;
    tc.learning_rate = lr;
    tc.max_epochs = epochs;
    tc.seed = seed;
    tc.checkpoint_path = out;
    return train(net, vocab, train_corpus.label_names, train_set, dev_set, tc);
}

/// Checkpoint-backed classifier for raw text.
class Classifier {
public:
    explicit Classifier(const std::string& checkpoint_path)
        : ckpt_(load_checkpoint(checkpoint_path)) {}

    std::vector<std::pair<std::string, std::vector<float>>> predict(
        const std::vector<std::string>& texts) {
        std::vector<std::pair<std::string, std::vector<float>>> out;
        for (const Prediction& p : techtexc::predict(ckpt_, texts)) {
            out.emplace_back(p.label, p.probabilities);
        }
        return out;
    }

    std::pair<Metrics, std::vector<std::string>> evaluate_file(const std::string& path,
                                                               bool has_header) {
        const LabeledCorpus corpus = load_dataset(path, has_header, ckpt_.label_names);
        const auto tokens = prepare_examples(corpus, false);
        const auto data = encode_examples(tokens, ckpt_.vocabulary, ckpt_.config.seq_len);
        const EvalResult result = techtexc::evaluate(ckpt_.model, data);
        std::vector<std::string> labels;
        labels.reserve(result.predictions.size());
        for (std::int32_t p : result.predictions) {
            labels.push_back(ckpt_.label_names.at(static_cast<std::size_t>(p)));
        }
        return {result.metrics, std::move(labels)};
    }

    std::vector<std::string> label_names() const { return ckpt_.label_names; }
    std::string architecture() const { return to_string(ckpt_.config.architecture); }
    std::size_t vocabulary_size() const { return ckpt_.vocabulary.distinct_words(); }
    double best_dev_accuracy() const { return ckpt_.best_dev_accuracy; }
    std::size_t best_epoch() const { return ckpt_.best_epoch; }

private:
    LoadedCheckpoint ckpt_;
};

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "text classification toolkit: preprocessing, CNN/BiLSTM training, metrics";

    m.def("clean_text", &clean_text, py::arg("raw"),
          "Strip the punctuation set and collapse whitespace.");
    m.def("tokenize", &tokenize, py::arg("text"),
          "Whitespace split with lowercasing.");
    m.def(
        "keep_example",
        [](const std::vector<std::string>& tokens) { return keep_example(tokens); },
        py::arg("tokens"), "Short-text rule: keep only token lists of length >= 2.");
    m.def(
        "encode_and_pad",
        [](const std::vector<std::string>& tokens, const Vocabulary& vocab,
           std::size_t max_len) { return encode_and_pad(tokens, vocab, max_len); },
        py::arg("tokens"), py::arg("vocabulary"), py::arg("max_len") = kDefaultSequenceLength,
        "Integer encoding with front padding/truncation at fixed length.");

    py::class_<Vocabulary>(m, "Vocabulary")
        .def_static("build", &Vocabulary::build, py::arg("corpus_tokens"))
        .def("index_of", &Vocabulary::index_of, py::arg("word"))
        .def("__contains__",
             [](const Vocabulary& v, const std::string& w) { return v.contains(w); })
        .def("word_at", &Vocabulary::word_at, py::arg("index"))
        .def(
            "decode",
            [](const Vocabulary& v, const std::vector<std::int32_t>& ids) {
                return v.decode(ids);
            },
            py::arg("ids"))
        .def_property_readonly("distinct_words", &Vocabulary::distinct_words)
        .def_property_readonly("table_size", &Vocabulary::table_size)
        .def("dumps",
             [](const Vocabulary& v) {
                 std::ostringstream os;
                 v.save(os);
                 return os.str();
             })
        .def_static("loads", [](const std::string& text) {
            std::istringstream is(text);
            return Vocabulary::load(is);
        });

    py::class_<LabeledCorpus::Example>(m, "Example")
        .def_readonly("text", &LabeledCorpus::Example::text)
        .def_readonly("label", &LabeledCorpus::Example::label);

    py::class_<LabeledCorpus>(m, "LabeledCorpus")
        .def_readonly("examples", &LabeledCorpus::examples)
        .def_readonly("label_names", &LabeledCorpus::label_names)
        .def_readonly("task_id", &LabeledCorpus::task_id)
        .def("__len__", &LabeledCorpus::size)
        .def_property_readonly("num_classes", &LabeledCorpus::num_classes);

    m.def(
        "load_dataset",
        [](const std::string& path, bool has_header,
           const std::optional<std::vector<std::string>>& label_names) {
            if (label_names) return load_dataset(path, has_header, *label_names);
            return load_dataset(path, has_header);
        },
        py::arg("path"), py::arg("has_header") = false, py::arg("label_names") = py::none(),
        "Read a text<TAB>label TSV; pass label_names to reuse a training label map.");
    m.def(
        "write_dataset",
        [](const LabeledCorpus& corpus, const std::string& path) {
            write_dataset(corpus, path);
        },
        py::arg("corpus"), py::arg("path"));

    py::class_<BatchPlan>(m, "BatchPlan")
        .def_readonly("indices", &BatchPlan::indices)
        .def_readonly("batch_size", &BatchPlan::batch_size)
        .def_readonly("seed", &BatchPlan::seed)
        .def_property_readonly("num_batches", &BatchPlan::num_batches)
        .def("batch", [](const BatchPlan& plan, std::size_t b) {
            const auto span = plan.batch(b);
            return std::vector<std::size_t>(span.begin(), span.end());
        });
    m.def("make_batches", &make_batches, py::arg("n"), py::arg("batch_size"), py::arg("seed"),
          py::arg("shuffle"));

    py::class_<Metrics>(m, "Metrics")
        .def_readonly("num_classes", &Metrics::num_classes)
        .def_readonly("num_examples", &Metrics::num_examples)
        .def_readonly("accuracy", &Metrics::accuracy)
        .def_readonly("precision", &Metrics::precision)
        .def_readonly("recall", &Metrics::recall)
        .def_readonly("f1", &Metrics::f1)
        .def_readonly("support", &Metrics::support)
        .def_readonly("weighted_precision", &Metrics::weighted_precision)
        .def_readonly("weighted_recall", &Metrics::weighted_recall)
        .def_readonly("weighted_f1", &Metrics::weighted_f1)
        .def_readonly("confusion", &Metrics::confusion)
        .def("confusion_at", &Metrics::confusion_at, py::arg("true_class"),
             py::arg("predicted"));

    m.def(
        "compute_metrics",
        [](const std::vector<std::int32_t>& y_true, const std::vector<std::int32_t>& y_pred,
           std::size_t num_classes) { return compute_metrics(y_true, y_pred, num_classes); },
        py::arg("y_true"), py::arg("y_pred"), py::arg("num_classes"));
    m.def("format_percent", &format_percent, py::arg("fraction"));
    m.def(
        "format_report",
        [](const Metrics& metrics, const std::vector<std::string>& label_names) {
            return format_report(metrics, label_names);
        },
        py::arg("metrics"), py::arg("label_names") = std::vector<std::string>{});

    py::class_<EpochRecord>(m, "EpochRecord")
        .def_readonly("epoch", &EpochRecord::epoch)
        .def_readonly("train_loss", &EpochRecord::train_loss)
        .def_readonly("train_accuracy", &EpochRecord::train_accuracy)
        .def_readonly("dev_accuracy", &EpochRecord::dev_accuracy);

    py::class_<TrainHistory>(m, "TrainHistory")
        .def_readonly("records", &TrainHistory::records)
        .def_readonly("best_dev_accuracy", &TrainHistory::best_dev_accuracy)
        .def_readonly("best_epoch", &TrainHistory::best_epoch)
        .def_readonly("reached_target", &TrainHistory::reached_target);

    m.def("train", &train_files, py::arg("train_file"), py::arg("dev_file"),
          py::arg("model"), py::arg("out"), py::arg("epochs") = 100,
          py::arg("batch_size") = 128, py::arg("lr") = 0.001,
          py::arg("embedding_dim") = 100, py::arg("seq_len") = 100, py::arg("seed") = 0,
          py::arg("has_header") = false,
          "Train cnn, bilstm or cnn-bilstm on TSV files; checkpoints the best dev epoch.");

    py::class_<Classifier>(m, "Classifier")
        .def(py::init<const std::string&>(), py::arg("checkpoint_path"))
        .def("predict", &Classifier::predict, py::arg("texts"),
             "Label raw texts; returns (label, probabilities) per text.")
        .def("evaluate_file", &Classifier::evaluate_file, py::arg("path"),
             py::arg("has_header") = false)
        .def_property_readonly("label_names", &Classifier::label_names)
        .def_property_readonly("architecture", &Classifier::architecture)
        .def_property_readonly("vocabulary_size", &Classifier::vocabulary_size)
        .def_property_readonly("best_dev_accuracy", &Classifier::best_dev_accuracy)
        .def_property_readonly("best_epoch", &Classifier::best_epoch);
}
