#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace techtexc {

/// Labeled dataset in file order. Labels are class indices into
/// `label_names`, which holds the label strings in first-appearance order
/// of the source file (or of the training file the loader was given).
struct LabeledCorpus {
    struct Example {
        std::string text;
        std::int32_t label;
    };

    std::vector<Example> examples;
    std::vector<std::string> label_names;
    std::string task_id;

    std::size_t num_classes() const { return label_names.size(); }
    std::size_t size() const { return examples.size(); }
};

/// Reads a UTF-8 TSV dataset, one `text<TAB>label` pair per line. A leading
/// BOM is stripped; \n and \r\n line endings both accepted; empty lines are
/// skipped. Label indices are assigned by first appearance. When
/// `has_header` is set the first line is discarded.
///
/// Throws std::runtime_error on a missing file, a line without exactly one
/// TAB (reported with its line number), an empty label field, or an empty
/// text field.
LabeledCorpus load_dataset(const std::filesystem::path& path, bool has_header);

/// Same, but labels are resolved against a fixed map (the training label
/// set). A label string absent from `label_names` is an error: dev/test
/// files must never silently extend or reorder the training classes.
LabeledCorpus load_dataset(const std::filesystem::path& path, bool has_header,
                           std::span<const std::string> label_names);

/// Writes the corpus back as TSV (`text<TAB>label_name`, \n endings).
/// Throws std::invalid_argument if any text contains a TAB or newline.
void write_dataset(const LabeledCorpus& corpus, const std::filesystem::path& path);

/// One epoch's visiting order: a permutation of 0..N-1 cut into
/// `batch_size` chunks (the last chunk may be short).
struct BatchPlan {
    std::vector<std::size_t> indices;
    std::size_t batch_size = 0;
    std::uint64_t seed = 0;

    std::size_t num_batches() const {
        return (indices.size() + batch_size - 1) / batch_size;
    }

    std::span<const std::size_t> batch(std::size_t b) const {
        const std::size_t begin = b * batch_size;
        const std::size_t end = std::min(begin + batch_size, indices.size());
        return {indices.data() + begin, end - begin};
    }
};

/// Builds the epoch plan. Identical seeds give identical permutations;
/// shuffle=false gives the identity. Throws std::invalid_argument when
/// n or batch_size is zero.
BatchPlan make_batches(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                       bool shuffle);

} // namespace techtexc
