#include "techtexc/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "techtexc/rng.hpp"

namespace techtexc {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open dataset file: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string content = buf.str();
    if (content.size() >= 3 && static_cast<unsigned char>(content[0]) == 0xEF &&
        static_cast<unsigned char>(content[1]) == 0xBB &&
        static_cast<unsigned char>(content[2]) == 0xBF) {
        content.erase(0, 3);
    }
    return content;
}

LabeledCorpus load_impl(const std::filesystem::path& path, bool has_header,
                        const std::span<const std::string>* fixed_labels) {
    const std::string content = read_file(path);

    LabeledCorpus corpus;
    corpus.task_id = path.stem().string();

    std::unordered_map<std::string, std::int32_t> label_index;
    if (fixed_labels != nullptr) {
        corpus.label_names.assign(fixed_labels->begin(), fixed_labels->end());
        for (std::size_t i = 0; i < corpus.label_names.size(); ++i) {
            label_index.emplace(corpus.label_names[i], static_cast<std::int32_t>(i));
        }
    }

    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool header_pending = has_header;
    while (pos <= content.size()) {
        std::size_t eol = content.find('\n', pos);
        if (eol == std::string::npos) {
            if (pos == content.size()) break;
            eol = content.size();
        }
        std::string_view line(content.data() + pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (header_pending) {
            header_pending = false;
            continue;
        }
        if (line.empty()) continue;

        const std::size_t tab = line.find('\t');
        if (tab == std::string_view::npos ||
            line.find('\t', tab + 1) != std::string_view::npos) {
            throw std::runtime_error("line " + std::to_string(line_no) +
                                     ": expected exactly one TAB separator");
        }
        std::string_view text = line.substr(0, tab);
        std::string_view label = line.substr(tab + 1);
        if (label.empty()) {
            throw std::runtime_error("line " + std::to_string(line_no) + ": empty label field");
        }
        if (text.empty()) {
            throw std::runtime_error("line " + std::to_string(line_no) + ": empty text field");
        }

        std::int32_t idx;
        auto it = label_index.find(std::string(label));
        if (it != label_index.end()) {
            idx = it->second;
        } else if (fixed_labels == nullptr) {
            idx = static_cast<std::int32_t>(corpus.label_names.size());
            corpus.label_names.emplace_back(label);
            label_index.emplace(corpus.label_names.back(), idx);
        } else {
            throw std::runtime_error("line " + std::to_string(line_no) + ": unknown label '" +
                                     std::string(label) + "'");
        }
        corpus.examples.push_back({std::string(text), idx});
    }
    return corpus;
}

} // namespace

LabeledCorpus load_dataset(const std::filesystem::path& path, bool has_header) {
    return load_impl(path, has_header, nullptr);
}

LabeledCorpus load_dataset(const std::filesystem::path& path, bool has_header,
                           std::span<const std::string> label_names) {
    return load_impl(path, has_header, &label_names);
}

void write_dataset(const LabeledCorpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open file for writing: " + path.string());
    }
    for (const auto& ex : corpus.examples) {
        if (ex.text.find_first_of("\t\n\r") != std::string::npos) {
            throw std::invalid_argument("write_dataset: text contains TAB or newline");
        }
        out << ex.text << '\t' << corpus.label_names.at(static_cast<std::size_t>(ex.label))
            << '\n';
    }
    if (!out) {
        throw std::runtime_error("error writing dataset file: " + path.string());
    }
}

BatchPlan make_batches(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                       bool shuffle) {
    if (n == 0) throw std::invalid_argument("make_batches: n must be >= 1");
    if (batch_size == 0) throw std::invalid_argument("make_batches: batch_size must be >= 1");

    BatchPlan plan;
    plan.batch_size = batch_size;
    plan.seed = seed;
    plan.indices.resize(n);
    for (std::size_t i = 0; i < n; ++i) plan.indices[i] = i;

    if (shuffle) {
        // Fisher-Yates with our own bounded draw, so the permutation is a
        // pure function of the seed on every platform.
        Rng rng(seed);
        for (std::size_t i = n - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
            std::swap(plan.indices[i], plan.indices[j]);
        }
    }
    return plan;
}

} // namespace techtexc
