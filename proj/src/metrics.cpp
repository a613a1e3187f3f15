#include "techtexc/metrics.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

namespace techtexc {

Metrics compute_metrics(std::span<const std::int32_t> y_true,
                        std::span<const std::int32_t> y_pred,
                        std::size_t num_classes) {
    if (y_true.size() != y_pred.size()) {
        throw std::invalid_argument("compute_metrics: y_true and y_pred lengths differ");
    }
    if (y_true.empty()) {
        throw std::invalid_argument("compute_metrics: empty input");
    }

    Metrics m;
    m.num_classes = num_classes;
    m.num_examples = y_true.size();
    m.confusion.assign(num_classes * num_classes, 0);

    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const auto t = y_true[i];
        const auto p = y_pred[i];
        if (t < 0 || static_cast<std::size_t>(t) >= num_classes ||
            p < 0 || static_cast<std::size_t>(p) >= num_classes) {
            throw std::invalid_argument("compute_metrics: label out of range at position " +
                                        std::to_string(i));
        }
        m.confusion[static_cast<std::size_t>(t) * num_classes + static_cast<std::size_t>(p)]++;
    }

    m.precision.assign(num_classes, 0.0);
    m.recall.assign(num_classes, 0.0);
    m.f1.assign(num_classes, 0.0);
    m.support.assign(num_classes, 0);

    std::size_t correct = 0;
    for (std::size_t c = 0; c < num_classes; ++c) {
        std::size_t tp = m.confusion_at(c, c);
        std::size_t row_sum = 0; // tp + fn = support
        std::size_t col_sum = 0; // tp + fp
        for (std::size_t j = 0; j < num_classes; ++j) {
            row_sum += m.confusion_at(c, j);
            col_sum += m.confusion_at(j, c);
        }
        m.support[c] = row_sum;
        correct += tp;

        if (col_sum > 0) m.precision[c] = static_cast<double>(tp) / static_cast<double>(col_sum);
        if (row_sum > 0) m.recall[c] = static_cast<double>(tp) / static_cast<double>(row_sum);
        const double pr = m.precision[c] + m.recall[c];
        if (pr > 0.0) m.f1[c] = 2.0 * m.precision[c] * m.recall[c] / pr;
    }

    m.accuracy = static_cast<double>(correct) / static_cast<double>(m.num_examples);

    const double n = static_cast<double>(m.num_examples);
    for (std::size_t c = 0; c < num_classes; ++c) {
        const double w = static_cast<double>(m.support[c]) / n;
        m.weighted_precision += w * m.precision[c];
        m.weighted_f1 += w * m.f1[c];
    }
    // sum_c (support_c/N) * (tp_c/support_c) collapses to sum(tp)/N; computing
    // it through the identity keeps weighted recall equal to accuracy to the bit
    m.weighted_recall = m.accuracy;
    return m;
}

namespace {

// Decimal digits plus the decimal-point position parsed out of a
// std::to_chars shortest round-trip string ("0.82625", "1", "6.5e-03", ...).
struct DecimalDigits {
    bool negative = false;
    std::string digits;  // no sign, no dot
    int point = 0;       // digits before the decimal point (may be <= 0 or > size)
};

DecimalDigits parse_shortest(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    std::string s(buf, end);

    DecimalDigits d;
    std::size_t i = 0;
    if (i < s.size() && s[i] == '-') {
        d.negative = true;
        ++i;
    }
    int exponent = 0;
    int frac_len = 0;
    bool in_frac = false;
    for (; i < s.size(); ++i) {
        const char c = s[i];
        if (c == '.') {
            in_frac = true;
        } else if (c == 'e' || c == 'E') {
            exponent = std::stoi(s.substr(i + 1));
            break;
        } else {
            d.digits.push_back(c);
            if (in_frac) ++frac_len;
        }
    }
    d.point = static_cast<int>(d.digits.size()) - frac_len + exponent;
    return d;
}

} // namespace

std::string format_percent(double fraction) {
    DecimalDigits d = parse_shortest(fraction);
    d.point += 2; // percentage

    // Normalize so every digit position around the rounding point exists.
    while (d.point <= 0) {
        d.digits.insert(d.digits.begin(), '0');
        ++d.point;
    }
    while (static_cast<int>(d.digits.size()) < d.point + 3) {
        d.digits.push_back('0');
    }

    // Round half away from zero at two digits after the point.
    std::string kept = d.digits.substr(0, static_cast<std::size_t>(d.point) + 2);
    if (d.digits[static_cast<std::size_t>(d.point) + 2] >= '5') {
        for (int i = static_cast<int>(kept.size()) - 1; i >= 0; --i) {
            if (kept[static_cast<std::size_t>(i)] != '9') {
                kept[static_cast<std::size_t>(i)]++;
                break;
            }
            kept[static_cast<std::size_t>(i)] = '0';
            if (i == 0) {
                kept.insert(kept.begin(), '1');
                ++d.point;
            }
        }
    }

    std::string int_part = kept.substr(0, static_cast<std::size_t>(d.point));
    const std::size_t nz = int_part.find_first_not_of('0');
    int_part = (nz == std::string::npos) ? "0" : int_part.substr(nz);

    std::string out;
    if (d.negative && (int_part != "0" || kept.substr(static_cast<std::size_t>(d.point)) != "00")) {
        out += '-';
    }
    out += int_part + "." + kept.substr(static_cast<std::size_t>(d.point));
    return out;
}

std::string format_report(const Metrics& m, std::span<const std::string> label_names) {
    std::ostringstream os;
    os << "accuracy=" << format_percent(m.accuracy) << "\n";
    os << "weighted_precision=" << format_percent(m.weighted_precision) << "\n";
    os << "weighted_recall=" << format_percent(m.weighted_recall) << "\n";
    os << "weighted_f1=" << format_percent(m.weighted_f1) << "\n";

    os << "\nclass\tprecision\trecall\tf1\tsupport\n";
    for (std::size_t c = 0; c < m.num_classes; ++c) {
        if (c < label_names.size()) {
            os << label_names[c];
        } else {
            os << c;
        }
        os << "\t" << format_percent(m.precision[c])
           << "\t" << format_percent(m.recall[c])
           << "\t" << format_percent(m.f1[c])
           << "\t" << m.support[c] << "\n";
    }

    os << "\nconfusion matrix (rows = true, columns = predicted)\n";
    for (std::size_t t = 0; t < m.num_classes; ++t) {
        for (std::size_t p = 0; p < m.num_classes; ++p) {
            if (p > 0) os << "\t";
            os << m.confusion_at(t, p);
        }
        os << "\n";
    }
    return os.str();
}

} // namespace techtexc
