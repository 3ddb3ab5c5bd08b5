#include "morphtag/metrics.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <vector>

#include "morphtag/conllu.hpp"
#include "morphtag/errors.hpp"
#include "morphtag/utf8.hpp"

namespace morphtag::metrics {

size_t levenshtein(std::string_view a, std::string_view b) {
    const std::u32string ua = utf8::decode(a);
    const std::u32string ub = utf8::decode(b);
    const size_t n = ua.size(), m = ub.size();
    if (n == 0) return m;
    if (m == 0) return n;
    std::vector<size_t> prev(m + 1), cur(m + 1);
    for (size_t j = 0; j <= m; ++j) prev[j] = j;
    for (size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (size_t j = 1; j <= m; ++j) {
            const size_t sub = prev[j - 1] + (ua[i - 1] == ub[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

namespace {

std::map<std::string, size_t> value_counts(const tagset::FeatureBundle& bundle) {
    std::map<std::string, size_t> counts;
    for (const std::string& v : bundle.values) ++counts[v];
    return counts;
}

}  // namespace

EvalReport evaluate(const conllu::Corpus& gold, const conllu::Corpus& pred) {
    if (gold.sentences.size() != pred.sentences.size())
        throw DataError("alignment mismatch: " + std::to_string(gold.sentences.size()) +
                        " gold sentences vs " + std::to_string(pred.sentences.size()));

    size_t tokens = 0;
    size_t lemma_total = 0, lemma_correct = 0, lemma_lev_sum = 0;
    size_t morph_total = 0, morph_correct = 0;
    size_t tp = 0, fp = 0, fn = 0;
    double macro_sum = 0.0;
    size_t macro_total = 0;

    for (size_t s = 0; s < gold.sentences.size(); ++s) {
        const conllu::Sentence& gs = gold.sentences[s];
        const conllu::Sentence& ps = pred.sentences[s];
        if (gs.tokens.size() != ps.tokens.size())
            throw DataError("alignment mismatch at sentence " + std::to_string(s + 1) + ": " +
                            std::to_string(gs.tokens.size()) + " gold tokens vs " +
                            std::to_string(ps.tokens.size()));
        for (size_t t = 0; t < gs.tokens.size(); ++t) {
            const conllu::Token& gt = gs.tokens[t];
            const conllu::Token& pt = ps.tokens[t];
            if (gt.form != pt.form)
                throw DataError("alignment mismatch at sentence " + std::to_string(s + 1) +
                                " token " + std::to_string(t + 1) + ": form '" + gt.form +
                                "' vs '" + pt.form + "'");
            ++tokens;

            if (gt.lemma) {
                ++lemma_total;
                const std::string predicted = pt.lemma ? *pt.lemma : "";
                if (predicted == *gt.lemma) ++lemma_correct;
                lemma_lev_sum += levenshtein(*gt.lemma, predicted);
            }

            if (gt.bundle) {
                ++morph_total;
                const tagset::FeatureBundle empty;
                const tagset::FeatureBundle& pb = pt.bundle ? *pt.bundle : empty;
                if (pb.canonical_text() == gt.bundle->canonical_text() && pt.bundle)
                    ++morph_correct;
                const auto gc = value_counts(*gt.bundle);
                const auto pc = value_counts(pb);
                size_t token_tp = 0;
                for (const auto& [value, count] : gc) {
                    auto it = pc.find(value);
                    if (it != pc.end()) token_tp += std::min(count, it->second);
                }
                const size_t gold_n = gt.bundle->values.size();
                const size_t pred_n = pb.values.size();
                tp += token_tp;
                fp += pred_n - token_tp;
                fn += gold_n - token_tp;
                ++macro_total;
                if (gold_n + pred_n > 0)
                    macro_sum += 2.0 * static_cast<double>(token_tp) /
                                 static_cast<double>(gold_n + pred_n);
            }
        }
    }

    EvalReport report;
    report.token_count = tokens;
    if (lemma_total > 0) {
        report.lemma_accuracy =
            100.0 * static_cast<double>(lemma_correct) / static_cast<double>(lemma_total);
        report.lemma_levenshtein =
            static_cast<double>(lemma_lev_sum) / static_cast<double>(lemma_total);
    }
    if (morph_total > 0) {
        report.morph_accuracy =
            100.0 * static_cast<double>(morph_correct) / static_cast<double>(morph_total);
        report.morph_f1_macro = 100.0 * macro_sum / static_cast<double>(macro_total);
    }
    if (tp + fp + fn > 0)
        report.morph_f1 = 100.0 * 2.0 * static_cast<double>(tp) /
                          static_cast<double>(2 * tp + fp + fn);
    else if (morph_total > 0)
        report.morph_f1 = 0.0;
    return report;
}

std::string format_report_table(const EvalReport& report) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out << "metric             value\n"
        << "-----------------  --------\n";
    out.precision(2);
    out << "lemma accuracy     " << report.lemma_accuracy << "\n";
    out.precision(3);
    out << "lemma levenshtein  " << report.lemma_levenshtein << "\n";
    out.precision(2);
    out << "morph accuracy     " << report.morph_accuracy << "\n"
        << "morph f1           " << report.morph_f1 << "\n"
        << "tokens             " << report.token_count << "\n";
    return out.str();
}

std::string format_report_keyvalues(const EvalReport& report, bool include_macro) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(4);
    out << "lemma_acc=" << report.lemma_accuracy << "\n"
        << "lemma_lev=" << report.lemma_levenshtein << "\n"
        << "morph_acc=" << report.morph_accuracy << "\n"
        << "morph_f1=" << report.morph_f1 << "\n";
    if (include_macro) out << "morph_f1_macro=" << report.morph_f1_macro << "\n";
    out << "tokens=" << report.token_count << "\n";
    return out.str();
}

}  // namespace morphtag::metrics
