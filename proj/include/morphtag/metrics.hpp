#pragma once

#include <string>
#include <string_view>

namespace morphtag::conllu {
struct Corpus;
}

namespace morphtag::metrics {

// Unit-cost insert/delete/substitute edit distance over Unicode scalars.
size_t levenshtein(std::string_view a, std::string_view b);

struct EvalReport {
    double lemma_accuracy = 0.0;     // percent of exact lemma matches
    double lemma_levenshtein = 0.0;  // mean edit distance per token
    double morph_accuracy = 0.0;     // percent of exact canonical bundle matches
    double morph_f1 = 0.0;           // percent, micro-averaged over feature values
    double morph_f1_macro = 0.0;     // percent, per-token F1 averaged
    size_t token_count = 0;
};

// Scores a prediction against gold. Both corpora must have identical
// sentence/token structure (counts and forms); otherwise a DataError is
// thrown. Tokens without a gold lemma (or gold bundle) are skipped by the
// lemma (morph) metrics; a missing predicted value counts as wrong.
// Per-token feature values are compared as multisets, duplicates counting
// with multiplicity.
EvalReport evaluate(const conllu::Corpus& gold, const conllu::Corpus& pred);

std::string format_report_table(const EvalReport& report);
// Machine-readable block: lemma_acc, lemma_lev, morph_acc, morph_f1, tokens
// (plus morph_f1_macro when requested).
std::string format_report_keyvalues(const EvalReport& report, bool include_macro = false);

}  // namespace morphtag::metrics
