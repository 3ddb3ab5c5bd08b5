#pragma once

#include <set>
#include <string>
#include <vector>

namespace morphtag::conllu {
struct Corpus;
}
namespace morphtag::model {
struct Vocabulary;
}

namespace morphtag::merge {

// The lemma rules and feature bundles a merged model may emit when
// predicting one member corpus: exactly those observed in that corpus's own
// training data. Keyed by canonical strings so masks move between models.
struct RestrictionMask {
    std::set<std::string> rules;
    std::set<std::string> bundles;
    std::string source_treebank;
};

// Concatenates corpora of one language in input order; per-sentence
// provenance is kept so members remain identifiable. Throws DataError when
// languages are mixed or the list is empty.
conllu::Corpus merge_corpora(const std::vector<conllu::Corpus>& corpora);

// Rules/bundles induced from the target corpus's training data, intersected
// with the merged vocabulary. Throws DataError when either intersection is
// empty (degenerate target).
RestrictionMask build_mask(const model::Vocabulary& merged_vocab,
                           const conllu::Corpus& target_training);

// Mask file: `[rules]` and `[bundles]` sections, one canonical string per
// line; `#` lines are comments.
void write_mask_file(const RestrictionMask& mask, const std::string& path,
                     const std::string& provenance_comment = "");
RestrictionMask load_mask_file(const std::string& path);

}  // namespace morphtag::merge
