#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "morphtag/tagset.hpp"

namespace morphtag::conllu {

// One regular word line. Multiword-range lines (`1-2`) and empty-node lines
// (`1.1`) are kept verbatim on the sentence, never as tokens: only regular
// tokens are prediction targets.
struct Token {
    int index = 0;  // 1-based position within the sentence
    std::string form;
    std::optional<std::string> lemma;
    std::optional<tagset::FeatureBundle> bundle;
    std::array<std::string, 10> raw_columns;

    // Update column 3 / column 6 while leaving the other columns verbatim.
    void set_lemma(const std::string& new_lemma);
    void set_bundle(const tagset::FeatureBundle& new_bundle);

    bool operator==(const Token&) const = default;
};

// A raw line preserved byte-for-byte, anchored before the token at
// `before_token` (== tokens.size() means after the last token).
struct PassthroughLine {
    size_t before_token = 0;
    std::string text;

    bool operator==(const PassthroughLine&) const = default;
};

struct Sentence {
    std::vector<std::string> comments;  // leading `#` lines, verbatim
    std::vector<Token> tokens;
    std::vector<PassthroughLine> extras;  // range/empty-node lines, file order
    std::string provenance;  // source treebank id; survives corpus merging

    // Value of a `# sent_id = ...` (or `# sent-id = ...`) comment, or "".
    std::string sent_id() const;

    bool operator==(const Sentence& o) const {
        return comments == o.comments && tokens == o.tokens && extras == o.extras;
    }
};

struct Corpus {
    std::vector<Sentence> sentences;
    std::string treebank_id;
    std::string language_id;

    size_t token_count() const;
    bool operator==(const Corpus& o) const { return sentences == o.sentences; }
};

// Derives the language from a treebank id such as "English-EWT".
std::string language_of_treebank(const std::string& treebank_id);

// Parses shared-task CoNLL-U text: 10 tab-separated columns per token line,
// `#` comments before the first token, blank-line sentence boundaries.
// Throws DataError with a line number for malformed lines, out-of-order
// token ids, or invalid UTF-8.
Corpus parse_conllu(std::string_view input, const std::string& treebank_id);
Corpus parse_conllu_file(const std::string& path, const std::string& treebank_id = "");

std::string serialize_conllu(const Corpus& corpus);
void write_conllu_file(const Corpus& corpus, const std::string& path,
                       const std::string& provenance_comment = "");

}  // namespace morphtag::conllu
