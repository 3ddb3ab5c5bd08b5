#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "morphtag/errors.hpp"

namespace morphtag::conllu {
struct Corpus;
}

namespace morphtag::lemma {

// A lemma rule encodes the form->lemma transformation as two parts:
//   casing script — where the lemma is upper/lowercased, e.g. `↑0¦↓1`;
//   edit script   — either an absolute replacement (`a` + literal) for
//                   irregular words, or per-character copy/delete/insert
//                   programs applied to the form's prefix and suffix around
//                   an unchanged root.
// Text form: `casing ";" edit`, e.g. `↓0;d¦-+v+e` (has->have).

enum class CaseDir : uint8_t { Lower, Upper };

struct CasingOp {
    CaseDir dir = CaseDir::Lower;
    size_t start = 0;  // 0-based character index in the produced lemma

    bool operator==(const CasingOp&) const = default;
};

// Ops are strictly increasing by start and begin at 0. Each op governs from
// its start to the next op's start (or the end of the string).
struct CasingScript {
    std::vector<CasingOp> ops;

    bool operator==(const CasingScript&) const = default;
};

struct EditOp {
    enum class Kind : uint8_t { Copy, Delete, Insert } kind = Kind::Copy;
    char32_t ch = 0;  // Insert payload, one Unicode scalar

    bool operator==(const EditOp&) const = default;
};

struct EditScript {
    bool absolute = false;
    std::u32string literal;          // absolute replacement, lowercased
    std::vector<EditOp> prefix_ops;  // left-to-right over the form prefix
    std::vector<EditOp> suffix_ops;  // left-to-right over the form suffix

    bool operator==(const EditScript&) const = default;
};

struct LemmaRule {
    CasingScript casing;
    EditScript edit;

    bool operator==(const LemmaRule&) const = default;
};

// Thrown by apply_rule when the rule does not fit the form (consumes more
// characters than available or would produce an empty lemma).
struct ApplicabilityError : DataError {
    using DataError::DataError;
};

// Builds the rule mapping `form` to `lemma`. Matching runs on the lowercased
// strings; the root is the longest common substring (ties: leftmost in the
// form, then leftmost in the lemma). With no common substring the word is
// irregular and the lemma is stored verbatim. Guarantees
// apply_rule(result, form) == lemma. Throws DataError on empty input.
LemmaRule induce_rule(const std::string& form, const std::string& lemma);

// Applies the rule: prefix ops consume the first characters, suffix ops the
// last, the middle is copied unchanged, then casing ops set character cases.
// Throws ApplicabilityError when the rule does not fit.
std::string apply_rule(const LemmaRule& rule, const std::string& form);

// True iff apply_rule would succeed. Cheap: pure length arithmetic.
bool is_applicable(const LemmaRule& rule, const std::string& form);
bool is_applicable_codepoints(const LemmaRule& rule, size_t form_length);

std::string serialize_rule(const LemmaRule& rule);

// Inverse of serialize_rule. Throws DataError with a character position on
// grammar violations.
LemmaRule parse_rule(const std::string& text);

// The most frequent rule in typical corpora: all lowercase, do nothing.
const LemmaRule& identity_rule();
inline constexpr const char* kIdentityRuleText = "↓0;d¦";  // ↓0;d¦

// Counts the induced rule of every (form, lemma) token occurrence. Tokens
// without a lemma are skipped. Sorted by count descending, then rule text.
std::vector<std::pair<std::string, size_t>> rule_inventory(const conllu::Corpus& corpus);

}  // namespace morphtag::lemma
