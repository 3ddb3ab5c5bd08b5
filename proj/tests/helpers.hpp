#pragma once

// Shared fixtures for the test and acceptance suites: tiny CoNLL-U builders
// and deterministic synthetic corpora.

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "morphtag/conllu.hpp"
#include "morphtag/tagset.hpp"
#include "morphtag/utf8.hpp"

namespace testutil {

// One token line with the given form/lemma/features in columns 2/3/6.
inline std::string token_line(int index, const std::string& form, const std::string& lemma,
                              const std::string& feats) {
    std::ostringstream out;
    out << index << "\t" << form << "\t" << (lemma.empty() ? "_" : lemma) << "\t_\t_\t"
        << (feats.empty() ? "_" : feats) << "\t_\t_\t_\t_";
    return out.str();
}

struct Tok {
    std::string form, lemma, feats;
};

inline std::string sentence_block(const std::vector<Tok>& tokens,
                                  const std::string& sent_id = "") {
    std::ostringstream out;
    if (!sent_id.empty()) out << "# sent_id = " << sent_id << "\n";
    for (size_t i = 0; i < tokens.size(); ++i)
        out << token_line(static_cast<int>(i + 1), tokens[i].form, tokens[i].lemma,
                          tokens[i].feats)
            << "\n";
    out << "\n";
    return out.str();
}

inline morphtag::conllu::Corpus corpus_from_blocks(const std::vector<std::vector<Tok>>& blocks,
                                                   const std::string& treebank = "Test-TB") {
    std::ostringstream out;
    for (size_t i = 0; i < blocks.size(); ++i)
        out << sentence_block(blocks[i], std::to_string(i + 1));
    return morphtag::conllu::parse_conllu(out.str(), treebank);
}

// A small deterministic lexicon with regular morphology: plural nouns
// (strip -s), -ing verbs (strip -ing), -ed verbs (strip -ed), plus closed
// class words and a couple of irregulars. Feature bundles follow the lemma
// rule family, so both heads are learnable per form.
struct SyntheticLexicon {
    std::vector<Tok> entries;

    SyntheticLexicon() {
        auto noun = [&](const std::string& stem) {
            entries.push_back({stem, stem, "N;SG"});
            entries.push_back({stem + "s", stem, "N;PL"});
        };
        auto verb = [&](const std::string& stem) {
            entries.push_back({stem, stem, "V;PRS"});
            entries.push_back({stem + "ing", stem, "V;PRS;PROG"});
            entries.push_back({stem + "ed", stem, "V;PST"});
        };
        noun("book");
        noun("tree");
        noun("lamp");
        noun("road");
        noun("bird");
        verb("walk");
        verb("jump");
        verb("play");
        verb("climb");
        entries.push_back({"is", "be", "V;SG;3;PRS"});
        entries.push_back({"was", "be", "V;SG;3;PST"});
        entries.push_back({"the", "the", "DET"});
        entries.push_back({"a", "a", "DET"});
        entries.push_back({"and", "and", "CONJ"});
        entries.push_back({".", ".", "PUNCT"});
        entries.push_back({"Paris", "Paris", "PROPN"});
    }
};

// `sentences` sentences of `len` tokens drawn deterministically from the
// lexicon.
inline morphtag::conllu::Corpus synthetic_corpus(size_t sentences, size_t len,
                                                 uint64_t seed = 1234,
                                                 const std::string& treebank = "Synth-Test") {
    SyntheticLexicon lex;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<size_t> pick(0, lex.entries.size() - 1);
    std::vector<std::vector<Tok>> blocks;
    for (size_t s = 0; s < sentences; ++s) {
        std::vector<Tok> toks;
        for (size_t t = 0; t + 1 < len; ++t) toks.push_back(lex.entries[pick(rng)]);
        toks.push_back({".", ".", "PUNCT"});
        blocks.push_back(std::move(toks));
    }
    return corpus_from_blocks(blocks, treebank);
}

// Mixed-script alphabets for the lemma-rule roundtrip property. All entries
// are letters whose simple case mappings round-trip one-to-one.
inline const std::u32string& cased_alphabet() {
    static const std::u32string a =
        U"abcdefghijklmnopqrstuvwxyz"
        U"ABCDEFGHIJKLMNOPQRSTUVWXYZ"
        U"àéîöüÀÉÎÖÜ"  // àéîöü ÀÉÎÖÜ
        U"αβγδωΑΒΓΔΩ"  // Greek
        U"абвгяАБВГЯ"  // Cyrillic
        U"šćžŠĆŽ";                         // šćž ŠĆŽ
    return a;
}

// Includes caseless letters (Han, Hebrew) and digits.
inline const std::u32string& mixed_alphabet() {
    static const std::u32string a =
        cased_alphabet() + U"一二三אב123";
    return a;
}

inline std::string random_word(std::mt19937_64& rng, const std::u32string& alphabet,
                               size_t min_len, size_t max_len) {
    std::uniform_int_distribution<size_t> len_dist(min_len, max_len);
    std::uniform_int_distribution<size_t> pick(0, alphabet.size() - 1);
    std::u32string w;
    const size_t len = len_dist(rng);
    for (size_t i = 0; i < len; ++i) w.push_back(alphabet[pick(rng)]);
    return morphtag::utf8::encode(w);
}

}  // namespace testutil
