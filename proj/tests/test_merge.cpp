#include <doctest.h>

#include <filesystem>
#include <set>

#include "helpers.hpp"
#include "morphtag/conllu.hpp"
#include "morphtag/errors.hpp"
#include "morphtag/lemma_rules.hpp"
#include "morphtag/merge.hpp"
#include "morphtag/model.hpp"

using namespace morphtag;

namespace {

conllu::Corpus treebank_a() {
    return testutil::corpus_from_blocks(
        {
            {{"books", "book", "N;PL"}, {"the", "the", "DET"}, {".", ".", "PUNCT"}},
            {{"walked", "walk", "V;PST"}, {"home", "home", "N;SG"}},
            {{"trees", "tree", "N;PL"}, {"grew", "grow", "V;PST"}},
        },
        "English-A");
}

conllu::Corpus treebank_b() {
    return testutil::corpus_from_blocks(
        {
            {{"is", "be", "V;SG;3;PRS"}, {"a", "a", "DET"}},
            {{"going", "go", "V;PROG"}, {"now", "now", "ADV"}},
            {{"dogs", "dog", "N;PL"}, {".", ".", "PUNCT"}},
            {{"cats", "cat", "N;PL"}, {".", ".", "PUNCT"}},
            {{"ran", "run", "V;PST"}, {".", ".", "PUNCT"}},
        },
        "English-B");
}

}  // namespace

TEST_CASE("merging a single corpus is the identity on sentences") {
    const conllu::Corpus a = treebank_a();
    const conllu::Corpus merged = merge::merge_corpora({a});
    CHECK(merged.sentences == a.sentences);
    CHECK(merged.language_id == "English");
    CHECK(merged.treebank_id == "English-merged");
}

TEST_CASE("merging concatenates in order and keeps provenance") {
    const conllu::Corpus a = treebank_a();
    const conllu::Corpus b = treebank_b();
    const conllu::Corpus merged = merge::merge_corpora({a, b});
    REQUIRE(merged.sentences.size() == 8);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(merged.sentences[i] == a.sentences[i]);
        CHECK(merged.sentences[i].provenance == "English-A");
    }
    for (size_t i = 0; i < 5; ++i) {
        CHECK(merged.sentences[3 + i] == b.sentences[i]);
        CHECK(merged.sentences[3 + i].provenance == "English-B");
    }
    CHECK(merged.token_count() == a.token_count() + b.token_count());
}

TEST_CASE("mixed languages are rejected") {
    const conllu::Corpus a = treebank_a();
    const conllu::Corpus other = testutil::corpus_from_blocks(
        {{{"x", "x", "X"}}}, "Finnish-X");
    CHECK_THROWS_WITH_AS(merge::merge_corpora({a, other}), doctest::Contains("language"),
                         DataError);
    CHECK_THROWS_AS(merge::merge_corpora({}), DataError);
}

TEST_CASE("duplicate sentences across members are kept") {
    const conllu::Corpus a = treebank_a();
    const conllu::Corpus merged = merge::merge_corpora({a, a});
    CHECK(merged.sentences.size() == 6);
    CHECK(merged.token_count() == 2 * a.token_count());
}

TEST_CASE("mask of the merged corpus itself covers the full vocabulary") {
    const conllu::Corpus a = treebank_a();
    const conllu::Corpus b = treebank_b();
    const conllu::Corpus merged = merge::merge_corpora({a, b});
    const model::Vocabulary vocab =
        model::build_vocabulary(merged, tagset::CategoryTable::builtin());
    const merge::RestrictionMask mask = merge::build_mask(vocab, merged);
    CHECK(mask.rules.size() == vocab.rules.size() - 1);
    CHECK(mask.bundles.size() == vocab.bundles.size() - 1);
}

TEST_CASE("mask restricted to a PUNCT-only target") {
    const conllu::Corpus punct_only = testutil::corpus_from_blocks(
        {{{".", ".", "PUNCT"}, {"!", "!", "PUNCT"}}}, "English-P");
    const conllu::Corpus merged = merge::merge_corpora({treebank_a(), punct_only});
    const model::Vocabulary vocab =
        model::build_vocabulary(merged, tagset::CategoryTable::builtin());
    const merge::RestrictionMask mask = merge::build_mask(vocab, punct_only);
    CHECK(mask.bundles == std::set<std::string>{"PUNCT"});
    CHECK(mask.rules == std::set<std::string>{lemma::kIdentityRuleText});
}

TEST_CASE("per-member masks equal per-treebank inventories") {
    const conllu::Corpus a = treebank_a();
    const conllu::Corpus b = treebank_b();
    const conllu::Corpus merged = merge::merge_corpora({a, b});
    const model::Vocabulary vocab =
        model::build_vocabulary(merged, tagset::CategoryTable::builtin());

    for (const conllu::Corpus* target : {&a, &b}) {
        const merge::RestrictionMask mask = merge::build_mask(vocab, *target);
        std::set<std::string> expect_rules, expect_bundles;
        for (const auto& sent : target->sentences)
            for (const auto& tok : sent.tokens) {
                expect_rules.insert(
                    lemma::serialize_rule(lemma::induce_rule(tok.form, *tok.lemma)));
                expect_bundles.insert(tok.bundle->canonical_text());
            }
        CHECK(mask.rules == expect_rules);
        CHECK(mask.bundles == expect_bundles);
        CHECK(mask.source_treebank == target->treebank_id);
    }
}

TEST_CASE("degenerate target yields an error") {
    const conllu::Corpus a = treebank_a();
    const model::Vocabulary vocab =
        model::build_vocabulary(a, tagset::CategoryTable::builtin());
    // target whose rules/bundles never appear in the merged vocabulary
    const conllu::Corpus stranger = testutil::corpus_from_blocks(
        {{{"zzzz", "qq", "WEIRD;TAG"}}}, "English-Z");
    CHECK_THROWS_AS(merge::build_mask(vocab, stranger), DataError);
}

TEST_CASE("mask file roundtrip") {
    const conllu::Corpus a = treebank_a();
    const model::Vocabulary vocab =
        model::build_vocabulary(a, tagset::CategoryTable::builtin());
    const merge::RestrictionMask mask = merge::build_mask(vocab, a);
    const std::string path =
        (std::filesystem::temp_directory_path() / "morphtag_mask_test.mask").string();
    merge::write_mask_file(mask, path, "test provenance");
    const merge::RestrictionMask back = merge::load_mask_file(path);
    CHECK(back.rules == mask.rules);
    CHECK(back.bundles == mask.bundles);
    CHECK(back.source_treebank == mask.source_treebank);
}
