#include "morphtag/merge.hpp"

#include <fstream>

#include "morphtag/conllu.hpp"
#include "morphtag/errors.hpp"
#include "morphtag/lemma_rules.hpp"
#include "morphtag/model.hpp"

namespace morphtag::merge {

conllu::Corpus merge_corpora(const std::vector<conllu::Corpus>& corpora) {
    if (corpora.empty()) throw DataError("merge_corpora: no corpora given");
    conllu::Corpus merged;
    merged.language_id = corpora.front().language_id;
    merged.treebank_id = merged.language_id + "-merged";
    for (const conllu::Corpus& corpus : corpora) {
        if (corpus.language_id != merged.language_id)
            throw DataError("merge_corpora: cannot merge languages '" + merged.language_id +
                            "' and '" + corpus.language_id + "'");
        for (const conllu::Sentence& sent : corpus.sentences) {
            merged.sentences.push_back(sent);
            if (merged.sentences.back().provenance.empty())
                merged.sentences.back().provenance = corpus.treebank_id;
        }
    }
    return merged;
}

RestrictionMask build_mask(const model::Vocabulary& merged_vocab,
                           const conllu::Corpus& target_training) {
    RestrictionMask mask;
    mask.source_treebank = target_training.treebank_id;
    for (const auto& [rule, count] : lemma::rule_inventory(target_training))
        if (merged_vocab.rules.get(rule) != 0) mask.rules.insert(rule);
    for (const conllu::Sentence& sent : target_training.sentences)
        for (const conllu::Token& tok : sent.tokens)
            if (tok.bundle) {
                const std::string canon = tok.bundle->canonical_text();
                if (merged_vocab.bundles.get(canon) != 0) mask.bundles.insert(canon);
            }
    if (mask.rules.empty())
        throw DataError("mask for '" + mask.source_treebank +
                        "': no lemma rule of the target appears in the merged vocabulary");
    if (mask.bundles.empty())
        throw DataError("mask for '" + mask.source_treebank +
                        "': no feature bundle of the target appears in the merged vocabulary");
    return mask;
}

void write_mask_file(const RestrictionMask& mask, const std::string& path,
                     const std::string& provenance_comment) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write mask " + path);
    if (!provenance_comment.empty()) out << "# " << provenance_comment << "\n";
    out << "# source_treebank=" << mask.source_treebank << "\n";
    out << "[rules]\n";
    for (const std::string& r : mask.rules) out << r << "\n";
    out << "[bundles]\n";
    for (const std::string& b : mask.bundles) out << b << "\n";
    if (!out) throw DataError("mask write failed: " + path);
}

RestrictionMask load_mask_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open mask " + path);
    RestrictionMask mask;
    std::string line;
    int section = 0;  // 0 none, 1 rules, 2 bundles
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line.rfind("# source_treebank=", 0) == 0) {
            mask.source_treebank = line.substr(18);
            continue;
        }
        if (line[0] == '#') continue;
        if (line == "[rules]") {
            section = 1;
            continue;
        }
        if (line == "[bundles]") {
            section = 2;
            continue;
        }
        if (section == 1)
            mask.rules.insert(line);
        else if (section == 2)
            mask.bundles.insert(line);
        else
            throw DataError("mask file " + path + " line " + std::to_string(line_no) +
                            ": content before any section");
    }
    if (mask.rules.empty() || mask.bundles.empty())
        throw DataError("mask file " + path + " is missing rules or bundles");
    return mask;
}

}  // namespace morphtag::merge
