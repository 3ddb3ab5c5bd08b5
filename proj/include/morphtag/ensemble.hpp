#pragma once

#include <string>
#include <vector>

#include "morphtag/metrics.hpp"
#include "morphtag/model.hpp"

namespace morphtag::ensemble {

// The three model configurations of the grid; with three replicas each they
// form the nine-model pool that selection operates on.
enum class Configuration { Regular, Merged, NoContextual };

const char* configuration_name(Configuration c);
Configuration configuration_from_string(const std::string& s);

struct EnsembleSpec {
    std::vector<std::string> members;  // model paths or labels
    std::string method;                // "configuration" | "any-subset" | "manual"
};

void write_spec_file(const EnsembleSpec& spec, const std::string& path,
                     const std::string& provenance_comment = "");
EnsembleSpec load_spec_file(const std::string& path);

// Averages the members' probability distributions per token (projected onto
// the union of their label spaces, keyed by canonical rule/bundle strings),
// applies the mask, then picks the argmax with the usual applicability
// fallback. An ensemble of identical models predicts exactly like one.
conllu::Corpus ensemble_predict(const std::vector<const model::TaggerModel*>& models,
                                const conllu::Corpus& corpus, const model::AuxInputs& aux,
                                const merge::RestrictionMask* mask = nullptr);

struct SelectionResult {
    EnsembleSpec spec;
    std::vector<size_t> member_indices;  // into the input model list
    double dev_score = 0.0;              // mean of lemma and morph accuracy
    metrics::EvalReport dev_report;
};

// Exhaustively scores every non-empty subset of the models on dev and keeps
// the best; ties prefer smaller subsets, then the lexicographically first
// index sequence. This was the overfitting-prone competition behavior.
SelectionResult select_any_subset(const std::vector<const model::TaggerModel*>& models,
                                  const std::vector<std::string>& names,
                                  const conllu::Corpus& dev, const model::AuxInputs& aux,
                                  const merge::RestrictionMask* mask = nullptr);

// Builds one ensemble per configuration (all models sharing a configuration
// label) and keeps the best of those on dev; ties follow the fixed order
// regular < merged < no_contextual. The post-competition default.
SelectionResult select_configuration(const std::vector<const model::TaggerModel*>& models,
                                     const std::vector<std::string>& names,
                                     const conllu::Corpus& dev, const model::AuxInputs& aux,
                                     const merge::RestrictionMask* mask = nullptr);

}  // namespace morphtag::ensemble
