#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "morphtag/conllu.hpp"
#include "morphtag/embeddings.hpp"
#include "morphtag/lemma_rules.hpp"
#include "morphtag/nn.hpp"
#include "morphtag/tagset.hpp"

namespace morphtag::merge {
struct RestrictionMask;
}

namespace morphtag::model {

// String-to-id map with index 0 reserved for padding/UNK.
struct Indexer {
    std::vector<std::string> items;
    std::unordered_map<std::string, size_t> index;

    Indexer() { add("<unk>"); }
    size_t add(const std::string& s);
    size_t get(const std::string& s) const;  // 0 when missing
    size_t size() const { return items.size(); }
};

struct Vocabulary {
    Indexer words;
    Indexer chars;    // single codepoints, UTF-8 encoded
    Indexer ngrams;   // boundary n-grams, "P:" / "S:" prefixed
    Indexer rules;    // serialized lemma rules, inventory order
    Indexer bundles;  // canonical bundle texts, first seen order

    struct Category {
        std::string name;
        Indexer values;  // <unk>, None, then the observed values
    };
    std::vector<Category> categories;  // name-sorted
};

// Throws DataError on a corpus without any lemma+bundle annotated token.
Vocabulary build_vocabulary(const conllu::Corpus& corpus, const tagset::CategoryTable& table);

enum class EncoderKind { BiGru, Window };
enum class CharComposerKind { Average, BiGru };

struct ModelConfig {
    size_t word_dim = 64;
    size_t char_dim = 64;
    bool use_pretrained = false;
    bool use_contextual = false;
    size_t pretrained_dim = 0;
    size_t contextual_dim = 0;

    EncoderKind encoder = EncoderKind::BiGru;
    CharComposerKind char_composer = CharComposerKind::Average;
    size_t hidden_dim = 64;  // per direction for BiGru, layer width for Window
    size_t layers = 1;
    size_t window = 2;  // Window encoder half-width

    double w = 1.0;  // weight of the per-category regularization loss
    double lr = 1e-3;
    size_t batch_size = 32;
    size_t epochs = 20;
    uint64_t seed = 42;
    // When > 0, training stops once train-set lemma and morph accuracy both
    // reach this percentage.
    double early_stop_train_acc = 0.0;

    std::string configuration = "regular";  // regular | merged | no_contextual
    std::string config_hash;

    size_t token_input_dim() const {
        return word_dim + char_dim + (use_pretrained ? pretrained_dim : 0) +
               (use_contextual ? contextual_dim : 0);
    }
    size_t encoder_output_dim() const {
        return encoder == EncoderKind::BiGru ? 2 * hidden_dim : hidden_dim;
    }
};

struct TaggerModel {
    ModelConfig config;
    Vocabulary vocab;
    nn::ParamStore params;

    // parameter handles, owned by `params`
    nn::Param* word_emb = nullptr;
    nn::Param* char_emb = nullptr;
    nn::Param* ngram_emb = nullptr;
    std::vector<nn::GruParams> enc_fwd, enc_bwd;  // BiGru, per layer
    std::vector<nn::Param*> win_w, win_b;         // Window, per layer
    nn::GruParams char_fwd, char_bwd;             // BiGru char composer
    nn::Param* lemma_w = nullptr;
    nn::Param* lemma_b = nullptr;
    nn::Param* bundle_w = nullptr;
    nn::Param* bundle_b = nullptr;
    std::vector<nn::Param*> cat_w, cat_b;

    std::vector<lemma::LemmaRule> parsed_rules;  // by rule vocab id; [0] unused

    TaggerModel() = default;
    TaggerModel(TaggerModel&&) = default;
    TaggerModel& operator=(TaggerModel&&) = default;
};

// Fresh model with seeded initialization.
TaggerModel build_model(const ModelConfig& config, Vocabulary vocab);

// Frozen auxiliary inputs; either pointer may be null.
struct AuxInputs {
    const embeddings::WordVectorTable* word_vectors = nullptr;
    const embeddings::ContextualSidecar* sidecar = nullptr;
};

// --- forward pass -------------------------------------------------------

// Per-token hidden states of the contextual encoder (no gradients).
std::vector<std::vector<double>> encode(const conllu::Sentence& sentence,
                                        const TaggerModel& model, const AuxInputs& aux);

// Prediction-time distributions; index 0 carries zero probability.
struct TokenDistributions {
    std::vector<double> rule_probs;
    std::vector<double> bundle_probs;
};
std::vector<TokenDistributions> sentence_distributions(const conllu::Sentence& sentence,
                                                       const TaggerModel& model,
                                                       const AuxInputs& aux);

// Per-category distributions for one sentence, [category][token][value].
std::vector<std::vector<std::vector<double>>> sentence_category_distributions(
    const conllu::Sentence& sentence, const TaggerModel& model, const AuxInputs& aux);

// --- loss ----------------------------------------------------------------

struct LossStats {
    double total = 0.0;
    double lemma_ce = 0.0;
    double bundle_ce = 0.0;
    double category_ce = 0.0;  // mean over categories of per-category CE
    size_t tokens = 0;         // tokens with training targets
};

// total = lemma_ce + bundle_ce + w * category_ce, each CE averaged over the
// batch tokens carrying gold annotations. With with_grad, gradients are
// accumulated into model.params (frozen aux vectors receive none). Gold
// labels missing from the vocabulary map to the UNK index and append a note
// to `warnings`.
LossStats loss(TaggerModel& model, const std::vector<const conllu::Sentence*>& batch,
               const AuxInputs& aux, const tagset::CategoryTable& table, double w,
               bool with_grad, std::vector<std::string>* warnings = nullptr);

// --- training -------------------------------------------------------------

struct EpochStats {
    size_t epoch = 0;
    double train_loss = 0.0;
    double lemma_ce = 0.0;
    double bundle_ce = 0.0;
    double category_ce = 0.0;
    double dev_lemma_acc = 0.0;
    double dev_morph_acc = 0.0;
};

struct TrainResult {
    TaggerModel model;
    std::vector<EpochStats> epochs;
    LossStats initial;  // first-batch loss before any update
};

// Minibatch Adam training; keeps the best-dev checkpoint (mean of dev lemma
// and morph accuracy) and returns it. Throws DivergenceError on non-finite
// loss. Deterministic for a fixed seed.
TrainResult train(const conllu::Corpus& train_corpus, const conllu::Corpus& dev_corpus,
                  const ModelConfig& config, const tagset::CategoryTable& table,
                  const AuxInputs& aux, std::ostream* log = nullptr);

// --- prediction -------------------------------------------------------------

// Fills lemma (column 3) and feature bundle (column 6) of every token.
// With a mask, only rules/bundles inside it are considered. The chosen rule
// must be applicable to the form; otherwise the highest-probability
// applicable allowed rule is used, and as a final resort the lowercase
// identity rule.
conllu::Corpus predict(const conllu::Corpus& corpus, const TaggerModel& model,
                       const AuxInputs& aux,
                       const merge::RestrictionMask* mask = nullptr);

// --- persistence ------------------------------------------------------------

// Container: magic MFM1, version, text metadata block (config +
// vocabularies), named float32 parameter arrays, trailing CRC-32.
void save_model(const TaggerModel& model, const std::string& path);
TaggerModel load_model(const std::string& path);

}  // namespace morphtag::model
