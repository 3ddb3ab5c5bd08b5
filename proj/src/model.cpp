#include "morphtag/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "morphtag/errors.hpp"
#include "morphtag/kernels.hpp"
#include "morphtag/merge.hpp"
#include "morphtag/metrics.hpp"
#include "morphtag/utf8.hpp"
#include "morphtag/version.hpp"

namespace morphtag::model {

size_t Indexer::add(const std::string& s) {
    auto it = index.find(s);
    if (it != index.end()) return it->second;
    const size_t id = items.size();
    items.push_back(s);
    index.emplace(s, id);
    return id;
}

size_t Indexer::get(const std::string& s) const {
    auto it = index.find(s);
    return it == index.end() ? 0 : it->second;
}

namespace {

// Boundary character n-grams of a form, used by the averaging char composer.
std::vector<std::string> boundary_ngrams(const std::u32string& cps) {
    std::vector<std::string> grams;
    for (size_t n : {size_t{2}, size_t{3}}) {
        if (cps.size() < n) continue;
        grams.push_back("P" + std::to_string(n) + ":" + utf8::encode(cps.substr(0, n)));
        grams.push_back("S" + std::to_string(n) + ":" +
                        utf8::encode(cps.substr(cps.size() - n)));
    }
    return grams;
}

}  // namespace

Vocabulary build_vocabulary(const conllu::Corpus& corpus, const tagset::CategoryTable& table) {
    Vocabulary vocab;
    size_t annotated = 0;
    for (const conllu::Sentence& sent : corpus.sentences) {
        for (const conllu::Token& tok : sent.tokens) {
            vocab.words.add(tok.form);
            const std::u32string cps = utf8::decode(tok.form);
            for (char32_t cp : cps) vocab.chars.add(utf8::encode_one(cp));
            for (const std::string& gram : boundary_ngrams(cps)) vocab.ngrams.add(gram);
            if (tok.lemma && tok.bundle) ++annotated;
            if (tok.bundle) vocab.bundles.add(tok.bundle->canonical_text());
        }
    }
    if (annotated == 0)
        throw DataError("corpus '" + corpus.treebank_id +
                        "' has no tokens with gold lemma and features");
    for (const auto& [rule, count] : lemma::rule_inventory(corpus)) vocab.rules.add(rule);

    const tagset::TagInventory inv = tagset::build_inventory(corpus, table);
    for (const auto& [name, values] : inv.category_values) {
        Vocabulary::Category cat;
        cat.name = name;
        cat.values.add(tagset::CategoryTable::kNoneValue);
        for (const std::string& v : values) cat.values.add(v);
        vocab.categories.push_back(std::move(cat));
    }
    return vocab;
}

TaggerModel build_model(const ModelConfig& config, Vocabulary vocab) {
    if (config.word_dim == 0 || config.char_dim == 0 || config.hidden_dim == 0 ||
        config.layers == 0)
        throw UsageError("model dimensions must be positive");
    if (config.char_composer == CharComposerKind::BiGru && config.char_dim % 2 != 0)
        throw UsageError("char_dim must be even for the BiGru char composer");
    if (config.use_pretrained && config.pretrained_dim == 0)
        throw UsageError("use_pretrained set but pretrained_dim is 0");
    if (config.use_contextual && config.contextual_dim == 0)
        throw UsageError("use_contextual set but contextual_dim is 0");

    TaggerModel model;
    model.config = config;
    model.vocab = std::move(vocab);
    std::mt19937_64 rng(config.seed);
    nn::ParamStore& ps = model.params;

    model.word_emb = ps.add("word_emb", model.vocab.words.size(), config.word_dim);
    nn::uniform_init(*model.word_emb, rng, 0.1);
    model.char_emb = ps.add("char_emb", model.vocab.chars.size(), config.char_dim);
    nn::uniform_init(*model.char_emb, rng, 0.1);
    if (config.char_composer == CharComposerKind::Average) {
        model.ngram_emb = ps.add("ngram_emb", model.vocab.ngrams.size(), config.char_dim);
        nn::uniform_init(*model.ngram_emb, rng, 0.1);
    } else {
        model.char_fwd = nn::make_gru(ps, "char_fwd", config.char_dim, config.char_dim / 2, rng);
        model.char_bwd = nn::make_gru(ps, "char_bwd", config.char_dim, config.char_dim / 2, rng);
    }

    size_t in_dim = config.token_input_dim();
    if (config.encoder == EncoderKind::BiGru) {
        for (size_t l = 0; l < config.layers; ++l) {
            const size_t d = l == 0 ? in_dim : 2 * config.hidden_dim;
            model.enc_fwd.push_back(
                nn::make_gru(ps, "enc" + std::to_string(l) + "_fwd", d, config.hidden_dim, rng));
            model.enc_bwd.push_back(
                nn::make_gru(ps, "enc" + std::to_string(l) + "_bwd", d, config.hidden_dim, rng));
        }
    } else {
        for (size_t l = 0; l < config.layers; ++l) {
            const size_t d = l == 0 ? in_dim : config.hidden_dim;
            const size_t span = (2 * config.window + 1) * d;
            nn::Param* w = ps.add("win" + std::to_string(l) + "_w", config.hidden_dim, span);
            nn::glorot_init(*w, rng);
            model.win_w.push_back(w);
            model.win_b.push_back(ps.add("win" + std::to_string(l) + "_b", config.hidden_dim, 1));
        }
    }

    const size_t enc_out = config.encoder_output_dim();
    model.lemma_w = ps.add("lemma_w", model.vocab.rules.size(), enc_out + config.char_dim);
    nn::glorot_init(*model.lemma_w, rng);
    model.lemma_b = ps.add("lemma_b", model.vocab.rules.size(), 1);
    model.bundle_w = ps.add("bundle_w", model.vocab.bundles.size(), enc_out);
    nn::glorot_init(*model.bundle_w, rng);
    model.bundle_b = ps.add("bundle_b", model.vocab.bundles.size(), 1);
    for (const Vocabulary::Category& cat : model.vocab.categories) {
        nn::Param* w = ps.add("cat_" + cat.name + "_w", cat.values.size(), enc_out);
        nn::glorot_init(*w, rng);
        model.cat_w.push_back(w);
        model.cat_b.push_back(ps.add("cat_" + cat.name + "_b", cat.values.size(), 1));
    }

    model.parsed_rules.resize(model.vocab.rules.size());
    for (size_t i = 1; i < model.vocab.rules.size(); ++i)
        model.parsed_rules[i] = lemma::parse_rule(model.vocab.rules.items[i]);
    return model;
}

// --- forward/backward machinery -------------------------------------------

namespace {

struct PreparedToken {
    size_t word_id = 0;
    std::vector<size_t> char_ids;
    std::vector<size_t> ngram_ids;
    std::vector<double> aux;  // pretrained ++ contextual, frozen
    size_t form_cp_len = 0;

    bool has_targets = false;
    size_t rule_id = 0;
    size_t bundle_id = 0;
    std::vector<size_t> cat_ids;
};

struct PreparedSentence {
    std::vector<PreparedToken> tokens;
};

PreparedSentence prepare_sentence(const conllu::Sentence& sentence, const TaggerModel& model,
                                  const AuxInputs& aux, bool with_targets,
                                  const tagset::CategoryTable* table,
                                  std::vector<std::string>* warnings) {
    const ModelConfig& cfg = model.config;
    PreparedSentence out;
    out.tokens.reserve(sentence.tokens.size());

    std::span<const float> ctx;
    if (cfg.use_contextual) {
        if (!aux.sidecar) throw UsageError("model expects a contextual sidecar");
        if (aux.sidecar->dimension() != cfg.contextual_dim)
            throw UsageError("sidecar dimension " + std::to_string(aux.sidecar->dimension()) +
                             " does not match model contextual_dim " +
                             std::to_string(cfg.contextual_dim));
        ctx = aux.sidecar->lookup(sentence.sent_id());
        if (!ctx.empty() && ctx.size() != sentence.tokens.size() * cfg.contextual_dim)
            throw DataError("sidecar sentence '" + sentence.sent_id() + "' has " +
                            std::to_string(ctx.size() / cfg.contextual_dim) +
                            " vectors for " + std::to_string(sentence.tokens.size()) +
                            " tokens");
    }
    if (cfg.use_pretrained) {
        if (!aux.word_vectors) throw UsageError("model expects pretrained word vectors");
        if (aux.word_vectors->dimension() != cfg.pretrained_dim)
            throw UsageError("word vector dimension " +
                             std::to_string(aux.word_vectors->dimension()) +
                             " does not match model pretrained_dim " +
                             std::to_string(cfg.pretrained_dim));
    }

    for (size_t t = 0; t < sentence.tokens.size(); ++t) {
        const conllu::Token& tok = sentence.tokens[t];
        PreparedToken pt;
        pt.word_id = model.vocab.words.get(tok.form);
        const std::u32string cps = utf8::decode(tok.form);
        pt.form_cp_len = cps.size();
        pt.char_ids.reserve(cps.size());
        for (char32_t cp : cps) pt.char_ids.push_back(model.vocab.chars.get(utf8::encode_one(cp)));
        if (cfg.char_composer == CharComposerKind::Average)
            for (const std::string& gram : boundary_ngrams(cps))
                pt.ngram_ids.push_back(model.vocab.ngrams.get(gram));

        if (cfg.use_pretrained) {
            std::span<const float> vec = aux.word_vectors->lookup(tok.form);
            pt.aux.insert(pt.aux.end(), vec.begin(), vec.end());
        }
        if (cfg.use_contextual) {
            if (ctx.empty()) {
                pt.aux.insert(pt.aux.end(), cfg.contextual_dim, 0.0);
            } else {
                std::span<const float> row = ctx.subspan(t * cfg.contextual_dim,
                                                         cfg.contextual_dim);
                pt.aux.insert(pt.aux.end(), row.begin(), row.end());
            }
        }

        if (with_targets && tok.lemma && tok.bundle) {
            pt.has_targets = true;
            const std::string rule =
                lemma::serialize_rule(lemma::induce_rule(tok.form, *tok.lemma));
            pt.rule_id = model.vocab.rules.get(rule);
            if (pt.rule_id == 0 && warnings)
                warnings->push_back("gold lemma rule '" + rule +
                                    "' not in vocabulary; using UNK");
            pt.bundle_id = model.vocab.bundles.get(tok.bundle->canonical_text());
            if (pt.bundle_id == 0 && warnings)
                warnings->push_back("gold bundle '" + tok.bundle->canonical_text() +
                                    "' not in vocabulary; using UNK");
            auto decomposed = tagset::decompose(*tok.bundle, *table, nullptr);
            pt.cat_ids.reserve(model.vocab.categories.size());
            for (const Vocabulary::Category& cat : model.vocab.categories) {
                auto it = decomposed.find(cat.name);
                const std::string& value =
                    it == decomposed.end() ? std::string(tagset::CategoryTable::kNoneValue)
                                           : it->second;
                pt.cat_ids.push_back(cat.values.get(value));
            }
        }
        out.tokens.push_back(std::move(pt));
    }
    return out;
}

struct CharTrace {
    std::vector<std::vector<double>> xs;  // char embeddings
    nn::GruTrace fwd, bwd;
};

struct SentenceTrace {
    std::vector<std::vector<double>> char_reps;  // [T][char_dim]
    std::vector<CharTrace> char_traces;          // BiGru composer
    std::vector<std::vector<std::vector<double>>> layer_in;  // [L+1][T][*]; last = hidden
    std::vector<nn::GruTrace> gru_fwd, gru_bwd;
    std::vector<std::vector<double>> lemma_in;  // [T][enc_out + char_dim]
    std::vector<std::vector<double>> lemma_logits, bundle_logits;
    std::vector<std::vector<std::vector<double>>> cat_logits;  // [C][T][*]
};

void char_composer_forward(const TaggerModel& model, const PreparedToken& tok,
                           std::vector<double>& rep, CharTrace* trace) {
    const ModelConfig& cfg = model.config;
    rep.assign(cfg.char_dim, 0.0);
    if (cfg.char_composer == CharComposerKind::Average) {
        if (!tok.char_ids.empty()) {
            for (size_t id : tok.char_ids) {
                std::span<const double> row = model.char_emb->row(id);
                for (size_t i = 0; i < cfg.char_dim; ++i) rep[i] += row[i];
            }
            for (size_t i = 0; i < cfg.char_dim; ++i)
                rep[i] /= static_cast<double>(tok.char_ids.size());
        }
        for (size_t id : tok.ngram_ids) {
            std::span<const double> row = model.ngram_emb->row(id);
            for (size_t i = 0; i < cfg.char_dim; ++i) rep[i] += row[i];
        }
        return;
    }
    // BiGru composer: concat of last forward state and first backward state
    CharTrace local;
    CharTrace& ct = trace ? *trace : local;
    ct.xs.clear();
    ct.xs.reserve(tok.char_ids.size());
    for (size_t id : tok.char_ids) {
        std::span<const double> row = model.char_emb->row(id);
        ct.xs.emplace_back(row.begin(), row.end());
    }
    nn::gru_forward(model.char_fwd, ct.xs, false, ct.fwd);
    nn::gru_forward(model.char_bwd, ct.xs, true, ct.bwd);
    const size_t half = cfg.char_dim / 2;
    if (!ct.xs.empty()) {
        const std::vector<double>& hf = ct.fwd.h.back();
        const std::vector<double>& hb = ct.bwd.h.front();
        for (size_t i = 0; i < half; ++i) rep[i] = hf[i];
        for (size_t i = 0; i < half; ++i) rep[half + i] = hb[i];
    }
}

void forward(const TaggerModel& model, const PreparedSentence& sent, SentenceTrace& tr) {
    const ModelConfig& cfg = model.config;
    const size_t T = sent.tokens.size();
    const size_t enc_out = cfg.encoder_output_dim();

    tr.char_reps.assign(T, {});
    if (cfg.char_composer == CharComposerKind::BiGru) tr.char_traces.assign(T, {});
    tr.layer_in.assign(1, std::vector<std::vector<double>>(T));
    for (size_t t = 0; t < T; ++t) {
        const PreparedToken& tok = sent.tokens[t];
        char_composer_forward(model, tok, tr.char_reps[t],
                              cfg.char_composer == CharComposerKind::BiGru
                                  ? &tr.char_traces[t]
                                  : nullptr);
        std::vector<double>& x = tr.layer_in[0][t];
        x.reserve(cfg.token_input_dim());
        std::span<const double> wrow = model.word_emb->row(tok.word_id);
        x.insert(x.end(), wrow.begin(), wrow.end());
        x.insert(x.end(), tr.char_reps[t].begin(), tr.char_reps[t].end());
        x.insert(x.end(), tok.aux.begin(), tok.aux.end());
    }

    if (cfg.encoder == EncoderKind::BiGru) {
        tr.gru_fwd.assign(cfg.layers, {});
        tr.gru_bwd.assign(cfg.layers, {});
        for (size_t l = 0; l < cfg.layers; ++l) {
            nn::gru_forward(model.enc_fwd[l], tr.layer_in[l], false, tr.gru_fwd[l]);
            nn::gru_forward(model.enc_bwd[l], tr.layer_in[l], true, tr.gru_bwd[l]);
            std::vector<std::vector<double>> out(T);
            for (size_t t = 0; t < T; ++t) {
                out[t].reserve(2 * cfg.hidden_dim);
                out[t].insert(out[t].end(), tr.gru_fwd[l].h[t].begin(),
                              tr.gru_fwd[l].h[t].end());
                out[t].insert(out[t].end(), tr.gru_bwd[l].h[t].begin(),
                              tr.gru_bwd[l].h[t].end());
            }
            tr.layer_in.push_back(std::move(out));
        }
    } else {
        const size_t k = cfg.window;
        for (size_t l = 0; l < cfg.layers; ++l) {
            const size_t d = tr.layer_in[l].empty() ? 0 : tr.layer_in[l][0].size();
            std::vector<std::vector<double>> out(T);
            std::vector<double> xc((2 * k + 1) * d, 0.0);
            for (size_t t = 0; t < T; ++t) {
                std::fill(xc.begin(), xc.end(), 0.0);
                for (size_t wnd = 0; wnd <= 2 * k; ++wnd) {
                    const long long src = static_cast<long long>(t) + static_cast<long long>(wnd) -
                                          static_cast<long long>(k);
                    if (src < 0 || src >= static_cast<long long>(T)) continue;
                    std::copy(tr.layer_in[l][src].begin(), tr.layer_in[l][src].end(),
                              xc.begin() + wnd * d);
                }
                std::vector<double> pre(cfg.hidden_dim);
                nn::linear_forward(*model.win_w[l], *model.win_b[l], xc, pre);
                out[t].resize(cfg.hidden_dim);
                kernels::tanh_forward(pre, out[t]);
            }
            tr.layer_in.push_back(std::move(out));
        }
    }

    const std::vector<std::vector<double>>& hidden = tr.layer_in.back();
    tr.lemma_in.assign(T, {});
    tr.lemma_logits.assign(T, {});
    tr.bundle_logits.assign(T, {});
    tr.cat_logits.assign(model.vocab.categories.size(), std::vector<std::vector<double>>(T));
    for (size_t t = 0; t < T; ++t) {
        tr.lemma_in[t].reserve(enc_out + cfg.char_dim);
        tr.lemma_in[t].insert(tr.lemma_in[t].end(), hidden[t].begin(), hidden[t].end());
        tr.lemma_in[t].insert(tr.lemma_in[t].end(), tr.char_reps[t].begin(),
                              tr.char_reps[t].end());
        tr.lemma_logits[t].resize(model.vocab.rules.size());
        nn::linear_forward(*model.lemma_w, *model.lemma_b, tr.lemma_in[t], tr.lemma_logits[t]);
        tr.bundle_logits[t].resize(model.vocab.bundles.size());
        nn::linear_forward(*model.bundle_w, *model.bundle_b, hidden[t], tr.bundle_logits[t]);
        for (size_t c = 0; c < model.vocab.categories.size(); ++c) {
            tr.cat_logits[c][t].resize(model.vocab.categories[c].values.size());
            nn::linear_forward(*model.cat_w[c], *model.cat_b[c], hidden[t], tr.cat_logits[c][t]);
        }
    }
}

// Gradients w.r.t. the head logits of one sentence.
struct HeadGrads {
    std::vector<std::vector<double>> lemma, bundle;        // [T][*]
    std::vector<std::vector<std::vector<double>>> cat;      // [C][T][*]
};

void backward(TaggerModel& model, const PreparedSentence& sent, const SentenceTrace& tr,
              const HeadGrads& hg) {
    const ModelConfig& cfg = model.config;
    const size_t T = sent.tokens.size();
    const size_t enc_out = cfg.encoder_output_dim();

    std::vector<std::vector<double>> dhidden(T);
    std::vector<std::vector<double>> dchar(T);
    for (size_t t = 0; t < T; ++t) {
        dhidden[t].assign(enc_out, 0.0);
        dchar[t].assign(cfg.char_dim, 0.0);
    }

    const std::vector<std::vector<double>>& hidden = tr.layer_in.back();
    for (size_t t = 0; t < T; ++t) {
        if (!hg.lemma.empty() && !hg.lemma[t].empty()) {
            std::vector<double> dlin(enc_out + cfg.char_dim, 0.0);
            nn::linear_backward(*model.lemma_w, *model.lemma_b, tr.lemma_in[t], hg.lemma[t],
                                dlin);
            for (size_t i = 0; i < enc_out; ++i) dhidden[t][i] += dlin[i];
            for (size_t i = 0; i < cfg.char_dim; ++i) dchar[t][i] += dlin[enc_out + i];
        }
        if (!hg.bundle.empty() && !hg.bundle[t].empty())
            nn::linear_backward(*model.bundle_w, *model.bundle_b, hidden[t], hg.bundle[t],
                                dhidden[t]);
        for (size_t c = 0; c < hg.cat.size(); ++c)
            if (!hg.cat[c][t].empty())
                nn::linear_backward(*model.cat_w[c], *model.cat_b[c], hidden[t], hg.cat[c][t],
                                    dhidden[t]);
    }

    // encoder backward, topmost layer first
    std::vector<std::vector<double>> dout = std::move(dhidden);
    if (cfg.encoder == EncoderKind::BiGru) {
        for (size_t l = cfg.layers; l-- > 0;) {
            std::vector<std::vector<double>> din(T);
            for (size_t t = 0; t < T; ++t) din[t].assign(tr.layer_in[l][t].size(), 0.0);
            std::vector<std::vector<double>> dh_fwd(T), dh_bwd(T);
            for (size_t t = 0; t < T; ++t) {
                dh_fwd[t].assign(dout[t].begin(), dout[t].begin() + cfg.hidden_dim);
                dh_bwd[t].assign(dout[t].begin() + cfg.hidden_dim, dout[t].end());
            }
            nn::gru_backward(model.enc_fwd[l], tr.layer_in[l], false, tr.gru_fwd[l], dh_fwd,
                             din);
            nn::gru_backward(model.enc_bwd[l], tr.layer_in[l], true, tr.gru_bwd[l], dh_bwd,
                             din);
            dout = std::move(din);
        }
    } else {
        const size_t k = cfg.window;
        for (size_t l = cfg.layers; l-- > 0;) {
            const size_t d = tr.layer_in[l].empty() ? 0 : tr.layer_in[l][0].size();
            std::vector<std::vector<double>> din(T);
            for (size_t t = 0; t < T; ++t) din[t].assign(d, 0.0);
            std::vector<double> xc((2 * k + 1) * d);
            std::vector<double> dxc((2 * k + 1) * d);
            std::vector<double> dpre(cfg.hidden_dim);
            for (size_t t = 0; t < T; ++t) {
                std::fill(xc.begin(), xc.end(), 0.0);
                for (size_t wnd = 0; wnd <= 2 * k; ++wnd) {
                    const long long src = static_cast<long long>(t) + static_cast<long long>(wnd) -
                                          static_cast<long long>(k);
                    if (src < 0 || src >= static_cast<long long>(T)) continue;
                    std::copy(tr.layer_in[l][src].begin(), tr.layer_in[l][src].end(),
                              xc.begin() + wnd * d);
                }
                std::fill(dpre.begin(), dpre.end(), 0.0);
                kernels::tanh_backward(tr.layer_in[l + 1][t], dout[t], dpre);
                std::fill(dxc.begin(), dxc.end(), 0.0);
                nn::linear_backward(*model.win_w[l], *model.win_b[l], xc, dpre, dxc);
                for (size_t wnd = 0; wnd <= 2 * k; ++wnd) {
                    const long long src = static_cast<long long>(t) + static_cast<long long>(wnd) -
                                          static_cast<long long>(k);
                    if (src < 0 || src >= static_cast<long long>(T)) continue;
                    for (size_t i = 0; i < d; ++i) din[src][i] += dxc[wnd * d + i];
                }
            }
            dout = std::move(din);
        }
    }

    // token inputs: word embedding, char representation, frozen aux
    for (size_t t = 0; t < T; ++t) {
        const PreparedToken& tok = sent.tokens[t];
        std::span<double> wgrad = model.word_emb->grad_row(tok.word_id);
        for (size_t i = 0; i < cfg.word_dim; ++i) wgrad[i] += dout[t][i];
        for (size_t i = 0; i < cfg.char_dim; ++i) dchar[t][i] += dout[t][cfg.word_dim + i];
        // aux slice is frozen: no parameter receives it

        if (cfg.char_composer == CharComposerKind::Average) {
            if (!tok.char_ids.empty()) {
                const double inv = 1.0 / static_cast<double>(tok.char_ids.size());
                for (size_t id : tok.char_ids) {
                    std::span<double> row = model.char_emb->grad_row(id);
                    for (size_t i = 0; i < cfg.char_dim; ++i) row[i] += dchar[t][i] * inv;
                }
            }
            for (size_t id : tok.ngram_ids) {
                std::span<double> row = model.ngram_emb->grad_row(id);
                for (size_t i = 0; i < cfg.char_dim; ++i) row[i] += dchar[t][i];
            }
        } else {
            const CharTrace& ct = tr.char_traces[t];
            if (ct.xs.empty()) continue;
            const size_t half = cfg.char_dim / 2;
            const size_t L = ct.xs.size();
            std::vector<std::vector<double>> dh_fwd(L), dh_bwd(L), dxs(L);
            for (size_t s = 0; s < L; ++s) {
                dh_fwd[s].assign(half, 0.0);
                dh_bwd[s].assign(half, 0.0);
                dxs[s].assign(cfg.char_dim, 0.0);
            }
            for (size_t i = 0; i < half; ++i) {
                dh_fwd[L - 1][i] = dchar[t][i];
                dh_bwd[0][i] = dchar[t][half + i];
            }
            nn::gru_backward(model.char_fwd, ct.xs, false, ct.fwd, dh_fwd, dxs);
            nn::gru_backward(model.char_bwd, ct.xs, true, ct.bwd, dh_bwd, dxs);
            for (size_t s = 0; s < L; ++s) {
                std::span<double> row = model.char_emb->grad_row(tok.char_ids[s]);
                for (size_t i = 0; i < cfg.char_dim; ++i) row[i] += dxs[s][i];
            }
        }
    }
}

}  // namespace

// --- public forward helpers -------------------------------------------------

std::vector<std::vector<double>> encode(const conllu::Sentence& sentence,
                                        const TaggerModel& model, const AuxInputs& aux) {
    PreparedSentence prep = prepare_sentence(sentence, model, aux, false, nullptr, nullptr);
    SentenceTrace tr;
    forward(model, prep, tr);
    return tr.layer_in.back();
}

std::vector<TokenDistributions> sentence_distributions(const conllu::Sentence& sentence,
                                                       const TaggerModel& model,
                                                       const AuxInputs& aux) {
    PreparedSentence prep = prepare_sentence(sentence, model, aux, false, nullptr, nullptr);
    SentenceTrace tr;
    forward(model, prep, tr);
    std::vector<TokenDistributions> out(prep.tokens.size());
    for (size_t t = 0; t < prep.tokens.size(); ++t) {
        nn::masked_softmax(tr.lemma_logits[t], out[t].rule_probs);
        nn::masked_softmax(tr.bundle_logits[t], out[t].bundle_probs);
    }
    return out;
}

std::vector<std::vector<std::vector<double>>> sentence_category_distributions(
    const conllu::Sentence& sentence, const TaggerModel& model, const AuxInputs& aux) {
    PreparedSentence prep = prepare_sentence(sentence, model, aux, false, nullptr, nullptr);
    SentenceTrace tr;
    forward(model, prep, tr);
    std::vector<std::vector<std::vector<double>>> out(model.vocab.categories.size());
    for (size_t c = 0; c < out.size(); ++c) {
        out[c].resize(prep.tokens.size());
        for (size_t t = 0; t < prep.tokens.size(); ++t)
            nn::masked_softmax(tr.cat_logits[c][t], out[c][t]);
    }
    return out;
}

// --- loss --------------------------------------------------------------------

LossStats loss(TaggerModel& model, const std::vector<const conllu::Sentence*>& batch,
               const AuxInputs& aux, const tagset::CategoryTable& table, double w,
               bool with_grad, std::vector<std::string>* warnings) {
    const size_t C = model.vocab.categories.size();
    LossStats stats;
    double lemma_sum = 0.0, bundle_sum = 0.0;
    std::vector<double> cat_sums(C, 0.0);
    size_t n_tokens = 0;

    struct SentenceWork {
        PreparedSentence prep;
        SentenceTrace trace;
        std::vector<std::vector<double>> lemma_probs, bundle_probs;
        std::vector<std::vector<std::vector<double>>> cat_probs;
    };
    std::vector<SentenceWork> work(batch.size());

    for (size_t s = 0; s < batch.size(); ++s) {
        SentenceWork& sw = work[s];
        sw.prep = prepare_sentence(*batch[s], model, aux, true, &table, warnings);
        forward(model, sw.prep, sw.trace);
        const size_t T = sw.prep.tokens.size();
        sw.lemma_probs.resize(T);
        sw.bundle_probs.resize(T);
        sw.cat_probs.assign(C, std::vector<std::vector<double>>(T));
        for (size_t t = 0; t < T; ++t) {
            const PreparedToken& tok = sw.prep.tokens[t];
            if (!tok.has_targets) continue;
            ++n_tokens;
            lemma_sum += nn::softmax_ce(sw.trace.lemma_logits[t], tok.rule_id,
                                        sw.lemma_probs[t]);
            bundle_sum += nn::softmax_ce(sw.trace.bundle_logits[t], tok.bundle_id,
                                         sw.bundle_probs[t]);
            for (size_t c = 0; c < C; ++c)
                cat_sums[c] += nn::softmax_ce(sw.trace.cat_logits[c][t], tok.cat_ids[c],
                                              sw.cat_probs[c][t]);
        }
    }

    if (n_tokens == 0) throw DataError("batch contains no annotated tokens");
    stats.tokens = n_tokens;
    stats.lemma_ce = lemma_sum / static_cast<double>(n_tokens);
    stats.bundle_ce = bundle_sum / static_cast<double>(n_tokens);
    double cat_mean = 0.0;
    for (double s : cat_sums) cat_mean += s / static_cast<double>(n_tokens);
    stats.category_ce = C > 0 ? cat_mean / static_cast<double>(C) : 0.0;
    stats.total = stats.lemma_ce + stats.bundle_ce + w * stats.category_ce;

    if (!with_grad) return stats;

    const double scale = 1.0 / static_cast<double>(n_tokens);
    const double cat_scale = C > 0 ? w * scale / static_cast<double>(C) : 0.0;
    for (SentenceWork& sw : work) {
        const size_t T = sw.prep.tokens.size();
        HeadGrads hg;
        hg.lemma.assign(T, {});
        hg.bundle.assign(T, {});
        hg.cat.assign(C, std::vector<std::vector<double>>(T));
        for (size_t t = 0; t < T; ++t) {
            const PreparedToken& tok = sw.prep.tokens[t];
            if (!tok.has_targets) continue;
            hg.lemma[t].assign(model.vocab.rules.size(), 0.0);
            nn::softmax_ce_backward(sw.lemma_probs[t], tok.rule_id, scale, hg.lemma[t]);
            hg.bundle[t].assign(model.vocab.bundles.size(), 0.0);
            nn::softmax_ce_backward(sw.bundle_probs[t], tok.bundle_id, scale, hg.bundle[t]);
            for (size_t c = 0; c < C; ++c) {
                hg.cat[c][t].assign(model.vocab.categories[c].values.size(), 0.0);
                nn::softmax_ce_backward(sw.cat_probs[c][t], tok.cat_ids[c], cat_scale,
                                        hg.cat[c][t]);
            }
        }
        backward(model, sw.prep, sw.trace, hg);
    }
    return stats;
}

// --- prediction ----------------------------------------------------------------

namespace {

struct MaskIds {
    std::vector<char> rule_allowed;
    std::vector<char> bundle_allowed;
};

MaskIds resolve_mask(const merge::RestrictionMask& mask, const Vocabulary& vocab) {
    MaskIds ids;
    ids.rule_allowed.assign(vocab.rules.size(), 0);
    ids.bundle_allowed.assign(vocab.bundles.size(), 0);
    size_t rules = 0, bundles = 0;
    for (const std::string& r : mask.rules) {
        const size_t id = vocab.rules.get(r);
        if (id != 0) {
            ids.rule_allowed[id] = 1;
            ++rules;
        }
    }
    for (const std::string& b : mask.bundles) {
        const size_t id = vocab.bundles.get(b);
        if (id != 0) {
            ids.bundle_allowed[id] = 1;
            ++bundles;
        }
    }
    if (rules == 0 || bundles == 0)
        throw DataError("restriction mask for '" + mask.source_treebank +
                        "' excludes every known lemma rule or bundle");
    return ids;
}

size_t masked_argmax(std::span<const double> probs, const std::vector<char>* allowed) {
    size_t best = 0;
    double best_p = -1.0;
    for (size_t i = 1; i < probs.size(); ++i) {
        if (allowed && !(*allowed)[i]) continue;
        if (probs[i] > best_p) {
            best_p = probs[i];
            best = i;
        }
    }
    return best;
}

}  // namespace

conllu::Corpus predict(const conllu::Corpus& corpus, const TaggerModel& model,
                       const AuxInputs& aux, const merge::RestrictionMask* mask) {
    std::optional<MaskIds> mask_ids;
    if (mask) mask_ids = resolve_mask(*mask, model.vocab);

    conllu::Corpus out = corpus;
    for (conllu::Sentence& sent : out.sentences) {
        const std::vector<TokenDistributions> dists = sentence_distributions(sent, model, aux);
        for (size_t t = 0; t < sent.tokens.size(); ++t) {
            conllu::Token& tok = sent.tokens[t];
            const size_t form_len = utf8::decode(tok.form).size();
            const std::vector<double>& rp = dists[t].rule_probs;

            const std::vector<char>* rule_allowed =
                mask_ids ? &mask_ids->rule_allowed : nullptr;
            size_t rule_id = masked_argmax(rp, rule_allowed);
            if (rule_id != 0 &&
                !lemma::is_applicable_codepoints(model.parsed_rules[rule_id], form_len)) {
                // highest-probability applicable rule inside the mask
                std::vector<size_t> order;
                order.reserve(rp.size());
                for (size_t i = 1; i < rp.size(); ++i)
                    if (!rule_allowed || (*rule_allowed)[i]) order.push_back(i);
                std::stable_sort(order.begin(), order.end(),
                                 [&](size_t a, size_t b) { return rp[a] > rp[b]; });
                rule_id = 0;
                for (size_t id : order) {
                    if (lemma::is_applicable_codepoints(model.parsed_rules[id], form_len)) {
                        rule_id = id;
                        break;
                    }
                }
            }
            const lemma::LemmaRule& rule =
                rule_id == 0 ? lemma::identity_rule() : model.parsed_rules[rule_id];
            tok.set_lemma(lemma::apply_rule(rule, tok.form));

            const std::vector<char>* bundle_allowed =
                mask_ids ? &mask_ids->bundle_allowed : nullptr;
            const size_t bundle_id = masked_argmax(dists[t].bundle_probs, bundle_allowed);
            if (bundle_id != 0)
                tok.set_bundle(tagset::parse_bundle(model.vocab.bundles.items[bundle_id]));
        }
    }
    return out;
}

// --- training --------------------------------------------------------------------

TrainResult train(const conllu::Corpus& train_corpus, const conllu::Corpus& dev_corpus,
                  const ModelConfig& config, const tagset::CategoryTable& table,
                  const AuxInputs& aux, std::ostream* log) {
    ModelConfig cfg = config;
    if (cfg.use_pretrained) {
        if (!aux.word_vectors) throw UsageError("use_pretrained requires word vectors");
        cfg.pretrained_dim = aux.word_vectors->dimension();
    }
    if (cfg.use_contextual) {
        if (!aux.sidecar) throw UsageError("use_contextual requires a contextual sidecar");
        cfg.contextual_dim = aux.sidecar->dimension();
    }

    TrainResult result;
    result.model = build_model(cfg, build_vocabulary(train_corpus, table));
    TaggerModel& model = result.model;

    std::vector<const conllu::Sentence*> all;
    for (const conllu::Sentence& s : train_corpus.sentences)
        if (!s.tokens.empty()) all.push_back(&s);
    if (all.empty()) throw DataError("training corpus has no sentences");

    const size_t B = std::max<size_t>(1, cfg.batch_size);
    std::vector<size_t> order(all.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    // first-batch loss before any update; also exposes the w decomposition
    {
        std::vector<const conllu::Sentence*> first(all.begin(),
                                                   all.begin() + std::min(B, all.size()));
        result.initial = loss(model, first, aux, table, cfg.w, false, nullptr);
        if (log)
            *log << "initial_loss total=" << result.initial.total
                 << " lemma_ce=" << result.initial.lemma_ce
                 << " bundle_ce=" << result.initial.bundle_ce
                 << " cat_ce=" << result.initial.category_ce << " w=" << cfg.w << "\n";
    }

    nn::AdamOptimizer adam;
    nn::AdamConfig adam_cfg;
    adam_cfg.lr = cfg.lr;

    double best_score = -1.0;
    std::vector<std::vector<double>> best_snapshot;
    std::vector<std::string> warnings;

    for (size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::mt19937_64 rng(cfg.seed ^ (0x9E3779B97F4A7C15ull * epoch));
        std::shuffle(order.begin(), order.end(), rng);

        EpochStats es;
        es.epoch = epoch;
        double loss_sum = 0.0, lemma_sum = 0.0, bundle_sum = 0.0, cat_sum = 0.0;
        size_t token_sum = 0;

        for (size_t start = 0; start < order.size(); start += B) {
            std::vector<const conllu::Sentence*> batch;
            for (size_t i = start; i < std::min(start + B, order.size()); ++i)
                batch.push_back(all[order[i]]);
            model.params.zero_grads();
            const LossStats ls = loss(model, batch, aux, table, cfg.w, true, &warnings);
            if (!std::isfinite(ls.total))
                throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch) +
                                      " (lemma_ce=" + std::to_string(ls.lemma_ce) +
                                      ", bundle_ce=" + std::to_string(ls.bundle_ce) + ")");
            adam.step(model.params, adam_cfg);
            loss_sum += ls.total * static_cast<double>(ls.tokens);
            lemma_sum += ls.lemma_ce * static_cast<double>(ls.tokens);
            bundle_sum += ls.bundle_ce * static_cast<double>(ls.tokens);
            cat_sum += ls.category_ce * static_cast<double>(ls.tokens);
            token_sum += ls.tokens;
        }
        es.train_loss = loss_sum / static_cast<double>(token_sum);
        es.lemma_ce = lemma_sum / static_cast<double>(token_sum);
        es.bundle_ce = bundle_sum / static_cast<double>(token_sum);
        es.category_ce = cat_sum / static_cast<double>(token_sum);

        if (!dev_corpus.sentences.empty()) {
            const conllu::Corpus dev_pred = predict(dev_corpus, model, aux, nullptr);
            const metrics::EvalReport report = metrics::evaluate(dev_corpus, dev_pred);
            es.dev_lemma_acc = report.lemma_accuracy;
            es.dev_morph_acc = report.morph_accuracy;
            const double score = (report.lemma_accuracy + report.morph_accuracy) / 2.0;
            if (score > best_score) {
                best_score = score;
                best_snapshot = model.params.snapshot();
            }
        }
        if (log) {
            *log << "epoch=" << epoch << " loss=" << es.train_loss
                 << " lemma_ce=" << es.lemma_ce << " bundle_ce=" << es.bundle_ce
                 << " cat_ce=" << es.category_ce;
            if (!dev_corpus.sentences.empty())
                *log << " dev_lemma_acc=" << es.dev_lemma_acc
                     << " dev_morph_acc=" << es.dev_morph_acc;
            *log << "\n";
        }
        result.epochs.push_back(es);

        if (cfg.early_stop_train_acc > 0.0) {
            const conllu::Corpus train_pred = predict(train_corpus, model, aux, nullptr);
            const metrics::EvalReport report = metrics::evaluate(train_corpus, train_pred);
            if (report.lemma_accuracy >= cfg.early_stop_train_acc &&
                report.morph_accuracy >= cfg.early_stop_train_acc) {
                if (log)
                    *log << "early_stop epoch=" << epoch
                         << " train_lemma_acc=" << report.lemma_accuracy
                         << " train_morph_acc=" << report.morph_accuracy << "\n";
                break;
            }
        }
    }

    if (log)
        for (const std::string& wmsg : warnings) *log << "warning: " << wmsg << "\n";
    if (!best_snapshot.empty()) model.params.restore(best_snapshot);
    // container precision, so that save -> load is the identity
    model.params.round_to_f32();
    return result;
}

// --- persistence ---------------------------------------------------------------

namespace {

uint32_t crc32(const unsigned char* data, size_t len) {
    static uint32_t table[256];
    static bool init = false;
    if (!init) {
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            table[i] = c;
        }
        init = true;
    }
    uint32_t crc = 0xFFFFFFFFu;
    for (size_t i = 0; i < len; ++i) crc = table[(crc ^ data[i]) & 0xFF] ^ (crc >> 8);
    return crc ^ 0xFFFFFFFFu;
}

void put_u32(std::string& buf, uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& buf, uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

uint32_t get_u32(const std::string& buf, size_t& pos) {
    if (pos + 4 > buf.size()) throw DataError("model file truncated");
    uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(buf[pos + i]);
    pos += 4;
    return v;
}

uint64_t get_u64(const std::string& buf, size_t& pos) {
    if (pos + 8 > buf.size()) throw DataError("model file truncated");
    uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(buf[pos + i]);
    pos += 8;
    return v;
}

std::string fmt_double(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

const char* encoder_name(EncoderKind k) {
    return k == EncoderKind::BiGru ? "bigru" : "window";
}
const char* composer_name(CharComposerKind k) {
    return k == CharComposerKind::Average ? "average" : "bigru";
}

void write_indexer(std::ostringstream& out, const char* name, const Indexer& idx) {
    out << "[" << name << " " << idx.items.size() << "]\n";
    for (const std::string& item : idx.items) out << item << "\n";
}

std::string serialize_meta(const TaggerModel& model) {
    const ModelConfig& c = model.config;
    std::ostringstream out;
    out << "[config]\n";
    out << "tool_version=" << kVersion << "\n";
    out << "word_dim=" << c.word_dim << "\n";
    out << "char_dim=" << c.char_dim << "\n";
    out << "use_pretrained=" << (c.use_pretrained ? 1 : 0) << "\n";
    out << "use_contextual=" << (c.use_contextual ? 1 : 0) << "\n";
    out << "pretrained_dim=" << c.pretrained_dim << "\n";
    out << "contextual_dim=" << c.contextual_dim << "\n";
    out << "encoder=" << encoder_name(c.encoder) << "\n";
    out << "char_composer=" << composer_name(c.char_composer) << "\n";
    out << "hidden_dim=" << c.hidden_dim << "\n";
    out << "layers=" << c.layers << "\n";
    out << "window=" << c.window << "\n";
    out << "w=" << fmt_double(c.w) << "\n";
    out << "lr=" << fmt_double(c.lr) << "\n";
    out << "batch_size=" << c.batch_size << "\n";
    out << "epochs=" << c.epochs << "\n";
    out << "seed=" << c.seed << "\n";
    out << "configuration=" << c.configuration << "\n";
    out << "config_hash=" << c.config_hash << "\n";
    write_indexer(out, "words", model.vocab.words);
    write_indexer(out, "chars", model.vocab.chars);
    write_indexer(out, "ngrams", model.vocab.ngrams);
    write_indexer(out, "rules", model.vocab.rules);
    write_indexer(out, "bundles", model.vocab.bundles);
    out << "[categories " << model.vocab.categories.size() << "]\n";
    for (const Vocabulary::Category& cat : model.vocab.categories) {
        out << "[category " << cat.name << " " << cat.values.items.size() << "]\n";
        for (const std::string& v : cat.values.items) out << v << "\n";
    }
    return out.str();
}

struct MetaReader {
    std::istringstream in;
    explicit MetaReader(const std::string& text) : in(text) {}

    std::string line() {
        std::string l;
        if (!std::getline(in, l)) throw DataError("model metadata truncated");
        return l;
    }

    // "[name N]" -> N, or "[category NAME N]" -> N with name out-param
    size_t section(const std::string& expected, std::string* name = nullptr) {
        const std::string l = line();
        if (l.size() < 2 || l.front() != '[' || l.back() != ']')
            throw DataError("model metadata: expected section [" + expected + "], got " + l);
        std::istringstream parts(l.substr(1, l.size() - 2));
        std::string head;
        parts >> head;
        if (head != expected)
            throw DataError("model metadata: expected section [" + expected + "], got " + l);
        std::string a, b;
        parts >> a;
        if (parts >> b) {
            if (name) *name = a;
            return std::stoull(b);
        }
        return std::stoull(a);
    }

    Indexer read_indexer(const std::string& expected) {
        const size_t n = section(expected);
        Indexer idx;
        idx.items.clear();
        idx.index.clear();
        for (size_t i = 0; i < n; ++i) {
            const std::string item = line();
            idx.items.push_back(item);
            idx.index.emplace(item, i);
        }
        return idx;
    }
};

}  // namespace

void save_model(const TaggerModel& model, const std::string& path) {
    std::string buf;
    buf += "MFM1";
    put_u32(buf, 1);  // container version
    const std::string meta = serialize_meta(model);
    put_u64(buf, meta.size());
    buf += meta;
    put_u64(buf, model.params.all().size());
    for (const auto& p : model.params.all()) {
        put_u32(buf, static_cast<uint32_t>(p->name.size()));
        buf += p->name;
        put_u64(buf, p->rows);
        put_u64(buf, p->cols);
        for (double w : p->w) {
            const float f = static_cast<float>(w);
            uint32_t bits;
            std::memcpy(&bits, &f, 4);
            put_u32(buf, bits);
        }
    }
    put_u32(buf, crc32(reinterpret_cast<const unsigned char*>(buf.data()), buf.size()));

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model " + path);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw DataError("model write failed: " + path);
}

TaggerModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model " + path);
    std::ostringstream whole;
    whole << in.rdbuf();
    const std::string buf = whole.str();
    if (buf.size() < 12 || buf.compare(0, 4, "MFM1") != 0)
        throw DataError("not a model file (bad magic): " + path);
    {
        size_t tail = buf.size() - 4;
        uint32_t stored = 0;
        size_t p = tail;
        stored = get_u32(buf, p);
        const uint32_t actual =
            crc32(reinterpret_cast<const unsigned char*>(buf.data()), tail);
        if (stored != actual)
            throw DataError("model file checksum mismatch (truncated or corrupt): " + path);
    }

    size_t pos = 4;
    const uint32_t version = get_u32(buf, pos);
    if (version != 1)
        throw DataError("unsupported model container version " + std::to_string(version));
    const uint64_t meta_len = get_u64(buf, pos);
    if (pos + meta_len > buf.size()) throw DataError("model file truncated");
    const std::string meta = buf.substr(pos, meta_len);
    pos += meta_len;

    MetaReader reader(meta);
    ModelConfig cfg;
    {
        const std::string head = reader.line();
        if (head != "[config]") throw DataError("model metadata: missing [config]");
        std::unordered_map<std::string, std::string> kv;
        while (true) {
            std::streampos mark = reader.in.tellg();
            std::string l = reader.line();
            if (!l.empty() && l.front() == '[') {
                reader.in.seekg(mark);
                break;
            }
            const size_t eq = l.find('=');
            if (eq == std::string::npos) throw DataError("model metadata: bad config line " + l);
            kv[l.substr(0, eq)] = l.substr(eq + 1);
        }
        auto geti = [&](const char* k) { return std::stoull(kv.at(k)); };
        auto getd = [&](const char* k) { return std::stod(kv.at(k)); };
        cfg.word_dim = geti("word_dim");
        cfg.char_dim = geti("char_dim");
        cfg.use_pretrained = kv.at("use_pretrained") == "1";
        cfg.use_contextual = kv.at("use_contextual") == "1";
        cfg.pretrained_dim = geti("pretrained_dim");
        cfg.contextual_dim = geti("contextual_dim");
        cfg.encoder = kv.at("encoder") == "bigru" ? EncoderKind::BiGru : EncoderKind::Window;
        cfg.char_composer = kv.at("char_composer") == "average" ? CharComposerKind::Average
                                                                : CharComposerKind::BiGru;
        cfg.hidden_dim = geti("hidden_dim");
        cfg.layers = geti("layers");
        cfg.window = geti("window");
        cfg.w = getd("w");
        cfg.lr = getd("lr");
        cfg.batch_size = geti("batch_size");
        cfg.epochs = geti("epochs");
        cfg.seed = geti("seed");
        cfg.configuration = kv.at("configuration");
        cfg.config_hash = kv.count("config_hash") ? kv.at("config_hash") : "";
    }
    Vocabulary vocab;
    vocab.words = reader.read_indexer("words");
    vocab.chars = reader.read_indexer("chars");
    vocab.ngrams = reader.read_indexer("ngrams");
    vocab.rules = reader.read_indexer("rules");
    vocab.bundles = reader.read_indexer("bundles");
    const size_t ncats = reader.section("categories");
    for (size_t c = 0; c < ncats; ++c) {
        Vocabulary::Category cat;
        const size_t nvals = reader.section("category", &cat.name);
        cat.values.items.clear();
        cat.values.index.clear();
        for (size_t i = 0; i < nvals; ++i) {
            const std::string v = reader.line();
            cat.values.items.push_back(v);
            cat.values.index.emplace(v, i);
        }
        vocab.categories.push_back(std::move(cat));
    }

    TaggerModel model = build_model(cfg, std::move(vocab));

    const uint64_t nparams = get_u64(buf, pos);
    if (nparams != model.params.all().size())
        throw DataError("model file has " + std::to_string(nparams) + " parameters, expected " +
                        std::to_string(model.params.all().size()));
    for (uint64_t i = 0; i < nparams; ++i) {
        const uint32_t name_len = get_u32(buf, pos);
        if (pos + name_len > buf.size()) throw DataError("model file truncated");
        const std::string name = buf.substr(pos, name_len);
        pos += name_len;
        const uint64_t rows = get_u64(buf, pos);
        const uint64_t cols = get_u64(buf, pos);
        nn::Param* p = model.params.find(name);
        if (!p) throw DataError("model file has unknown parameter " + name);
        if (p->rows != rows || p->cols != cols)
            throw DataError("model parameter " + name + " has shape " + std::to_string(rows) +
                            "x" + std::to_string(cols) + ", expected " +
                            std::to_string(p->rows) + "x" + std::to_string(p->cols));
        for (size_t j = 0; j < p->size(); ++j) {
            const uint32_t bits = get_u32(buf, pos);
            float f;
            std::memcpy(&f, &bits, 4);
            p->w[j] = static_cast<double>(f);
        }
    }
    return model;
}

}  // namespace morphtag::model
