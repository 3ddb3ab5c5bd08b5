#include "morphtag/ensemble.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include "morphtag/errors.hpp"
#include "morphtag/merge.hpp"
#include "morphtag/utf8.hpp"

namespace morphtag::ensemble {

const char* configuration_name(Configuration c) {
    switch (c) {
        case Configuration::Regular: return "regular";
        case Configuration::Merged: return "merged";
        case Configuration::NoContextual: return "no_contextual";
    }
    return "regular";
}

Configuration configuration_from_string(const std::string& s) {
    if (s == "regular") return Configuration::Regular;
    if (s == "merged") return Configuration::Merged;
    if (s == "no_contextual") return Configuration::NoContextual;
    throw UsageError("unknown model configuration '" + s +
                     "' (expected regular, merged or no_contextual)");
}

void write_spec_file(const EnsembleSpec& spec, const std::string& path,
                     const std::string& provenance_comment) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write ensemble spec " + path);
    if (!provenance_comment.empty()) out << "# " << provenance_comment << "\n";
    out << "method=" << spec.method << "\n";
    for (const std::string& m : spec.members) out << "member=" << m << "\n";
    if (!out) throw DataError("ensemble spec write failed: " + path);
}

EnsembleSpec load_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open ensemble spec " + path);
    EnsembleSpec spec;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("method=", 0) == 0)
            spec.method = line.substr(7);
        else if (line.rfind("member=", 0) == 0)
            spec.members.push_back(line.substr(7));
        else
            throw DataError("ensemble spec " + path + ": bad line '" + line + "'");
    }
    if (spec.members.empty()) throw DataError("ensemble spec " + path + " has no members");
    return spec;
}

namespace {

// Union of the members' label spaces: member 0's labels in vocabulary order
// first, then labels new to each later member. Keeping the first member's
// order makes a one-model (or k-copy) ensemble reproduce single-model
// prediction exactly, ties included.
struct UnionSpace {
    std::vector<std::string> labels;
    std::unordered_map<std::string, size_t> index;
    std::vector<std::vector<size_t>> member_to_union;  // [member][member id] -> union idx

    void build(const std::vector<const model::TaggerModel*>& models, bool rules) {
        for (const model::TaggerModel* m : models) {
            const model::Indexer& idx = rules ? m->vocab.rules : m->vocab.bundles;
            std::vector<size_t> proj(idx.size(), 0);
            for (size_t i = 1; i < idx.items.size(); ++i) {
                auto [it, inserted] = index.emplace(idx.items[i], labels.size());
                if (inserted) labels.push_back(idx.items[i]);
                proj[i] = it->second;
            }
            member_to_union.push_back(std::move(proj));
        }
    }
};

struct Averaged {
    std::vector<double> rule_probs;    // union space
    std::vector<double> bundle_probs;  // union space
};

struct EnsembleContext {
    UnionSpace rules, bundles;
    std::vector<lemma::LemmaRule> parsed_rules;
    std::vector<char> rule_allowed, bundle_allowed;  // by union index
    bool has_mask = false;

    void build(const std::vector<const model::TaggerModel*>& models,
               const merge::RestrictionMask* mask) {
        if (models.empty()) throw UsageError("ensemble needs at least one model");
        rules.build(models, true);
        bundles.build(models, false);
        parsed_rules.reserve(rules.labels.size());
        for (const std::string& r : rules.labels)
            parsed_rules.push_back(lemma::parse_rule(r));
        if (mask) {
            has_mask = true;
            rule_allowed.assign(rules.labels.size(), 0);
            bundle_allowed.assign(bundles.labels.size(), 0);
            size_t nr = 0, nb = 0;
            for (size_t i = 0; i < rules.labels.size(); ++i)
                if (mask->rules.count(rules.labels[i])) {
                    rule_allowed[i] = 1;
                    ++nr;
                }
            for (size_t i = 0; i < bundles.labels.size(); ++i)
                if (mask->bundles.count(bundles.labels[i])) {
                    bundle_allowed[i] = 1;
                    ++nb;
                }
            if (nr == 0 || nb == 0)
                throw DataError("restriction mask for '" + mask->source_treebank +
                                "' excludes every ensemble label");
        }
    }

    bool allowed_rule(size_t i) const { return !has_mask || rule_allowed[i]; }
    bool allowed_bundle(size_t i) const { return !has_mask || bundle_allowed[i]; }
};

// Averaged distributions for every token of a corpus, flattened over
// sentences in order.
std::vector<Averaged> average_corpus(const EnsembleContext& ctx,
                                     const std::vector<const model::TaggerModel*>& models,
                                     const conllu::Corpus& corpus,
                                     const model::AuxInputs& aux) {
    std::vector<Averaged> out;
    const double inv = 1.0 / static_cast<double>(models.size());
    for (const conllu::Sentence& sent : corpus.sentences) {
        const size_t T = sent.tokens.size();
        const size_t start = out.size();
        out.resize(start + T);
        for (size_t t = 0; t < T; ++t) {
            out[start + t].rule_probs.assign(ctx.rules.labels.size(), 0.0);
            out[start + t].bundle_probs.assign(ctx.bundles.labels.size(), 0.0);
        }
        for (size_t m = 0; m < models.size(); ++m) {
            const std::vector<model::TokenDistributions> dists =
                model::sentence_distributions(sent, *models[m], aux);
            for (size_t t = 0; t < T; ++t) {
                const auto& proj_r = ctx.rules.member_to_union[m];
                for (size_t i = 1; i < dists[t].rule_probs.size(); ++i)
                    out[start + t].rule_probs[proj_r[i]] += inv * dists[t].rule_probs[i];
                const auto& proj_b = ctx.bundles.member_to_union[m];
                for (size_t i = 1; i < dists[t].bundle_probs.size(); ++i)
                    out[start + t].bundle_probs[proj_b[i]] += inv * dists[t].bundle_probs[i];
            }
        }
    }
    return out;
}

void fill_from_averaged(const EnsembleContext& ctx, const std::vector<Averaged>& averaged,
                        conllu::Corpus& out) {
    size_t pos = 0;
    for (conllu::Sentence& sent : out.sentences) {
        for (conllu::Token& tok : sent.tokens) {
            const Averaged& avg = averaged[pos++];
            const size_t form_len = utf8::decode(tok.form).size();

            size_t best = ctx.rules.labels.size();
            double best_p = -1.0;
            for (size_t i = 0; i < avg.rule_probs.size(); ++i) {
                if (!ctx.allowed_rule(i)) continue;
                if (avg.rule_probs[i] > best_p) {
                    best_p = avg.rule_probs[i];
                    best = i;
                }
            }
            if (best < ctx.parsed_rules.size() &&
                !lemma::is_applicable_codepoints(ctx.parsed_rules[best], form_len)) {
                std::vector<size_t> order;
                for (size_t i = 0; i < avg.rule_probs.size(); ++i)
                    if (ctx.allowed_rule(i)) order.push_back(i);
                std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
                    return avg.rule_probs[a] > avg.rule_probs[b];
                });
                best = ctx.parsed_rules.size();
                for (size_t id : order)
                    if (lemma::is_applicable_codepoints(ctx.parsed_rules[id], form_len)) {
                        best = id;
                        break;
                    }
            }
            const lemma::LemmaRule& rule = best < ctx.parsed_rules.size()
                                               ? ctx.parsed_rules[best]
                                               : lemma::identity_rule();
            tok.set_lemma(lemma::apply_rule(rule, tok.form));

            size_t best_b = 0;
            double best_bp = -1.0;
            bool found = false;
            for (size_t i = 0; i < avg.bundle_probs.size(); ++i) {
                if (!ctx.allowed_bundle(i)) continue;
                if (avg.bundle_probs[i] > best_bp) {
                    best_bp = avg.bundle_probs[i];
                    best_b = i;
                    found = true;
                }
            }
            if (found) tok.set_bundle(tagset::parse_bundle(ctx.bundles.labels[best_b]));
        }
    }
}

double selection_score(const metrics::EvalReport& report) {
    return (report.lemma_accuracy + report.morph_accuracy) / 2.0;
}

}  // namespace

conllu::Corpus ensemble_predict(const std::vector<const model::TaggerModel*>& models,
                                const conllu::Corpus& corpus, const model::AuxInputs& aux,
                                const merge::RestrictionMask* mask) {
    EnsembleContext ctx;
    ctx.build(models, mask);
    const std::vector<Averaged> averaged = average_corpus(ctx, models, corpus, aux);
    conllu::Corpus out = corpus;
    fill_from_averaged(ctx, averaged, out);
    return out;
}

SelectionResult select_any_subset(const std::vector<const model::TaggerModel*>& models,
                                  const std::vector<std::string>& names,
                                  const conllu::Corpus& dev, const model::AuxInputs& aux,
                                  const merge::RestrictionMask* mask) {
    if (models.empty()) throw UsageError("select_any_subset: no models");
    if (names.size() != models.size())
        throw UsageError("select_any_subset: names/models size mismatch");
    const size_t n = models.size();
    if (n > 16) throw UsageError("select_any_subset: too many models for exhaustive search");

    // Cache each model's dev distributions in the shared union space once;
    // scoring a subset then only averages cached arrays.
    EnsembleContext ctx;
    ctx.build(models, mask);
    std::vector<std::vector<Averaged>> per_model(n);
    for (size_t m = 0; m < n; ++m) {
        std::vector<Averaged>& shared = per_model[m];
        for (const conllu::Sentence& sent : dev.sentences) {
            const std::vector<model::TokenDistributions> dists =
                model::sentence_distributions(sent, *models[m], aux);
            for (size_t t = 0; t < sent.tokens.size(); ++t) {
                Averaged& slot = shared.emplace_back();
                slot.rule_probs.assign(ctx.rules.labels.size(), 0.0);
                slot.bundle_probs.assign(ctx.bundles.labels.size(), 0.0);
                const auto& proj_r = ctx.rules.member_to_union[m];
                for (size_t i = 1; i < dists[t].rule_probs.size(); ++i)
                    slot.rule_probs[proj_r[i]] += dists[t].rule_probs[i];
                const auto& proj_b = ctx.bundles.member_to_union[m];
                for (size_t i = 1; i < dists[t].bundle_probs.size(); ++i)
                    slot.bundle_probs[proj_b[i]] += dists[t].bundle_probs[i];
            }
        }
    }

    SelectionResult best;
    std::vector<size_t> best_indices;
    bool have_best = false;
    const size_t tokens = per_model[0].size();

    for (uint32_t mask_bits = 1; mask_bits < (1u << n); ++mask_bits) {
        std::vector<size_t> indices;
        for (size_t m = 0; m < n; ++m)
            if (mask_bits & (1u << m)) indices.push_back(m);
        const double inv = 1.0 / static_cast<double>(indices.size());

        std::vector<Averaged> avg(tokens);
        for (size_t tkn = 0; tkn < tokens; ++tkn) {
            avg[tkn].rule_probs.assign(ctx.rules.labels.size(), 0.0);
            avg[tkn].bundle_probs.assign(ctx.bundles.labels.size(), 0.0);
            for (size_t m : indices) {
                const Averaged& src = per_model[m][tkn];
                for (size_t i = 0; i < src.rule_probs.size(); ++i)
                    avg[tkn].rule_probs[i] += inv * src.rule_probs[i];
                for (size_t i = 0; i < src.bundle_probs.size(); ++i)
                    avg[tkn].bundle_probs[i] += inv * src.bundle_probs[i];
            }
        }
        conllu::Corpus pred = dev;
        fill_from_averaged(ctx, avg, pred);
        const metrics::EvalReport report = metrics::evaluate(dev, pred);
        const double score = selection_score(report);

        bool better = false;
        if (!have_best || score > best.dev_score) {
            better = true;
        } else if (score == best.dev_score) {
            if (indices.size() < best_indices.size())
                better = true;
            else if (indices.size() == best_indices.size() && indices < best_indices)
                better = true;
        }
        if (better) {
            have_best = true;
            best.dev_score = score;
            best.dev_report = report;
            best_indices = indices;
        }
    }

    best.member_indices = best_indices;
    best.spec.method = "any-subset";
    for (size_t m : best_indices) best.spec.members.push_back(names[m]);
    return best;
}

SelectionResult select_configuration(const std::vector<const model::TaggerModel*>& models,
                                     const std::vector<std::string>& names,
                                     const conllu::Corpus& dev, const model::AuxInputs& aux,
                                     const merge::RestrictionMask* mask) {
    if (models.empty()) throw UsageError("select_configuration: no models");
    if (names.size() != models.size())
        throw UsageError("select_configuration: names/models size mismatch");

    SelectionResult best;
    bool have_best = false;
    for (Configuration cfg :
         {Configuration::Regular, Configuration::Merged, Configuration::NoContextual}) {
        std::vector<const model::TaggerModel*> group;
        std::vector<size_t> indices;
        for (size_t m = 0; m < models.size(); ++m) {
            if (configuration_from_string(models[m]->config.configuration) == cfg) {
                group.push_back(models[m]);
                indices.push_back(m);
            }
        }
        if (group.empty()) continue;
        const conllu::Corpus pred = ensemble_predict(group, dev, aux, mask);
        const metrics::EvalReport report = metrics::evaluate(dev, pred);
        const double score = selection_score(report);
        if (!have_best || score > best.dev_score) {
            have_best = true;
            best.dev_score = score;
            best.dev_report = report;
            best.member_indices = indices;
            best.spec.members.clear();
            for (size_t m : indices) best.spec.members.push_back(names[m]);
        }
    }
    if (!have_best) throw UsageError("select_configuration: no model group found");
    best.spec.method = "configuration";
    return best;
}

}  // namespace morphtag::ensemble
