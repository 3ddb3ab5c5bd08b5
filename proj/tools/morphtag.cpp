// morphtag — contextual morphological analysis and lemmatization toolkit.
//
// Subcommands: induce-rules, stats, train, predict, evaluate, ensemble,
// merge. Every subcommand accepts --config FILE with flat key=value lines;
// command-line flags override config values. Exit codes: 0 success,
// 1 usage error, 2 data error, 3 training divergence.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "morphtag/conllu.hpp"
#include "morphtag/ensemble.hpp"
#include "morphtag/errors.hpp"
#include "morphtag/lemma_rules.hpp"
#include "morphtag/merge.hpp"
#include "morphtag/metrics.hpp"
#include "morphtag/model.hpp"
#include "morphtag/tagset.hpp"
#include "morphtag/version.hpp"

namespace {

using namespace morphtag;

// Resolved settings of one invocation; hashed into the provenance header so
// reruns are attributable to an exact configuration.
struct RunConfig {
    std::map<std::string, std::string> values;

    void set(const std::string& key, const std::string& value) { values[key] = value; }
    void set_if(const std::string& key, const std::string& value) {
        if (!value.empty()) values[key] = value;
    }

    std::string hash() const {
        uint64_t h = 1469598103934665603ull;  // FNV-1a
        auto mix = [&h](const std::string& s) {
            for (unsigned char c : s) {
                h ^= c;
                h *= 1099511628211ull;
            }
        };
        for (const auto& [k, v] : values) {
            mix(k);
            mix("=");
            mix(v);
            mix("\n");
        }
        std::ostringstream out;
        out << std::hex << h;
        return out.str();
    }

    std::string provenance(uint64_t seed) const {
        std::ostringstream out;
        out << kToolName << " " << kVersion << " config=" << hash() << " seed=" << seed;
        return out.str();
    }
};

tagset::CategoryTable load_table(const std::string& path) {
    if (path.empty()) return tagset::CategoryTable::builtin();
    return tagset::CategoryTable::load_file(path);
}

// Applies a flat key=value config file to a parsed subcommand: every key maps
// to the long option of the same name and fills it only when the flag was not
// given on the command line, so flags always win.
void apply_config(CLI::App* sub, const std::string& path) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config " + path);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw DataError("config " + path + " line " + std::to_string(line_no) +
                            ": expected key=value");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        CLI::Option* opt = nullptr;
        try {
            opt = sub->get_option("--" + key);
        } catch (const CLI::OptionNotFound&) {
            try {
                opt = sub->get_option(key);  // positionals
            } catch (const CLI::OptionNotFound&) {
                throw UsageError("config " + path + ": unknown key '" + key + "'");
            }
        }
        if (opt->count() > 0) continue;  // command line wins
        opt->add_result(value);
        opt->run_callback();
    }
}

// Presence checks for options that may arrive via --config.
void require_value(const std::string& value, const char* flag) {
    if (value.empty()) throw UsageError(std::string(flag) + " is required");
}

std::ostream& open_or_stdout(std::ofstream& file, const std::string& path) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path, std::ios::binary);
    if (!file) throw DataError("cannot write " + path);
    return file;
}

struct TrainOptions {
    std::string train_path, dev_path, model_out, model_dir;
    std::string word_vectors_path, sidecar_path, table_path;
    std::vector<std::string> merge_train;
    std::string encoder = "bigru";
    std::string char_composer = "average";
    std::string configuration;
    double w = 1.0;
    double lr = 1e-3;
    uint64_t seed = 42;
    size_t epochs = 20, batch_size = 32;
    size_t word_dim = 64, char_dim = 64, hidden_dim = 64, layers = 1, window = 2;
    double early_stop = 0.0;
    bool grid = false;
};

model::ModelConfig make_model_config(const TrainOptions& opt, const RunConfig& rc) {
    model::ModelConfig cfg;
    cfg.word_dim = opt.word_dim;
    cfg.char_dim = opt.char_dim;
    cfg.hidden_dim = opt.hidden_dim;
    cfg.layers = opt.layers;
    cfg.window = opt.window;
    if (opt.encoder == "bigru")
        cfg.encoder = model::EncoderKind::BiGru;
    else if (opt.encoder == "window")
        cfg.encoder = model::EncoderKind::Window;
    else
        throw UsageError("unknown encoder '" + opt.encoder + "' (bigru or window)");
    if (opt.char_composer == "average")
        cfg.char_composer = model::CharComposerKind::Average;
    else if (opt.char_composer == "bigru")
        cfg.char_composer = model::CharComposerKind::BiGru;
    else
        throw UsageError("unknown char composer '" + opt.char_composer +
                         "' (average or bigru)");
    cfg.w = opt.w;
    cfg.lr = opt.lr;
    cfg.seed = opt.seed;
    cfg.epochs = opt.epochs;
    cfg.batch_size = opt.batch_size;
    cfg.early_stop_train_acc = opt.early_stop;
    cfg.config_hash = rc.hash();
    return cfg;
}

RunConfig collect(const TrainOptions& opt) {
    RunConfig rc;
    rc.set_if("train", opt.train_path);
    rc.set_if("dev", opt.dev_path);
    rc.set_if("word_vectors", opt.word_vectors_path);
    rc.set_if("contextual_sidecar", opt.sidecar_path);
    rc.set_if("category_table", opt.table_path);
    rc.set("w", std::to_string(opt.w));
    rc.set("lr", std::to_string(opt.lr));
    rc.set("seed", std::to_string(opt.seed));
    rc.set("epochs", std::to_string(opt.epochs));
    rc.set("batch_size", std::to_string(opt.batch_size));
    rc.set("word_dim", std::to_string(opt.word_dim));
    rc.set("char_dim", std::to_string(opt.char_dim));
    rc.set("hidden_dim", std::to_string(opt.hidden_dim));
    rc.set("layers", std::to_string(opt.layers));
    rc.set("window", std::to_string(opt.window));
    rc.set("encoder", opt.encoder);
    rc.set("char_composer", opt.char_composer);
    return rc;
}

int cmd_induce_rules(const std::string& train_path, const std::string& out_path) {
    const conllu::Corpus corpus = conllu::parse_conllu_file(train_path);
    const auto inventory = lemma::rule_inventory(corpus);
    RunConfig rc;
    rc.set("train", train_path);
    std::ofstream file;
    std::ostream& out = open_or_stdout(file, out_path);
    out << "# " << rc.provenance(0) << "\n";
    for (const auto& [rule, count] : inventory) out << rule << "\t" << count << "\n";
    return 0;
}

int cmd_stats(const std::string& train_path, const std::string& table_path) {
    const conllu::Corpus corpus = conllu::parse_conllu_file(train_path);
    if (corpus.sentences.empty()) throw DataError("empty corpus: " + train_path);
    const tagset::CategoryTable table = load_table(table_path);
    const tagset::TagInventory inv = tagset::build_inventory(corpus, table);
    const auto rules = lemma::rule_inventory(corpus);
    RunConfig rc;
    rc.set("train", train_path);
    rc.set_if("category_table", table_path);
    std::cout << "# " << rc.provenance(0) << "\n";
    std::cout << "treebank=" << corpus.treebank_id << "\n";
    std::cout << "words=" << corpus.token_count() << "\n";
    std::cout << "lemma_rules=" << rules.size() << "\n";
    std::cout << "tags=" << inv.bundle_count() << "\n";
    std::cout << "features=" << inv.feature_count() << "\n";
    std::cout << "categories=" << inv.category_count() << "\n";
    return 0;
}

void train_one(const TrainOptions& opt, const conllu::Corpus& train_corpus,
               const conllu::Corpus& dev_corpus, const tagset::CategoryTable& table,
               const model::AuxInputs& aux, bool use_contextual,
               const std::string& configuration, uint64_t seed, const std::string& out_path) {
    TrainOptions local = opt;
    local.seed = seed;
    RunConfig rc = collect(local);
    rc.set("configuration", configuration);
    model::ModelConfig cfg = make_model_config(local, rc);
    cfg.configuration = configuration;
    cfg.use_pretrained = aux.word_vectors != nullptr;
    cfg.use_contextual = use_contextual && aux.sidecar != nullptr;
    model::AuxInputs effective = aux;
    if (!cfg.use_contextual) effective.sidecar = nullptr;

    std::cerr << "training configuration=" << configuration << " seed=" << seed << " -> "
              << out_path << "\n";
    model::TrainResult result =
        model::train(train_corpus, dev_corpus, cfg, table, effective, &std::cerr);
    model::save_model(result.model, out_path);
}

int cmd_train(const TrainOptions& opt) {
    const conllu::Corpus train_corpus = conllu::parse_conllu_file(opt.train_path);
    conllu::Corpus dev_corpus;
    if (!opt.dev_path.empty()) dev_corpus = conllu::parse_conllu_file(opt.dev_path);
    const tagset::CategoryTable table = load_table(opt.table_path);

    embeddings::WordVectorTable word_vectors;
    embeddings::ContextualSidecar sidecar;
    model::AuxInputs aux;
    if (!opt.word_vectors_path.empty()) {
        word_vectors = embeddings::load_word_vectors_file(opt.word_vectors_path);
        aux.word_vectors = &word_vectors;
    }
    if (!opt.sidecar_path.empty()) {
        sidecar = embeddings::load_sidecar_file(opt.sidecar_path);
        aux.sidecar = &sidecar;
    }

    if (!opt.grid) {
        std::string configuration = opt.configuration.empty()
                                        ? (aux.sidecar ? "regular" : "no_contextual")
                                        : opt.configuration;
        if (opt.model_out.empty()) throw UsageError("train: --model-out is required");
        train_one(opt, train_corpus, dev_corpus, table, aux, aux.sidecar != nullptr,
                  configuration, opt.seed, opt.model_out);
        return 0;
    }

    // 3x3 grid: {regular, merged, no_contextual} x replicas
    if (opt.model_dir.empty()) throw UsageError("train --grid: --model-dir is required");
    std::filesystem::create_directories(opt.model_dir);
    conllu::Corpus merged_corpus;
    bool have_merged = false;
    if (!opt.merge_train.empty()) {
        std::vector<conllu::Corpus> members{train_corpus};
        for (const std::string& path : opt.merge_train)
            members.push_back(conllu::parse_conllu_file(path));
        merged_corpus = merge::merge_corpora(members);
        have_merged = true;
    } else {
        std::cerr << "train --grid: no --merge-train corpora; the merged configuration "
                     "falls back to the training corpus alone\n";
    }
    for (int replica = 1; replica <= 3; ++replica) {
        const uint64_t seed = opt.seed + static_cast<uint64_t>(replica - 1);
        const std::string suffix = "-" + std::to_string(replica) + ".mfm";
        train_one(opt, train_corpus, dev_corpus, table, aux, true, "regular", seed,
                  opt.model_dir + "/regular" + suffix);
        train_one(opt, have_merged ? merged_corpus : train_corpus, dev_corpus, table, aux,
                  true, "merged", seed, opt.model_dir + "/merged" + suffix);
        train_one(opt, train_corpus, dev_corpus, table, aux, false, "no_contextual", seed,
                  opt.model_dir + "/no_contextual" + suffix);
    }
    return 0;
}

struct PredictOptions {
    std::string model_path, ensemble_path, input_path, output_path, mask_path;
    std::string word_vectors_path, sidecar_path;
};

int cmd_predict(const PredictOptions& opt) {
    if (opt.model_path.empty() == opt.ensemble_path.empty())
        throw UsageError("predict: exactly one of --model or --ensemble is required");
    const conllu::Corpus input = conllu::parse_conllu_file(opt.input_path);

    embeddings::WordVectorTable word_vectors;
    embeddings::ContextualSidecar sidecar;
    model::AuxInputs aux;
    if (!opt.word_vectors_path.empty()) {
        word_vectors = embeddings::load_word_vectors_file(opt.word_vectors_path);
        aux.word_vectors = &word_vectors;
    }
    if (!opt.sidecar_path.empty()) {
        sidecar = embeddings::load_sidecar_file(opt.sidecar_path);
        aux.sidecar = &sidecar;
    }

    merge::RestrictionMask mask;
    const merge::RestrictionMask* mask_ptr = nullptr;
    if (!opt.mask_path.empty()) {
        mask = merge::load_mask_file(opt.mask_path);
        mask_ptr = &mask;
    }

    RunConfig rc;
    rc.set_if("model", opt.model_path);
    rc.set_if("ensemble", opt.ensemble_path);
    rc.set("input", opt.input_path);
    rc.set_if("mask", opt.mask_path);
    rc.set_if("word_vectors", opt.word_vectors_path);
    rc.set_if("contextual_sidecar", opt.sidecar_path);

    conllu::Corpus pred;
    uint64_t seed = 0;
    if (!opt.model_path.empty()) {
        const model::TaggerModel m = model::load_model(opt.model_path);
        seed = m.config.seed;
        pred = model::predict(input, m, aux, mask_ptr);
    } else {
        const ensemble::EnsembleSpec spec = ensemble::load_spec_file(opt.ensemble_path);
        std::vector<model::TaggerModel> loaded;
        loaded.reserve(spec.members.size());
        for (const std::string& path : spec.members) loaded.push_back(model::load_model(path));
        std::vector<const model::TaggerModel*> members;
        for (const model::TaggerModel& m : loaded) members.push_back(&m);
        pred = ensemble::ensemble_predict(members, input, aux, mask_ptr);
    }

    std::ofstream file;
    std::ostream& out = open_or_stdout(file, opt.output_path);
    out << "# " << rc.provenance(seed) << "\n";
    out << conllu::serialize_conllu(pred);
    return 0;
}

int cmd_evaluate(const std::string& gold_path, const std::string& pred_path, bool macro) {
    const conllu::Corpus gold = conllu::parse_conllu_file(gold_path);
    const conllu::Corpus pred = conllu::parse_conllu_file(pred_path);
    const metrics::EvalReport report = metrics::evaluate(gold, pred);
    RunConfig rc;
    rc.set("gold", gold_path);
    rc.set("pred", pred_path);
    std::cout << "# " << rc.provenance(0) << "\n";
    std::cout << metrics::format_report_table(report) << "\n";
    std::cout << metrics::format_report_keyvalues(report, macro);
    return 0;
}

int cmd_merge(const std::vector<std::string>& inputs, const std::string& out_path,
              const std::string& mask_dir) {
    std::vector<conllu::Corpus> corpora;
    corpora.reserve(inputs.size());
    for (const std::string& path : inputs) corpora.push_back(conllu::parse_conllu_file(path));
    const conllu::Corpus merged = merge::merge_corpora(corpora);
    RunConfig rc;
    for (size_t i = 0; i < inputs.size(); ++i) rc.set("input" + std::to_string(i), inputs[i]);
    conllu::write_conllu_file(merged, out_path, rc.provenance(0));

    if (!mask_dir.empty()) {
        std::filesystem::create_directories(mask_dir);
        const model::Vocabulary vocab =
            model::build_vocabulary(merged, tagset::CategoryTable::builtin());
        for (const conllu::Corpus& corpus : corpora) {
            const merge::RestrictionMask mask = merge::build_mask(vocab, corpus);
            merge::write_mask_file(mask, mask_dir + "/" + corpus.treebank_id + ".mask",
                                   rc.provenance(0));
        }
    }
    return 0;
}

struct EnsembleOptions {
    std::vector<std::string> models;
    std::string dev_path, out_path, method = "configuration", mask_path;
    std::string word_vectors_path, sidecar_path;
};

int cmd_ensemble(const EnsembleOptions& opt) {
    if (opt.models.empty()) throw UsageError("ensemble: --models is required");
    const conllu::Corpus dev = conllu::parse_conllu_file(opt.dev_path);

    embeddings::WordVectorTable word_vectors;
    embeddings::ContextualSidecar sidecar;
    model::AuxInputs aux;
    if (!opt.word_vectors_path.empty()) {
        word_vectors = embeddings::load_word_vectors_file(opt.word_vectors_path);
        aux.word_vectors = &word_vectors;
    }
    if (!opt.sidecar_path.empty()) {
        sidecar = embeddings::load_sidecar_file(opt.sidecar_path);
        aux.sidecar = &sidecar;
    }
    merge::RestrictionMask mask;
    const merge::RestrictionMask* mask_ptr = nullptr;
    if (!opt.mask_path.empty()) {
        mask = merge::load_mask_file(opt.mask_path);
        mask_ptr = &mask;
    }

    std::vector<model::TaggerModel> loaded;
    loaded.reserve(opt.models.size());
    for (const std::string& path : opt.models) loaded.push_back(model::load_model(path));
    std::vector<const model::TaggerModel*> members;
    for (const model::TaggerModel& m : loaded) members.push_back(&m);

    ensemble::SelectionResult result;
    if (opt.method == "configuration")
        result = ensemble::select_configuration(members, opt.models, dev, aux, mask_ptr);
    else if (opt.method == "any-subset")
        result = ensemble::select_any_subset(members, opt.models, dev, aux, mask_ptr);
    else
        throw UsageError("unknown selection method '" + opt.method +
                         "' (configuration or any-subset)");

    RunConfig rc;
    for (size_t i = 0; i < opt.models.size(); ++i)
        rc.set("model" + std::to_string(i), opt.models[i]);
    rc.set("dev", opt.dev_path);
    rc.set("method", opt.method);

    std::cout << "# " << rc.provenance(0) << "\n";
    std::cout << "method=" << result.spec.method << "\n";
    std::cout << "dev_score=" << result.dev_score << "\n";
    std::cout << "dev_lemma_acc=" << result.dev_report.lemma_accuracy << "\n";
    std::cout << "dev_morph_acc=" << result.dev_report.morph_accuracy << "\n";
    for (const std::string& m : result.spec.members) std::cout << "member=" << m << "\n";
    if (!opt.out_path.empty())
        ensemble::write_spec_file(result.spec, opt.out_path, rc.provenance(0));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"contextual morphological analysis and lemmatization toolkit"};
    app.require_subcommand(1);

    // induce-rules
    std::string ir_train, ir_out;
    CLI::App* induce = app.add_subcommand("induce-rules", "induce lemma rules from a corpus");
    induce->add_option("train", ir_train, "training CoNLL-U file")
        ->required()
        ->check(CLI::ExistingFile);
    induce->add_option("-o,--out", ir_out, "output file (default stdout)");

    // stats
    std::string st_train, st_table;
    CLI::App* stats = app.add_subcommand("stats", "corpus statistics");
    stats->add_option("train", st_train, "training CoNLL-U file")
        ->required()
        ->check(CLI::ExistingFile);
    stats->add_option("--category-table", st_table, "value<TAB>category file");

    // train
    TrainOptions tr;
    CLI::App* train = app.add_subcommand("train", "train a tagger/lemmatizer model");
    train->add_option("--train", tr.train_path, "training CoNLL-U file")
        ->check(CLI::ExistingFile);
    train->add_option("--dev", tr.dev_path, "development CoNLL-U file")
        ->check(CLI::ExistingFile);
    train->add_option("--model-out", tr.model_out, "output model path");
    train->add_option("--model-dir", tr.model_dir, "output directory for --grid");
    train->add_option("--word-vectors", tr.word_vectors_path, "pretrained word vectors")
        ->check(CLI::ExistingFile);
    train->add_option("--contextual-sidecar", tr.sidecar_path, "precomputed contextual vectors")
        ->check(CLI::ExistingFile);
    train->add_option("--category-table", tr.table_path, "value<TAB>category file");
    train->add_option("--merge-train", tr.merge_train,
                      "additional same-language training corpora for the merged configuration");
    train->add_option("--w", tr.w, "category regularization weight");
    train->add_option("--lr", tr.lr, "learning rate");
    train->add_option("--seed", tr.seed, "random seed");
    train->add_option("--epochs", tr.epochs, "training epochs");
    train->add_option("--batch-size", tr.batch_size, "sentences per batch");
    train->add_option("--word-dim", tr.word_dim, "learned word embedding dimension");
    train->add_option("--char-dim", tr.char_dim, "character representation dimension");
    train->add_option("--hidden-dim", tr.hidden_dim, "encoder hidden dimension");
    train->add_option("--layers", tr.layers, "encoder layers");
    train->add_option("--window", tr.window, "window encoder half-width");
    train->add_option("--encoder", tr.encoder, "encoder kind: bigru|window");
    train->add_option("--char-composer", tr.char_composer, "char composer: average|bigru");
    train->add_option("--configuration", tr.configuration,
                      "configuration label: regular|merged|no_contextual");
    train->add_option("--early-stop-train-acc", tr.early_stop,
                      "stop when train lemma+morph accuracy reach this percent");
    train->add_flag("--grid", tr.grid, "train the 3x3 configuration grid");

    // predict
    PredictOptions pr;
    CLI::App* predict = app.add_subcommand("predict", "fill lemmas and feature bundles");
    predict->add_option("--model", pr.model_path, "model file")->check(CLI::ExistingFile);
    predict->add_option("--ensemble", pr.ensemble_path, "ensemble spec file")
        ->check(CLI::ExistingFile);
    predict->add_option("--input", pr.input_path, "input CoNLL-U file")
        ->check(CLI::ExistingFile);
    predict->add_option("-o,--output", pr.output_path, "output file (default stdout)");
    predict->add_option("--mask", pr.mask_path, "restriction mask file")
        ->check(CLI::ExistingFile);
    predict->add_option("--word-vectors", pr.word_vectors_path, "pretrained word vectors")
        ->check(CLI::ExistingFile);
    predict->add_option("--contextual-sidecar", pr.sidecar_path,
                        "precomputed contextual vectors")
        ->check(CLI::ExistingFile);

    // evaluate
    std::string ev_gold, ev_pred;
    bool ev_macro = false;
    CLI::App* evaluate = app.add_subcommand("evaluate", "score predictions against gold");
    evaluate->add_option("--gold", ev_gold, "gold CoNLL-U file")
        ->check(CLI::ExistingFile);
    evaluate->add_option("--pred", ev_pred, "predicted CoNLL-U file")
        ->check(CLI::ExistingFile);
    evaluate->add_flag("--macro-f1", ev_macro, "also report macro-averaged morph F1");

    // merge
    std::vector<std::string> mg_inputs;
    std::string mg_out, mg_mask_dir;
    CLI::App* merge_cmd = app.add_subcommand("merge", "merge same-language corpora");
    merge_cmd->add_option("inputs", mg_inputs, "CoNLL-U files to merge")
        ->required()
        ->check(CLI::ExistingFile);
    merge_cmd->add_option("-o,--out", mg_out, "merged corpus output");
    merge_cmd->add_option("--mask-dir", mg_mask_dir,
                          "write per-member restriction masks into this directory");

    // ensemble
    EnsembleOptions en;
    CLI::App* ens = app.add_subcommand("ensemble", "select an ensemble on development data");
    ens->add_option("--models", en.models, "member model files")
        ->delimiter(',')
        ->check(CLI::ExistingFile);
    ens->add_option("--dev", en.dev_path, "development CoNLL-U file")
        ->check(CLI::ExistingFile);
    ens->add_option("--method", en.method, "configuration|any-subset");
    ens->add_option("-o,--out", en.out_path, "ensemble spec output file");
    ens->add_option("--mask", en.mask_path, "restriction mask file")->check(CLI::ExistingFile);
    ens->add_option("--word-vectors", en.word_vectors_path, "pretrained word vectors")
        ->check(CLI::ExistingFile);
    ens->add_option("--contextual-sidecar", en.sidecar_path, "precomputed contextual vectors")
        ->check(CLI::ExistingFile);

    // flat key=value config file per subcommand; command-line flags win
    std::map<const CLI::App*, std::string> config_paths;
    for (CLI::App* sub : {induce, stats, train, predict, evaluate, merge_cmd, ens})
        sub->add_option("--config", config_paths[sub], "flat key=value config file");

    try {
        app.parse(argc, argv);
        for (CLI::App* sub : {induce, stats, train, predict, evaluate, merge_cmd, ens})
            if (sub->parsed()) apply_config(sub, config_paths[sub]);
        if (*induce) {
            require_value(ir_train, "train");
            return cmd_induce_rules(ir_train, ir_out);
        }
        if (*stats) {
            require_value(st_train, "train");
            return cmd_stats(st_train, st_table);
        }
        if (*train) {
            require_value(tr.train_path, "--train");
            return cmd_train(tr);
        }
        if (*predict) {
            require_value(pr.input_path, "--input");
            return cmd_predict(pr);
        }
        if (*evaluate) {
            require_value(ev_gold, "--gold");
            require_value(ev_pred, "--pred");
            return cmd_evaluate(ev_gold, ev_pred, ev_macro);
        }
        if (*merge_cmd) {
            if (mg_inputs.empty()) throw UsageError("merge: input corpora are required");
            require_value(mg_out, "--out");
            return cmd_merge(mg_inputs, mg_out, mg_mask_dir);
        }
        if (*ens) {
            require_value(en.dev_path, "--dev");
            return cmd_ensemble(en);
        }
        throw UsageError("no subcommand given");
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const DivergenceError& e) {
        std::cerr << "training diverged: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
