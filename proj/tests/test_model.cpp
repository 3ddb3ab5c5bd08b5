#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "helpers.hpp"
#include "morphtag/errors.hpp"
#include "morphtag/merge.hpp"
#include "morphtag/metrics.hpp"
#include "morphtag/model.hpp"

using namespace morphtag;

namespace {

model::ModelConfig tiny_config(uint64_t seed = 5) {
    model::ModelConfig cfg;
    cfg.word_dim = 4;
    cfg.char_dim = 4;
    cfg.hidden_dim = 3;
    cfg.layers = 1;
    cfg.window = 1;
    cfg.seed = seed;
    cfg.batch_size = 8;
    cfg.lr = 1e-2;
    return cfg;
}

std::vector<const conllu::Sentence*> all_sentences(const conllu::Corpus& corpus) {
    std::vector<const conllu::Sentence*> out;
    for (const conllu::Sentence& s : corpus.sentences) out.push_back(&s);
    return out;
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("build_vocabulary") {
    const tagset::CategoryTable& table = tagset::CategoryTable::builtin();

    SUBCASE("identity corpus has one rule plus the reserved slot") {
        const conllu::Corpus corpus = testutil::corpus_from_blocks(
            {{{"alpha", "alpha", "X"}, {"beta", "beta", "X"}}});
        const model::Vocabulary vocab = model::build_vocabulary(corpus, table);
        CHECK(vocab.rules.size() == 2);  // <unk> + identity
        CHECK(vocab.rules.items[1] == lemma::kIdentityRuleText);
        CHECK(vocab.bundles.size() == 2);
    }

    SUBCASE("counts match set oracles on a synthetic corpus") {
        const conllu::Corpus corpus = testutil::synthetic_corpus(15, 6, 51);
        const model::Vocabulary vocab = model::build_vocabulary(corpus, table);
        std::set<std::string> forms, bundles, rules;
        for (const auto& s : corpus.sentences)
            for (const auto& t : s.tokens) {
                forms.insert(t.form);
                if (t.bundle) bundles.insert(t.bundle->canonical_text());
                if (t.lemma)
                    rules.insert(
                        lemma::serialize_rule(lemma::induce_rule(t.form, *t.lemma)));
            }
        CHECK(vocab.words.size() == forms.size() + 1);
        CHECK(vocab.bundles.size() == bundles.size() + 1);
        CHECK(vocab.rules.size() == rules.size() + 1);
        // every category vocabulary carries <unk> and None
        for (const auto& cat : vocab.categories) {
            CHECK(cat.values.items[0] == "<unk>");
            CHECK(cat.values.get("None") == 1);
        }
    }

    SUBCASE("unannotated corpus is rejected") {
        const conllu::Corpus corpus =
            conllu::parse_conllu("1\tword\t_\t_\t_\t_\t_\t_\t_\t_\n\n", "T");
        CHECK_THROWS_AS(model::build_vocabulary(corpus, table), DataError);
    }
}

TEST_CASE("encode shapes and context sensitivity") {
    const tagset::CategoryTable& table = tagset::CategoryTable::builtin();
    const conllu::Corpus corpus = testutil::synthetic_corpus(6, 5, 13);
    model::AuxInputs aux;

    SUBCASE("single-token sentence gives one state of the configured width") {
        model::ModelConfig cfg = tiny_config();
        model::TaggerModel m = model::build_model(cfg, model::build_vocabulary(corpus, table));
        const conllu::Corpus one = testutil::corpus_from_blocks({{{"books", "book", "N;PL"}}});
        const auto states = model::encode(one.sentences[0], m, aux);
        REQUIRE(states.size() == 1);
        CHECK(states[0].size() == cfg.encoder_output_dim());
    }

    SUBCASE("bigru: permuting other tokens changes a token's state") {
        model::TaggerModel m =
            model::build_model(tiny_config(), model::build_vocabulary(corpus, table));
        const conllu::Corpus pair = testutil::corpus_from_blocks({
            {{"books", "book", "N;PL"}, {"walked", "walk", "V;PST"}, {"trees", "tree", "N;PL"}},
            {{"trees", "tree", "N;PL"}, {"walked", "walk", "V;PST"}, {"books", "book", "N;PL"}},
        });
        const auto a = model::encode(pair.sentences[0], m, aux);
        const auto b = model::encode(pair.sentences[1], m, aux);
        // middle token identical, context swapped: state must differ
        double diff = 0;
        for (size_t i = 0; i < a[1].size(); ++i) diff += std::abs(a[1][i] - b[1][i]);
        CHECK(diff > 1e-9);
    }

    SUBCASE("window encoder sees neighbours inside the window") {
        model::ModelConfig cfg = tiny_config();
        cfg.encoder = model::EncoderKind::Window;
        cfg.window = 1;
        model::TaggerModel m = model::build_model(cfg, model::build_vocabulary(corpus, table));
        const conllu::Corpus pair = testutil::corpus_from_blocks({
            {{"books", "book", "N;PL"}, {"walked", "walk", "V;PST"}, {"trees", "tree", "N;PL"}},
            {{"trees", "tree", "N;PL"}, {"walked", "walk", "V;PST"}, {"books", "book", "N;PL"}},
        });
        const auto a = model::encode(pair.sentences[0], m, aux);
        const auto b = model::encode(pair.sentences[1], m, aux);
        double diff = 0;
        for (size_t i = 0; i < a[1].size(); ++i) diff += std::abs(a[1][i] - b[1][i]);
        CHECK(diff > 1e-9);
    }

    SUBCASE("zero aux vectors make the aux weights irrelevant") {
        model::ModelConfig cfg = tiny_config();
        cfg.use_pretrained = true;
        cfg.pretrained_dim = 3;
        embeddings::WordVectorTable vectors;
        vectors.set_dimension(3);
        vectors.add("somethingelse", {1.0f, 2.0f, 3.0f});
        model::AuxInputs with_vectors;
        with_vectors.word_vectors = &vectors;

        model::TaggerModel m = model::build_model(cfg, model::build_vocabulary(corpus, table));
        // every form is OOV for the table, so the aux block is all zeros
        const auto before = model::encode(corpus.sentences[0], m, with_vectors);
        // randomize the encoder weight columns that multiply the aux block
        const size_t aux_off = cfg.word_dim + cfg.char_dim;
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> dist(-1, 1);
        for (nn::Param* p : {m.enc_fwd[0].wz, m.enc_fwd[0].wr, m.enc_fwd[0].wc,
                             m.enc_bwd[0].wz, m.enc_bwd[0].wr, m.enc_bwd[0].wc})
            for (size_t r = 0; r < p->rows; ++r)
                for (size_t c = aux_off; c < p->cols; ++c) p->row(r)[c] = dist(rng);
        const auto after = model::encode(corpus.sentences[0], m, with_vectors);
        CHECK(before == after);
    }
}

TEST_CASE("forward heads") {
    const tagset::CategoryTable& table = tagset::CategoryTable::builtin();
    const conllu::Corpus corpus = testutil::synthetic_corpus(8, 5, 23);
    model::AuxInputs aux;

    SUBCASE("distributions sum to one") {
        model::TaggerModel m =
            model::build_model(tiny_config(), model::build_vocabulary(corpus, table));
        const auto dists = model::sentence_distributions(corpus.sentences[0], m, aux);
        for (const auto& d : dists) {
            double rs = 0, bs = 0;
            for (double p : d.rule_probs) rs += p;
            for (double p : d.bundle_probs) bs += p;
            CHECK(rs == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(bs == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(d.rule_probs[0] == 0.0);
            CHECK(d.bundle_probs[0] == 0.0);
        }
    }

    SUBCASE("zero weights give uniform distributions over real labels") {
        model::TaggerModel m =
            model::build_model(tiny_config(), model::build_vocabulary(corpus, table));
        for (const auto& p : m.params.all()) std::fill(p->w.begin(), p->w.end(), 0.0);
        const auto dists = model::sentence_distributions(corpus.sentences[0], m, aux);
        const double expected = 1.0 / static_cast<double>(m.vocab.rules.size() - 1);
        for (size_t i = 1; i < m.vocab.rules.size(); ++i)
            CHECK(dists[0].rule_probs[i] == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("loss composition") {
    const tagset::CategoryTable& table = tagset::CategoryTable::builtin();
    const conllu::Corpus corpus = testutil::synthetic_corpus(6, 5, 37);
    model::AuxInputs aux;
    model::TaggerModel m =
        model::build_model(tiny_config(), model::build_vocabulary(corpus, table));
    const auto batch = all_sentences(corpus);

    SUBCASE("w = 0 reduces to lemma + bundle CE") {
        const model::LossStats l0 = model::loss(m, batch, aux, table, 0.0, false);
        CHECK(l0.total == l0.lemma_ce + l0.bundle_ce);
    }

    SUBCASE("loss(w) - loss(0) == w * mean category CE") {
        const model::LossStats l0 = model::loss(m, batch, aux, table, 0.0, false);
        for (double w : {0.5, 1.0, 2.0}) {
            const model::LossStats lw = model::loss(m, batch, aux, table, w, false);
            CHECK(std::abs(lw.total - l0.total - w * lw.category_ce) / l0.total < 1e-12);
            CHECK(lw.lemma_ce == l0.lemma_ce);
            CHECK(lw.bundle_ce == l0.bundle_ce);
            CHECK(lw.category_ce == l0.category_ce);
        }
    }

    SUBCASE("single-category corpus: loss = three CEs") {
        // PUNCT-only bundles use exactly one category
        const conllu::Corpus punct = testutil::corpus_from_blocks(
            {{{"people", "people", "PUNCT"}, {".", ".", "PUNCT"}}});
        model::TaggerModel pm =
            model::build_model(tiny_config(), model::build_vocabulary(punct, table));
        REQUIRE(pm.vocab.categories.size() == 1);
        const model::LossStats l = model::loss(pm, all_sentences(punct), aux, table, 1.0, false);
        CHECK(l.total == doctest::Approx(l.lemma_ce + l.bundle_ce + l.category_ce).epsilon(1e-15));
    }

    SUBCASE("unseen gold labels map to UNK with a warning") {
        const conllu::Corpus other = testutil::corpus_from_blocks(
            {{{"zzz", "qqq", "X;Y;Z"}}});
        std::vector<std::string> warnings;
        const model::LossStats l =
            model::loss(m, all_sentences(other), aux, table, 1.0, false, &warnings);
        CHECK(l.tokens == 1);
        CHECK(warnings.size() >= 2);  // rule and bundle both unseen
    }
}

TEST_CASE("analytic gradients match central finite differences") {
    const tagset::CategoryTable& table = tagset::CategoryTable::builtin();
    // tiny corpus, tiny dims: the whole model stays under 1k parameters
    const conllu::Corpus corpus = testutil::corpus_from_blocks({
        {{"ab", "ab", "N;SG"}, {"cds", "cd", "N;PL"}},
        {{"Be", "be", "V;PRS"}, {"cds", "cd", "N;PL"}},
    });
    model::AuxInputs aux;
    const auto batch = all_sentences(corpus);

    auto check_model = [&](model::ModelConfig cfg) {
        cfg.word_dim = 3;
        cfg.char_dim = 4;
        cfg.hidden_dim = 2;
        model::TaggerModel m = model::build_model(cfg, model::build_vocabulary(corpus, table));
        CAPTURE(m.params.total_size());
        CHECK(m.params.total_size() <= 1000);

        m.params.zero_grads();
        model::loss(m, batch, aux, table, 0.7, true);
        double max_err = 0;
        for (const auto& p : m.params.all()) {
            for (size_t j = 0; j < p->size(); ++j) {
                const double saved = p->w[j];
                const double h = 1e-5;
                p->w[j] = saved + h;
                const double up = model::loss(m, batch, aux, table, 0.7, false).total;
                p->w[j] = saved - h;
                const double down = model::loss(m, batch, aux, table, 0.7, false).total;
                p->w[j] = saved;
                const double fd = (up - down) / (2 * h);
                // the floor matches the finite-difference round-off scale
                // (eps * |loss| / h), so vanishing gradients do not inflate
                // the relative error
                const double err =
                    std::abs(p->g[j] - fd) / std::max(1e-6, std::abs(p->g[j]) + std::abs(fd));
                max_err = std::max(max_err, err);
            }
        }
        CHECK(max_err < 1e-4);
    };

    SUBCASE("bigru encoder, averaging composer") { check_model(tiny_config()); }
    SUBCASE("window encoder") {
        model::ModelConfig cfg = tiny_config();
        cfg.encoder = model::EncoderKind::Window;
        check_model(cfg);
    }
    SUBCASE("bigru char composer") {
        model::ModelConfig cfg = tiny_config();
        cfg.char_composer = model::CharComposerKind::BiGru;
        check_model(cfg);
    }
    SUBCASE("two stacked bigru layers") {
        model::ModelConfig cfg = tiny_config();
        cfg.layers = 2;
        check_model(cfg);
    }
    SUBCASE("two stacked window layers") {
        model::ModelConfig cfg = tiny_config();
        cfg.encoder = model::EncoderKind::Window;
        cfg.layers = 2;
        check_model(cfg);
    }
}

TEST_CASE("training with frozen auxiliary inputs") {
    const tagset::CategoryTable& table = tagset::CategoryTable::builtin();
    const conllu::Corpus corpus = testutil::synthetic_corpus(10, 5, 83);

    // pretrained vectors covering part of the vocabulary
    embeddings::WordVectorTable vectors;
    vectors.set_dimension(5);
    {
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<float> dist(-1, 1);
        for (const auto& sent : corpus.sentences)
            for (const auto& tok : sent.tokens)
                if (!vectors.contains(tok.form)) {
                    std::vector<float> v(5);
                    for (float& x : v) x = dist(rng);
                    vectors.add(tok.form, v);
                }
    }
    // contextual vectors keyed by the corpus sentence ids
    embeddings::ContextualSidecar sidecar;
    {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<float> dist(-1, 1);
        for (const auto& sent : corpus.sentences) {
            std::vector<float> block(sent.tokens.size() * 3);
            for (float& x : block) x = dist(rng);
            sidecar.add(sent.sent_id(), sent.tokens.size(), std::move(block));
        }
    }
    model::AuxInputs aux;
    aux.word_vectors = &vectors;
    aux.sidecar = &sidecar;

    model::ModelConfig cfg = tiny_config();
    cfg.use_pretrained = true;
    cfg.use_contextual = true;
    cfg.epochs = 3;
    const model::TrainResult trained = model::train(corpus, corpus, cfg, table, aux);
    CHECK(trained.model.config.pretrained_dim == 5);
    CHECK(trained.model.config.contextual_dim == 3);

    SUBCASE("aux tables stay frozen through training") {
        // regenerate the sidecar block of the first sentence from the same
        // seed: training must not have touched a single value
        std::mt19937_64 rng2(5);
        std::uniform_real_distribution<float> dist2(-1, 1);
        const auto block = sidecar.lookup(corpus.sentences[0].sent_id());
        for (float x : block) CHECK(x == dist2(rng2));
    }

    SUBCASE("contextual vectors feed the encoder") {
        embeddings::ContextualSidecar zeros;
        for (const auto& sent : corpus.sentences)
            zeros.add(sent.sent_id(), sent.tokens.size(),
                      std::vector<float>(sent.tokens.size() * 3, 0.0f));
        model::AuxInputs aux_zero;
        aux_zero.word_vectors = &vectors;
        aux_zero.sidecar = &zeros;
        const auto with = model::encode(corpus.sentences[0], trained.model, aux);
        const auto without = model::encode(corpus.sentences[0], trained.model, aux_zero);
        double diff = 0;
        for (size_t i = 0; i < with[0].size(); ++i)
            diff += std::abs(with[0][i] - without[0][i]);
        CHECK(diff > 1e-9);
    }

    SUBCASE("mismatched sidecar token counts are rejected") {
        embeddings::ContextualSidecar bad;
        bad.add(corpus.sentences[0].sent_id(), 1, std::vector<float>(3, 0.0f));
        model::AuxInputs aux_bad;
        aux_bad.word_vectors = &vectors;
        aux_bad.sidecar = &bad;
        CHECK_THROWS_AS(model::encode(corpus.sentences[0], trained.model, aux_bad),
                        DataError);
    }

    SUBCASE("missing aux tables are a usage error for an aux-trained model") {
        CHECK_THROWS_AS(model::predict(corpus, trained.model, {}, nullptr), UsageError);
    }
}

TEST_CASE("a trained model serves concurrent predictors") {
    const tagset::CategoryTable& table = tagset::CategoryTable::builtin();
    const conllu::Corpus corpus = testutil::synthetic_corpus(10, 5, 91);
    model::ModelConfig cfg = tiny_config();
    cfg.epochs = 2;
    const model::TrainResult trained = model::train(corpus, {}, cfg, table, {});
    const conllu::Corpus expected = model::predict(corpus, trained.model, {}, nullptr);

    std::vector<conllu::Corpus> results(4);
    std::vector<std::thread> workers;
    for (size_t i = 0; i < results.size(); ++i)
        workers.emplace_back([&, i] { results[i] = model::predict(corpus, trained.model, {}, nullptr); });
    for (std::thread& t : workers) t.join();
    for (const conllu::Corpus& r : results) CHECK(r == expected);
}

TEST_CASE("training behaviour") {
    const tagset::CategoryTable& table = tagset::CategoryTable::builtin();
    const conllu::Corpus corpus = testutil::synthetic_corpus(50, 6, 41);
    model::AuxInputs aux;

    SUBCASE("loss strictly decreases over the first five epochs") {
        model::ModelConfig cfg = tiny_config();
        cfg.word_dim = 16;
        cfg.char_dim = 16;
        cfg.hidden_dim = 16;
        cfg.epochs = 5;
        const model::TrainResult result = model::train(corpus, {}, cfg, table, aux);
        REQUIRE(result.epochs.size() == 5);
        for (size_t e = 1; e < result.epochs.size(); ++e)
            CHECK(result.epochs[e].train_loss < result.epochs[e - 1].train_loss);
    }

    SUBCASE("learning rate zero leaves parameters at their initialization") {
        model::ModelConfig cfg = tiny_config();
        cfg.lr = 0.0;
        cfg.epochs = 2;
        const model::TaggerModel fresh =
            model::build_model(cfg, model::build_vocabulary(corpus, table));
        const model::TrainResult result = model::train(corpus, {}, cfg, table, aux);
        const auto& trained = result.model.params.all();
        const auto& initial = fresh.params.all();
        REQUIRE(trained.size() == initial.size());
        for (size_t i = 0; i < trained.size(); ++i) {
            std::vector<double> rounded = initial[i]->w;
            for (double& v : rounded) v = static_cast<double>(static_cast<float>(v));
            CHECK(trained[i]->w == rounded);
        }
    }

    SUBCASE("fixed seed gives bit-identical runs") {
        model::ModelConfig cfg = tiny_config();
        cfg.epochs = 3;
        const model::TrainResult a = model::train(corpus, {}, cfg, table, aux);
        const model::TrainResult b = model::train(corpus, {}, cfg, table, aux);
        for (size_t i = 0; i < a.model.params.all().size(); ++i)
            CHECK(a.model.params.all()[i]->w == b.model.params.all()[i]->w);
    }
}

TEST_CASE("prediction") {
    const tagset::CategoryTable& table = tagset::CategoryTable::builtin();
    const conllu::Corpus corpus = testutil::synthetic_corpus(12, 5, 67);
    model::AuxInputs aux;
    model::ModelConfig cfg = tiny_config();
    cfg.epochs = 3;
    const model::TrainResult trained = model::train(corpus, {}, cfg, table, aux);
    const model::TaggerModel& m = trained.model;

    SUBCASE("forced identity mask lowercases every form") {
        merge::RestrictionMask mask;
        mask.rules.insert(lemma::kIdentityRuleText);
        for (size_t i = 1; i < m.vocab.bundles.size(); ++i)
            mask.bundles.insert(m.vocab.bundles.items[i]);
        mask.source_treebank = "forced";
        const conllu::Corpus pred = model::predict(corpus, m, aux, &mask);
        for (const auto& sent : pred.sentences)
            for (const auto& tok : sent.tokens) {
                REQUIRE(tok.lemma.has_value());
                CHECK(*tok.lemma ==
                      utf8::encode(utf8::lowered(utf8::decode(tok.form))));
            }
    }

    SUBCASE("no mask equals the full-vocabulary mask") {
        merge::RestrictionMask full;
        for (size_t i = 1; i < m.vocab.rules.size(); ++i)
            full.rules.insert(m.vocab.rules.items[i]);
        for (size_t i = 1; i < m.vocab.bundles.size(); ++i)
            full.bundles.insert(m.vocab.bundles.items[i]);
        full.source_treebank = "full";
        const conllu::Corpus without = model::predict(corpus, m, aux, nullptr);
        const conllu::Corpus with = model::predict(corpus, m, aux, &full);
        CHECK(without == with);
    }

    SUBCASE("every emitted lemma is non-empty and rules are applicable") {
        const conllu::Corpus pred = model::predict(corpus, m, aux, nullptr);
        for (const auto& sent : pred.sentences)
            for (const auto& tok : sent.tokens) {
                REQUIRE(tok.lemma.has_value());
                CHECK_FALSE(tok.lemma->empty());
                REQUIRE(tok.bundle.has_value());
                CHECK(m.vocab.bundles.get(tok.bundle->canonical_text()) != 0);
            }
    }

    SUBCASE("category heads are inference-inert") {
        model::TaggerModel copy = model::load_model([&] {
            const std::string path = temp_path("morphtag_inert.mfm");
            model::save_model(m, path);
            return path;
        }());
        const conllu::Corpus before = model::predict(corpus, copy, aux, nullptr);
        for (nn::Param* p : copy.cat_w) std::fill(p->w.begin(), p->w.end(), 0.0);
        for (nn::Param* p : copy.cat_b) std::fill(p->w.begin(), p->w.end(), 0.0);
        const conllu::Corpus after = model::predict(corpus, copy, aux, nullptr);
        CHECK(before == after);
    }

    SUBCASE("masked prediction emits only masked labels") {
        // restrict to the three most frequent rules and two bundles
        merge::RestrictionMask mask;
        mask.source_treebank = "restricted";
        for (size_t i = 1; i < std::min<size_t>(4, m.vocab.rules.size()); ++i)
            mask.rules.insert(m.vocab.rules.items[i]);
        mask.rules.insert(lemma::kIdentityRuleText);
        for (size_t i = 1; i < std::min<size_t>(3, m.vocab.bundles.size()); ++i)
            mask.bundles.insert(m.vocab.bundles.items[i]);
        const conllu::Corpus pred = model::predict(corpus, m, aux, &mask);
        for (const auto& sent : pred.sentences)
            for (const auto& tok : sent.tokens)
                CHECK(mask.bundles.count(tok.bundle->canonical_text()) == 1);
    }
}

TEST_CASE("model persistence") {
    const tagset::CategoryTable& table = tagset::CategoryTable::builtin();
    const conllu::Corpus corpus = testutil::synthetic_corpus(8, 5, 71);
    model::AuxInputs aux;
    model::ModelConfig cfg = tiny_config();
    cfg.epochs = 2;
    const model::TrainResult trained = model::train(corpus, {}, cfg, table, aux);
    const std::string path = temp_path("morphtag_roundtrip.mfm");
    model::save_model(trained.model, path);

    SUBCASE("load restores every tensor and vocabulary bit-exactly") {
        const model::TaggerModel loaded = model::load_model(path);
        CHECK(loaded.vocab.rules.items == trained.model.vocab.rules.items);
        CHECK(loaded.vocab.bundles.items == trained.model.vocab.bundles.items);
        CHECK(loaded.vocab.words.items == trained.model.vocab.words.items);
        REQUIRE(loaded.params.all().size() == trained.model.params.all().size());
        for (size_t i = 0; i < loaded.params.all().size(); ++i) {
            CHECK(loaded.params.all()[i]->name == trained.model.params.all()[i]->name);
            CHECK(loaded.params.all()[i]->w == trained.model.params.all()[i]->w);
        }
    }

    SUBCASE("predictions survive the reload") {
        const model::TaggerModel loaded = model::load_model(path);
        const conllu::Corpus a = model::predict(corpus, trained.model, aux, nullptr);
        const conllu::Corpus b = model::predict(corpus, loaded, aux, nullptr);
        CHECK(a == b);
    }

    SUBCASE("truncated files fail the checksum") {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        std::string bytes = buf.str();
        bytes.resize(bytes.size() - 17);
        const std::string broken = temp_path("morphtag_truncated.mfm");
        std::ofstream out(broken, std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.close();
        CHECK_THROWS_WITH_AS(model::load_model(broken), doctest::Contains("checksum"),
                             DataError);
    }

    SUBCASE("wrong magic is rejected") {
        const std::string bad = temp_path("morphtag_bad.mfm");
        std::ofstream out(bad, std::ios::binary);
        out << "NOPE this is not a model";
        out.close();
        CHECK_THROWS_AS(model::load_model(bad), DataError);
    }
}

TEST_CASE("prediction falls back when the best rule does not fit") {
    // Train on long forms whose dominant rule deletes three characters, then
    // predict a two-character form: the argmax rule cannot apply.
    std::vector<std::vector<testutil::Tok>> blocks;
    for (int i = 0; i < 10; ++i)
        blocks.push_back({{"walking", "walk", "V;PROG"}, {"jumping", "jump", "V;PROG"}});
    blocks.push_back({{"go", "go", "V;PRS"}});  // identity also in vocabulary
    const conllu::Corpus corpus = testutil::corpus_from_blocks(blocks);
    const tagset::CategoryTable& table = tagset::CategoryTable::builtin();
    model::AuxInputs aux;
    model::ModelConfig cfg = tiny_config();
    cfg.epochs = 30;
    cfg.lr = 0.05;
    const model::TrainResult trained = model::train(corpus, {}, cfg, table, aux);

    const conllu::Corpus tiny = testutil::corpus_from_blocks({{{"ab", "", ""}}});
    const conllu::Corpus pred = model::predict(tiny, trained.model, aux, nullptr);
    REQUIRE(pred.sentences[0].tokens[0].lemma.has_value());
    CHECK_FALSE(pred.sentences[0].tokens[0].lemma->empty());
}
