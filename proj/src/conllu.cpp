#include "morphtag/conllu.hpp"

#include <fstream>
#include <sstream>

#include "morphtag/errors.hpp"
#include "morphtag/utf8.hpp"

namespace morphtag::conllu {

namespace {

bool is_integer(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

std::string strip(std::string_view s) {
    size_t b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return "";
    size_t e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

void Token::set_lemma(const std::string& new_lemma) {
    lemma = new_lemma;
    raw_columns[2] = new_lemma.empty() ? "_" : new_lemma;
}

void Token::set_bundle(const tagset::FeatureBundle& new_bundle) {
    bundle = new_bundle;
    raw_columns[5] = new_bundle.values.empty() ? "_" : new_bundle.canonical_text();
}

std::string Sentence::sent_id() const {
    for (const std::string& c : comments) {
        for (const char* key : {"# sent_id", "# sent-id"}) {
            if (c.rfind(key, 0) == 0) {
                std::string rest = c.substr(std::string(key).size());
                size_t eq = rest.find('=');
                if (eq != std::string::npos) return strip(rest.substr(eq + 1));
            }
        }
    }
    return "";
}

size_t Corpus::token_count() const {
    size_t n = 0;
    for (const Sentence& s : sentences) n += s.tokens.size();
    return n;
}

std::string language_of_treebank(const std::string& treebank_id) {
    size_t dash = treebank_id.find('-');
    return dash == std::string::npos ? treebank_id : treebank_id.substr(0, dash);
}

Corpus parse_conllu(std::string_view input, const std::string& treebank_id) {
    if (!utf8::valid(input)) throw DataError("input is not valid UTF-8");

    Corpus corpus;
    corpus.treebank_id = treebank_id;
    corpus.language_id = language_of_treebank(treebank_id);

    Sentence sent;
    bool in_sentence = false;
    int next_index = 1;
    size_t line_no = 0;

    auto flush = [&]() {
        if (in_sentence) {
            if (sent.tokens.empty() && sent.extras.empty() && !sent.comments.empty())
                throw DataError("line " + std::to_string(line_no) +
                                ": sentence has comments but no token lines");
            sent.provenance = treebank_id;
            corpus.sentences.push_back(std::move(sent));
            sent = Sentence();
            in_sentence = false;
            next_index = 1;
        }
    };

    size_t pos = 0;
    while (pos <= input.size()) {
        if (pos == input.size()) {
            flush();
            break;
        }
        size_t nl = input.find('\n', pos);
        std::string_view line =
            input.substr(pos, nl == std::string_view::npos ? input.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? input.size() : nl + 1;
        ++line_no;

        if (line.empty()) {
            flush();
            continue;
        }
        if (line[0] == '#') {
            if (in_sentence && (!sent.tokens.empty() || !sent.extras.empty()))
                throw DataError("line " + std::to_string(line_no) + ": comment inside sentence");
            sent.comments.emplace_back(line);
            in_sentence = true;
            continue;
        }

        // token line: exactly 10 tab-separated columns
        std::array<std::string, 10> cols;
        size_t ncols = 0, start = 0;
        for (size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == '\t') {
                if (ncols < 10) cols[ncols] = std::string(line.substr(start, i - start));
                ++ncols;
                start = i + 1;
            }
        }
        if (ncols != 10)
            throw DataError("line " + std::to_string(line_no) +
                            ": expected 10 tab-separated columns, got " + std::to_string(ncols));

        in_sentence = true;
        const std::string& id = cols[0];
        if (id.find('-') != std::string::npos || id.find('.') != std::string::npos) {
            // multiword range or empty node: preserved, never predicted
            sent.extras.push_back({sent.tokens.size(), std::string(line)});
            continue;
        }
        if (!is_integer(id))
            throw DataError("line " + std::to_string(line_no) + ": bad token id '" + id + "'");

        Token tok;
        try {
            tok.index = std::stoi(id);
        } catch (const std::out_of_range&) {
            throw DataError("line " + std::to_string(line_no) + ": token id '" + id +
                            "' out of range");
        }
        if (tok.index != next_index)
            throw DataError("line " + std::to_string(line_no) + ": token id " + id +
                            " out of order, expected " + std::to_string(next_index));
        ++next_index;

        tok.raw_columns = cols;
        tok.form = cols[1];
        if (tok.form.empty())
            throw DataError("line " + std::to_string(line_no) + ": empty form");
        // `_` means absent; a literal underscore lemma only occurs when the
        // form itself is `_`.
        if (cols[2] != "_" || tok.form == "_") tok.lemma = cols[2];
        if (cols[5] != "_") tok.bundle = tagset::parse_bundle(cols[5]);
        sent.tokens.push_back(std::move(tok));
    }

    return corpus;
}

Corpus parse_conllu_file(const std::string& path, const std::string& treebank_id) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string id = treebank_id;
    if (id.empty()) {
        size_t slash = path.find_last_of('/');
        std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
        size_t dot = base.find('.');
        id = dot == std::string::npos ? base : base.substr(0, dot);
    }
    return parse_conllu(buf.str(), id);
}

std::string serialize_conllu(const Corpus& corpus) {
    std::string out;
    for (const Sentence& sent : corpus.sentences) {
        for (const std::string& c : sent.comments) {
            out += c;
            out += '\n';
        }
        size_t extra = 0;
        for (size_t t = 0; t <= sent.tokens.size(); ++t) {
            while (extra < sent.extras.size() && sent.extras[extra].before_token == t) {
                out += sent.extras[extra].text;
                out += '\n';
                ++extra;
            }
            if (t == sent.tokens.size()) break;
            const Token& tok = sent.tokens[t];
            for (size_t c = 0; c < 10; ++c) {
                if (c) out += '\t';
                out += tok.raw_columns[c];
            }
            out += '\n';
        }
        out += '\n';
    }
    return out;
}

void write_conllu_file(const Corpus& corpus, const std::string& path,
                       const std::string& provenance_comment) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    if (!provenance_comment.empty()) out << "# " << provenance_comment << "\n";
    out << serialize_conllu(corpus);
    if (!out) throw DataError("write failed: " + path);
}

}  // namespace morphtag::conllu
