#include "morphtag/lemma_rules.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "morphtag/conllu.hpp"
#include "morphtag/utf8.hpp"

namespace morphtag::lemma {

namespace {

constexpr char32_t kUpArrow = U'↑';    // ↑
constexpr char32_t kDownArrow = U'↓';  // ↓
constexpr char32_t kBrokenBar = U'¦';  // ¦ separates prefix/suffix ops
constexpr char32_t kCopyArrow = U'→';  // →

// Shortest copy/delete/insert program turning `src` into `tgt`. Copies are
// free, so the program maximizes them along the alignment; at equal cost the
// update order below fixes the canonical op order (deletes before inserts,
// e.g. are->be gives `--+b`).
std::vector<EditOp> min_edit_script(std::u32string_view src, std::u32string_view tgt) {
    const size_t n = src.size(), m = tgt.size();
    struct Cell {
        size_t cost = std::numeric_limits<size_t>::max();
        std::vector<EditOp> ops;
    };
    std::vector<std::vector<Cell>> a(n + 1, std::vector<Cell>(m + 1));
    a[0][0].cost = 0;
    for (size_t i = 0; i <= n; ++i) {
        for (size_t j = 0; j <= m; ++j) {
            if (i == 0 && j == 0) continue;
            Cell& cur = a[i][j];
            if (i && j && src[i - 1] == tgt[j - 1] && a[i - 1][j - 1].cost < cur.cost) {
                cur.cost = a[i - 1][j - 1].cost;
                cur.ops = a[i - 1][j - 1].ops;
                cur.ops.push_back({EditOp::Kind::Copy, 0});
            }
            if (i && a[i - 1][j].cost < cur.cost) {
                cur.cost = a[i - 1][j].cost + 1;
                cur.ops = a[i - 1][j].ops;
                cur.ops.push_back({EditOp::Kind::Delete, 0});
            }
            if (j && a[i][j - 1].cost < cur.cost) {
                cur.cost = a[i][j - 1].cost + 1;
                cur.ops = a[i][j - 1].ops;
                cur.ops.push_back({EditOp::Kind::Insert, tgt[j - 1]});
            }
        }
    }
    return std::move(a[n][m].ops);
}

CasingScript induce_casing(const std::u32string& lemma) {
    CasingScript script;
    int prev = -1;
    for (size_t i = 0; i < lemma.size(); ++i) {
        int cls = utf8::has_uppercase(lemma[i]) ? 1 : 0;
        if (cls != prev) {
            script.ops.push_back({cls ? CaseDir::Upper : CaseDir::Lower, i});
            prev = cls;
        }
    }
    if (script.ops.empty()) script.ops.push_back({CaseDir::Lower, 0});
    return script;
}

size_t consumed(const std::vector<EditOp>& ops) {
    size_t n = 0;
    for (const EditOp& op : ops)
        if (op.kind != EditOp::Kind::Insert) ++n;
    return n;
}

size_t produced(const std::vector<EditOp>& ops) {
    size_t n = 0;
    for (const EditOp& op : ops)
        if (op.kind != EditOp::Kind::Delete) ++n;
    return n;
}

void run_ops(const std::vector<EditOp>& ops, const std::u32string& form, size_t offset,
             std::u32string& out) {
    for (const EditOp& op : ops) {
        switch (op.kind) {
            case EditOp::Kind::Copy: out.push_back(form[offset++]); break;
            case EditOp::Kind::Delete: ++offset; break;
            case EditOp::Kind::Insert: out.push_back(op.ch); break;
        }
    }
}

void apply_casing(const CasingScript& casing, std::u32string& s) {
    const size_t n = casing.ops.size();
    for (size_t k = 0; k < n; ++k) {
        size_t begin = std::min(casing.ops[k].start, s.size());
        size_t end = k + 1 < n ? std::min(casing.ops[k + 1].start, s.size()) : s.size();
        for (size_t i = begin; i < end; ++i)
            s[i] = casing.ops[k].dir == CaseDir::Upper ? utf8::to_upper(s[i])
                                                       : utf8::to_lower(s[i]);
    }
}

void serialize_ops(const std::vector<EditOp>& ops, std::string& out) {
    for (const EditOp& op : ops) {
        switch (op.kind) {
            case EditOp::Kind::Copy: out += utf8::encode_one(kCopyArrow); break;
            case EditOp::Kind::Delete: out += '-'; break;
            case EditOp::Kind::Insert:
                out += '+';
                out += utf8::encode_one(op.ch);
                break;
        }
    }
}

[[noreturn]] void parse_fail(size_t pos, const std::string& what) {
    throw DataError("lemma rule parse error at position " + std::to_string(pos) + ": " + what);
}

}  // namespace

LemmaRule induce_rule(const std::string& form, const std::string& lemma) {
    if (form.empty() || lemma.empty())
        throw DataError("induce_rule: form and lemma must be non-empty");
    const std::u32string lemma_cp = utf8::decode(lemma);
    const std::u32string lf = utf8::lowered(utf8::decode(form));
    const std::u32string ll = utf8::lowered(lemma_cp);

    LemmaRule rule;
    rule.casing = induce_casing(lemma_cp);

    // longest common substring; ties prefer the leftmost occurrence in the
    // form, then in the lemma
    size_t best = 0, best_f = 0, best_l = 0;
    for (size_t f = 0; f < lf.size(); ++f) {
        for (size_t l = 0; l < ll.size(); ++l) {
            size_t k = 0;
            while (f + k < lf.size() && l + k < ll.size() && lf[f + k] == ll[l + k]) ++k;
            if (k > best) {
                best = k;
                best_f = f;
                best_l = l;
            }
        }
    }

    if (best == 0) {
        rule.edit.absolute = true;
        rule.edit.literal = ll;
    } else {
        rule.edit.prefix_ops = min_edit_script(lf.substr(0, best_f), ll.substr(0, best_l));
        rule.edit.suffix_ops = min_edit_script(lf.substr(best_f + best), ll.substr(best_l + best));
    }
    return rule;
}

bool is_applicable_codepoints(const LemmaRule& rule, size_t form_length) {
    if (form_length == 0) return false;
    if (rule.edit.absolute) return !rule.edit.literal.empty();
    const size_t take = consumed(rule.edit.prefix_ops) + consumed(rule.edit.suffix_ops);
    if (take > form_length) return false;
    const size_t made = produced(rule.edit.prefix_ops) + produced(rule.edit.suffix_ops) +
                        (form_length - take);
    return made > 0;
}

bool is_applicable(const LemmaRule& rule, const std::string& form) {
    return is_applicable_codepoints(rule, utf8::decode(form).size());
}

std::string apply_rule(const LemmaRule& rule, const std::string& form) {
    const std::u32string lf = utf8::lowered(utf8::decode(form));
    std::u32string out;
    if (rule.edit.absolute) {
        if (rule.edit.literal.empty()) throw ApplicabilityError("absolute rule with empty lemma");
        out = rule.edit.literal;
    } else {
        const size_t pre = consumed(rule.edit.prefix_ops);
        const size_t suf = consumed(rule.edit.suffix_ops);
        if (pre + suf > lf.size())
            throw ApplicabilityError("rule consumes " + std::to_string(pre + suf) +
                                     " characters, form has " + std::to_string(lf.size()));
        run_ops(rule.edit.prefix_ops, lf, 0, out);
        out.append(lf, pre, lf.size() - suf - pre);
        run_ops(rule.edit.suffix_ops, lf, lf.size() - suf, out);
        if (out.empty()) throw ApplicabilityError("rule produces an empty lemma");
    }
    apply_casing(rule.casing, out);
    return utf8::encode(out);
}

std::string serialize_rule(const LemmaRule& rule) {
    std::string out;
    for (size_t i = 0; i < rule.casing.ops.size(); ++i) {
        if (i) out += utf8::encode_one(kBrokenBar);
        out += utf8::encode_one(rule.casing.ops[i].dir == CaseDir::Upper ? kUpArrow : kDownArrow);
        out += std::to_string(rule.casing.ops[i].start);
    }
    out += ';';
    if (rule.edit.absolute) {
        out += 'a';
        out += utf8::encode(rule.edit.literal);
    } else {
        out += 'd';
        serialize_ops(rule.edit.prefix_ops, out);
        out += utf8::encode_one(kBrokenBar);
        serialize_ops(rule.edit.suffix_ops, out);
    }
    return out;
}

LemmaRule parse_rule(const std::string& text) {
    const std::u32string s = utf8::decode(text);
    LemmaRule rule;
    size_t i = 0;

    // casing script
    while (true) {
        if (i >= s.size()) parse_fail(i, "unterminated casing script");
        CasingOp op;
        if (s[i] == kUpArrow)
            op.dir = CaseDir::Upper;
        else if (s[i] == kDownArrow)
            op.dir = CaseDir::Lower;
        else
            parse_fail(i, "expected ↑ or ↓");
        ++i;
        if (i >= s.size() || s[i] < U'0' || s[i] > U'9') parse_fail(i, "expected index digits");
        size_t idx = 0;
        while (i < s.size() && s[i] >= U'0' && s[i] <= U'9') {
            idx = idx * 10 + (s[i] - U'0');
            ++i;
        }
        op.start = idx;
        if (rule.casing.ops.empty()) {
            if (op.start != 0) parse_fail(i, "first casing op must start at 0");
        } else if (op.start <= rule.casing.ops.back().start) {
            parse_fail(i, "casing op starts must strictly increase");
        }
        rule.casing.ops.push_back(op);
        if (i < s.size() && s[i] == kBrokenBar) {
            ++i;
            continue;
        }
        break;
    }
    if (i >= s.size() || s[i] != U';') parse_fail(i, "expected ';' after casing script");
    ++i;

    // edit script
    if (i >= s.size()) parse_fail(i, "missing edit script");
    if (s[i] == U'a') {
        ++i;
        if (i >= s.size()) parse_fail(i, "empty absolute replacement");
        rule.edit.absolute = true;
        rule.edit.literal = s.substr(i);
        return rule;
    }
    if (s[i] != U'd') parse_fail(i, "edit script must start with 'a' or 'd'");
    ++i;
    bool in_suffix = false;
    for (; i < s.size(); ++i) {
        if (s[i] == kBrokenBar) {
            if (in_suffix) parse_fail(i, "duplicate ¦ separator");
            in_suffix = true;
            continue;
        }
        EditOp op;
        if (s[i] == kCopyArrow) {
            op.kind = EditOp::Kind::Copy;
        } else if (s[i] == U'-') {
            op.kind = EditOp::Kind::Delete;
        } else if (s[i] == U'+') {
            if (i + 1 >= s.size()) parse_fail(i, "insert op missing character");
            op.kind = EditOp::Kind::Insert;
            op.ch = s[++i];
        } else {
            parse_fail(i, "unknown edit op");
        }
        (in_suffix ? rule.edit.suffix_ops : rule.edit.prefix_ops).push_back(op);
    }
    if (!in_suffix) parse_fail(i, "edit script missing ¦ separator");
    return rule;
}

const LemmaRule& identity_rule() {
    static const LemmaRule rule = parse_rule(kIdentityRuleText);
    return rule;
}

std::vector<std::pair<std::string, size_t>> rule_inventory(const conllu::Corpus& corpus) {
    std::map<std::string, size_t> counts;
    for (const conllu::Sentence& sent : corpus.sentences)
        for (const conllu::Token& tok : sent.tokens)
            if (tok.lemma && !tok.lemma->empty())
                ++counts[serialize_rule(induce_rule(tok.form, *tok.lemma))];
    std::vector<std::pair<std::string, size_t>> out(counts.begin(), counts.end());
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return out;
}

}  // namespace morphtag::lemma
