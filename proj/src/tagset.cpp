#include "morphtag/tagset.hpp"

#include <fstream>
#include <sstream>

#include "morphtag/conllu.hpp"
#include "morphtag/errors.hpp"

#include "default_category_table.inc"

namespace morphtag::tagset {

std::string FeatureBundle::canonical_text() const {
    std::string out;
    for (size_t i = 0; i < values.size(); ++i) {
        if (i) out += ';';
        out += values[i];
    }
    return out;
}

FeatureBundle parse_bundle(const std::string& text) {
    if (text.empty()) throw DataError("empty feature bundle");
    FeatureBundle bundle;
    size_t start = 0;
    for (size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == ';') {
            if (i == start)
                throw DataError("feature bundle '" + text + "' has an empty component");
            bundle.values.push_back(text.substr(start, i - start));
            start = i + 1;
        }
    }
    return bundle;
}

CategoryTable CategoryTable::load(std::istream& in) {
    CategoryTable table;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        size_t tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size())
            throw DataError("category table line " + std::to_string(line_no) +
                            ": expected value<TAB>category");
        table.add(line.substr(0, tab), line.substr(tab + 1));
    }
    return table;
}

CategoryTable CategoryTable::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open category table " + path);
    return load(in);
}

const CategoryTable& CategoryTable::builtin() {
    static const CategoryTable table = [] {
        std::istringstream in(kDefaultCategoryTable);
        return load(in);
    }();
    return table;
}

void CategoryTable::add(const std::string& value, const std::string& category) {
    auto [it, inserted] = value_to_category_.emplace(value, category);
    if (!inserted)
        throw DataError("category table: value '" + value + "' mapped twice");
    if (seen_categories_.insert(category).second) categories_.push_back(category);
}

const std::string& CategoryTable::category_of(const std::string& value) const {
    static const std::string unk = kUnknownCategory;
    auto it = value_to_category_.find(value);
    return it == value_to_category_.end() ? unk : it->second;
}

bool CategoryTable::contains(const std::string& value) const {
    return value_to_category_.count(value) > 0;
}

std::map<std::string, std::string> decompose(const FeatureBundle& bundle,
                                             const CategoryTable& table,
                                             std::vector<std::string>* warnings) {
    std::map<std::string, std::string> out;
    for (const std::string& cat : table.categories()) out[cat] = CategoryTable::kNoneValue;
    for (const std::string& value : bundle.values) {
        const std::string& cat = table.category_of(value);
        auto it = out.find(cat);
        if (it == out.end()) {
            out[cat] = value;  // first unknown value opens the UNK category
        } else if (it->second == CategoryTable::kNoneValue) {
            it->second = value;
        } else if (warnings) {
            warnings->push_back("bundle '" + bundle.canonical_text() + "': values '" +
                                it->second + "' and '" + value + "' both in category " + cat +
                                "; keeping the first");
        }
    }
    return out;
}

TagInventory build_inventory(const conllu::Corpus& corpus, const CategoryTable& table) {
    TagInventory inv;
    for (const conllu::Sentence& sent : corpus.sentences) {
        for (const conllu::Token& tok : sent.tokens) {
            if (!tok.bundle) continue;
            const std::string canon = tok.bundle->canonical_text();
            if (inv.bundle_index.emplace(canon, inv.bundles.size()).second)
                inv.bundles.push_back(canon);
            for (const std::string& value : tok.bundle->values) {
                inv.feature_values.insert(value);
                inv.category_values[table.category_of(value)].insert(value);
            }
        }
    }
    for (auto& [cat, values] : inv.category_values) values.insert(CategoryTable::kNoneValue);
    return inv;
}

}  // namespace morphtag::tagset
