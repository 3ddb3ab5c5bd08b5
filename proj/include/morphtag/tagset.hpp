#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace morphtag::conllu {
struct Corpus;
}

namespace morphtag::tagset {

// A feature bundle as annotated in column 6: an ordered, `;`-joined list of
// feature values such as "N;NOM;PL". Identity is the exact canonical string,
// so value order matters.
struct FeatureBundle {
    std::vector<std::string> values;

    std::string canonical_text() const;
    bool operator==(const FeatureBundle&) const = default;
};

// Throws DataError on empty input or empty components.
FeatureBundle parse_bundle(const std::string& text);

// Maps feature values to their morphological category (dimension of
// meaning). Values missing from the table fall into the synthetic UNK
// category so that every bundle decomposes totally.
class CategoryTable {
public:
    static constexpr const char* kUnknownCategory = "UNK";
    static constexpr const char* kNoneValue = "None";

    // Text lines `value<TAB>category`; blank lines and `#` comments allowed.
    static CategoryTable load(std::istream& in);
    static CategoryTable load_file(const std::string& path);
    // The UniMorph schema table bundled with the tool.
    static const CategoryTable& builtin();

    void add(const std::string& value, const std::string& category);
    const std::string& category_of(const std::string& value) const;
    bool contains(const std::string& value) const;
    const std::vector<std::string>& categories() const { return categories_; }
    size_t size() const { return value_to_category_.size(); }

private:
    std::unordered_map<std::string, std::string> value_to_category_;
    std::vector<std::string> categories_;  // first-appearance order
    std::set<std::string> seen_categories_;
};

// Per-category view of a bundle. Every category of the table is present,
// mapping to its value or to "None"; the UNK category appears only when the
// bundle contains a value the table does not cover. When a bundle carries
// two values of the same category, the first one wins and a warning is
// appended to `warnings` if given.
std::map<std::string, std::string> decompose(const FeatureBundle& bundle,
                                             const CategoryTable& table,
                                             std::vector<std::string>* warnings = nullptr);

struct TagInventory {
    std::vector<std::string> bundles;  // distinct canonical texts, first seen order
    std::unordered_map<std::string, size_t> bundle_index;
    std::set<std::string> feature_values;
    // Used categories only; each value set includes "None".
    std::map<std::string, std::set<std::string>> category_values;

    size_t bundle_count() const { return bundles.size(); }
    size_t feature_count() const { return feature_values.size(); }
    size_t category_count() const { return category_values.size(); }
};

TagInventory build_inventory(const conllu::Corpus& corpus, const CategoryTable& table);

}  // namespace morphtag::tagset
