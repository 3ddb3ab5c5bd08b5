#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace morphtag::embeddings {

// Frozen pretrained word vectors in the usual text format: a `count dim`
// header, then one `word v1 ... vdim` line per word. Vectors are never
// updated by training.
class WordVectorTable {
public:
    size_t dimension() const { return dimension_; }
    size_t size() const { return vectors_.size(); }

    // Tries the exact form first, then the lowercased form. Out-of-vocabulary
    // words get the zero vector.
    std::span<const float> lookup(const std::string& word) const;
    bool contains(const std::string& word) const { return vectors_.count(word) > 0; }

    void set_dimension(size_t dim);
    // First occurrence wins for duplicate words.
    void add(const std::string& word, std::vector<float> vec);

private:
    size_t dimension_ = 0;
    std::unordered_map<std::string, std::vector<float>> vectors_;
    std::vector<float> zero_;
};

WordVectorTable load_word_vectors(std::istream& in);
WordVectorTable load_word_vectors_file(const std::string& path);

// Precomputed contextual vectors, one record per sentence keyed by sentence
// id. Binary container: magic `MFV1`, then per sentence a little-endian
// record of (u32 id length, id bytes, u32 token count, u32 dimension,
// token_count*dimension f32 row-major). A TSV debug variant
// (`sent_id<TAB>token_index<TAB>v1 v2 ...`, indices 1-based consecutive)
// is accepted as well and detected by the missing magic.
class ContextualSidecar {
public:
    struct Record {
        std::string sent_id;
        std::vector<float> data;  // row-major token_count x dimension
    };

    size_t dimension() const { return dimension_; }
    size_t size() const { return records_.size(); }
    const std::vector<Record>& records() const { return records_; }

    // Row-major token_count x dimension block, or an empty span when the
    // sentence id is unknown.
    std::span<const float> lookup(const std::string& sent_id) const;
    size_t token_count(const std::string& sent_id) const;

    void add(const std::string& sent_id, size_t token_count, std::vector<float> data);

private:
    size_t dimension_ = 0;
    std::vector<Record> records_;
    std::unordered_map<std::string, size_t> index_;
};

ContextualSidecar load_sidecar(std::istream& in);
ContextualSidecar load_sidecar_file(const std::string& path);
void write_sidecar(std::ostream& out, const ContextualSidecar& sidecar);
void write_sidecar_file(const ContextualSidecar& sidecar, const std::string& path);

// Arithmetic mean of the final k layer vectors. Throws DataError when
// k == 0, k exceeds the layer count, or dimensions disagree.
std::vector<double> average_last_layers(const std::vector<std::vector<double>>& layers,
                                        size_t k = 4);

// Means subword vectors into word vectors: word i averages the next
// alignment[i] subword vectors. The alignment must cover the subword list
// exactly with all counts >= 1.
std::vector<std::vector<double>> pool_subwords(const std::vector<std::vector<double>>& subwords,
                                               const std::vector<size_t>& alignment);

}  // namespace morphtag::embeddings
