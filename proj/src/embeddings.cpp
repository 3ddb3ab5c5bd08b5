#include "morphtag/embeddings.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "morphtag/errors.hpp"
#include "morphtag/utf8.hpp"

namespace morphtag::embeddings {

namespace {

constexpr char kMagic[4] = {'M', 'F', 'V', '1'};

uint32_t read_u32(const std::string& buf, size_t& pos) {
    if (pos + 4 > buf.size()) throw DataError("sidecar truncated");
    uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(buf[pos + i]);
    pos += 4;
    return v;
}

void write_u32(std::ostream& out, uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(b, 4);
}

float read_f32(const std::string& buf, size_t& pos) {
    uint32_t bits = read_u32(buf, pos);
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
}

void write_f32(std::ostream& out, float f) {
    uint32_t bits;
    std::memcpy(&bits, &f, 4);
    write_u32(out, bits);
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

}  // namespace

void WordVectorTable::set_dimension(size_t dim) {
    dimension_ = dim;
    zero_.assign(dim, 0.0f);
}

void WordVectorTable::add(const std::string& word, std::vector<float> vec) {
    if (vec.size() != dimension_)
        throw DataError("word vector for '" + word + "' has dimension " +
                        std::to_string(vec.size()) + ", expected " + std::to_string(dimension_));
    vectors_.emplace(word, std::move(vec));
}

std::span<const float> WordVectorTable::lookup(const std::string& word) const {
    auto it = vectors_.find(word);
    if (it == vectors_.end()) {
        std::string lower = utf8::encode(utf8::lowered(utf8::decode(word)));
        if (lower != word) it = vectors_.find(lower);
    }
    if (it == vectors_.end()) return zero_;
    return it->second;
}

WordVectorTable load_word_vectors(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("word vector file is empty");
    std::istringstream header(line);
    long long count = -1, dim = -1;
    header >> count >> dim;
    if (count < 0 || dim <= 0)
        throw DataError("word vector file: bad header, expected 'count dim'");

    WordVectorTable table;
    table.set_dimension(static_cast<size_t>(dim));
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> parts = split_ws(line);
        if (parts.size() != static_cast<size_t>(dim) + 1)
            throw DataError("word vector line " + std::to_string(line_no) + ": expected " +
                            std::to_string(dim) + " values, got " +
                            std::to_string(parts.empty() ? 0 : parts.size() - 1));
        std::vector<float> vec(dim);
        for (long long i = 0; i < dim; ++i) {
            char* end = nullptr;
            vec[i] = std::strtof(parts[i + 1].c_str(), &end);
            if (end == parts[i + 1].c_str() || *end != '\0')
                throw DataError("word vector line " + std::to_string(line_no) +
                                ": bad float '" + parts[i + 1] + "'");
        }
        table.add(parts[0], std::move(vec));
    }
    return table;
}

WordVectorTable load_word_vectors_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open word vectors " + path);
    return load_word_vectors(in);
}

void ContextualSidecar::add(const std::string& sent_id, size_t token_count,
                            std::vector<float> data) {
    if (token_count == 0 || data.size() % token_count != 0)
        throw DataError("sidecar record for '" + sent_id + "' has inconsistent shape");
    size_t dim = data.size() / token_count;
    if (dimension_ == 0)
        dimension_ = dim;
    else if (dim != dimension_)
        throw DataError("sidecar record for '" + sent_id + "' has dimension " +
                        std::to_string(dim) + ", expected " + std::to_string(dimension_));
    if (!index_.emplace(sent_id, records_.size()).second)
        throw DataError("sidecar has duplicate sentence id '" + sent_id + "'");
    records_.push_back({sent_id, std::move(data)});
}

std::span<const float> ContextualSidecar::lookup(const std::string& sent_id) const {
    auto it = index_.find(sent_id);
    if (it == index_.end()) return {};
    return records_[it->second].data;
}

size_t ContextualSidecar::token_count(const std::string& sent_id) const {
    auto it = index_.find(sent_id);
    if (it == index_.end() || dimension_ == 0) return 0;
    return records_[it->second].data.size() / dimension_;
}

ContextualSidecar load_sidecar(std::istream& in) {
    std::ostringstream whole;
    whole << in.rdbuf();
    const std::string buf = whole.str();

    ContextualSidecar sidecar;
    if (buf.size() >= 4 && std::memcmp(buf.data(), kMagic, 4) == 0) {
        size_t pos = 4;
        while (pos < buf.size()) {
            uint32_t id_len = read_u32(buf, pos);
            if (pos + id_len > buf.size()) throw DataError("sidecar truncated");
            std::string id = buf.substr(pos, id_len);
            pos += id_len;
            uint32_t tokens = read_u32(buf, pos);
            uint32_t dim = read_u32(buf, pos);
            if (tokens == 0 || dim == 0)
                throw DataError("sidecar record for '" + id + "' has zero shape");
            std::vector<float> data(static_cast<size_t>(tokens) * dim);
            for (float& f : data) f = read_f32(buf, pos);
            sidecar.add(id, tokens, std::move(data));
        }
        return sidecar;
    }

    // TSV debug variant
    std::istringstream text(buf);
    std::string line;
    size_t line_no = 0;
    std::string cur_id;
    size_t cur_index = 0;
    std::vector<float> cur_data;
    size_t dim = 0;
    auto flush = [&]() {
        if (!cur_id.empty()) sidecar.add(cur_id, cur_index, std::move(cur_data));
        cur_data = {};
        cur_index = 0;
    };
    while (std::getline(text, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        size_t tab1 = line.find('\t');
        size_t tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
        if (tab2 == std::string::npos)
            throw DataError("sidecar TSV line " + std::to_string(line_no) +
                            ": expected sent_id<TAB>index<TAB>values");
        std::string id = line.substr(0, tab1);
        size_t index = std::stoul(line.substr(tab1 + 1, tab2 - tab1 - 1));
        std::vector<std::string> values = split_ws(line.substr(tab2 + 1));
        if (dim == 0) dim = values.size();
        if (values.size() != dim)
            throw DataError("sidecar TSV line " + std::to_string(line_no) +
                            ": dimension changed from " + std::to_string(dim) + " to " +
                            std::to_string(values.size()));
        if (id != cur_id) {
            flush();
            cur_id = id;
        }
        if (index != cur_index + 1)
            throw DataError("sidecar TSV line " + std::to_string(line_no) +
                            ": token index " + std::to_string(index) + " out of order");
        cur_index = index;
        for (const std::string& v : values) cur_data.push_back(std::strtof(v.c_str(), nullptr));
    }
    flush();
    return sidecar;
}

ContextualSidecar load_sidecar_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open sidecar " + path);
    return load_sidecar(in);
}

void write_sidecar(std::ostream& out, const ContextualSidecar& sidecar) {
    out.write(kMagic, 4);
    for (const ContextualSidecar::Record& rec : sidecar.records()) {
        write_u32(out, static_cast<uint32_t>(rec.sent_id.size()));
        out.write(rec.sent_id.data(), static_cast<std::streamsize>(rec.sent_id.size()));
        write_u32(out, static_cast<uint32_t>(rec.data.size() / sidecar.dimension()));
        write_u32(out, static_cast<uint32_t>(sidecar.dimension()));
        for (float f : rec.data) write_f32(out, f);
    }
}

void write_sidecar_file(const ContextualSidecar& sidecar, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write sidecar " + path);
    write_sidecar(out, sidecar);
    if (!out) throw DataError("sidecar write failed: " + path);
}

std::vector<double> average_last_layers(const std::vector<std::vector<double>>& layers,
                                        size_t k) {
    if (k == 0 || k > layers.size())
        throw DataError("average_last_layers: k=" + std::to_string(k) + " with " +
                        std::to_string(layers.size()) + " layers");
    const size_t dim = layers[0].size();
    for (const auto& layer : layers)
        if (layer.size() != dim) throw DataError("average_last_layers: unequal dimensions");
    std::vector<double> out(dim, 0.0);
    for (size_t l = layers.size() - k; l < layers.size(); ++l)
        for (size_t i = 0; i < dim; ++i) out[i] += layers[l][i];
    for (double& v : out) v /= static_cast<double>(k);
    return out;
}

std::vector<std::vector<double>> pool_subwords(const std::vector<std::vector<double>>& subwords,
                                               const std::vector<size_t>& alignment) {
    size_t total = 0;
    for (size_t c : alignment) {
        if (c == 0) throw DataError("pool_subwords: zero subword count");
        total += c;
    }
    if (total != subwords.size())
        throw DataError("pool_subwords: alignment covers " + std::to_string(total) +
                        " subwords, got " + std::to_string(subwords.size()));
    const size_t dim = subwords.empty() ? 0 : subwords[0].size();
    for (const auto& sw : subwords)
        if (sw.size() != dim) throw DataError("pool_subwords: unequal dimensions");

    std::vector<std::vector<double>> out;
    out.reserve(alignment.size());
    size_t pos = 0;
    for (size_t c : alignment) {
        std::vector<double> mean(dim, 0.0);
        for (size_t s = 0; s < c; ++s)
            for (size_t i = 0; i < dim; ++i) mean[i] += subwords[pos + s][i];
        for (double& v : mean) v /= static_cast<double>(c);
        out.push_back(std::move(mean));
        pos += c;
    }
    return out;
}

}  // namespace morphtag::embeddings
